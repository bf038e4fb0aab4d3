"""
Relatórios do estudo: tabelas CSV e figuras SVG.

Cada figura é gerada em duas etapas: os números são gravados em CSV e o
SVG é desenhado a partir do CSV relido do disco, nunca do estado em
memória. O SVG é determinístico (sal de hash fixo, sem data nos
metadados, texto mantido como texto).

Artefatos:
- violino por dia de teste (``violin.{csv,svg}``)
- curvas médias de perda (``loss.{csv,svg}``)
- previsão média sobreposta ao observado (``forecast.{csv,svg}``)
- gráfico de MAE por configuração (``mae.{csv,svg}``) e ``comparison.csv``
- análise: matriz de correlação, correlogramas e série com a divisão
"""

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ..data.ingest import atomic_write_text  # noqa: E402
from ..data.preprocess import CorrelationMatrix  # noqa: E402
from ..errors import ReportError  # noqa: E402
from .trainer import ExperimentSummary, LossHistory, accuracy_pct  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SVG_RC = {
    'svg.hashsalt': 'quantum-weather',
    'svg.fonttype': 'none',
}
FIGSIZE = (8.0, 5.0)
QUANTILES = ('min', 'q1', 'median', 'q3', 'max')


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    atomic_write_text(path, frame.to_csv(index=False, lineterminator='\n'))
    return path


def read_csv(path: PathLike) -> pd.DataFrame:
    """Lê um CSV de relatório preservando os floats exatamente."""
    try:
        return pd.read_csv(path, float_precision='round_trip')
    except (OSError, ValueError) as e:
        raise ReportError(f"CSV de relatorio ilegivel {path}: {e}") from e


def _save_svg(fig, path: Path) -> Path:
    buffer = io.StringIO()
    with plt.rc_context(SVG_RC):
        fig.savefig(buffer, format='svg', metadata={'Date': None})
    plt.close(fig)
    atomic_write_text(path, buffer.getvalue())
    return path


def _title(texto: str, seed_base: Optional[int]) -> str:
    return texto if seed_base is None else f'{texto} (seed_base={seed_base})'


@dataclass(frozen=True)
class ViolinSeries:
    """
    Distribuição diária das previsões (unidades nativas) entre repetições.

    Attributes:
        runs: Matriz (k, horizonte) com uma linha por repetição
        actual: Valor observado por dia
    """

    runs: np.ndarray
    actual: np.ndarray

    def __post_init__(self):
        if self.runs.ndim != 2 or self.runs.shape[1] != len(self.actual):
            raise ReportError(
                f"Previsoes {self.runs.shape} incompativeis com {len(self.actual)} dias"
            )
        if self.runs.shape[1] < 1:
            raise ReportError("Horizonte vazio")

    @classmethod
    def from_summary(cls, summary: ExperimentSummary) -> 'ViolinSeries':
        return cls(
            runs=np.vstack([r.predictions_native for r in summary.reports]),
            actual=np.asarray(summary.reports[0].actual_native, dtype=np.float64),
        )

    @property
    def horizon(self) -> int:
        return self.runs.shape[1]

    def to_frame(self) -> pd.DataFrame:
        dados = {'day': np.arange(1, self.horizon + 1), 'actual': self.actual}
        for i, linha in enumerate(self.runs, start=1):
            dados[f'run_{i}'] = linha
        dados['min'] = self.runs.min(axis=0)
        dados['q1'] = np.quantile(self.runs, 0.25, axis=0)
        dados['median'] = np.quantile(self.runs, 0.5, axis=0)
        dados['q3'] = np.quantile(self.runs, 0.75, axis=0)
        dados['max'] = self.runs.max(axis=0)
        return pd.DataFrame(dados)


def emit_violin(
    summary: ExperimentSummary,
    out_dir: PathLike,
    seed_base: Optional[int] = None,
    unit: str = ''
) -> Tuple[Path, Path]:
    """Grava ``violin.csv`` e o SVG com um violino por dia de teste."""
    out_dir = Path(out_dir)
    csv_path = _write_csv(ViolinSeries.from_summary(summary).to_frame(), out_dir / 'violin.csv')
    svg_path = render_violin(csv_path, out_dir / 'violin.svg', summary.model_key, seed_base, unit)
    return csv_path, svg_path


def render_violin(
    csv_path: PathLike,
    svg_path: PathLike,
    label: str,
    seed_base: Optional[int] = None,
    unit: str = ''
) -> Path:
    """
    Desenha o SVG de violinos a partir do CSV.

    Com menos de 2 repetições, ou previsões idênticas num dia, o violino
    degenera para marcadores de ponto; a caixa de quartis é sempre
    desenhada.
    """
    frame = read_csv(csv_path)
    colunas_runs = [c for c in frame.columns if c.startswith('run_')]
    dias = frame['day'].to_numpy()

    fig, ax = plt.subplots(figsize=FIGSIZE)
    for _, linha in frame.iterrows():
        valores = linha[colunas_runs].to_numpy(dtype=np.float64)
        dia = linha['day']
        if len(valores) >= 2 and np.ptp(valores) > 0:
            partes = ax.violinplot(
                [valores], positions=[dia], widths=0.8, bw_method='silverman',
                showextrema=False,
            )
            for corpo in partes['bodies']:
                corpo.set_facecolor('tab:blue')
                corpo.set_alpha(0.35)
        else:
            ax.scatter(np.full(len(valores), dia), valores, s=10, color='tab:blue')
        ax.vlines(dia, linha['min'], linha['max'], color='tab:blue', linewidth=0.8)
        ax.vlines(dia, linha['q1'], linha['q3'], color='tab:blue', linewidth=4)
        ax.scatter([dia], [linha['median']], color='white', s=12, zorder=3)

    ax.plot(dias, frame['actual'], color='tab:red', marker='o', markersize=3,
            linewidth=1, label='Observado')
    ax.set_xticks(dias)
    ax.set_xlabel('Dia de teste')
    ax.set_ylabel(f'Previsao ({unit})' if unit else 'Previsao')
    ax.set_title(_title(f'Distribuicao das previsoes - {label}', seed_base))
    ax.legend(loc='best')
    fig.tight_layout()
    return _save_svg(fig, Path(svg_path))


def loss_curves_frame(histories: Sequence[LossHistory]) -> pd.DataFrame:
    """Curvas médias ``epoch, train_mean, val_mean``."""
    if not histories:
        raise ReportError("Nenhum historico de perdas")
    tamanhos = {len(h) for h in histories}
    if len(tamanhos) != 1:
        raise ReportError(f"Historicos com tamanhos diferentes: {sorted(tamanhos)}")
    n = tamanhos.pop()
    if n == 0:
        return pd.DataFrame({'epoch': [], 'train_mean': [], 'val_mean': []})
    return pd.DataFrame({
        'epoch': np.arange(1, n + 1),
        'train_mean': np.mean([h.train_loss for h in histories], axis=0),
        'val_mean': np.mean([h.val_loss for h in histories], axis=0),
    })


def emit_loss_curves(
    histories: Sequence[LossHistory],
    out_dir: PathLike,
    label: str = '',
    seed_base: Optional[int] = None
) -> Tuple[Path, Path]:
    """Grava ``loss.csv`` e o SVG das perdas médias de treino e validação."""
    out_dir = Path(out_dir)
    csv_path = _write_csv(loss_curves_frame(histories), out_dir / 'loss.csv')
    frame = read_csv(csv_path)

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(frame['epoch'], frame['train_mean'], color='tab:blue', label='Treino')
    ax.plot(frame['epoch'], frame['val_mean'], color='tab:red', label='Validacao')
    ax.set_xlabel('Epoca')
    ax.set_ylabel('MSE (padronizado)')
    ax.set_title(_title(f'Perda media - {label}', seed_base))
    ax.legend(loc='best')
    fig.tight_layout()
    return csv_path, _save_svg(fig, out_dir / 'loss.svg')


def emit_forecast(
    summary: ExperimentSummary,
    out_dir: PathLike,
    seed_base: Optional[int] = None,
    unit: str = ''
) -> Tuple[Path, Path]:
    """Grava ``forecast.csv`` (``day,date,actual,mean``) e a sobreposição em SVG."""
    out_dir = Path(out_dir)
    tabela = summary.daily[['day', 'date', 'actual', 'mean']]
    csv_path = _write_csv(tabela, out_dir / 'forecast.csv')
    frame = read_csv(csv_path)

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(frame['day'], frame['actual'], color='tab:red', marker='o', markersize=3, label='Observado')
    ax.plot(frame['day'], frame['mean'], color='tab:blue', marker='s', markersize=3, label='Previsao media')
    ax.set_xticks(frame['day'])
    ax.set_xticklabels(frame['date'], rotation=45, ha='right')
    ax.set_ylabel(unit)
    ax.set_title(_title(f'Previsao media - {summary.model_key}', seed_base))
    ax.legend(loc='best')
    fig.tight_layout()
    return csv_path, _save_svg(fig, out_dir / 'forecast.svg')


@dataclass(frozen=True)
class ComparisonRow:
    model: str
    experiment: Optional[int]
    depth: Optional[int]
    mae: float
    accuracy_pct: float


@dataclass(frozen=True)
class ComparisonTable:
    """Linhas (modelo, experimento, profundidade, MAE, acurácia)."""

    rows: Tuple[ComparisonRow, ...]

    def __post_init__(self):
        if not self.rows:
            raise ReportError("Tabela de comparacao vazia")
        for row in self.rows:
            if abs(row.accuracy_pct - accuracy_pct(row.mae)) > 1e-9:
                raise ReportError(
                    f"Acuracia {row.accuracy_pct} inconsistente com MAE {row.mae} em {row.model}"
                )

    @classmethod
    def from_summaries(cls, summaries: Iterable[ExperimentSummary], specs: dict) -> 'ComparisonTable':
        """
        Monta a tabela a partir dos sumários.

        Args:
            summaries: Um sumário por configuração
            specs: ``{model_key: (modelo, experimento, profundidade)}``
        """
        linhas = []
        for s in summaries:
            modelo, experimento, profundidade = specs[s.model_key]
            linhas.append(ComparisonRow(modelo, experimento, profundidade, s.mean_mae, s.mean_accuracy_pct))
        return cls(tuple(linhas))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'model': [r.model for r in self.rows],
            'experiment': pd.array([r.experiment for r in self.rows], dtype='Int64'),
            'depth': pd.array([r.depth for r in self.rows], dtype='Int64'),
            'mae': [r.mae for r in self.rows],
            'accuracy_pct': [r.accuracy_pct for r in self.rows],
        })

    def write(self, path: PathLike) -> Path:
        return _write_csv(self.to_frame(), Path(path))


def emit_mae_chart(
    table: ComparisonTable,
    out_dir: PathLike,
    seed_base: Optional[int] = None
) -> Tuple[Path, Path]:
    """
    Grava ``mae.csv`` e o gráfico de barras por experimento e profundidade.

    A rede recorrente, se presente, aparece como linha horizontal
    tracejada no seu MAE.
    """
    out_dir = Path(out_dir)
    csv_path = _write_csv(table.to_frame(), out_dir / 'mae.csv')
    frame = read_csv(csv_path)

    quanticos = frame[frame['model'] == 'qnn']
    classicos = frame[frame['model'] == 'rnn']
    experimentos = sorted(int(e) for e in quanticos['experiment'].dropna().unique())
    profundidades = sorted(int(d) for d in quanticos['depth'].dropna().unique())

    fig, ax = plt.subplots(figsize=FIGSIZE)
    largura = 0.8 / max(1, len(experimentos))
    cores = ['tab:blue', 'tab:orange', 'tab:purple', 'tab:brown']
    for k, exp in enumerate(experimentos):
        sub = quanticos[quanticos['experiment'] == exp].set_index('depth')
        posicoes = [i + (k - (len(experimentos) - 1) / 2) * largura for i in range(len(profundidades))]
        alturas = [float(sub.loc[d, 'mae']) if d in sub.index else np.nan for d in profundidades]
        ax.bar(posicoes, alturas, width=largura, color=cores[k % len(cores)], label=f'Experimento {exp}')
    for _, linha in classicos.iterrows():
        ax.axhline(linha['mae'], color='tab:green', linestyle='--', label=f"RNN (MAE {linha['mae']:.3f})")

    ax.set_xticks(range(len(profundidades)))
    ax.set_xticklabels([f'{d} camada(s)' for d in profundidades])
    ax.set_ylabel('MAE (padronizado)')
    ax.set_title(_title('MAE por configuracao', seed_base))
    ax.legend(loc='best')
    fig.tight_layout()
    return csv_path, _save_svg(fig, out_dir / 'mae.svg')


def emit_correlation_heatmap(
    matrix: CorrelationMatrix,
    out_dir: PathLike,
    labels: Optional[dict] = None
) -> Tuple[Path, Path]:
    """Grava ``correlation.csv`` (matriz quadrada) e o mapa de calor anotado."""
    out_dir = Path(out_dir)
    frame = matrix.to_frame().reset_index().rename(columns={'index': 'column'})
    csv_path = _write_csv(frame, out_dir / 'correlation.csv')
    lido = read_csv(csv_path).set_index('column')
    nomes = [(labels or {}).get(c, c) for c in lido.columns]
    valores = lido.to_numpy(dtype=np.float64)

    fig, ax = plt.subplots(figsize=(7.0, 6.0))
    imagem = ax.imshow(valores, cmap='coolwarm', vmin=-1, vmax=1)
    for i in range(len(nomes)):
        for j in range(len(nomes)):
            ax.text(j, i, f'{valores[i, j]:.2f}', ha='center', va='center', fontsize=7)
    ax.set_xticks(range(len(nomes)))
    ax.set_xticklabels(nomes, rotation=45, ha='right')
    ax.set_yticks(range(len(nomes)))
    ax.set_yticklabels(nomes)
    fig.colorbar(imagem, ax=ax, label='Pearson')
    ax.set_title('Matriz de correlacao de Pearson')
    fig.tight_layout()
    return csv_path, _save_svg(fig, out_dir / 'correlation.svg')


def emit_correlogram(
    correlogram: Sequence[Tuple[int, float]],
    out_dir: PathLike,
    name: str,
    chosen_lag: Optional[int] = None
) -> Tuple[Path, Path]:
    """Grava ``correlogram_<name>.csv`` (``lag,rho``) e o SVG com a defasagem escolhida."""
    out_dir = Path(out_dir)
    frame = pd.DataFrame({'lag': [k for k, _ in correlogram], 'rho': [r for _, r in correlogram]})
    csv_path = _write_csv(frame, out_dir / f'correlogram_{name}.csv')
    lido = read_csv(csv_path)

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.bar(lido['lag'], lido['rho'], color='tab:blue', width=0.6)
    if chosen_lag is not None:
        ax.axvline(chosen_lag, color='tab:red', linestyle='--', label=f'Defasagem escolhida: {chosen_lag}')
        ax.legend(loc='best')
    ax.axhline(0.0, color='black', linewidth=0.6)
    ax.set_xlabel('Defasagem (dias)')
    ax.set_ylabel('Correlacao')
    ax.set_title(f'Correlograma - {name}')
    fig.tight_layout()
    return csv_path, _save_svg(fig, out_dir / f'correlogram_{name}.svg')


def emit_split_series(
    dates: pd.DatetimeIndex,
    values: Sequence[float],
    n_train: int,
    out_dir: PathLike,
    name: str,
    unit: str = ''
) -> Tuple[Path, Path]:
    """Grava ``series_<name>.csv`` (``date,value,subset``) e a série com a divisão marcada."""
    out_dir = Path(out_dir)
    valores = np.asarray(values, dtype=np.float64)
    if len(valores) != len(dates) or not 0 < n_train < len(valores):
        raise ReportError(f"Serie de {len(valores)} pontos com corte invalido em {n_train}")
    frame = pd.DataFrame({
        'date': [d.strftime('%Y-%m-%d') for d in dates],
        'value': valores,
        'subset': ['train'] * n_train + ['test'] * (len(valores) - n_train),
    })
    csv_path = _write_csv(frame, out_dir / f'series_{name}.csv')
    lido = read_csv(csv_path)
    datas = pd.to_datetime(lido['date'], format='%Y-%m-%d')

    fig, ax = plt.subplots(figsize=FIGSIZE)
    for subset, cor, rotulo in (('train', 'tab:blue', 'Treino'), ('test', 'tab:red', 'Teste')):
        mascara = lido['subset'] == subset
        ax.plot(datas[mascara], lido.loc[mascara, 'value'], color=cor, linewidth=1, label=rotulo)
    ax.set_ylabel(unit)
    ax.set_title(f'Serie diaria - {name}')
    ax.legend(loc='best')
    fig.autofmt_xdate()
    fig.tight_layout()
    return csv_path, _save_svg(fig, out_dir / f'series_{name}.svg')


def write_experiment_report(
    summary: ExperimentSummary,
    out_dir: PathLike,
    seed_base: Optional[int] = None,
    unit: str = ''
) -> List[Path]:
    """Violino, perdas e previsão média de uma configuração."""
    out_dir = Path(out_dir)
    artefatos = list(emit_violin(summary, out_dir, seed_base, unit))
    artefatos += emit_loss_curves([r.history for r in summary.reports], out_dir, summary.model_key, seed_base)
    artefatos += emit_forecast(summary, out_dir, seed_base, unit)
    logger.info(f"Relatorio de {summary.model_key} gravado em {out_dir}")
    return artefatos
