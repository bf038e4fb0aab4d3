"""
Pré-processamento: seleção de variáveis, defasagens e padronização.

Transforma um DailyDataset bruto em matrizes prontas para os modelos:
- seleção por correlação de Pearson (|rho| >= limiar com o alvo);
- correlograma do alvo com suas defasagens e escolha da defasagem;
- criação da coluna defasada ``<coluna>_lag<k>``;
- padronização z-score ajustada apenas nas linhas de treino;
- divisão cronológica treino/teste pelo horizonte de previsão.

Todas as funções são puras sobre entradas imutáveis.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from ..errors import (
    CorrelationError,
    LagError,
    NoSignificantFeatureError,
    ScalerError,
    SplitError,
    ValidationError,
)
from .ingest import DailyDataset, DateRange

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.3
DEFAULT_MAX_LAG = 40

# Desvio padrão amostral (denominador n-1) em todo o pipeline
STD_DDOF = 1

Rows = Union[pd.DataFrame, np.ndarray]


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """
    Coeficiente de correlação de Pearson amostral.

    Pares em que qualquer lado é faltante (NaN) são descartados.

    Raises:
        CorrelationError: Tamanhos diferentes, menos de 2 pares válidos ou
            série constante (correlação indefinida, nunca 0 silencioso)
    """
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or xa.shape != ya.shape:
        raise CorrelationError(f"Series com formatos diferentes: {xa.shape} e {ya.shape}")

    validos = ~(np.isnan(xa) | np.isnan(ya))
    xs, ys = xa[validos], ya[validos]
    if len(xs) < 2:
        raise CorrelationError(f"Pares validos insuficientes: {len(xs)} (minimo 2)")
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        raise CorrelationError("Serie constante: correlacao indefinida")

    r, _ = stats.pearsonr(xs, ys)
    return float(r)


@dataclass(frozen=True)
class CorrelationMatrix:
    """Matriz de Pearson com a ordem das colunas preservada."""

    names: Tuple[str, ...]
    rho: np.ndarray

    def __post_init__(self):
        n = len(self.names)
        if self.rho.shape != (n, n):
            raise ValidationError(f"Matriz {self.rho.shape} incompativel com {n} nomes")

    def value(self, a: str, b: str) -> float:
        return float(self.rho[self.names.index(a), self.names.index(b)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rho, index=list(self.names), columns=list(self.names))


def correlation_matrix(data: DailyDataset, columns: Sequence[str]) -> CorrelationMatrix:
    """
    Calcula a matriz de correlação par a par na ordem de ``columns``.

    O triângulo inferior é espelhado do superior, logo a matriz é
    exatamente simétrica.
    """
    nomes = tuple(columns)
    series = {nome: data.column(nome).to_numpy() for nome in nomes}
    n = len(nomes)
    rho = np.eye(n, dtype=np.float64)

    for i in range(n):
        try:
            pearson(series[nomes[i]], series[nomes[i]])
        except CorrelationError as e:
            raise CorrelationError(f"Par ({nomes[i]}, {nomes[i]}): {e}") from e
        for j in range(i + 1, n):
            try:
                r = pearson(series[nomes[i]], series[nomes[j]])
            except CorrelationError as e:
                raise CorrelationError(f"Par ({nomes[i]}, {nomes[j]}): {e}") from e
            rho[i, j] = r
            rho[j, i] = r

    return CorrelationMatrix(nomes, rho)


def select_features(
    m: CorrelationMatrix,
    target: str,
    threshold: float = DEFAULT_THRESHOLD
) -> List[str]:
    """
    Mantém as colunas com |rho(coluna, alvo)| >= limiar, na ordem da matriz.

    Raises:
        NoSignificantFeatureError: Nenhuma coluna atinge o limiar
    """
    if target not in m.names:
        raise ValidationError(f"Alvo {target} ausente da matriz de correlacao")
    t = m.names.index(target)
    selecionadas = [
        nome for i, nome in enumerate(m.names)
        if i != t and abs(m.rho[t, i]) >= threshold
    ]
    if not selecionadas:
        raise NoSignificantFeatureError(
            f"Nenhuma variavel com |rho| >= {threshold} em relacao a {target}"
        )
    logger.info(
        f"Selecao por correlacao ({target}, limiar {threshold}): {', '.join(selecionadas)}"
    )
    return selecionadas


def lag_correlogram(
    series: Sequence[float],
    max_lag: int = DEFAULT_MAX_LAG
) -> List[Tuple[int, float]]:
    """Correlação da série com ela mesma defasada de k = 1..max_lag dias."""
    valores = np.asarray(series, dtype=np.float64)
    if max_lag < 1:
        raise LagError(f"max_lag deve ser >= 1: {max_lag}")
    if len(valores) <= max_lag + 1:
        raise LagError(
            f"Serie curta demais para o correlograma: {len(valores)} valores, "
            f"requer mais de {max_lag + 1}"
        )
    return [(k, pearson(valores[k:], valores[:-k])) for k in range(1, max_lag + 1)]


def choose_lag(
    correlogram: Sequence[Tuple[int, float]],
    override: Optional[int] = None
) -> int:
    """
    Escolhe a defasagem: o valor forçado, se houver; senão argmax de rho_k
    (empates ficam com o menor k).
    """
    if not correlogram:
        raise LagError("Correlograma vazio")
    max_lag = max(k for k, _ in correlogram)
    if override is not None:
        if not 1 <= int(override) <= max_lag:
            raise LagError(f"Defasagem forcada {override} fora de [1, {max_lag}]")
        return int(override)

    melhor_k, melhor_rho = correlogram[0]
    for k, rho in correlogram[1:]:
        if rho > melhor_rho:
            melhor_k, melhor_rho = k, rho
    return int(melhor_k)


def lag_column_name(column: str, lag_days: int) -> str:
    return f'{column}_lag{lag_days}'


def add_lag_feature(
    data: DailyDataset,
    column: str,
    lag_days: int,
    window: Optional[DateRange] = None
) -> DailyDataset:
    """
    Acrescenta ``<coluna>_lag<k>`` com o valor da data d - k dias.

    Args:
        data: Dataset com histórico anterior à janela de modelagem
        column: Coluna de origem
        lag_days: Defasagem k em dias (>= 0)
        window: Janela de modelagem; se informada, exige k dias de histórico

    Raises:
        LagError: Histórico insuficiente (informa quantos dias faltam)
    """
    if lag_days < 0:
        raise LagError(f"Defasagem negativa: {lag_days}")
    if window is not None:
        inicio_necessario = pd.Timestamp(window.start) - pd.Timedelta(days=lag_days)
        inicio_atual = pd.Timestamp(data.date_range.start)
        if inicio_atual > inicio_necessario:
            faltam = (inicio_atual - inicio_necessario).days
            raise LagError(
                f"Historico insuficiente para defasagem {lag_days}: "
                f"requer {faltam} dias extras antes de {data.date_range.start}"
            )

    origem = data.column(column)
    # Passo diário garantido pelo DailyDataset: deslocar linhas = deslocar dias
    defasada = origem.shift(lag_days)
    return data.with_column(lag_column_name(column, lag_days), defasada, data.units.get(column, ''))


@dataclass(frozen=True)
class Scaler:
    """
    Padronização z-score por coluna: x_hat = (x - mu) / sigma.

    ``mean`` e ``std`` estão nas unidades nativas de cada coluna.
    """

    columns: Tuple[str, ...]
    mean: Tuple[float, ...]
    std: Tuple[float, ...]
    ddof: int = STD_DDOF

    def __post_init__(self):
        if not (len(self.columns) == len(self.mean) == len(self.std)):
            raise ScalerError("Colunas, medias e desvios com tamanhos diferentes")
        for nome, s in zip(self.columns, self.std):
            if not np.isfinite(s) or s <= 0:
                raise ScalerError(f"Desvio padrao invalido para {nome}: {s}")

    def _params(self, rows: Rows) -> Tuple[Any, np.ndarray, np.ndarray]:
        if isinstance(rows, pd.DataFrame):
            faltantes = [c for c in self.columns if c not in rows.columns]
            if faltantes:
                raise ScalerError(f"Colunas ausentes para padronizar: {', '.join(faltantes)}")
            return rows[list(self.columns)], np.asarray(self.mean), np.asarray(self.std)
        valores = np.asarray(rows, dtype=np.float64)
        if valores.shape[-1] != len(self.columns):
            raise ScalerError(
                f"Esperadas {len(self.columns)} colunas, recebidas {valores.shape[-1]}"
            )
        return valores, np.asarray(self.mean), np.asarray(self.std)

    def apply(self, rows: Rows) -> Rows:
        valores, mu, sigma = self._params(rows)
        return (valores - mu) / sigma

    def invert(self, rows: Rows) -> Rows:
        valores, mu, sigma = self._params(rows)
        return valores * sigma + mu

    def invert_column(self, name: str, values: Sequence[float]) -> np.ndarray:
        i = self._index(name)
        return np.asarray(values, dtype=np.float64) * self.std[i] + self.mean[i]

    def _index(self, name: str) -> int:
        if name not in self.columns:
            raise ScalerError(f"Coluna sem estatisticas no scaler: {name}")
        return self.columns.index(name)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ddof': self.ddof,
            'columns': {
                c: {'mean': float(m), 'std': float(s)}
                for c, m, s in zip(self.columns, self.mean, self.std)
            },
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'Scaler':
        colunas = payload['columns']
        nomes = tuple(colunas.keys())
        return cls(
            columns=nomes,
            mean=tuple(float(colunas[c]['mean']) for c in nomes),
            std=tuple(float(colunas[c]['std']) for c in nomes),
            ddof=int(payload.get('ddof', STD_DDOF)),
        )


def fit_scaler(train_rows: pd.DataFrame, ddof: int = STD_DDOF) -> Scaler:
    """
    Ajusta média e desvio padrão em cada coluna das linhas de treino.

    Raises:
        ScalerError: Coluna constante ou com valores não finitos
    """
    colunas = tuple(str(c) for c in train_rows.columns)
    valores = train_rows.to_numpy(dtype=np.float64)
    if len(valores) <= ddof:
        raise ScalerError(f"Linhas insuficientes para ajustar o scaler: {len(valores)}")
    if not np.isfinite(valores).all():
        raise ScalerError("Valores nao finitos nas linhas de treino")

    media = valores.mean(axis=0)
    desvio = valores.std(axis=0, ddof=ddof)
    for nome, s in zip(colunas, desvio):
        if s == 0:
            raise ScalerError(f"Variancia zero na coluna de treino {nome}")
    return Scaler(colunas, tuple(float(m) for m in media), tuple(float(s) for s in desvio), ddof)


@dataclass(frozen=True)
class FeaturePlan:
    """
    Plano de variáveis do modelo.

    Attributes:
        target: Coluna alvo
        features: Colunas de entrada na ordem dos qubits (inclui a defasada)
        lag_days: Defasagem do alvo em dias
        threshold: Limiar |rho| usado na seleção
    """

    target: str
    features: Tuple[str, ...]
    lag_days: int
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        if not self.features:
            raise ValidationError("FeaturePlan sem variaveis de entrada")
        if self.target in self.features:
            raise ValidationError(f"Alvo {self.target} nao pode ser variavel de entrada")
        if self.lag_column not in self.features:
            raise ValidationError(f"Coluna defasada {self.lag_column} ausente das variaveis")
        if len(set(self.features)) != len(self.features):
            raise ValidationError("Variaveis de entrada duplicadas")

    @property
    def lag_column(self) -> str:
        return lag_column_name(self.target, self.lag_days)

    @property
    def climate_features(self) -> Tuple[str, ...]:
        return tuple(f for f in self.features if f != self.lag_column)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'target': self.target,
            'features': list(self.features),
            'lag_days': self.lag_days,
            'threshold': self.threshold,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'FeaturePlan':
        return cls(
            target=payload['target'],
            features=tuple(payload['features']),
            lag_days=int(payload['lag_days']),
            threshold=float(payload.get('threshold', DEFAULT_THRESHOLD)),
        )


def build_feature_plan(
    m: CorrelationMatrix,
    target: str,
    lag_days: int,
    threshold: float = DEFAULT_THRESHOLD
) -> FeaturePlan:
    """Variáveis selecionadas na ordem da matriz, seguidas do alvo defasado."""
    selecionadas = select_features(m, target, threshold)
    return FeaturePlan(
        target=target,
        features=tuple(selecionadas) + (lag_column_name(target, lag_days),),
        lag_days=lag_days,
        threshold=threshold,
    )


@dataclass(frozen=True)
class SplitDataset:
    """Matrizes padronizadas de treino e teste em ordem cronológica."""

    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    train_dates: pd.DatetimeIndex
    test_dates: pd.DatetimeIndex
    features: Tuple[str, ...]
    target: str
    scaler: Scaler = field(repr=False)

    @property
    def n_train(self) -> int:
        return len(self.y_train)

    @property
    def n_test(self) -> int:
        return len(self.y_test)

    @property
    def horizon(self) -> int:
        return self.n_test

    @property
    def train_fraction(self) -> float:
        return self.n_train / (self.n_train + self.n_test)

    @property
    def test_fraction(self) -> float:
        return self.n_test / (self.n_train + self.n_test)

    @property
    def X_all(self) -> np.ndarray:
        return np.vstack([self.X_train, self.X_test])

    @property
    def y_all(self) -> np.ndarray:
        return np.concatenate([self.y_train, self.y_test])

    def to_native(self, values: Sequence[float]) -> np.ndarray:
        """Converte valores padronizados do alvo para unidades nativas."""
        return self.scaler.invert_column(self.target, values)


def chronological_split(
    data: DailyDataset,
    plan: FeaturePlan,
    horizon: int,
    window: Optional[DateRange] = None
) -> SplitDataset:
    """
    Separa as últimas ``horizon`` linhas como teste e padroniza.

    O scaler é ajustado apenas nas linhas de treino e aplicado aos dois
    conjuntos.

    Raises:
        SplitError: Linha com valor faltante na janela ou horizonte inválido
    """
    if window is not None:
        data = data.slice(window)
    colunas = list(plan.features) + [plan.target]
    frame = data.select(colunas).to_frame()

    faltantes = frame.isna().any(axis=1)
    if faltantes.any():
        primeira = frame.index[faltantes.to_numpy()][0].date()
        raise SplitError(
            f"Qualidade de dados: {int(faltantes.sum())} linhas com valores faltantes "
            f"na janela de modelagem (primeira em {primeira})"
        )

    n = len(frame)
    if horizon < 1 or horizon >= n:
        raise SplitError(f"Horizonte {horizon} invalido para {n} linhas")

    treino = frame.iloc[:n - horizon]
    teste = frame.iloc[n - horizon:]
    scaler = fit_scaler(treino[colunas])
    treino_std = scaler.apply(treino[colunas])
    teste_std = scaler.apply(teste[colunas])

    split = SplitDataset(
        X_train=treino_std[list(plan.features)].to_numpy(dtype=np.float64),
        y_train=treino_std[plan.target].to_numpy(dtype=np.float64),
        X_test=teste_std[list(plan.features)].to_numpy(dtype=np.float64),
        y_test=teste_std[plan.target].to_numpy(dtype=np.float64),
        train_dates=treino.index.copy(),
        test_dates=teste.index.copy(),
        features=tuple(plan.features),
        target=plan.target,
        scaler=scaler,
    )
    logger.info(
        f"Divisao cronologica: treino={split.n_train} ({split.train_fraction:.1%}), "
        f"teste={split.n_test} ({split.test_fraction:.1%})"
    )
    return split


def describe(
    data: DailyDataset,
    columns: Optional[Sequence[str]] = None,
    path: Optional[Union[str, Path]] = None,
    ddof: int = STD_DDOF
) -> pd.DataFrame:
    """
    Estatísticas descritivas por coluna (``column,mean,std,min,max``).

    Se ``path`` for informado, grava o CSV.
    """
    colunas = list(columns) if columns is not None else list(data.columns)
    frame = data.select(colunas).to_frame()
    tabela = pd.DataFrame({
        'column': colunas,
        'mean': [float(frame[c].mean()) for c in colunas],
        'std': [float(frame[c].std(ddof=ddof)) for c in colunas],
        'min': [float(frame[c].min()) for c in colunas],
        'max': [float(frame[c].max()) for c in colunas],
    })
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        tabela.to_csv(path, index=False, lineterminator='\n')
    return tabela


def compare_reference(
    table: pd.DataFrame,
    reference: Mapping[str, Mapping[str, float]],
    tolerance: float = 0.05
) -> List[Dict[str, Any]]:
    """
    Compara estatísticas observadas com valores de referência.

    Returns:
        List[Dict]: Uma entrada por estatística fora da tolerância
            (``column, stat, expected, observed, delta``)
    """
    desvios = []
    por_coluna = table.set_index('column')
    for coluna, esperados in reference.items():
        if coluna not in por_coluna.index:
            continue
        for estatistica, esperado in esperados.items():
            observado = float(por_coluna.loc[coluna, estatistica])
            delta = observado - float(esperado)
            if abs(delta) > tolerance:
                desvios.append({
                    'column': coluna,
                    'stat': estatistica,
                    'expected': float(esperado),
                    'observed': observado,
                    'delta': delta,
                })
    return desvios
