"""
Pipeline do estudo de previsão: fetch -> analyze -> train -> report.

Este módulo é o ponto de entrada de linha de comando. Cada etapa lê um
arquivo de experimento YAML (configs/*.yaml), grava seus artefatos em
``--out`` e é idempotente: entradas inalteradas (hash de conteúdo) não
disparam novo processamento.

Códigos de saída:
    0 sucesso, 2 configuração, 3 dados, 4 treinamento, 5 relatório

Exemplo:
    python -m quantum_weather all --config configs/temperature.yaml --jobs 8
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from joblib import cpu_count

from ..config import Settings, setup_logging
from ..data import ingest, preprocess
from ..data.ingest import DailyDataset, DateRange, GeoPoint, PowerClient
from ..data.preprocess import CorrelationMatrix, FeaturePlan, SplitDataset
from ..errors import ConfigError, DataError, QuantumWeatherError, ReportError, TrainingError
from ..models.qnn import AnsatzSpec, Entangler, Readout
from ..services import report
from ..services.manifest import ExperimentStore, StageRegistry, content_hash, dataset_hash
from ..services.trainer import (
    DEFAULT_SEED_BASE,
    ExperimentSummary,
    QnnModel,
    RnnModel,
    TrainConfig,
    run_experiment,
    summarize,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

BANNER = "=" * 70


@dataclass(frozen=True)
class ModelMatrix:
    """Configurações de modelo do experimento (entrelaçamentos x profundidades + RNN)."""

    entanglers: Tuple[Entangler, ...] = (Entangler.BASIC, Entangler.STRONG)
    depths: Tuple[int, ...] = (1, 3, 5)
    include_rnn: bool = True
    superposition: bool = False
    readout: Readout = Readout.FIRST
    angle_scale: float = 1.0

    def __post_init__(self):
        if not (self.entanglers and self.depths) and not self.include_rnn:
            raise ConfigError("Matriz de modelos vazia")
        if any(d < 1 for d in self.depths):
            raise ConfigError(f"Profundidades devem ser >= 1: {list(self.depths)}")

    def ansatze(self, n_qubits: int) -> List[AnsatzSpec]:
        return [
            AnsatzSpec(n_qubits, d, e, self.superposition, self.readout, self.angle_scale)
            for e in self.entanglers for d in self.depths
        ]


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Arquivo de experimento validado.

    Attributes:
        name: Nome do estudo (ex.: temperature)
        target: Grandeza alvo no catálogo de parâmetros
        candidates: Grandezas avaliadas na seleção por correlação
        point: Ponto geográfico
        window: Janela nominal de modelagem
        horizon: Dias previstos (conjunto de teste)
        max_lag: Maior defasagem do correlograma
        lag_override: Defasagem forçada (None = argmax do correlograma)
        threshold: Limiar |rho| de seleção
        expected_features: Número de variáveis climáticas esperado (apenas sinalização)
        models: Matriz de modelos
        qnn_train: Hiperparâmetros da QNN
        rnn_train: Hiperparâmetros da RNN
        rnn_window: Janela da RNN em dias (None = defasagem escolhida)
        rnn_hidden: Neurônios ocultos da RNN
        reference: Estatísticas de referência por grandeza para comparação
        out_dir: Diretório de saída
    """

    name: str
    target: str
    candidates: Tuple[str, ...]
    point: GeoPoint = field(default_factory=GeoPoint)
    window: DateRange = field(default_factory=lambda: DateRange(date(2023, 5, 1), date(2024, 4, 30)))
    horizon: int = 14
    max_lag: int = preprocess.DEFAULT_MAX_LAG
    lag_override: Optional[int] = None
    threshold: float = preprocess.DEFAULT_THRESHOLD
    expected_features: Optional[int] = None
    models: ModelMatrix = field(default_factory=ModelMatrix)
    qnn_train: TrainConfig = field(default_factory=TrainConfig.qnn_defaults)
    rnn_train: TrainConfig = field(default_factory=TrainConfig.rnn_defaults)
    rnn_window: Optional[int] = None
    rnn_hidden: int = 256
    reference: Mapping[str, Mapping[str, float]] = field(default_factory=dict)
    out_dir: Path = Path('out')

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigError(f"horizon deve ser >= 1: {self.horizon}")
        if self.max_lag < 1:
            raise ConfigError(f"max_lag deve ser >= 1: {self.max_lag}")
        if self.lag_override is not None and not 1 <= self.lag_override <= self.max_lag:
            raise ConfigError(f"lag_override {self.lag_override} fora de [1, {self.max_lag}]")
        if not 0 < self.threshold <= 1:
            raise ConfigError(f"threshold deve estar em (0, 1]: {self.threshold}")
        if self.target in self.candidates:
            raise ConfigError(f"O alvo {self.target} nao pode estar entre os candidatos")
        if not self.candidates:
            raise ConfigError("Lista de candidatos vazia")
        if self.rnn_window is not None and self.rnn_window < 1:
            raise ConfigError(f"rnn.window deve ser >= 1: {self.rnn_window}")

    @property
    def fetch_range(self) -> DateRange:
        """Janela estendida para que toda defasagem até max_lag esteja definida."""
        return ingest.extend_for_lag(self.window, max(self.max_lag, self.lag_override or 0))

    def with_overrides(
        self,
        seed_base: Optional[int] = None,
        out_dir: Optional[PathLike] = None
    ) -> 'ExperimentConfig':
        cfg = self
        if seed_base is not None:
            cfg = replace(
                cfg,
                qnn_train=replace(cfg.qnn_train, seed_base=seed_base),
                rnn_train=replace(cfg.rnn_train, seed_base=seed_base),
            )
        if out_dir is not None:
            cfg = replace(cfg, out_dir=Path(out_dir))
        return cfg

    @property
    def seed_base(self) -> int:
        return self.qnn_train.seed_base

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'target': self.target,
            'candidates': list(self.candidates),
            'geo': {'lat': self.point.lat_deg, 'lon': self.point.lon_deg},
            'window': {'start': self.window.start.isoformat(), 'end': self.window.end.isoformat()},
            'horizon': self.horizon,
            'lag': {'max_lag': self.max_lag, 'override': self.lag_override},
            'threshold': self.threshold,
            'expected_features': self.expected_features,
            'models': {
                'entanglers': [e.value for e in self.models.entanglers],
                'depths': list(self.models.depths),
                'include_rnn': self.models.include_rnn,
                'superposition': self.models.superposition,
                'readout': self.models.readout.value,
                'angle_scale': self.models.angle_scale,
            },
            'train': {
                'qnn': self.qnn_train.to_dict(),
                'rnn': {**self.rnn_train.to_dict(), 'window': self.rnn_window, 'hidden_size': self.rnn_hidden},
            },
            'reference': {k: dict(v) for k, v in self.reference.items()},
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'ExperimentConfig':
        """Valida o dicionário lido do YAML."""
        if not isinstance(payload, Mapping):
            raise ConfigError("Arquivo de experimento deve ser um mapeamento YAML")
        conhecidas = {
            'name', 'target', 'candidates', 'geo', 'window', 'horizon', 'lag', 'threshold',
            'expected_features', 'models', 'train', 'reference', 'out',
        }
        desconhecidas = sorted(set(payload) - conhecidas)
        if desconhecidas:
            raise ConfigError(f"Chaves desconhecidas no experimento: {', '.join(desconhecidas)}")
        for obrigatoria in ('name', 'target', 'candidates'):
            if obrigatoria not in payload:
                raise ConfigError(f"Chave obrigatoria ausente: {obrigatoria}")

        try:
            geo = payload.get('geo') or {}
            janela = payload.get('window') or {}
            lag = payload.get('lag') or {}
            modelos = payload.get('models') or {}
            treino = payload.get('train') or {}
            rnn_cfg = dict(treino.get('rnn') or {})
            rnn_window = rnn_cfg.pop('window', None)
            rnn_hidden = int(rnn_cfg.pop('hidden_size', 256))
            out = Path(payload.get('out', 'out'))

            return cls(
                name=str(payload['name']),
                target=str(payload['target']),
                candidates=tuple(str(c) for c in payload['candidates']),
                point=GeoPoint(float(geo.get('lat', -12.15)), float(geo.get('lon', -44.99))),
                window=DateRange.parse(
                    str(janela.get('start', '2023-05-01')), str(janela.get('end', '2024-04-30'))
                ),
                horizon=int(payload.get('horizon', 14)),
                max_lag=int(lag.get('max_lag', preprocess.DEFAULT_MAX_LAG)),
                lag_override=None if lag.get('override') is None else int(lag['override']),
                threshold=float(payload.get('threshold', preprocess.DEFAULT_THRESHOLD)),
                expected_features=(
                    None if payload.get('expected_features') is None else int(payload['expected_features'])
                ),
                models=ModelMatrix(
                    entanglers=tuple(Entangler(e) for e in modelos.get('entanglers', ['basic', 'strong'])),
                    depths=tuple(int(d) for d in modelos.get('depths', [1, 3, 5])),
                    include_rnn=bool(modelos.get('include_rnn', True)),
                    superposition=bool(modelos.get('superposition', False)),
                    readout=Readout(modelos.get('readout', 'first')),
                    angle_scale=float(modelos.get('angle_scale', 1.0)),
                ),
                qnn_train=TrainConfig.qnn_defaults(**(treino.get('qnn') or {})),
                rnn_train=TrainConfig.rnn_defaults(**rnn_cfg),
                rnn_window=None if rnn_window is None else int(rnn_window),
                rnn_hidden=rnn_hidden,
                reference={str(k): dict(v) for k, v in (payload.get('reference') or {}).items()},
                out_dir=out,
            )
        except ConfigError:
            raise
        except (DataError, TypeError, ValueError, KeyError) as e:
            raise ConfigError(f"Experimento invalido: {e}") from e

    @classmethod
    def from_yaml(cls, path: PathLike) -> 'ExperimentConfig':
        caminho = Path(path)
        try:
            with open(caminho, encoding='utf-8') as f:
                payload = yaml.safe_load(f)
        except OSError as e:
            raise ConfigError(f"Nao foi possivel ler {caminho}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"YAML invalido em {caminho}: {e}") from e
        return cls.from_dict(payload)


@dataclass
class Preparation:
    """Resultado da análise reutilizado por treino e relatório."""

    data: DailyDataset
    target_code: str
    candidate_codes: List[str]
    matrix: CorrelationMatrix
    correlogram: List[Tuple[int, float]]
    lag: int
    plan: FeaturePlan
    split: SplitDataset
    data_hash: str
    feature_discrepancy: Optional[Dict[str, int]] = None


class Pipeline:
    """
    Orquestra as etapas do estudo para um arquivo de experimento.

    Exemplo de uso:
        >>> cfg = ExperimentConfig.from_yaml('configs/temperature.yaml')
        >>> Pipeline(cfg, offline=True, jobs=4).cmd_all()
    """

    def __init__(
        self,
        config: ExperimentConfig,
        offline: bool = False,
        jobs: Optional[int] = None,
        settings: Optional[Settings] = None,
        client: Optional[PowerClient] = None,
        catalog: Optional[Mapping[str, Mapping[str, str]]] = None
    ):
        self.config = config
        self.offline = offline
        self.jobs = jobs if jobs is not None else cpu_count()
        self.settings = settings or Settings.from_env()
        self.client = client or PowerClient(settings=self.settings, offline=offline)
        self.catalog = dict(catalog) if catalog is not None else ingest.load_parameter_catalog()
        self.out_dir = Path(config.out_dir)
        self.store = ExperimentStore(self.out_dir)
        self.stages = StageRegistry(self.out_dir)

    # Utilitários

    def _codes(self) -> Tuple[str, List[str]]:
        try:
            alvo = ingest.resolve_codes([self.config.target], self.catalog)[0]
            candidatos = ingest.resolve_codes(self.config.candidates, self.catalog)
        except DataError as e:
            raise ConfigError(f"Grandeza desconhecida no experimento: {e}") from e
        candidatos = [c for i, c in enumerate(candidatos) if c != alvo and c not in candidatos[:i]]
        return alvo, candidatos

    def _unit(self, code: str) -> str:
        for entrada in self.catalog.values():
            if entrada.get('code') == code:
                return str(entrada.get('unit', ''))
        return ''

    def _labels(self) -> Dict[str, str]:
        return {str(v['code']): nome for nome, v in self.catalog.items()}

    def _load(self) -> DailyDataset:
        alvo, candidatos = self._codes()
        codigos = [alvo] + candidatos
        if not self.client.has_cached(self.config.point, self.config.fetch_range, codigos):
            raise DataError("Cache ausente para o experimento; execute a etapa fetch antes")
        return self.client.fetch_daily(self.config.point, self.config.fetch_range, codigos)

    def model_keys(self) -> Dict[str, Tuple[str, Optional[int], Optional[int]]]:
        """``{model_key: (modelo, experimento, profundidade)}`` na ordem da matriz."""
        chaves = {}
        for spec in self.config.models.ansatze(1):
            chaves[spec.key] = ('qnn', spec.entangler.experiment, spec.depth)
        if self.config.models.include_rnn:
            chaves['rnn'] = ('rnn', None, None)
        return chaves

    def prepare(self) -> Preparation:
        """Correlação, defasagem, plano de variáveis e divisão treino/teste."""
        cfg = self.config
        dados = self._load()
        alvo, candidatos = self._codes()
        janela = dados.slice(cfg.window)

        matriz = preprocess.correlation_matrix(janela, [alvo] + candidatos)
        correlograma = preprocess.lag_correlogram(janela.column(alvo).to_numpy(), cfg.max_lag)
        lag = preprocess.choose_lag(correlograma, cfg.lag_override)
        plano = preprocess.build_feature_plan(matriz, alvo, lag, cfg.threshold)

        com_lag = preprocess.add_lag_feature(dados, alvo, lag, cfg.window)
        split = preprocess.chronological_split(com_lag, plano, cfg.horizon, cfg.window)

        discrepancia = None
        n_clima = len(plano.climate_features)
        if cfg.expected_features is not None and n_clima != cfg.expected_features:
            discrepancia = {'expected': cfg.expected_features, 'selected': n_clima}
            logger.warning(
                f"Numero de variaveis climaticas selecionadas ({n_clima}) difere do "
                f"esperado ({cfg.expected_features}); o experimento segue com a selecao recalculada"
            )

        return Preparation(
            data=dados,
            target_code=alvo,
            candidate_codes=candidatos,
            matrix=matriz,
            correlogram=correlograma,
            lag=lag,
            plan=plano,
            split=split,
            data_hash=dataset_hash(dados),
            feature_discrepancy=discrepancia,
        )

    # Etapas

    def cmd_fetch(self) -> DailyDataset:
        """Popula o cache com a janela estendida pela defasagem máxima."""
        logger.info(BANNER)
        logger.info(f"ETAPA 1: Coletando dados ({self.config.name})")
        logger.info(BANNER)
        alvo, candidatos = self._codes()
        intervalo = self.config.fetch_range
        dados = self.client.fetch_daily(self.config.point, intervalo, [alvo] + candidatos)
        logger.info(
            f"Dataset disponivel: {len(dados)} dias ({intervalo.start}..{intervalo.end}), "
            f"{len(dados.columns)} parametros"
        )
        return dados

    def cmd_analyze(self) -> Dict[str, Any]:
        """Estatísticas descritivas, matriz de correlação, correlograma e divisão."""
        logger.info(BANNER)
        logger.info(f"ETAPA 2: Analise exploratoria ({self.config.name})")
        logger.info(BANNER)
        prep = self.prepare()
        pasta = self.out_dir / 'analysis'
        entrada = content_hash({'config': self.config.to_dict(), 'dataset': prep.data_hash})
        resumo_path = pasta / 'analysis.json'
        if self.stages.is_current('analyze', entrada) and resumo_path.exists():
            logger.info("Analise sem alteracoes nas entradas; etapa ignorada")
            return self._read_json(resumo_path)

        self.stages.invalidate('analyze')
        janela = prep.data.slice(self.config.window)
        tabela = preprocess.describe(janela, path=pasta / 'describe.csv')
        referencia = {
            ingest.resolve_codes([nome], self.catalog)[0]: valores
            for nome, valores in self.config.reference.items()
        }
        desvios = preprocess.compare_reference(tabela, referencia)
        for d in desvios:
            logger.warning(
                f"Estatistica {d['stat']} de {d['column']} difere da referencia: "
                f"esperado {d['expected']}, observado {d['observed']:.4f} (delta {d['delta']:+.4f})"
            )

        rotulos = self._labels()
        report.emit_correlation_heatmap(prep.matrix, pasta, rotulos)
        report.emit_correlogram(prep.correlogram, pasta, rotulos.get(prep.target_code, prep.target_code), prep.lag)
        valores = np.concatenate([prep.split.to_native(prep.split.y_train), prep.split.to_native(prep.split.y_test)])
        datas = prep.split.train_dates.append(prep.split.test_dates)
        report.emit_split_series(
            datas, valores, prep.split.n_train, pasta,
            rotulos.get(prep.target_code, prep.target_code), self._unit(prep.target_code),
        )

        resumo = {
            'seed_base': self.config.seed_base,
            'dataset_hash': prep.data_hash,
            'lag_days': prep.lag,
            'feature_plan': prep.plan.to_dict(),
            'scaler': prep.split.scaler.to_dict(),
            'n_train': prep.split.n_train,
            'n_test': prep.split.n_test,
            'train_fraction': prep.split.train_fraction,
            'test_fraction': prep.split.test_fraction,
            'feature_discrepancy': prep.feature_discrepancy,
            'reference_deltas': desvios,
        }
        ingest.atomic_write_text(resumo_path, self._json(resumo))
        self.stages.mark('analyze', entrada)
        logger.info(
            f"Plano: alvo={prep.plan.target}, defasagem={prep.lag}, "
            f"variaveis={', '.join(prep.plan.features)}; treino={prep.split.n_train} teste={prep.split.n_test}"
        )
        return resumo

    def cmd_train(self) -> Dict[str, ExperimentSummary]:
        """Treina todas as configurações; configurações inalteradas são puladas."""
        logger.info(BANNER)
        logger.info(f"ETAPA 3: Treinamento ({self.config.name}), seed_base={self.config.seed_base}")
        logger.info(BANNER)
        prep = self.prepare()
        resultados: Dict[str, ExperimentSummary] = {}
        falhas: List[str] = []

        for modelo, train_cfg in self._models(prep):
            descricao = modelo.describe()
            entrada = content_hash({
                'dataset': prep.data_hash,
                'plan': prep.plan.to_dict(),
                'scaler': prep.split.scaler.to_dict(),
                'model': descricao,
                'train': train_cfg.to_dict(),
                'horizon': self.config.horizon,
            })
            manifesto = self.store.read_manifest(modelo.key)
            if manifesto and manifesto.get('input_hash') == entrada and manifesto.get('status') == 'completed':
                logger.info(f"{modelo.key}: entradas inalteradas; treinamento ignorado")
                continue

            summary = run_experiment(modelo, prep.split, train_cfg, self.jobs)
            for r in summary.reports:
                self.store.write_run(r)
            self.store.write_manifest(modelo.key, {
                'input_hash': entrada,
                'status': 'failed' if summary.failed else 'completed',
                'config': self.config.to_dict(),
                'dataset_hash': prep.data_hash,
                'feature_plan': prep.plan.to_dict(),
                'scaler': prep.split.scaler.to_dict(),
                'model': descricao,
                'train': train_cfg.to_dict(),
                'seeds': train_cfg.seeds,
                'completed_seeds': summary.seeds,
                'errors': summary.errors,
                'mean_mae': summary.mean_mae,
                'mean_accuracy_pct': summary.mean_accuracy_pct,
                'mean_mae_native': summary.mean_mae_native,
            })
            resultados[modelo.key] = summary
            if summary.failed:
                falhas.append(modelo.key)

        if falhas:
            raise TrainingError(
                f"Experimentos com repeticoes abortadas: {', '.join(falhas)} "
                f"(resultados parciais preservados)"
            )
        return resultados

    def cmd_report(self) -> List[Path]:
        """Gera figuras e tabela de comparação a partir dos artefatos em disco."""
        logger.info(BANNER)
        logger.info(f"ETAPA 4: Relatorios ({self.config.name}), seed_base={self.config.seed_base}")
        logger.info(BANNER)
        pasta = self.out_dir / 'report'
        chaves = self.model_keys()

        manifestos = {}
        for chave in chaves:
            manifesto = self.store.read_manifest(chave)
            if manifesto is None:
                raise ReportError(f"Sem artefatos de treino para {chave}; execute a etapa train")
            manifestos[chave] = {
                'input_hash': manifesto.get('input_hash'),
                'completed_seeds': manifesto.get('completed_seeds'),
            }
        entrada = content_hash({'manifests': manifestos, 'seed_base': self.config.seed_base})
        comparacao = pasta / 'comparison.csv'
        if self.stages.is_current('report', entrada) and comparacao.exists():
            logger.info("Relatorio sem alteracoes nas entradas; etapa ignorada")
            return [comparacao]

        self.stages.invalidate('report')
        unidade = self._unit(ingest.resolve_codes([self.config.target], self.catalog)[0])
        sumarios = []
        artefatos: List[Path] = []
        for chave in chaves:
            summary = summarize(chave, self.store.load_runs(chave))
            sumarios.append(summary)
            artefatos += report.write_experiment_report(summary, pasta / chave, self.config.seed_base, unidade)

        tabela = report.ComparisonTable.from_summaries(sumarios, chaves)
        artefatos.append(tabela.write(comparacao))
        artefatos += report.emit_mae_chart(tabela, pasta, self.config.seed_base)
        self.stages.mark('report', entrada)
        logger.info(f"Relatorio concluido: {len(artefatos)} artefatos em {pasta}")
        return artefatos

    def cmd_all(self) -> List[Path]:
        self.cmd_fetch()
        self.cmd_analyze()
        self.cmd_train()
        return self.cmd_report()

    # Internos

    def _models(self, prep: Preparation) -> List[Tuple[Any, TrainConfig]]:
        n = len(prep.plan.features)
        modelos: List[Tuple[Any, TrainConfig]] = [
            (QnnModel(spec), self.config.qnn_train) for spec in self.config.models.ansatze(n)
        ]
        if self.config.models.include_rnn:
            janela = self.config.rnn_window or prep.lag
            modelos.append((RnnModel(n, janela, self.config.rnn_hidden), self.config.rnn_train))
        return modelos

    @staticmethod
    def _json(payload: Mapping[str, Any]) -> str:
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + '\n'

    @staticmethod
    def _read_json(path: Path) -> Dict[str, Any]:
        with open(path, encoding='utf-8') as f:
            return json.load(f)


COMMANDS = ('fetch', 'analyze', 'train', 'report', 'all')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='quantum_weather',
        description='Estudo de previsao meteorologica: QNN variacional x RNN classica',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemplos de uso:

  Estudo completo de temperatura:
    python -m quantum_weather all --config configs/temperature.yaml

  Apenas relatorios, a partir dos artefatos ja treinados:
    python -m quantum_weather report --config configs/wind.yaml --out out/wind

  Modo CI (somente cache local, sem rede):
    python -m quantum_weather all --config configs/temperature.yaml --offline --jobs 2
        """
    )
    parser.add_argument('command', nargs='?', default='all', choices=COMMANDS,
                        help='Etapa a executar (padrao: all)')
    parser.add_argument('--config', required=True, help='Arquivo de experimento YAML')
    parser.add_argument('--offline', action='store_true',
                        help='Usa apenas o cache local; nenhuma chamada de rede')
    parser.add_argument('--jobs', type=int, default=None,
                        help='Processos paralelos para as repeticoes (padrao: nucleos logicos)')
    parser.add_argument('--seed-base', type=int, default=None,
                        help=f'Semente da primeira repeticao (padrao: {DEFAULT_SEED_BASE})')
    parser.add_argument('--out', default=None, help='Diretorio de saida (sobrepoe o experimento)')
    parser.add_argument('--log-level', default='INFO',
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Executa a etapa pedida e devolve o código de saída."""
    args = build_parser().parse_args(argv)
    setup_logging(getattr(logging, args.log_level))

    try:
        config = ExperimentConfig.from_yaml(args.config).with_overrides(args.seed_base, args.out)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError(f"--jobs deve ser >= 1: {args.jobs}")
        pipeline = Pipeline(config, offline=args.offline, jobs=args.jobs)
        getattr(pipeline, f'cmd_{args.command}')()
    except QuantumWeatherError as e:
        logger.error(f"Falha na etapa de {e.stage}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Erro inesperado: {e}")
        return 1

    logger.info(f"Etapa {args.command} concluida com sucesso")
    return 0


if __name__ == '__main__':
    sys.exit(main())
