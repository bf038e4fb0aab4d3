"""
Driver de treinamento dos modelos de previsão.

Funcionalidades:
- Adaptadores de modelo (QNN e RNN) sobre vetores planos de parâmetros
- Separação cronológica de validação (cauda do treino, nunca embaralhada)
- Lotes embaralhados por época com gerador semeado
- Atualizações Adam, histórico de perdas e métricas no conjunto de teste
- Repetição por sementes em paralelo (joblib) com agregação por dia
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..data.preprocess import SplitDataset
from ..errors import CircuitError, ConfigError, QuantumWeatherError, ReportError, TrainingError
from ..models import qnn, rnn
from ..models.qnn import AnsatzSpec, QnnParams
from ..models.rnn import RnnParams
from .optimizer import AdamState, adam_step

logger = logging.getLogger(__name__)

DEFAULT_SEED_BASE = 42


def accuracy_pct(mae: float) -> float:
    """Acurácia percentual definida como 100 * (1 - MAE)."""
    return 100.0 * (1.0 - mae)


@dataclass(frozen=True)
class TrainConfig:
    """
    Hiperparâmetros de treinamento.

    Attributes:
        epochs: Passagens completas pelo conjunto de treino
        learning_rate: Taxa do Adam
        batch_size: Amostras por lote
        validation_split: Fração final do treino reservada para validação
        runs: Repetições com sementes distintas
        seed_base: Semente da primeira repetição (as demais somam o índice)
    """

    epochs: int
    learning_rate: float
    batch_size: int = 10
    validation_split: float = 0.1
    runs: int = 10
    seed_base: int = DEFAULT_SEED_BASE

    def __post_init__(self):
        if self.epochs < 0:
            raise ConfigError(f"epochs deve ser >= 0: {self.epochs}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate deve ser positivo: {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size deve ser >= 1: {self.batch_size}")
        if not 0 < self.validation_split < 1:
            raise ConfigError(f"validation_split deve estar em (0, 1): {self.validation_split}")
        if self.runs < 1:
            raise ConfigError(f"runs deve ser >= 1: {self.runs}")

    @classmethod
    def qnn_defaults(cls, **overrides) -> 'TrainConfig':
        return cls(**{'epochs': 30, 'learning_rate': 0.1, **overrides})

    @classmethod
    def rnn_defaults(cls, **overrides) -> 'TrainConfig':
        return cls(**{'epochs': 500, 'learning_rate': 0.001, **overrides})

    @property
    def seeds(self) -> List[int]:
        return [self.seed_base + i for i in range(self.runs)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'epochs': self.epochs,
            'learning_rate': self.learning_rate,
            'batch_size': self.batch_size,
            'validation_split': self.validation_split,
            'runs': self.runs,
            'seed_base': self.seed_base,
        }


def validation_size(n: int, validation_split: float) -> int:
    """Linhas de validação: n - floor(n * (1 - validation_split))."""
    return n - int(np.floor(n * (1.0 - validation_split)))


@dataclass
class LossHistory:
    """MSE padronizado por época (treino: média dos lotes da época)."""

    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)

    def append(self, train: float, val: float) -> None:
        self.train_loss.append(float(train))
        self.val_loss.append(float(val))

    def __len__(self) -> int:
        return len(self.train_loss)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'epoch': np.arange(1, len(self) + 1),
            'train_loss': self.train_loss,
            'val_loss': self.val_loss,
        })

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> 'LossHistory':
        return cls(
            train_loss=[float(v) for v in frame['train_loss']],
            val_loss=[float(v) for v in frame['val_loss']],
        )


class QnnModel:
    """Adaptador da QNN para o laço de treinamento."""

    family = 'qnn'

    def __init__(self, spec: AnsatzSpec):
        self.spec = spec

    @property
    def key(self) -> str:
        return self.spec.key

    def describe(self) -> Dict[str, Any]:
        return {
            'family': self.family,
            **self.spec.to_dict(),
            'n_params': self.spec.n_params,
            'encoding': 'RY(x) com x padronizado em radianos',
        }

    def init_flat(self, rng: np.random.Generator) -> np.ndarray:
        return qnn.init_params(self.spec, rng).to_flat()

    def prepare(self, data: SplitDataset) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        if data.X_train.shape[1] != self.spec.n_qubits:
            raise CircuitError(
                f"{self.spec.n_qubits} qubits para {data.X_train.shape[1]} variaveis de entrada"
            )
        return data.X_train, data.y_train, data.X_test, data.y_test

    def loss_and_grad(self, flat: np.ndarray, X: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
        return qnn.loss_and_gradient(self.spec, QnnParams.from_flat(self.spec, flat), X, y)

    def predict(self, flat: np.ndarray, X: np.ndarray) -> np.ndarray:
        return qnn.predict(self.spec, QnnParams.from_flat(self.spec, flat), X)

    def params_dict(self, flat: np.ndarray) -> Dict[str, Any]:
        return QnnParams.from_flat(self.spec, flat).to_dict()

    def output_bound(self, flat: np.ndarray) -> Optional[Tuple[float, float]]:
        return QnnParams.from_flat(self.spec, flat).output_bound


class RnnModel:
    """Adaptador da rede recorrente; a janela padrão é a defasagem do alvo."""

    family = 'rnn'

    def __init__(self, n_features: int, window: int, hidden_size: int = rnn.HIDDEN_SIZE):
        self.n_features = n_features
        self.window = window
        self.hidden_size = hidden_size

    @property
    def key(self) -> str:
        return 'rnn'

    def describe(self) -> Dict[str, Any]:
        return {
            'family': self.family,
            'hidden_size': self.hidden_size,
            'n_features': self.n_features,
            'window': self.window,
            'activation': 'tanh',
            'head': 'linear',
            'windowing': 'janela terminando em t-1 preve a linha t',
            'init': 'uniforme +-1/sqrt(fan_in), vieses zero',
        }

    def init_flat(self, rng: np.random.Generator) -> np.ndarray:
        return rnn.init_rnn_params(self.n_features, rng, self.hidden_size).to_flat()

    def _params(self, flat: np.ndarray) -> RnnParams:
        return RnnParams.from_flat(self.hidden_size, self.n_features, flat)

    def prepare(self, data: SplitDataset) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        janelas = rnn.build_windows(data.X_all, data.y_all, data.n_train, self.window)
        return janelas.X_train, janelas.y_train, janelas.X_test, janelas.y_test

    def loss_and_grad(self, flat: np.ndarray, X: np.ndarray, y: np.ndarray) -> Tuple[float, np.ndarray]:
        return rnn.rnn_loss_and_gradient(self._params(flat), X, y)

    def predict(self, flat: np.ndarray, X: np.ndarray) -> np.ndarray:
        return rnn.rnn_predict(self._params(flat), X)

    def params_dict(self, flat: np.ndarray) -> Dict[str, Any]:
        return self._params(flat).to_dict()

    def output_bound(self, flat: np.ndarray) -> Optional[Tuple[float, float]]:
        return None


@dataclass
class RunReport:
    """
    Resultado de uma repetição.

    Attributes:
        seed: Semente da repetição
        model_key: Identificador da configuração
        params: Parâmetros finais serializados
        dates: Datas do conjunto de teste
        predictions: Previsões padronizadas
        predictions_native: Previsões em unidades nativas
        actual: Valores observados padronizados
        actual_native: Valores observados em unidades nativas
        history: Perdas por época
        mae: MAE na escala padronizada
        accuracy_pct: 100 * (1 - mae)
        mae_native: MAE em unidades nativas
        output_bound: Intervalo [b - |w|, b + |w|] da QNN
    """

    seed: int
    model_key: str
    params: Dict[str, Any]
    dates: pd.DatetimeIndex
    predictions: np.ndarray
    predictions_native: np.ndarray
    actual: np.ndarray
    actual_native: np.ndarray
    history: LossHistory
    mae: float
    accuracy_pct: float
    mae_native: float
    output_bound: Optional[Tuple[float, float]] = None

    @property
    def horizon(self) -> int:
        return len(self.predictions)

    def predictions_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'day': np.arange(1, self.horizon + 1),
            'date': [d.strftime('%Y-%m-%d') for d in self.dates],
            'actual': self.actual,
            'prediction': self.predictions,
            'actual_native': self.actual_native,
            'prediction_native': self.predictions_native,
        })


def train_model(model, data: SplitDataset, cfg: TrainConfig, seed: int) -> RunReport:
    """
    Treina uma repetição do modelo e avalia no conjunto de teste.

    Args:
        model: QnnModel ou RnnModel
        data: Conjunto padronizado e dividido
        cfg: Hiperparâmetros
        seed: Semente do gerador (inicialização e embaralhamento)

    Raises:
        TrainingError: Perda ou gradiente não finito (com época e lote)
    """
    rng = np.random.default_rng(seed)
    flat = model.init_flat(rng)
    X_treino, y_treino, X_teste, y_teste = model.prepare(data)

    n = len(y_treino)
    n_val = validation_size(n, cfg.validation_split)
    n_fit = n - n_val
    if n_val < 1 or n_fit < 1:
        raise TrainingError(f"Validacao de {n_val} linhas impossivel com {n} amostras de treino")
    X_fit, y_fit = X_treino[:n_fit], y_treino[:n_fit]
    X_val, y_val = X_treino[n_fit:], y_treino[n_fit:]

    history = LossHistory()
    state = AdamState.zeros(len(flat))
    for epoch in range(1, cfg.epochs + 1):
        ordem = rng.permutation(n_fit)
        perdas = []
        for lote, inicio in enumerate(range(0, n_fit, cfg.batch_size), start=1):
            idx = ordem[inicio:inicio + cfg.batch_size]
            perda, grad = model.loss_and_grad(flat, X_fit[idx], y_fit[idx])
            if not np.isfinite(perda):
                raise TrainingError(f"Perda nao finita em {model.key} (seed={seed})", epoch, lote)
            flat, state = adam_step(flat, grad, state, cfg.learning_rate, epoch, lote)
            perdas.append(perda)

        perda_val = float(np.mean((model.predict(flat, X_val) - y_val) ** 2))
        if not np.isfinite(perda_val):
            raise TrainingError(f"Perda de validacao nao finita em {model.key} (seed={seed})", epoch)
        history.append(float(np.mean(perdas)), perda_val)
        logger.debug(
            f"{model.key} seed={seed} epoca={epoch}: treino={history.train_loss[-1]:.5f} "
            f"validacao={perda_val:.5f}"
        )

    previsto = np.asarray(model.predict(flat, X_teste), dtype=np.float64)
    previsto_nativo = data.to_native(previsto)
    real_nativo = data.to_native(y_teste)
    mae = float(np.mean(np.abs(previsto - y_teste)))

    report = RunReport(
        seed=seed,
        model_key=model.key,
        params=model.params_dict(flat),
        dates=data.test_dates,
        predictions=previsto,
        predictions_native=previsto_nativo,
        actual=np.asarray(y_teste, dtype=np.float64),
        actual_native=real_nativo,
        history=history,
        mae=mae,
        accuracy_pct=accuracy_pct(mae),
        mae_native=float(np.mean(np.abs(previsto_nativo - real_nativo))),
        output_bound=model.output_bound(flat),
    )
    logger.info(
        f"{model.key} seed={seed}: MAE={report.mae:.4f} "
        f"acuracia={report.accuracy_pct:.2f}% MAE nativo={report.mae_native:.4f}"
    )
    return report


@dataclass
class ExperimentSummary:
    """
    Agregado das repetições de uma configuração.

    ``daily`` tem uma linha por dia de teste com os quantis das previsões
    em unidades nativas: ``day, date, actual, min, q1, median, q3, max, mean``.
    """

    model_key: str
    reports: List[RunReport]
    daily: pd.DataFrame
    mean_train_loss: np.ndarray
    mean_val_loss: np.ndarray
    mean_mae: float
    mean_accuracy_pct: float
    mean_mae_native: float
    failed: bool = False
    errors: List[str] = field(default_factory=list)

    @property
    def seeds(self) -> List[int]:
        return [r.seed for r in self.reports]


def summarize(model_key: str, reports: Sequence[RunReport], errors: Sequence[str] = ()) -> ExperimentSummary:
    """
    Agrega repetições: distribuição diária, curvas médias e MAE médio.

    Raises:
        ReportError: Nenhuma repetição ou históricos de tamanhos diferentes
    """
    if not reports:
        raise ReportError(f"Nenhuma repeticao concluida para {model_key}")
    tamanhos = {len(r.history) for r in reports}
    if len(tamanhos) != 1:
        raise ReportError(f"Historicos com tamanhos diferentes em {model_key}: {sorted(tamanhos)}")
    horizontes = {r.horizon for r in reports}
    if len(horizontes) != 1:
        raise ReportError(f"Horizontes diferentes em {model_key}: {sorted(horizontes)}")

    previsoes = np.vstack([r.predictions_native for r in reports])
    primeiro = reports[0]
    daily = pd.DataFrame({
        'day': np.arange(1, primeiro.horizon + 1),
        'date': [d.strftime('%Y-%m-%d') for d in primeiro.dates],
        'actual': primeiro.actual_native,
        'min': previsoes.min(axis=0),
        'q1': np.quantile(previsoes, 0.25, axis=0),
        'median': np.quantile(previsoes, 0.5, axis=0),
        'q3': np.quantile(previsoes, 0.75, axis=0),
        'max': previsoes.max(axis=0),
        'mean': previsoes.mean(axis=0),
    })

    if tamanhos == {0}:
        treino, val = np.zeros(0), np.zeros(0)
    else:
        treino = np.mean([r.history.train_loss for r in reports], axis=0)
        val = np.mean([r.history.val_loss for r in reports], axis=0)

    mae = float(np.mean([r.mae for r in reports]))
    return ExperimentSummary(
        model_key=model_key,
        reports=list(reports),
        daily=daily,
        mean_train_loss=treino,
        mean_val_loss=val,
        mean_mae=mae,
        mean_accuracy_pct=accuracy_pct(mae),
        mean_mae_native=float(np.mean([r.mae_native for r in reports])),
        failed=bool(errors),
        errors=list(errors),
    )


def _run_seed(model, data: SplitDataset, cfg: TrainConfig, seed: int) -> Tuple[int, Optional[RunReport], Optional[str]]:
    try:
        return seed, train_model(model, data, cfg, seed), None
    except QuantumWeatherError as e:
        return seed, None, f"seed={seed}: {e}"
    except Exception as e:
        # Erro inesperado numa repetição não descarta as demais
        return seed, None, f"seed={seed}: {type(e).__name__}: {e}"


def run_experiment(model, data: SplitDataset, cfg: TrainConfig, jobs: int = 1) -> ExperimentSummary:
    """
    Executa ``cfg.runs`` repetições com sementes ``seed_base + i``.

    As repetições são independentes e rodam em paralelo; a ordem dos
    resultados segue a ordem das sementes. Falhas individuais preservam as
    repetições concluídas e marcam o experimento como falho.

    Raises:
        TrainingError: Todas as repetições falharam
    """
    logger.info(
        f"Experimento {model.key}: {cfg.runs} repeticoes, seed_base={cfg.seed_base}, jobs={jobs}"
    )
    resultados = Parallel(n_jobs=jobs)(
        delayed(_run_seed)(model, data, cfg, seed) for seed in cfg.seeds
    )

    reports = [r for _, r, _ in resultados if r is not None]
    errors = [e for _, _, e in resultados if e is not None]
    for erro in errors:
        logger.error(f"Repeticao abortada em {model.key}: {erro}")
    if not reports:
        raise TrainingError(f"Todas as repeticoes de {model.key} falharam: {'; '.join(errors)}")

    summary = summarize(model.key, reports, errors)
    logger.info(
        f"Experimento {model.key} concluido: MAE medio={summary.mean_mae:.4f} "
        f"acuracia={summary.mean_accuracy_pct:.2f}%"
        + (f" ({len(errors)} falhas)" if errors else "")
    )
    return summary
