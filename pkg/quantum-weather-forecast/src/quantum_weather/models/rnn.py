"""
Rede recorrente de Elman com cabeça linear, treinada por BPTT.

    h_0 = 0
    h_t = tanh(W_in x_t + W_rec h_{t-1} + b_h)
    y   = W_out . h_W + b_out

Ordem dos parâmetros no vetor plano: W_in, W_rec, b_h, W_out, b_out.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Sequence, Tuple

import numpy as np

from ..errors import ModelShapeError

logger = logging.getLogger(__name__)

HIDDEN_SIZE = 256


@dataclass(frozen=True)
class RnnParams:
    """
    Pesos da rede.

    Attributes:
        W_in: (hidden, features)
        W_rec: (hidden, hidden)
        b_h: (hidden,)
        W_out: (hidden,), a linha única da cabeça linear
        b_out: Viés da saída
    """

    W_in: np.ndarray
    W_rec: np.ndarray
    b_h: np.ndarray
    W_out: np.ndarray
    b_out: float = 0.0

    def __post_init__(self):
        h, f = np.shape(self.W_in) if np.ndim(self.W_in) == 2 else (-1, -1)
        if h < 1 or f < 1:
            raise ModelShapeError(f"W_in deve ser 2D nao vazio: {np.shape(self.W_in)}")
        esperado = {'W_rec': (h, h), 'b_h': (h,), 'W_out': (h,)}
        for nome, forma in esperado.items():
            if np.shape(getattr(self, nome)) != forma:
                raise ModelShapeError(
                    f"{nome} com formato {np.shape(getattr(self, nome))}, esperado {forma}"
                )

    @property
    def hidden_size(self) -> int:
        return self.W_in.shape[0]

    @property
    def n_features(self) -> int:
        return self.W_in.shape[1]

    @property
    def n_params(self) -> int:
        h, f = self.W_in.shape
        return h * f + h * h + 2 * h + 1

    def to_flat(self) -> np.ndarray:
        return np.concatenate([
            self.W_in.ravel(), self.W_rec.ravel(), self.b_h, self.W_out, [self.b_out]
        ]).astype(np.float64)

    @classmethod
    def from_flat(cls, hidden_size: int, n_features: int, flat: Sequence[float]) -> 'RnnParams':
        flat = np.asarray(flat, dtype=np.float64)
        h, f = hidden_size, n_features
        total = h * f + h * h + 2 * h + 1
        if flat.shape != (total,):
            raise ModelShapeError(f"Vetor de {flat.shape} parametros, esperado ({total},)")
        cortes = np.cumsum([h * f, h * h, h, h])
        partes = np.split(flat, cortes)
        return cls(
            W_in=partes[0].reshape(h, f).copy(),
            W_rec=partes[1].reshape(h, h).copy(),
            b_h=partes[2].copy(),
            W_out=partes[3].copy(),
            b_out=float(partes[4][0]),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'hidden_size': self.hidden_size,
            'n_features': self.n_features,
            'activation': 'tanh',
            'W_in': self.W_in.tolist(),
            'W_rec': self.W_rec.tolist(),
            'b_h': self.b_h.tolist(),
            'W_out': self.W_out.tolist(),
            'b_out': self.b_out,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'RnnParams':
        return cls(
            W_in=np.asarray(payload['W_in'], dtype=np.float64),
            W_rec=np.asarray(payload['W_rec'], dtype=np.float64),
            b_h=np.asarray(payload['b_h'], dtype=np.float64),
            W_out=np.asarray(payload['W_out'], dtype=np.float64),
            b_out=float(payload['b_out']),
        )


def init_rnn_params(
    n_features: int,
    rng: np.random.Generator,
    hidden_size: int = HIDDEN_SIZE
) -> RnnParams:
    """Pesos uniformes em +-1/sqrt(fan_in); vieses zerados."""
    limite_in = 1.0 / np.sqrt(n_features)
    limite_h = 1.0 / np.sqrt(hidden_size)
    W_in = rng.uniform(-limite_in, limite_in, size=(hidden_size, n_features))
    W_rec = rng.uniform(-limite_h, limite_h, size=(hidden_size, hidden_size))
    W_out = rng.uniform(-limite_h, limite_h, size=hidden_size)
    return RnnParams(W_in, W_rec, np.zeros(hidden_size), W_out, 0.0)


def _check_windows(params: RnnParams, windows: np.ndarray) -> np.ndarray:
    x = np.asarray(windows, dtype=np.float64)
    if x.ndim != 3 or x.shape[1] < 1 or x.shape[2] != params.n_features:
        raise ModelShapeError(
            f"Janelas com formato {x.shape}; esperado (B, W>=1, {params.n_features})"
        )
    return x


def _unroll(params: RnnParams, x: np.ndarray) -> np.ndarray:
    """Estados ocultos (B, W + 1, H), com h_0 = 0 na posição 0."""
    b, w, _ = x.shape
    hs = np.zeros((b, w + 1, params.hidden_size), dtype=np.float64)
    for t in range(w):
        hs[:, t + 1] = np.tanh(x[:, t] @ params.W_in.T + hs[:, t] @ params.W_rec.T + params.b_h)
    return hs


def rnn_predict(params: RnnParams, windows: np.ndarray) -> np.ndarray:
    """Previsões para janelas (B, W, F)."""
    x = _check_windows(params, windows)
    hs = _unroll(params, x)
    return hs[:, -1] @ params.W_out + params.b_out


def rnn_forward(params: RnnParams, window: np.ndarray) -> float:
    x = np.asarray(window, dtype=np.float64)
    if x.ndim != 2:
        raise ModelShapeError(f"Janela deve ser (W, F): {x.shape}")
    return float(rnn_predict(params, x[np.newaxis])[0])


def rnn_loss_and_gradient(
    params: RnnParams,
    windows: np.ndarray,
    targets: Sequence[float]
) -> Tuple[float, np.ndarray]:
    """
    MSE médio do lote e gradiente exato por retropropagação no tempo.

    Returns:
        Tuple[float, np.ndarray]: perda e gradiente no vetor plano
    """
    x = _check_windows(params, windows)
    y = np.asarray(targets, dtype=np.float64)
    if y.shape != (x.shape[0],):
        raise ModelShapeError(f"Alvos com formato {y.shape}, esperado ({x.shape[0]},)")

    hs = _unroll(params, x)
    pred = hs[:, -1] @ params.W_out + params.b_out
    erro = pred - y
    perda = float(np.mean(erro ** 2))

    dpred = 2.0 * erro / len(erro)
    dW_out = dpred @ hs[:, -1]
    db_out = float(dpred.sum())
    dW_in = np.zeros_like(params.W_in)
    dW_rec = np.zeros_like(params.W_rec)
    db_h = np.zeros_like(params.b_h)

    dh = dpred[:, np.newaxis] * params.W_out[np.newaxis, :]
    for t in range(x.shape[1], 0, -1):
        da = dh * (1.0 - hs[:, t] ** 2)
        dW_in += da.T @ x[:, t - 1]
        dW_rec += da.T @ hs[:, t - 1]
        db_h += da.sum(axis=0)
        dh = da @ params.W_rec

    grad = np.concatenate([dW_in.ravel(), dW_rec.ravel(), db_h, dW_out, [db_out]])
    return perda, grad


def rnn_gradient(params: RnnParams, window: np.ndarray, target: float) -> np.ndarray:
    """Gradiente de (previsão - alvo)^2 para uma única janela."""
    x = np.asarray(window, dtype=np.float64)
    if x.ndim != 2:
        raise ModelShapeError(f"Janela deve ser (W, F): {x.shape}")
    _, grad = rnn_loss_and_gradient(params, x[np.newaxis], [target])
    return grad


@dataclass(frozen=True)
class WindowSet:
    """Janelas de treino e teste; a janela que termina em t-1 prevê a linha t."""

    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    length: int


def build_windows(
    X_all: np.ndarray,
    y_all: np.ndarray,
    n_train: int,
    length: int
) -> WindowSet:
    """
    Monta janelas sobre treino + teste concatenados em ordem cronológica.

    Alvos de treino são as linhas de treino com janela completa; alvos de
    teste são exatamente as linhas de teste.
    """
    X_all = np.asarray(X_all, dtype=np.float64)
    y_all = np.asarray(y_all, dtype=np.float64)
    total = len(y_all)
    if length < 1:
        raise ModelShapeError(f"Tamanho de janela deve ser >= 1: {length}")
    if X_all.ndim != 2 or len(X_all) != total:
        raise ModelShapeError(f"Entradas {X_all.shape} incompativeis com {total} alvos")
    if not length < n_train <= total:
        raise ModelShapeError(
            f"Janela de {length} dias requer mais de {length} linhas de treino (ha {n_train})"
        )

    inicio = np.arange(total - length)
    janelas = X_all[inicio[:, np.newaxis] + np.arange(length)]
    alvos = y_all[length:]
    corte = n_train - length
    return WindowSet(
        X_train=janelas[:corte],
        y_train=alvos[:corte],
        X_test=janelas[corte:],
        y_test=alvos[corte:],
        length=length,
    )
