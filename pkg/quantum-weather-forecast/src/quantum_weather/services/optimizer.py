"""
Otimizador Adam sobre vetores planos de parâmetros.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import TrainingError

logger = logging.getLogger(__name__)

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass(frozen=True)
class AdamState:
    """Momentos do Adam e número de passos já aplicados."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> 'AdamState':
        return cls(np.zeros(size, dtype=np.float64), np.zeros(size, dtype=np.float64), 0)


def adam_step(
    params_flat: np.ndarray,
    grads_flat: np.ndarray,
    state: AdamState,
    lr: float,
    epoch: Optional[int] = None,
    batch: Optional[int] = None
) -> Tuple[np.ndarray, AdamState]:
    """
    Aplica um passo do Adam com correção de viés.

    Args:
        params_flat: Parâmetros atuais
        grads_flat: Gradiente da perda
        state: Estado do otimizador
        lr: Taxa de aprendizado
        epoch: Época corrente (apenas para diagnóstico)
        batch: Lote corrente (apenas para diagnóstico)

    Returns:
        Tuple[np.ndarray, AdamState]: Novos parâmetros e novo estado

    Raises:
        TrainingError: Gradiente não finito ou formatos incompatíveis
    """
    theta = np.asarray(params_flat, dtype=np.float64)
    g = np.asarray(grads_flat, dtype=np.float64)
    if theta.shape != g.shape or state.m.shape != g.shape:
        raise TrainingError(
            f"Formatos incompativeis: parametros {theta.shape}, gradiente {g.shape}, "
            f"estado {state.m.shape}",
            epoch, batch
        )
    if not np.isfinite(g).all():
        ruins = int(np.count_nonzero(~np.isfinite(g)))
        raise TrainingError(f"Gradiente nao finito em {ruins} componentes", epoch, batch)

    t = state.t + 1
    m = BETA1 * state.m + (1 - BETA1) * g
    v = BETA2 * state.v + (1 - BETA2) * g * g
    m_hat = m / (1 - BETA1 ** t)
    v_hat = v / (1 - BETA2 ** t)
    novo = theta - lr * m_hat / (np.sqrt(v_hat) + EPSILON)
    return novo, AdamState(m, v, t)
