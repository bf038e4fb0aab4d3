"""
Simulador exato de vetor de estado.

Convenções:
- qubit 0 é o bit mais significativo do índice da base;
- RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]];
- RZ(t) = diag(exp(-i t/2), exp(+i t/2));
- ROT(a, b, g) = RZ(g) . RY(b) . RZ(a).

As funções ``*_batch`` operam sobre matrizes de amplitudes (B, 2^n), em
que cada linha é um estado independente. Ângulos podem ser escalares
(mesmo valor em todas as linhas) ou vetores de tamanho B.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..errors import CircuitError

logger = logging.getLogger(__name__)

MAX_QUBITS = 24

Angle = Union[float, np.ndarray]


class GateKind(str, Enum):
    RY = 'RY'
    RZ = 'RZ'
    ROT = 'ROT'
    CNOT = 'CNOT'


ANGLE_COUNT = {GateKind.RY: 1, GateKind.RZ: 1, GateKind.ROT: 3, GateKind.CNOT: 0}


@dataclass(frozen=True)
class GateOp:
    """
    Porta de um ou dois qubits.

    Attributes:
        kind: Tipo da porta
        target: Qubit alvo
        control: Qubit de controle (apenas CNOT)
        angles: Ângulos em radianos (RY/RZ: 1, ROT: 3, CNOT: 0)
    """

    kind: GateKind
    target: int
    control: Optional[int] = None
    angles: Tuple[Angle, ...] = ()

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, 'kind', kind)
        object.__setattr__(self, 'angles', tuple(self.angles))
        if len(self.angles) != ANGLE_COUNT[kind]:
            raise CircuitError(
                f"{kind.value} requer {ANGLE_COUNT[kind]} angulos, recebeu {len(self.angles)}"
            )
        if kind is GateKind.CNOT:
            if self.control is None:
                raise CircuitError("CNOT sem qubit de controle")
            if self.control == self.target:
                raise CircuitError(f"CNOT com controle igual ao alvo ({self.target})")
        elif self.control is not None:
            raise CircuitError(f"{kind.value} nao aceita qubit de controle")

    def check(self, n_qubits: int) -> None:
        """Valida os índices de qubit contra o tamanho do registrador."""
        for nome, q in (('alvo', self.target), ('controle', self.control)):
            if q is not None and not 0 <= q < n_qubits:
                raise CircuitError(
                    f"Qubit {nome} {q} fora do registrador de {n_qubits} qubits"
                )

    @classmethod
    def ry(cls, target: int, theta: Angle) -> 'GateOp':
        return cls(GateKind.RY, target, angles=(theta,))

    @classmethod
    def rz(cls, target: int, theta: Angle) -> 'GateOp':
        return cls(GateKind.RZ, target, angles=(theta,))

    @classmethod
    def rot(cls, target: int, alpha: Angle, beta: Angle, gamma: Angle) -> 'GateOp':
        return cls(GateKind.ROT, target, angles=(alpha, beta, gamma))

    @classmethod
    def cnot(cls, control: int, target: int) -> 'GateOp':
        return cls(GateKind.CNOT, target, control=control)


@dataclass(frozen=True)
class StateVector:
    """Estado puro de n qubits com 2^n amplitudes complexas."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubits(self.n_qubits)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** self.n_qubits,):
            raise CircuitError(
                f"Estado de {self.n_qubits} qubits requer {2 ** self.n_qubits} amplitudes, "
                f"recebeu formato {amps.shape}"
            )
        object.__setattr__(self, 'amplitudes', amps)

    @property
    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def _check_qubits(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise CircuitError(f"Numero de qubits fora de [1, {MAX_QUBITS}]: {n}")


def zero_state(n: int) -> StateVector:
    """Prepara |0...0>."""
    _check_qubits(n)
    amps = np.zeros(2 ** n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def zero_batch(n: int, batch: int) -> np.ndarray:
    """Matriz (batch, 2^n) com |0...0> em todas as linhas."""
    _check_qubits(n)
    amps = np.zeros((batch, 2 ** n), dtype=np.complex128)
    amps[:, 0] = 1.0
    return amps


def ry_matrix(theta: Angle) -> np.ndarray:
    t = np.asarray(theta, dtype=np.float64)
    c, s = np.cos(t / 2), np.sin(t / 2)
    m = np.zeros(t.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = c
    m[..., 0, 1] = -s
    m[..., 1, 0] = s
    m[..., 1, 1] = c
    return m


def rz_matrix(theta: Angle) -> np.ndarray:
    t = np.asarray(theta, dtype=np.float64)
    m = np.zeros(t.shape + (2, 2), dtype=np.complex128)
    m[..., 0, 0] = np.exp(-0.5j * t)
    m[..., 1, 1] = np.exp(0.5j * t)
    return m


def rot_matrix(alpha: Angle, beta: Angle, gamma: Angle) -> np.ndarray:
    return rz_matrix(gamma) @ ry_matrix(beta) @ rz_matrix(alpha)


def gate_matrix(gate: GateOp) -> np.ndarray:
    """Matriz 2x2 (ou pilha (B, 2, 2)) de uma porta de um qubit."""
    if gate.kind is GateKind.RY:
        return ry_matrix(gate.angles[0])
    if gate.kind is GateKind.RZ:
        return rz_matrix(gate.angles[0])
    if gate.kind is GateKind.ROT:
        return rot_matrix(*gate.angles)
    raise CircuitError("CNOT nao e uma porta de um qubit")


def _apply_single(amps: np.ndarray, n: int, q: int, m: np.ndarray) -> np.ndarray:
    b = amps.shape[0]
    psi = amps.reshape(b, 2 ** q, 2, 2 ** (n - q - 1))
    if m.ndim == 2:
        m00, m01, m10, m11 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    else:
        if m.shape[0] != b:
            raise CircuitError(f"Angulos para {m.shape[0]} estados aplicados a {b} estados")
        m00, m01, m10, m11 = (m[:, i, j].reshape(b, 1, 1) for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)))
    p0 = psi[:, :, 0, :]
    p1 = psi[:, :, 1, :]
    out = np.empty_like(psi)
    out[:, :, 0, :] = m00 * p0 + m01 * p1
    out[:, :, 1, :] = m10 * p0 + m11 * p1
    return out.reshape(b, -1)


def _apply_cnot(amps: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    b = amps.shape[0]
    psi = amps.reshape((b,) + (2,) * n)
    out = psi.copy()
    ativo = [slice(None)] * (n + 1)
    ativo[control + 1] = 1
    ativo = tuple(ativo)
    # Eixo do alvo no subtensor sem o eixo do controle
    eixo = target + 1 if target < control else target
    out[ativo] = np.flip(psi[ativo], axis=eixo)
    return out.reshape(b, -1)


def apply_batch(amplitudes: np.ndarray, n_qubits: int, gate: GateOp) -> np.ndarray:
    """Aplica a porta a cada linha de uma matriz (B, 2^n); retorna nova matriz."""
    gate.check(n_qubits)
    if amplitudes.ndim != 2 or amplitudes.shape[1] != 2 ** n_qubits:
        raise CircuitError(
            f"Matriz de amplitudes {amplitudes.shape} incompativel com {n_qubits} qubits"
        )
    if gate.kind is GateKind.CNOT:
        return _apply_cnot(amplitudes, n_qubits, gate.control, gate.target)
    return _apply_single(amplitudes, n_qubits, gate.target, gate_matrix(gate))


def apply(state: StateVector, gate: GateOp) -> StateVector:
    """Aplica uma porta e retorna o novo estado."""
    for angulo in gate.angles:
        if np.ndim(angulo) != 0:
            raise CircuitError("Estado unico requer angulos escalares")
    amps = apply_batch(state.amplitudes[np.newaxis, :], state.n_qubits, gate)
    return StateVector(state.n_qubits, amps[0])


def expval_z_batch(amplitudes: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    """<Z> do qubit em cada linha, sem ruído de amostragem."""
    if not 0 <= qubit < n_qubits:
        raise CircuitError(f"Qubit {qubit} fora do registrador de {n_qubits} qubits")
    b = amplitudes.shape[0]
    prob = (np.abs(amplitudes) ** 2).reshape(b, 2 ** qubit, 2, 2 ** (n_qubits - qubit - 1))
    valor = prob[:, :, 0, :].sum(axis=(1, 2)) - prob[:, :, 1, :].sum(axis=(1, 2))
    return np.clip(valor, -1.0, 1.0)


def expval_z(state: StateVector, qubit: int) -> float:
    return float(expval_z_batch(state.amplitudes[np.newaxis, :], state.n_qubits, qubit)[0])


def run_circuit(n_qubits: int, gates: Sequence[GateOp], batch: int = 1) -> np.ndarray:
    """Executa a lista de portas a partir de |0...0> para ``batch`` estados."""
    amps = zero_batch(n_qubits, batch)
    for gate in gates:
        amps = apply_batch(amps, n_qubits, gate)
    return amps


def dump_amplitudes(state: StateVector, path: Union[str, Path]) -> Path:
    """Grava as amplitudes em CSV ``index,re,im`` para conferência externa."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({
        'index': np.arange(len(state.amplitudes)),
        're': state.amplitudes.real,
        'im': state.amplitudes.imag,
    })
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
    logger.debug(f"Amplitudes gravadas em {path}")
    return path


def load_amplitudes(path: Union[str, Path]) -> StateVector:
    frame = pd.read_csv(path, float_precision='round_trip')
    amps = frame['re'].to_numpy(dtype=np.float64) + 1j * frame['im'].to_numpy(dtype=np.float64)
    n = int(round(np.log2(len(amps))))
    return StateVector(n, amps)
