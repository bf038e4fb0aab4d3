"""
Rede neural quântica variacional (QNN) sobre o simulador de estado.

Circuito: codificação RY(x_i) por qubit, ``depth`` camadas variacionais
(entrelaçamento básico ou forte), rotação final ROT por qubit e leitura
afim ``w * <Z_0> + b``.

Ordem dos parâmetros no vetor plano: ângulos das camadas (ordem C de
``layer_angles``), ângulos de ``final_rot`` (ordem C), ``w`` e ``b``.

Os gradientes usam a regra de deslocamento de parâmetro, avaliando todos
os circuitos deslocados de uma só vez como um lote do simulador.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from ..errors import CircuitError
from .qsim import GateOp, expval_z_batch, run_circuit

logger = logging.getLogger(__name__)

SHIFT = np.pi / 2


class Entangler(str, Enum):
    BASIC = 'basic'
    STRONG = 'strong'

    @property
    def experiment(self) -> int:
        return 1 if self is Entangler.BASIC else 2


class Readout(str, Enum):
    FIRST = 'first'
    MEAN = 'mean'


@dataclass(frozen=True)
class AnsatzSpec:
    """
    Topologia do circuito.

    Attributes:
        n_qubits: Um qubit por variável de entrada
        depth: Número de camadas variacionais (>= 1)
        entangler: Estratégia de entrelaçamento
        superposition: Aplica RY(pi/2) fixo em cada qubit antes da codificação
        readout: ``first`` (<Z_0>) ou ``mean`` (média dos <Z_i>)
        angle_scale: Fator aplicado às entradas padronizadas antes de RY (1.0 = radianos)
    """

    n_qubits: int
    depth: int
    entangler: Entangler = Entangler.BASIC
    superposition: bool = False
    readout: Readout = Readout.FIRST
    angle_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'entangler', Entangler(self.entangler))
        object.__setattr__(self, 'readout', Readout(self.readout))
        if self.n_qubits < 1:
            raise CircuitError(f"n_qubits deve ser >= 1: {self.n_qubits}")
        if self.depth < 1:
            raise CircuitError(f"depth deve ser >= 1: {self.depth}")
        if not np.isfinite(self.angle_scale) or self.angle_scale == 0:
            raise CircuitError(f"angle_scale invalido: {self.angle_scale}")

    @property
    def layer_shape(self) -> Tuple[int, ...]:
        if self.entangler is Entangler.BASIC:
            return (self.depth, self.n_qubits)
        return (self.depth, self.n_qubits, 3)

    @property
    def n_layer_angles(self) -> int:
        return int(np.prod(self.layer_shape))

    @property
    def n_angles(self) -> int:
        return self.n_layer_angles + 3 * self.n_qubits

    @property
    def n_params(self) -> int:
        return self.n_angles + 2

    @property
    def key(self) -> str:
        return f'qnn_exp{self.entangler.experiment}_d{self.depth}'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_qubits': self.n_qubits,
            'depth': self.depth,
            'entangler': self.entangler.value,
            'superposition': self.superposition,
            'readout': self.readout.value,
            'angle_scale': self.angle_scale,
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> 'AnsatzSpec':
        return cls(
            n_qubits=int(payload['n_qubits']),
            depth=int(payload['depth']),
            entangler=Entangler(payload.get('entangler', 'basic')),
            superposition=bool(payload.get('superposition', False)),
            readout=Readout(payload.get('readout', 'first')),
            angle_scale=float(payload.get('angle_scale', 1.0)),
        )


@dataclass(frozen=True)
class QnnParams:
    """Ângulos treináveis e leitura afim."""

    layer_angles: np.ndarray
    final_rot: np.ndarray
    w: float = 1.0
    b: float = 0.0

    def check(self, spec: AnsatzSpec) -> None:
        if self.layer_angles.shape != spec.layer_shape:
            raise CircuitError(
                f"layer_angles com formato {self.layer_angles.shape}, esperado {spec.layer_shape}"
            )
        if self.final_rot.shape != (spec.n_qubits, 3):
            raise CircuitError(
                f"final_rot com formato {self.final_rot.shape}, esperado {(spec.n_qubits, 3)}"
            )
        if not np.isfinite(self.to_flat()).all():
            raise CircuitError("Parametros nao finitos")

    def to_flat(self) -> np.ndarray:
        return np.concatenate([
            np.ravel(self.layer_angles),
            np.ravel(self.final_rot),
            [self.w, self.b],
        ]).astype(np.float64)

    @classmethod
    def from_flat(cls, spec: AnsatzSpec, flat: Sequence[float]) -> 'QnnParams':
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (spec.n_params,):
            raise CircuitError(f"Vetor de {flat.shape} parametros, esperado ({spec.n_params},)")
        corte = spec.n_layer_angles
        return cls(
            layer_angles=flat[:corte].reshape(spec.layer_shape).copy(),
            final_rot=flat[corte:spec.n_angles].reshape(spec.n_qubits, 3).copy(),
            w=float(flat[-2]),
            b=float(flat[-1]),
        )

    @property
    def output_bound(self) -> Tuple[float, float]:
        return (self.b - abs(self.w), self.b + abs(self.w))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'layer_angles': self.layer_angles.tolist(),
            'final_rot': self.final_rot.tolist(),
            'readout': {'w': self.w, 'b': self.b},
        }

    @classmethod
    def from_dict(cls, spec: AnsatzSpec, payload: Mapping[str, Any]) -> 'QnnParams':
        params = cls(
            layer_angles=np.asarray(payload['layer_angles'], dtype=np.float64),
            final_rot=np.asarray(payload['final_rot'], dtype=np.float64),
            w=float(payload['readout']['w']),
            b=float(payload['readout']['b']),
        )
        params.check(spec)
        return params


def init_params(spec: AnsatzSpec, rng: np.random.Generator) -> QnnParams:
    """Ângulos uniformes em [0, 2pi) na ordem do vetor plano; w=1, b=0."""
    angulos = rng.uniform(0.0, 2 * np.pi, size=spec.n_angles)
    return QnnParams.from_flat(spec, np.concatenate([angulos, [1.0, 0.0]]))


def _ring(n: int, offset: int) -> List[GateOp]:
    if n == 1:
        return []
    return [GateOp.cnot(i, (i + offset) % n) for i in range(n)]


def _gates(spec: AnsatzSpec, angles: np.ndarray, encoding: np.ndarray) -> List[GateOp]:
    """
    Monta as portas a partir de ângulos planos.

    ``angles`` tem formato (n_angles,) ou (B, n_angles); ``encoding`` tem
    formato (n,) ou (B, n).
    """
    n = spec.n_qubits
    portas: List[GateOp] = []
    if spec.superposition:
        portas.extend(GateOp.ry(i, SHIFT) for i in range(n))
    portas.extend(GateOp.ry(i, spec.angle_scale * encoding[..., i]) for i in range(n))

    for l in range(spec.depth):
        if spec.entangler is Entangler.BASIC:
            portas.extend(GateOp.ry(i, angles[..., l * n + i]) for i in range(n))
            portas.extend(_ring(n, 1))
        else:
            for i in range(n):
                j = (l * n + i) * 3
                portas.append(GateOp.rot(i, angles[..., j], angles[..., j + 1], angles[..., j + 2]))
            if n > 1:
                portas.extend(_ring(n, (l % (n - 1)) + 1))

    base = spec.n_layer_angles
    for i in range(n):
        j = base + 3 * i
        portas.append(GateOp.rot(i, angles[..., j], angles[..., j + 1], angles[..., j + 2]))
    return portas


def _check_features(spec: AnsatzSpec, features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.shape[-1:] != (spec.n_qubits,) or x.ndim > 2:
        raise CircuitError(
            f"Entrada com formato {x.shape} incompativel com {spec.n_qubits} qubits"
        )
    return x


def build_circuit(spec: AnsatzSpec, params: QnnParams, features: Sequence[float]) -> List[GateOp]:
    """Lista ordenada de portas para um vetor de entrada padronizado."""
    params.check(spec)
    x = _check_features(spec, features)
    if x.ndim != 1:
        raise CircuitError("build_circuit espera um unico vetor de entrada")
    return _gates(spec, params.to_flat()[:spec.n_angles], x)


def _expectation(spec: AnsatzSpec, amps: np.ndarray) -> np.ndarray:
    if spec.readout is Readout.FIRST:
        return expval_z_batch(amps, spec.n_qubits, 0)
    valores = [expval_z_batch(amps, spec.n_qubits, q) for q in range(spec.n_qubits)]
    return np.mean(valores, axis=0)


def expectation(spec: AnsatzSpec, params: QnnParams, X: np.ndarray) -> np.ndarray:
    """Valor esperado lido antes da camada afim, uma linha por amostra."""
    params.check(spec)
    x = np.atleast_2d(_check_features(spec, X))
    portas = _gates(spec, params.to_flat()[:spec.n_angles], x)
    return _expectation(spec, run_circuit(spec.n_qubits, portas, batch=len(x)))


def predict(spec: AnsatzSpec, params: QnnParams, X: np.ndarray) -> np.ndarray:
    """Previsões padronizadas para a matriz de entradas (B, n)."""
    return params.w * expectation(spec, params, X) + params.b


def forward(spec: AnsatzSpec, params: QnnParams, features: Sequence[float]) -> float:
    x = _check_features(spec, features)
    if x.ndim != 1:
        raise CircuitError("forward espera um unico vetor de entrada")
    return float(predict(spec, params, x[np.newaxis, :])[0])


def batch_jacobian(
    spec: AnsatzSpec,
    params: QnnParams,
    X: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Previsões e derivadas de cada previsão em relação a todos os parâmetros.

    Os 2P circuitos deslocados de cada amostra são simulados num único
    lote de (2P + 1) * S estados.

    Returns:
        Tuple[np.ndarray, np.ndarray]: previsões (S,) e jacobiano (S, P + 2)
    """
    params.check(spec)
    x = np.atleast_2d(_check_features(spec, X))
    s = len(x)
    p = spec.n_angles
    theta = params.to_flat()[:p]

    # Linha 0: sem deslocamento; linhas 2j+1 / 2j+2: angulo j em +pi/2 / -pi/2
    grade = np.tile(theta, (2 * p + 1, 1))
    idx = np.arange(p)
    grade[2 * idx + 1, idx] += SHIFT
    grade[2 * idx + 2, idx] -= SHIFT

    angulos = np.repeat(grade, s, axis=0)
    entradas = np.tile(x, (2 * p + 1, 1))
    amps = run_circuit(spec.n_qubits, _gates(spec, angulos, entradas), batch=len(entradas))
    esperado = _expectation(spec, amps).reshape(2 * p + 1, s)

    z = esperado[0]
    jac = np.empty((s, spec.n_params), dtype=np.float64)
    jac[:, :p] = (params.w * (esperado[1::2] - esperado[2::2]) / 2).T
    jac[:, p] = z
    jac[:, p + 1] = 1.0
    return params.w * z + params.b, jac


def gradient(spec: AnsatzSpec, params: QnnParams, features: Sequence[float]) -> np.ndarray:
    """Derivadas da previsão em relação a cada parâmetro, na ordem plana."""
    x = _check_features(spec, features)
    if x.ndim != 1:
        raise CircuitError("gradient espera um unico vetor de entrada")
    _, jac = batch_jacobian(spec, params, x[np.newaxis, :])
    return jac[0]


def loss_and_gradient(
    spec: AnsatzSpec,
    params: QnnParams,
    X: np.ndarray,
    y: np.ndarray
) -> Tuple[float, np.ndarray]:
    """MSE do lote e seu gradiente no vetor plano."""
    pred, jac = batch_jacobian(spec, params, X)
    erro = pred - np.asarray(y, dtype=np.float64)
    perda = float(np.mean(erro ** 2))
    grad = (2.0 / len(erro)) * (erro @ jac)
    return perda, grad
