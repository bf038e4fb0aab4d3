"""
Models Package - Quantum Weather Forecast

Módulos:
    qsim: Simulador exato de vetor de estado
    qnn: Circuitos variacionais, previsão e gradiente por deslocamento de parâmetro
    rnn: Rede recorrente de Elman com BPTT
"""

from .qnn import AnsatzSpec, Entangler, QnnParams, Readout
from .qsim import GateKind, GateOp, StateVector
from .rnn import RnnParams, WindowSet

__all__ = [
    'AnsatzSpec',
    'Entangler',
    'QnnParams',
    'Readout',
    'GateKind',
    'GateOp',
    'StateVector',
    'RnnParams',
    'WindowSet',
]
