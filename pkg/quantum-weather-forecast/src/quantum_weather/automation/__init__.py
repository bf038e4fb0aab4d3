"""
Automation Package - Quantum Weather Forecast

Orquestração das etapas do estudo e linha de comando.
"""

from .pipeline import ExperimentConfig, ModelMatrix, Pipeline, main

__all__ = [
    'ExperimentConfig',
    'ModelMatrix',
    'Pipeline',
    'main',
]
