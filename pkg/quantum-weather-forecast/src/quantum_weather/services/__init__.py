"""
Services Package - Quantum Weather Forecast

Módulos:
    optimizer: Otimizador Adam
    trainer: Laço de treinamento, repetições por semente e agregação
    manifest: Manifesto de experimentos, artefatos por repetição e guarda de etapas
    report: Tabelas CSV e figuras SVG
"""

from .manifest import ExperimentStore, StageRegistry
from .optimizer import AdamState, adam_step
from .trainer import (
    ExperimentSummary,
    LossHistory,
    QnnModel,
    RnnModel,
    RunReport,
    TrainConfig,
    run_experiment,
    train_model,
)

__all__ = [
    'ExperimentStore',
    'StageRegistry',
    'AdamState',
    'adam_step',
    'ExperimentSummary',
    'LossHistory',
    'QnnModel',
    'RnnModel',
    'RunReport',
    'TrainConfig',
    'run_experiment',
    'train_model',
]
