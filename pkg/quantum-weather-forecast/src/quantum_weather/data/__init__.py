"""
Data Package - Quantum Weather Forecast

Módulos:
    ingest: Cliente NASA POWER, cache local e tipos de dataset diário
    preprocess: Correlação, defasagens, padronização e divisão treino/teste
"""

from .ingest import DailyDataset, DateRange, GeoPoint, PowerClient, fetch_daily
from .preprocess import (
    CorrelationMatrix,
    FeaturePlan,
    Scaler,
    SplitDataset,
    add_lag_feature,
    choose_lag,
    chronological_split,
    correlation_matrix,
    lag_correlogram,
    pearson,
    select_features,
)

__all__ = [
    'DailyDataset',
    'DateRange',
    'GeoPoint',
    'PowerClient',
    'fetch_daily',
    'CorrelationMatrix',
    'FeaturePlan',
    'Scaler',
    'SplitDataset',
    'add_lag_feature',
    'choose_lag',
    'chronological_split',
    'correlation_matrix',
    'lag_correlogram',
    'pearson',
    'select_features',
]
