"""
Fixtures compartilhadas para todos os testes do projeto.
"""

import os
from datetime import date, timedelta
from typing import Dict, Optional, Sequence
from unittest.mock import MagicMock

import numpy as np
import pandas as pd
import pytest

from quantum_weather.config import Settings
from quantum_weather.data.ingest import DailyDataset, DateRange

UNITS = {
    'T2M': 'C',
    'T2M_MAX': 'C',
    'T2M_MIN': 'C',
    'RH2M': '%',
    'WS10M': 'm/s',
    'PRECTOTCORR': 'mm/day',
}


def make_weather_frame(start: date, days: int, seed: int = 7) -> pd.DataFrame:
    """
    Série diária sintética com sazonalidade anual e semanal.

    A temperatura tem um ciclo semanal marcado, de modo que o correlograma
    do alvo tem pico em 7 dias.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(days, dtype=np.float64)
    anual = np.sin(2 * np.pi * t / 365.0)
    semanal = np.sin(2 * np.pi * t / 7.0)
    temperatura = 26.0 + 2.5 * anual + 1.5 * semanal + rng.normal(0, 0.3, days)
    frame = pd.DataFrame({
        'T2M': temperatura,
        'T2M_MAX': temperatura + 4.0 + rng.normal(0, 0.3, days),
        'T2M_MIN': temperatura - 5.0 + rng.normal(0, 0.3, days),
        'RH2M': 60.0 - 4.0 * anual - 3.0 * semanal + rng.normal(0, 1.0, days),
        'WS10M': 2.0 + 0.5 * np.cos(2 * np.pi * t / 365.0) + np.abs(rng.normal(0, 0.3, days)),
        'PRECTOTCORR': np.abs(rng.normal(0, 1.0, days)),
    }, index=pd.date_range(start, periods=days, freq='D', name='date'))
    return frame.round(2)


def make_power_payload(frame: pd.DataFrame, fill_value: float = -999.0) -> Dict:
    """Monta um payload JSON no formato da API POWER a partir de um DataFrame."""
    parametros = {}
    for coluna in frame.columns:
        parametros[coluna] = {
            d.strftime('%Y%m%d'): (fill_value if pd.isna(v) else float(v))
            for d, v in frame[coluna].items()
        }
    return {
        'header': {'fill_value': fill_value},
        'properties': {'parameter': parametros},
        'parameters': {c: {'units': UNITS.get(c, ''), 'longname': c} for c in frame.columns},
    }


@pytest.fixture
def weather_frame():
    """DataFrame sintético de 200 dias a partir de 2023-01-01."""
    return make_weather_frame(date(2023, 1, 1), 200)


@pytest.fixture
def weather_dataset(weather_frame):
    """DailyDataset construído a partir do DataFrame sintético."""
    return DailyDataset(weather_frame, UNITS)


@pytest.fixture
def power_payload_factory():
    """Fábrica de payloads POWER para um intervalo e conjunto de códigos."""
    def _factory(date_range: DateRange, codes: Sequence[str], overrides: Optional[Dict] = None):
        frame = make_weather_frame(date_range.start, date_range.days)[list(codes)]
        for (codigo, dia), valor in (overrides or {}).items():
            frame.loc[pd.Timestamp(dia), codigo] = valor
        return make_power_payload(frame)
    return _factory


@pytest.fixture
def mock_session():
    """
    Sessão requests simulada.

    Configure ``session.get.return_value.json.return_value`` com o payload.
    """
    session = MagicMock()
    resposta = MagicMock()
    resposta.raise_for_status.return_value = None
    session.get.return_value = resposta
    return session


@pytest.fixture
def mock_env_vars(monkeypatch, tmp_path):
    """
    Configura variáveis de ambiente do projeto apontando para tmp_path.

    Args:
        monkeypatch: Fixture do pytest para modificar variáveis de ambiente
        tmp_path: Diretório temporário do teste
    """
    monkeypatch.setenv('QWF_CACHE_DIR', str(tmp_path / 'cache'))
    monkeypatch.setenv('QWF_LOG_DIR', str(tmp_path / 'logs'))
    monkeypatch.setenv('QWF_POWER_URL', 'https://power.test/api/temporal/daily/point')
    monkeypatch.setenv('QWF_HTTP_TIMEOUT', '5')
    monkeypatch.setenv('QWF_HTTP_RETRIES', '2')


@pytest.fixture
def test_settings(tmp_path):
    """Settings isoladas em tmp_path, sem depender do ambiente."""
    return Settings(
        cache_dir=tmp_path / 'cache',
        log_dir=tmp_path / 'logs',
        power_url='https://power.test/api/temporal/daily/point',
        http_timeout=5.0,
        http_retries=2,
    )


@pytest.fixture(autouse=True)
def reset_env():
    """
    Fixture que roda automaticamente antes de cada teste para limpar ambiente.
    """
    # Salvar estado original
    original_env = os.environ.copy()

    yield

    # Restaurar estado original após o teste
    os.environ.clear()
    os.environ.update(original_env)


def shift_date(d: date, days: int) -> date:
    return d + timedelta(days=days)
