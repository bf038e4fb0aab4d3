"""
Testes para configuração de logging, variáveis de ambiente e exceções.
"""

import logging
from pathlib import Path

import pytest

from quantum_weather.config import POWER_DAILY_URL, Settings, setup_logging
from quantum_weather.errors import (
    ConfigError,
    DataError,
    MissingParameterError,
    PayloadParseError,
    ReportError,
    TrainingError,
    TransportError,
)

pytestmark = pytest.mark.unit


class TestSettings:
    """Testes para Settings.from_env()."""

    def test_from_env_le_variaveis(self, mock_env_vars, tmp_path):
        """Testa leitura das variáveis QWF_*."""
        settings = Settings.from_env()

        assert settings.cache_dir == tmp_path / 'cache'
        assert settings.log_dir == tmp_path / 'logs'
        assert settings.power_url == 'https://power.test/api/temporal/daily/point'
        assert settings.http_timeout == 5.0
        assert settings.http_retries == 2

    def test_from_env_padroes(self, monkeypatch):
        """Testa valores padrão quando as variáveis não existem."""
        for nome in ('QWF_CACHE_DIR', 'QWF_LOG_DIR', 'QWF_POWER_URL',
                     'QWF_HTTP_TIMEOUT', 'QWF_HTTP_RETRIES'):
            monkeypatch.delenv(nome, raising=False)

        settings = Settings.from_env()

        assert settings.power_url == POWER_DAILY_URL
        assert settings.http_retries == 3
        assert settings.cache_dir.name == 'cache'


class TestSetupLogging:
    """Testes para setup_logging()."""

    def test_cria_diretorio_e_arquivo(self, tmp_path):
        """Verifica se o diretório de logs e o app.log são criados."""
        log_dir = tmp_path / 'logs'
        logger = setup_logging(logging.DEBUG, log_dir)
        logger.info('mensagem de teste')

        assert log_dir.exists()
        assert (log_dir / 'app.log').exists()
        assert logger.name == 'quantum_weather'

    def test_handlers_configurados(self, tmp_path):
        """Verifica configuração básica do logger raiz."""
        setup_logging(logging.INFO, tmp_path)

        tipos = {type(h) for h in logging.root.handlers}
        assert logging.FileHandler in tipos
        assert logging.StreamHandler in tipos


class TestExcecoes:
    """Testes para a hierarquia de exceções e códigos de saída."""

    @pytest.mark.parametrize('erro, codigo', [
        (ConfigError('x'), 2),
        (DataError('x'), 3),
        (TrainingError('x'), 4),
        (ReportError('x'), 5),
    ])
    def test_exit_codes(self, erro, codigo):
        """Cada classe de falha tem seu código de saída."""
        assert erro.exit_code == codigo

    def test_transport_error_retriable(self):
        """TransportError é repetível e carrega a chave da requisição."""
        erro = TransportError('falha', 'abc123')

        assert erro.retriable is True
        assert erro.request_key == 'abc123'
        assert 'abc123' in str(erro)
        assert isinstance(erro, DataError)

    def test_payload_parse_error_localizacao(self):
        """Mensagem inclui campo e linha."""
        erro = PayloadParseError('Valor nao numerico', field='T2M', line=4)

        assert 'campo=T2M' in str(erro)
        assert 'linha=4' in str(erro)

    def test_missing_parameter_lista_disponiveis(self):
        """Mensagem lista os ausentes e os disponíveis."""
        erro = MissingParameterError(['WS10M'], ['T2M', 'RH2M'])

        assert str(erro) == 'Parametros ausentes: WS10M; disponiveis: RH2M, T2M'

    def test_training_error_coordenadas(self):
        """TrainingError informa época e lote."""
        erro = TrainingError('Gradiente nao finito', epoch=3, batch=1)

        assert erro.epoch == 3
        assert erro.batch == 1
        assert 'epoca=3' in str(erro)
        assert 'lote=1' in str(erro)
