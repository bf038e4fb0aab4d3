"""
Configuração de logging e variáveis de ambiente do projeto.

As variáveis são lidas do arquivo .env na raiz do projeto (se existir)
e podem ser sobrescritas pelo ambiente do processo.
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).parent.parent.parent

# Carrega variáveis de ambiente do arquivo .env na raiz do projeto
env_path = PROJECT_ROOT / '.env'
load_dotenv(dotenv_path=env_path)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
POWER_DAILY_URL = 'https://power.larc.nasa.gov/api/temporal/daily/point'

logger = logging.getLogger('quantum_weather')


@dataclass(frozen=True)
class Settings:
    """
    Configurações de ambiente.

    Attributes:
        cache_dir: Diretório do cache de respostas do POWER (QWF_CACHE_DIR)
        log_dir: Diretório dos arquivos de log (QWF_LOG_DIR)
        power_url: URL do endpoint diário pontual (QWF_POWER_URL)
        http_timeout: Timeout em segundos por requisição (QWF_HTTP_TIMEOUT)
        http_retries: Tentativas antes de desistir (QWF_HTTP_RETRIES)
    """

    cache_dir: Path
    log_dir: Path
    power_url: str = POWER_DAILY_URL
    http_timeout: float = 60.0
    http_retries: int = 3

    @classmethod
    def from_env(cls) -> 'Settings':
        """Monta as configurações a partir das variáveis de ambiente."""
        return cls(
            cache_dir=Path(os.getenv('QWF_CACHE_DIR', str(PROJECT_ROOT / 'data' / 'cache'))),
            log_dir=Path(os.getenv('QWF_LOG_DIR', str(PROJECT_ROOT / 'logs'))),
            power_url=os.getenv('QWF_POWER_URL', POWER_DAILY_URL),
            http_timeout=float(os.getenv('QWF_HTTP_TIMEOUT', 60)),
            http_retries=int(os.getenv('QWF_HTTP_RETRIES', 3)),
        )


def setup_logging(level: int = logging.INFO, log_dir: Optional[Path] = None) -> logging.Logger:
    """
    Configura o logging do processo (arquivo app.log + console).

    Chamado apenas pelos pontos de entrada; os módulos da biblioteca
    usam somente ``logging.getLogger(__name__)``.

    Args:
        level: Nível mínimo de log
        log_dir: Diretório dos logs (padrão: Settings.from_env().log_dir)

    Returns:
        logging.Logger: Logger raiz do pacote
    """
    if log_dir is None:
        log_dir = Settings.from_env().log_dir
    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(log_dir / 'app.log', encoding='utf-8'),
            logging.StreamHandler()
        ],
        force=True,
    )
    return logger
