"""
Quantum Weather Forecast
Previsão meteorológica diária com redes neurais quânticas variacionais
simuladas e uma rede recorrente clássica como referência.
"""

__version__ = "1.0.0"

from .config import logger
from .errors import QuantumWeatherError

__all__ = ['logger', 'QuantumWeatherError']
