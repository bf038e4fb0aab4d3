"""
Hierarquia de exceções do projeto.

Cada classe de falha carrega um ``exit_code`` usado pela linha de comando:
configuração (2), dados (3), treinamento (4) e relatório (5).
"""

from typing import Iterable, Optional


class QuantumWeatherError(Exception):
    """Erro base de todo o pacote."""

    exit_code = 1
    stage = 'geral'


class ConfigError(QuantumWeatherError, ValueError):
    """Arquivo de configuração inválido ou inconsistente."""

    exit_code = 2
    stage = 'configuracao'


class DataError(QuantumWeatherError):
    """Falha de ingestão ou pré-processamento."""

    exit_code = 3
    stage = 'dados'


class TransportError(DataError):
    """
    Falha de rede ao consultar o serviço POWER.

    Attributes:
        request_key: Hash da requisição que falhou (chave do cache)
        retriable: Sempre True; a mesma requisição pode ser repetida
    """

    retriable = True

    def __init__(self, message: str, request_key: str):
        super().__init__(f"{message} (request_key={request_key})")
        self.request_key = request_key


class PayloadParseError(DataError, ValueError):
    """Payload JSON ou CSV de cache fora do esquema esperado."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        detalhes = []
        if field is not None:
            detalhes.append(f"campo={field}")
        if line is not None:
            detalhes.append(f"linha={line}")
        sufixo = f" ({', '.join(detalhes)})" if detalhes else ""
        super().__init__(f"{message}{sufixo}")
        self.field = field
        self.line = line


class MissingParameterError(DataError, KeyError):
    """Parâmetro solicitado não está presente na resposta."""

    def __init__(self, missing: Iterable[str], available: Iterable[str]):
        self.missing = sorted(missing)
        self.available = sorted(available)
        super().__init__(
            f"Parametros ausentes: {', '.join(self.missing)}; "
            f"disponiveis: {', '.join(self.available) or '(nenhum)'}"
        )

    def __str__(self) -> str:
        # KeyError.__str__ colocaria a mensagem entre aspas
        return str(self.args[0])


class ValidationError(DataError, ValueError):
    """Violação de invariante de um tipo de domínio."""


class CorrelationError(DataError, ValueError):
    """Correlação de Pearson indefinida."""


class NoSignificantFeatureError(DataError):
    """Nenhuma variável atinge o limiar de correlação com o alvo."""


class LagError(DataError, ValueError):
    """Defasagem inválida ou histórico insuficiente."""


class ScalerError(DataError, ValueError):
    """Coluna sem variância no conjunto de treino."""


class SplitError(DataError, ValueError):
    """Divisão treino/teste impossível ou linhas com dados faltantes."""


class CircuitError(QuantumWeatherError, ValueError):
    """Circuito mal formado: capacidade, ligação de qubits ou dimensões."""

    exit_code = 4
    stage = 'treinamento'


class ModelShapeError(QuantumWeatherError, ValueError):
    """Dimensões incompatíveis na rede recorrente."""

    exit_code = 4
    stage = 'treinamento'


class TrainingError(QuantumWeatherError):
    """Treinamento abortado (perda ou gradiente não finito)."""

    exit_code = 4
    stage = 'treinamento'

    def __init__(self, message: str, epoch: Optional[int] = None, batch: Optional[int] = None):
        coordenadas = []
        if epoch is not None:
            coordenadas.append(f"epoca={epoch}")
        if batch is not None:
            coordenadas.append(f"lote={batch}")
        sufixo = f" ({', '.join(coordenadas)})" if coordenadas else ""
        super().__init__(f"{message}{sufixo}")
        self.epoch = epoch
        self.batch = batch


class ReportError(QuantumWeatherError):
    """Falha ao agregar ou emitir artefatos de relatório."""

    exit_code = 5
    stage = 'relatorio'
