"""
Ingestão de Dados Meteorológicos Diários (NASA POWER)

Este módulo busca séries diárias pontuais no serviço NASA POWER e mantém
um cache local em CSV com um arquivo JSON auxiliar (unidades e
procedência). Todo o pipeline pode rodar offline a partir do cache.

Funcionalidades:
- Tipos de domínio GeoPoint, DateRange e DailyDataset
- Cliente HTTP com novas tentativas e cache atômico por hash da requisição
- Conversão do marcador -999 do POWER para valor faltante (NaN)
- Leitura/escrita de fixtures CSV com validação de esquema

Versão: 1.0.0
"""

import hashlib
import io
import json
import logging
import os
import tempfile
import time
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import requests
import yaml
from dateutil.parser import isoparse

from ..config import Settings
from ..errors import (
    DataError,
    LagError,
    MissingParameterError,
    PayloadParseError,
    TransportError,
    ValidationError,
)

logger = logging.getLogger(__name__)

# Marcador de dado ausente usado pela API POWER
MISSING_MARKER = -999.0

PARAMETER_CATALOG_PATH = Path(__file__).parent / 'power_parameters.yaml'

# Códigos HTTP 4xx transitórios: tempo esgotado e limite de requisições
TRANSIENT_STATUS = frozenset({408, 429})

PathLike = Union[str, Path]


@dataclass(frozen=True)
class GeoPoint:
    """Ponto geográfico em graus decimais (norte e leste positivos)."""

    lat_deg: float = -12.15
    lon_deg: float = -44.99

    def __post_init__(self):
        if not np.isfinite(self.lat_deg) or not -90.0 <= self.lat_deg <= 90.0:
            raise ValidationError(f"Latitude fora de [-90, 90]: {self.lat_deg}")
        if not np.isfinite(self.lon_deg) or not -180.0 <= self.lon_deg <= 180.0:
            raise ValidationError(f"Longitude fora de [-180, 180]: {self.lon_deg}")


@dataclass(frozen=True)
class DateRange:
    """Intervalo fechado de datas do calendário gregoriano."""

    start: date
    end: date

    def __post_init__(self):
        for nome, valor in (('start', self.start), ('end', self.end)):
            if isinstance(valor, datetime) or not isinstance(valor, date):
                raise ValidationError(f"{nome} deve ser uma data do calendario: {valor!r}")
        if self.start > self.end:
            raise ValidationError(f"Intervalo invalido: {self.start} > {self.end}")

    @classmethod
    def parse(cls, start: Union[str, date], end: Union[str, date]) -> 'DateRange':
        """Cria o intervalo a partir de datas ISO-8601 (YYYY-MM-DD)."""
        try:
            inicio = start if isinstance(start, date) else isoparse(str(start)).date()
            fim = end if isinstance(end, date) else isoparse(str(end)).date()
        except ValueError as e:
            raise ValidationError(f"Data invalida: {e}") from e
        return cls(inicio, fim)

    @property
    def days(self) -> int:
        """Quantidade de dias no intervalo (extremos inclusos)."""
        return (self.end - self.start).days + 1

    def dates(self) -> pd.DatetimeIndex:
        return pd.date_range(self.start, self.end, freq='D', name='date')


class DailyDataset:
    """
    Tabela diária de séries meteorológicas indexada por data.

    Invariantes:
    - exatamente um valor por data em cada série;
    - datas estritamente crescentes com passo de 1 dia;
    - valores faltantes são NaN (``is_missing``), nunca o marcador -999.

    A instância é imutável: todos os acessores devolvem cópias.
    """

    def __init__(self, frame: pd.DataFrame, units: Optional[Mapping[str, str]] = None):
        if not isinstance(frame.index, pd.DatetimeIndex):
            raise ValidationError("O indice do DailyDataset deve ser um DatetimeIndex")
        if frame.columns.has_duplicates:
            duplicadas = sorted(set(frame.columns[frame.columns.duplicated()]))
            raise ValidationError(f"Colunas duplicadas: {', '.join(map(str, duplicadas))}")

        index = frame.index
        if len(index) == 0:
            raise ValidationError("DailyDataset vazio")
        if (index != index.normalize()).any():
            raise ValidationError("Indice contem horarios; esperado apenas datas")

        passos = np.diff(index.values).astype('timedelta64[D]').astype(np.int64)
        if len(passos):
            if (passos <= 0).any():
                posicao = int(np.argmax(passos <= 0)) + 1
                raise ValidationError(
                    f"Datas nao estritamente crescentes em {index[posicao].date()}"
                )
            if (passos != 1).any():
                posicao = int(np.argmax(passos != 1)) + 1
                raise ValidationError(
                    f"Lacuna de {passos[posicao - 1]} dias antes de {index[posicao].date()}"
                )

        dados = frame.astype(np.float64)
        if (dados.to_numpy() == MISSING_MARKER).any():
            raise ValidationError("Marcador -999 encontrado; converta para faltante antes")

        dados.index = pd.DatetimeIndex(index, name='date')
        self._frame = dados
        self._units = {str(c): str((units or {}).get(c, '')) for c in dados.columns}

    def __len__(self) -> int:
        return len(self._frame)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DailyDataset):
            return NotImplemented
        return self._frame.equals(other._frame) and self._units == other._units

    def __repr__(self) -> str:
        return (
            f"DailyDataset({self.date_range.start}..{self.date_range.end}, "
            f"colunas={list(self.columns)})"
        )

    @property
    def dates(self) -> List[date]:
        return [ts.date() for ts in self._frame.index]

    @property
    def index(self) -> pd.DatetimeIndex:
        return self._frame.index.copy()

    @property
    def columns(self) -> Tuple[str, ...]:
        return tuple(self._frame.columns)

    @property
    def units(self) -> Dict[str, str]:
        return dict(self._units)

    @property
    def date_range(self) -> DateRange:
        return DateRange(self._frame.index[0].date(), self._frame.index[-1].date())

    def column(self, name: str) -> pd.Series:
        if name not in self._frame.columns:
            raise ValidationError(f"Coluna inexistente: {name}")
        return self._frame[name].copy()

    def is_missing(self, name: str) -> pd.Series:
        """Sinalizador explícito de valor faltante por data."""
        return self.column(name).isna()

    def to_frame(self) -> pd.DataFrame:
        return self._frame.copy()

    def select(self, columns: Sequence[str]) -> 'DailyDataset':
        faltantes = [c for c in columns if c not in self._frame.columns]
        if faltantes:
            raise ValidationError(f"Colunas inexistentes: {', '.join(faltantes)}")
        return DailyDataset(self._frame[list(columns)], {c: self._units[c] for c in columns})

    def with_column(self, name: str, values: pd.Series, unit: str = '') -> 'DailyDataset':
        if name in self._frame.columns:
            raise ValidationError(f"Coluna ja existe: {name}")
        frame = self._frame.copy()
        frame[name] = pd.Series(values, index=frame.index, dtype=np.float64)
        units = dict(self._units)
        units[name] = unit
        return DailyDataset(frame, units)

    def slice(self, date_range: DateRange) -> 'DailyDataset':
        """Recorta as linhas do intervalo; o intervalo deve estar contido no dataset."""
        atual = self.date_range
        if date_range.start < atual.start or date_range.end > atual.end:
            raise ValidationError(
                f"Intervalo {date_range.start}..{date_range.end} fora de "
                f"{atual.start}..{atual.end}"
            )
        frame = self._frame.loc[pd.Timestamp(date_range.start):pd.Timestamp(date_range.end)]
        return DailyDataset(frame, self._units)


def extend_for_lag(date_range: DateRange, lag_days: int) -> DateRange:
    """
    Antecipa o início do intervalo em ``lag_days`` dias.

    Garante que toda linha da janela nominal tenha a variável defasada
    definida (ex.: 2023-05-01..2024-04-30 com defasagem 28 vira
    2023-04-03..2024-04-30).
    """
    if lag_days < 0:
        raise LagError(f"Defasagem negativa: {lag_days}")
    return DateRange(date_range.start - timedelta(days=int(lag_days)), date_range.end)


def load_parameter_catalog(path: Optional[PathLike] = None) -> Dict[str, Dict[str, str]]:
    """
    Lê a tabela editável grandeza -> código POWER.

    Returns:
        Dict: ``{grandeza: {'code', 'description', 'unit'}}``
    """
    caminho = Path(path) if path is not None else PARAMETER_CATALOG_PATH
    with open(caminho, encoding='utf-8') as f:
        catalogo = yaml.safe_load(f) or {}
    for nome, entrada in catalogo.items():
        if not isinstance(entrada, dict) or 'code' not in entrada:
            raise ValidationError(f"Entrada sem 'code' no catalogo de parametros: {nome}")
    return catalogo


def resolve_codes(names: Iterable[str], catalog: Mapping[str, Mapping[str, str]]) -> List[str]:
    """Converte grandezas (ou códigos já prontos) em códigos POWER."""
    conhecidos = {str(v['code']) for v in catalog.values()}
    codigos = []
    for nome in names:
        if nome in catalog:
            codigos.append(str(catalog[nome]['code']))
        elif nome in conhecidos:
            codigos.append(nome)
        else:
            raise MissingParameterError([nome], list(catalog.keys()))
    return codigos


def request_key(point: GeoPoint, date_range: DateRange, params: Sequence[str]) -> str:
    """Hash de conteúdo da requisição; nome dos arquivos de cache."""
    canonico = json.dumps(
        {
            'lat': round(float(point.lat_deg), 6),
            'lon': round(float(point.lon_deg), 6),
            'start': date_range.start.isoformat(),
            'end': date_range.end.isoformat(),
            'params': [p.upper() for p in params],
        },
        sort_keys=True,
    )
    return hashlib.sha256(canonico.encode('utf-8')).hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    # Escreve em arquivo temporário no mesmo diretório e renomeia
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def store_fixture(
    dataset: DailyDataset,
    path: PathLike,
    metadata: Optional[Dict[str, Any]] = None
) -> Path:
    """
    Grava o dataset no esquema de cache (CSV + JSON auxiliar).

    CSV: cabeçalho ``date,<code1>,...``; datas ISO-8601; célula vazia para
    faltante; UTF-8 com quebras LF. O JSON guarda unidades e procedência.

    Returns:
        Path: Caminho do CSV gravado
    """
    caminho = Path(path)
    frame = dataset.to_frame()
    frame.index = frame.index.strftime('%Y-%m-%d')
    texto = frame.to_csv(index_label='date', na_rep='', lineterminator='\n')
    atomic_write_text(caminho, texto)

    sidecar = {'units': dataset.units}
    if metadata:
        sidecar.update(metadata)
    atomic_write_text(
        caminho.with_suffix('.json'),
        json.dumps(sidecar, indent=2, sort_keys=True, ensure_ascii=False) + '\n'
    )
    return caminho


def load_fixture(path: PathLike) -> DailyDataset:
    """
    Lê um CSV no esquema de cache e valida suas invariantes.

    Args:
        path: Caminho do CSV (o JSON auxiliar, se existir, fornece as unidades)

    Returns:
        DailyDataset: Dataset idêntico ao que foi gravado por store_fixture

    Raises:
        PayloadParseError: Violação de esquema, com o número da linha
        ValidationError: Datas duplicadas, fora de ordem ou com lacunas
    """
    caminho = Path(path)
    if not caminho.exists():
        raise DataError(f"Fixture inexistente: {caminho}")
    texto = caminho.read_text(encoding='utf-8')
    linhas = texto.split('\n')
    cabecalho = linhas[0].rstrip('\r').split(',') if linhas else ['']

    if cabecalho[0] != 'date':
        raise PayloadParseError("Cabecalho deve comecar com 'date'", field='date', line=1)
    if len(cabecalho) < 2:
        raise PayloadParseError("Nenhuma coluna de dados no cabecalho", line=1)
    if len(set(cabecalho)) != len(cabecalho):
        raise ValidationError(f"Colunas duplicadas no cabecalho de {caminho.name}")

    # Só a quebra de linha final pode deixar uma linha vazia
    for numero, linha in enumerate(linhas[:-1], start=1):
        if not linha.rstrip('\r'):
            raise PayloadParseError("Linha vazia no meio do arquivo", line=numero)

    try:
        bruto = pd.read_csv(
            io.StringIO(texto), dtype=str, keep_default_na=False, skip_blank_lines=False
        )
    except pd.errors.ParserError as e:
        raise PayloadParseError(f"CSV mal formado: {e}") from e

    incompletas = bruto.isna().any(axis=1)
    if incompletas.any():
        linha = int(np.argmax(incompletas.to_numpy())) + 2
        raise PayloadParseError("Linha com numero de campos menor que o cabecalho", line=linha)

    datas = pd.to_datetime(bruto['date'], format='%Y-%m-%d', errors='coerce')
    if datas.isna().any():
        linha = int(np.argmax(datas.isna().to_numpy())) + 2
        raise PayloadParseError("Data invalida", field='date', line=linha)

    valores = {}
    for coluna in cabecalho[1:]:
        serie = np.empty(len(bruto), dtype=np.float64)
        for i, celula in enumerate(bruto[coluna]):
            if celula == '':
                serie[i] = np.nan
                continue
            try:
                # float() arredonda corretamente; garante ida e volta exata
                serie[i] = float(celula)
            except ValueError as e:
                raise PayloadParseError("Valor nao numerico", field=coluna, line=i + 2) from e
            if not np.isfinite(serie[i]):
                raise PayloadParseError("Valor nao finito", field=coluna, line=i + 2)
        valores[coluna] = serie

    frame = pd.DataFrame(valores, index=pd.DatetimeIndex(datas, name='date'))

    units = {}
    sidecar = caminho.with_suffix('.json')
    if sidecar.exists():
        with open(sidecar, encoding='utf-8') as f:
            units = json.load(f).get('units', {})

    return DailyDataset(frame, units)


class PowerClient:
    """
    Cliente do endpoint diário pontual da NASA POWER com cache local.

    Requisições idênticas (ponto, intervalo, parâmetros) são servidas do
    cache sem nova chamada de rede. Em modo offline apenas o cache é usado.

    Exemplo de uso:
        >>> client = PowerClient(offline=False)
        >>> ds = client.fetch_daily(
        ...     GeoPoint(-12.15, -44.99),
        ...     DateRange.parse('2023-05-01', '2024-04-30'),
        ...     ['T2M']
        ... )
    """

    def __init__(
        self,
        cache_dir: Optional[PathLike] = None,
        settings: Optional[Settings] = None,
        session: Optional[requests.Session] = None,
        offline: bool = False,
        backoff: float = 2.0
    ):
        self.settings = settings or Settings.from_env()
        self.cache_dir = Path(cache_dir) if cache_dir is not None else self.settings.cache_dir
        self.session = session or requests.Session()
        self.offline = offline
        self.backoff = backoff

    def cache_path(self, key: str) -> Path:
        return self.cache_dir / f'power_{key}.csv'

    def has_cached(self, point: GeoPoint, date_range: DateRange, params: Sequence[str]) -> bool:
        return self.cache_path(request_key(point, date_range, params)).exists()

    def fetch_daily(
        self,
        point: GeoPoint,
        date_range: DateRange,
        params: Sequence[str]
    ) -> DailyDataset:
        """
        Busca as séries diárias, consultando o cache antes da rede.

        Args:
            point: Ponto geográfico
            date_range: Intervalo de datas (extremos inclusos)
            params: Códigos POWER (ex.: ['T2M', 'WS10M'])

        Returns:
            DailyDataset: Uma linha por dia do intervalo

        Raises:
            TransportError: Falha de rede após todas as tentativas
            PayloadParseError: Resposta fora do esquema
            MissingParameterError: Código ausente na resposta
        """
        if not params:
            raise ValidationError("Lista de parametros vazia")
        codigos = [p.upper() for p in params]
        chave = request_key(point, date_range, codigos)
        caminho = self.cache_path(chave)

        if caminho.exists():
            logger.info(f"Cache encontrado: {caminho.name}")
            return load_fixture(caminho)

        if self.offline:
            raise DataError(
                f"Cache ausente em modo offline para {date_range.start}..{date_range.end} "
                f"[{','.join(codigos)}] (request_key={chave})"
            )

        payload = self._download(point, date_range, codigos, chave)
        dataset = parse_power_payload(payload, date_range, codigos)

        store_fixture(dataset, caminho, metadata={
            'request_key': chave,
            'source': self.settings.power_url,
            'latitude': point.lat_deg,
            'longitude': point.lon_deg,
            'start': date_range.start.isoformat(),
            'end': date_range.end.isoformat(),
            'parameters': codigos,
        })
        logger.info(f"Resposta do POWER gravada em cache: {caminho.name} ({len(dataset)} dias)")

        # Relê do cache para garantir identidade com o caminho offline
        return load_fixture(caminho)

    def _download(
        self,
        point: GeoPoint,
        date_range: DateRange,
        codigos: List[str],
        chave: str
    ) -> Dict[str, Any]:
        query = {
            'parameters': ','.join(codigos),
            'community': 'RE',
            'latitude': point.lat_deg,
            'longitude': point.lon_deg,
            'start': date_range.start.strftime('%Y%m%d'),
            'end': date_range.end.strftime('%Y%m%d'),
            'format': 'JSON',
        }
        tentativas = max(1, int(self.settings.http_retries))
        ultimo_erro: Optional[Exception] = None

        for tentativa in range(1, tentativas + 1):
            try:
                resposta = self.session.get(
                    self.settings.power_url, params=query, timeout=self.settings.http_timeout
                )
                resposta.raise_for_status()
            except requests.HTTPError as e:
                status = getattr(e.response, 'status_code', None)
                if status is not None and 400 <= status < 500 and status not in TRANSIENT_STATUS:
                    # Erro do cliente: repetir não muda o resultado
                    raise DataError(
                        f"Requisicao rejeitada pelo POWER (HTTP {status}): {e}"
                    ) from e
                ultimo_erro = e
            except requests.RequestException as e:
                ultimo_erro = e
            else:
                try:
                    return resposta.json()
                except ValueError as e:
                    raise PayloadParseError("Resposta nao e JSON valido", field='<body>') from e

            logger.warning(
                f"Falha na tentativa {tentativa}/{tentativas} ao consultar o POWER: {ultimo_erro}"
            )
            if tentativa < tentativas:
                espera = _retry_after(ultimo_erro)
                if espera is None:
                    espera = self.backoff * tentativa
                if espera > 0:
                    time.sleep(espera)

        logger.error(f"POWER indisponivel apos {tentativas} tentativas")
        raise TransportError(f"Falha de rede ao consultar o POWER: {ultimo_erro}", chave)


def _retry_after(erro: Optional[Exception]) -> Optional[float]:
    """Segundos pedidos pelo servidor no cabeçalho Retry-After, se houver."""
    resposta = getattr(erro, 'response', None)
    if resposta is None:
        return None
    try:
        valor = resposta.headers.get('Retry-After')
        return max(0.0, float(valor)) if valor is not None else None
    except (AttributeError, TypeError, ValueError):
        return None


def parse_power_payload(
    payload: Dict[str, Any],
    date_range: DateRange,
    params: Sequence[str]
) -> DailyDataset:
    """
    Converte o JSON do POWER em DailyDataset.

    O marcador de faltante (``header.fill_value``, padrão -999) vira NaN.
    """
    try:
        bloco = payload['properties']['parameter']
    except (KeyError, TypeError) as e:
        raise PayloadParseError("Bloco de parametros ausente", field='properties.parameter') from e
    if not isinstance(bloco, dict):
        raise PayloadParseError("Bloco de parametros nao e um objeto", field='properties.parameter')

    ausentes = [p for p in params if p not in bloco]
    if ausentes:
        raise MissingParameterError(ausentes, bloco.keys())

    header = payload.get('header') if isinstance(payload.get('header'), dict) else {}
    fill_value = header.get('fill_value', MISSING_MARKER)
    datas = date_range.dates()
    chaves = [d.strftime('%Y%m%d') for d in datas]

    colunas = {}
    for codigo in params:
        serie = bloco[codigo]
        campo = f'properties.parameter.{codigo}'
        if not isinstance(serie, dict):
            raise PayloadParseError("Serie nao e um objeto data->valor", field=campo)
        valores = np.empty(len(chaves), dtype=np.float64)
        for i, chave in enumerate(chaves):
            if chave not in serie:
                raise PayloadParseError("Data ausente na serie", field=f'{campo}.{chave}')
            bruto = serie[chave]
            try:
                valor = float(bruto)
            except (TypeError, ValueError) as e:
                raise PayloadParseError(
                    f"Valor nao numerico: {bruto!r}", field=f'{campo}.{chave}'
                ) from e
            if valor == fill_value or valor == MISSING_MARKER or not np.isfinite(valor):
                valor = np.nan
            valores[i] = valor
        colunas[codigo] = valores

    metadados = payload.get('parameters') if isinstance(payload.get('parameters'), dict) else {}
    units = {}
    for codigo in params:
        info = metadados.get(codigo)
        units[codigo] = str(info.get('units', '')) if isinstance(info, dict) else ''
    faltantes = int(sum(np.isnan(v).sum() for v in colunas.values()))
    if faltantes:
        logger.warning(f"{faltantes} valores faltantes (marcador {fill_value}) na resposta do POWER")

    return DailyDataset(pd.DataFrame(colunas, index=datas), units)


def fetch_daily(
    point: GeoPoint,
    date_range: DateRange,
    params: Sequence[str],
    client: Optional[PowerClient] = None
) -> DailyDataset:
    """Atalho para ``PowerClient().fetch_daily``."""
    return (client or PowerClient()).fetch_daily(point, date_range, params)
