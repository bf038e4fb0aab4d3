"""
Testes para o módulo de ingestão (data/ingest.py)

Cobre:
- Tipos de domínio (GeoPoint, DateRange, DailyDataset)
- Conversão do payload JSON do POWER
- Cache local e modo offline
- Gravação e leitura de fixtures CSV
- Repetição de requisições e erros de transporte
"""

from datetime import date
from unittest.mock import MagicMock

import numpy as np
import pandas as pd
import pytest
import requests

from quantum_weather.data.ingest import (
    DailyDataset,
    DateRange,
    GeoPoint,
    PowerClient,
    extend_for_lag,
    load_fixture,
    load_parameter_catalog,
    parse_power_payload,
    request_key,
    resolve_codes,
    store_fixture,
)
from quantum_weather.errors import (
    DataError,
    LagError,
    MissingParameterError,
    PayloadParseError,
    TransportError,
    ValidationError,
)

pytestmark = pytest.mark.unit

PONTO = GeoPoint(-12.15, -44.99)


class TestTiposDeDominio:
    """Testes para GeoPoint, DateRange e DailyDataset."""

    @pytest.mark.parametrize('lat, lon', [(91.0, 0.0), (-90.5, 0.0), (0.0, 181.0), (float('nan'), 0.0)])
    def test_geopoint_invalido(self, lat, lon):
        """Coordenadas fora da faixa são rejeitadas."""
        with pytest.raises(ValidationError):
            GeoPoint(lat, lon)

    def test_date_range_parse_e_dias(self):
        """Intervalo fechado conta os dois extremos."""
        intervalo = DateRange.parse('2023-05-01', '2024-04-30')

        assert intervalo.start == date(2023, 5, 1)
        assert intervalo.days == 366
        assert len(intervalo.dates()) == 366

    def test_date_range_invertido(self):
        """start > end é inválido."""
        with pytest.raises(ValidationError):
            DateRange(date(2024, 1, 2), date(2024, 1, 1))

    def test_date_range_data_invalida(self):
        """Data ISO inválida vira ValidationError."""
        with pytest.raises(ValidationError):
            DateRange.parse('2023-02-30', '2023-03-01')

    def test_dataset_rejeita_lacuna(self, weather_frame):
        """Datas não consecutivas violam a invariante de passo diário."""
        frame = weather_frame.drop(weather_frame.index[10])

        with pytest.raises(ValidationError, match='Lacuna'):
            DailyDataset(frame)

    def test_dataset_rejeita_ordem_e_duplicatas(self, weather_frame):
        """Linhas embaralhadas ou repetidas são rejeitadas."""
        embaralhado = weather_frame.iloc[[1, 0] + list(range(2, 20))]
        duplicado = pd.concat([weather_frame.iloc[:5], weather_frame.iloc[4:6]])

        with pytest.raises(ValidationError):
            DailyDataset(embaralhado)
        with pytest.raises(ValidationError):
            DailyDataset(duplicado)

    def test_dataset_rejeita_marcador(self, weather_frame):
        """O marcador -999 nunca pode chegar ao dataset."""
        frame = weather_frame.copy()
        frame.iloc[3, 0] = -999.0

        with pytest.raises(ValidationError, match='-999'):
            DailyDataset(frame)

    def test_slice_e_select(self, weather_dataset):
        """Recortes preservam colunas e unidades."""
        recorte = weather_dataset.slice(DateRange.parse('2023-02-01', '2023-02-10'))
        selecao = recorte.select(['T2M'])

        assert len(recorte) == 10
        assert selecao.columns == ('T2M',)
        assert selecao.units == {'T2M': 'C'}

    def test_slice_fora_do_intervalo(self, weather_dataset):
        """Intervalo não contido no dataset é rejeitado."""
        with pytest.raises(ValidationError):
            weather_dataset.slice(DateRange.parse('2022-12-31', '2023-01-10'))


class TestExtendForLag:
    """Testes para extend_for_lag()."""

    def test_exemplo_temperatura(self):
        """Janela de 366 dias com defasagem 28."""
        estendido = extend_for_lag(DateRange.parse('2023-05-01', '2024-04-30'), 28)

        assert estendido.start == date(2023, 4, 3)
        assert estendido.end == date(2024, 4, 30)

    def test_exemplo_vento(self):
        """Janela de 366 dias com defasagem 6."""
        estendido = extend_for_lag(DateRange.parse('2023-05-01', '2024-04-30'), 6)

        assert estendido.start == date(2023, 4, 25)

    def test_defasagem_negativa(self):
        with pytest.raises(LagError):
            extend_for_lag(DateRange.parse('2023-05-01', '2024-04-30'), -1)


class TestCatalogo:
    """Testes para o catálogo grandeza -> código POWER."""

    def test_resolve_grandezas_e_codigos(self):
        """Aceita nomes do catálogo ou códigos já prontos."""
        catalogo = load_parameter_catalog()

        assert resolve_codes(['temperature', 'WS10M'], catalogo) == ['T2M', 'WS10M']

    def test_grandeza_desconhecida(self):
        catalogo = load_parameter_catalog()

        with pytest.raises(MissingParameterError):
            resolve_codes(['neve'], catalogo)


class TestParsePowerPayload:
    """Testes para parse_power_payload()."""

    def test_converte_marcador_para_nan(self, power_payload_factory):
        """-999 vira NaN e é sinalizado por is_missing."""
        intervalo = DateRange.parse('2023-05-01', '2023-05-10')
        payload = power_payload_factory(
            intervalo, ['T2M', 'WS10M'], overrides={('T2M', '2023-05-03'): -999.0}
        )

        ds = parse_power_payload(payload, intervalo, ['T2M', 'WS10M'])

        assert len(ds) == 10
        assert ds.columns == ('T2M', 'WS10M')
        assert ds.is_missing('T2M').sum() == 1
        assert np.isnan(ds.column('T2M').loc['2023-05-03'])
        assert ds.units['T2M'] == 'C'

    def test_parametro_ausente(self, power_payload_factory):
        intervalo = DateRange.parse('2023-05-01', '2023-05-03')
        payload = power_payload_factory(intervalo, ['T2M'])

        with pytest.raises(MissingParameterError, match='WS10M'):
            parse_power_payload(payload, intervalo, ['T2M', 'WS10M'])

    def test_data_ausente(self, power_payload_factory):
        """Série sem uma das datas pedidas é erro de esquema."""
        intervalo = DateRange.parse('2023-05-01', '2023-05-03')
        payload = power_payload_factory(intervalo, ['T2M'])
        del payload['properties']['parameter']['T2M']['20230502']

        with pytest.raises(PayloadParseError, match='20230502'):
            parse_power_payload(payload, intervalo, ['T2M'])

    def test_payload_sem_bloco(self):
        with pytest.raises(PayloadParseError):
            parse_power_payload({'messages': []}, DateRange.parse('2023-05-01', '2023-05-02'), ['T2M'])


class TestFixtures:
    """Testes para store_fixture() e load_fixture()."""

    def test_ida_e_volta_exata(self, weather_dataset, tmp_path):
        """Gravar e reler devolve um dataset idêntico."""
        frame = weather_dataset.to_frame()
        frame.iloc[5, 1] = np.nan
        frame.iloc[7, 0] = 0.1 + 0.2
        original = DailyDataset(frame, weather_dataset.units)

        caminho = store_fixture(original, tmp_path / 'fixture.csv')
        relido = load_fixture(caminho)

        assert relido == original

    def test_formato_csv(self, weather_dataset, tmp_path):
        """Cabeçalho date,..., datas ISO e célula vazia para faltante."""
        frame = weather_dataset.to_frame().iloc[:3][['T2M']]
        frame.iloc[1, 0] = np.nan
        caminho = store_fixture(DailyDataset(frame), tmp_path / 'f.csv')

        linhas = caminho.read_text(encoding='utf-8').split('\n')

        assert linhas[0] == 'date,T2M'
        assert linhas[2] == '2023-01-02,'
        assert linhas[1].startswith('2023-01-01,')

    def test_linha_embaralhada(self, tmp_path):
        """Datas fora de ordem no CSV são rejeitadas."""
        caminho = tmp_path / 'f.csv'
        caminho.write_text('date,T2M\n2023-01-02,1.0\n2023-01-01,2.0\n', encoding='utf-8')

        with pytest.raises(ValidationError):
            load_fixture(caminho)

    def test_linha_duplicada(self, tmp_path):
        caminho = tmp_path / 'f.csv'
        caminho.write_text('date,T2M\n2023-01-01,1.0\n2023-01-01,2.0\n', encoding='utf-8')

        with pytest.raises(ValidationError):
            load_fixture(caminho)

    def test_valor_nao_numerico_informa_linha(self, tmp_path):
        caminho = tmp_path / 'f.csv'
        caminho.write_text('date,T2M\n2023-01-01,1.0\n2023-01-02,abc\n', encoding='utf-8')

        with pytest.raises(PayloadParseError) as exc:
            load_fixture(caminho)
        assert exc.value.line == 3
        assert exc.value.field == 'T2M'

    def test_linha_vazia_informa_linha_fisica(self, tmp_path):
        """Linha vazia no meio é rejeitada com o número da linha no arquivo."""
        caminho = tmp_path / 'f.csv'
        caminho.write_text('date,T2M\n2023-05-01,1.0\n\n2023-05-02,2.0\n2023-05-03,x\n', encoding='utf-8')

        with pytest.raises(PayloadParseError) as exc:
            load_fixture(caminho)
        assert exc.value.line == 3

    def test_linha_vazia_nao_desloca_numeracao(self, tmp_path):
        caminho = tmp_path / 'f.csv'
        caminho.write_text('date,T2M\n2023-05-01,1.0\n2023-05-02,2.0\n2023-05-03,x\n', encoding='utf-8')

        with pytest.raises(PayloadParseError) as exc:
            load_fixture(caminho)
        assert exc.value.line == 4

    def test_cabecalho_invalido(self, tmp_path):
        caminho = tmp_path / 'f.csv'
        caminho.write_text('dia,T2M\n2023-01-01,1.0\n', encoding='utf-8')

        with pytest.raises(PayloadParseError):
            load_fixture(caminho)


class TestPowerClient:
    """Testes para PowerClient.fetch_daily()."""

    def test_cache_evita_segunda_chamada(self, test_settings, mock_session, power_payload_factory):
        """A segunda busca idêntica é servida do cache."""
        intervalo = DateRange.parse('2023-05-01', '2023-05-31')
        mock_session.get.return_value.json.return_value = power_payload_factory(intervalo, ['T2M', 'WS10M'])
        client = PowerClient(settings=test_settings, session=mock_session, backoff=0)

        primeiro = client.fetch_daily(PONTO, intervalo, ['T2M', 'WS10M'])
        segundo = client.fetch_daily(PONTO, intervalo, ['T2M', 'WS10M'])

        assert mock_session.get.call_count == 1
        assert primeiro == segundo
        assert client.has_cached(PONTO, intervalo, ['T2M', 'WS10M'])

    def test_parametros_da_requisicao(self, test_settings, mock_session, power_payload_factory):
        intervalo = DateRange.parse('2023-05-01', '2023-05-05')
        mock_session.get.return_value.json.return_value = power_payload_factory(intervalo, ['T2M'])
        client = PowerClient(settings=test_settings, session=mock_session, backoff=0)

        client.fetch_daily(PONTO, intervalo, ['t2m'])

        _, kwargs = mock_session.get.call_args
        assert kwargs['params']['parameters'] == 'T2M'
        assert kwargs['params']['start'] == '20230501'
        assert kwargs['params']['end'] == '20230505'
        assert kwargs['params']['community'] == 'RE'

    def test_offline_sem_cache(self, test_settings, mock_session):
        """Modo offline sem cache falha sem acessar a rede."""
        client = PowerClient(settings=test_settings, session=mock_session, offline=True)

        with pytest.raises(DataError, match='offline'):
            client.fetch_daily(PONTO, DateRange.parse('2023-05-01', '2023-05-05'), ['T2M'])
        mock_session.get.assert_not_called()

    def test_offline_com_cache(self, test_settings, mock_session, weather_dataset):
        """Cache pré-populado é usado em modo offline."""
        intervalo = DateRange.parse('2023-01-01', '2023-01-31')
        dados = weather_dataset.slice(intervalo).select(['T2M'])
        client = PowerClient(settings=test_settings, session=mock_session, offline=True)
        store_fixture(dados, client.cache_path(request_key(PONTO, intervalo, ['T2M'])))

        ds = client.fetch_daily(PONTO, intervalo, ['T2M'])

        assert ds == dados
        mock_session.get.assert_not_called()

    def test_repeticoes_e_transport_error(self, test_settings, mock_session):
        """Falhas de rede são repetidas até o limite e viram TransportError."""
        mock_session.get.side_effect = requests.ConnectionError('sem rede')
        client = PowerClient(settings=test_settings, session=mock_session, backoff=0)
        intervalo = DateRange.parse('2023-05-01', '2023-05-05')

        with pytest.raises(TransportError) as exc:
            client.fetch_daily(PONTO, intervalo, ['T2M'])

        assert mock_session.get.call_count == test_settings.http_retries
        assert exc.value.request_key == request_key(PONTO, intervalo, ['T2M'])
        assert not client.has_cached(PONTO, intervalo, ['T2M'])

    def test_recupera_apos_falha(self, test_settings, mock_session, power_payload_factory):
        """Uma falha transitória seguida de sucesso devolve os dados."""
        intervalo = DateRange.parse('2023-05-01', '2023-05-05')
        resposta = MagicMock()
        resposta.raise_for_status.return_value = None
        resposta.json.return_value = power_payload_factory(intervalo, ['T2M'])
        mock_session.get.side_effect = [requests.Timeout('lento'), resposta]
        client = PowerClient(settings=test_settings, session=mock_session, backoff=0)

        ds = client.fetch_daily(PONTO, intervalo, ['T2M'])

        assert len(ds) == 5
        assert mock_session.get.call_count == 2

    def test_erro_4xx_nao_repete(self, test_settings, mock_session):
        """Erros do cliente não são repetidos."""
        resposta_erro = MagicMock(status_code=422)
        mock_session.get.return_value.raise_for_status.side_effect = requests.HTTPError(
            'Unprocessable', response=resposta_erro
        )
        client = PowerClient(settings=test_settings, session=mock_session, backoff=0)

        with pytest.raises(DataError, match='422'):
            client.fetch_daily(PONTO, DateRange.parse('2023-05-01', '2023-05-05'), ['T2M'])
        assert mock_session.get.call_count == 1

    @pytest.mark.parametrize('status', [408, 429])
    def test_4xx_transitorio_repete(self, test_settings, mock_session, status):
        """Tempo esgotado e limite de requisições entram no laço de repetição."""
        resposta_erro = MagicMock(status_code=status, headers={})
        mock_session.get.return_value.raise_for_status.side_effect = requests.HTTPError(
            'Too Many Requests', response=resposta_erro
        )
        client = PowerClient(settings=test_settings, session=mock_session, backoff=0)
        intervalo = DateRange.parse('2023-05-01', '2023-05-05')

        with pytest.raises(TransportError) as exc:
            client.fetch_daily(PONTO, intervalo, ['T2M'])

        assert mock_session.get.call_count == test_settings.http_retries
        assert exc.value.request_key == request_key(PONTO, intervalo, ['T2M'])

    def test_respeita_retry_after(self, test_settings, mock_session, power_payload_factory, mocker):
        intervalo = DateRange.parse('2023-05-01', '2023-05-05')
        limitada = MagicMock()
        limitada.raise_for_status.side_effect = requests.HTTPError(
            'Too Many Requests', response=MagicMock(status_code=429, headers={'Retry-After': '7'})
        )
        resposta = MagicMock()
        resposta.raise_for_status.return_value = None
        resposta.json.return_value = power_payload_factory(intervalo, ['T2M'])
        mock_session.get.side_effect = [limitada, resposta]
        sleep = mocker.patch('quantum_weather.data.ingest.time.sleep')
        client = PowerClient(settings=test_settings, session=mock_session, backoff=0)

        ds = client.fetch_daily(PONTO, intervalo, ['T2M'])

        assert len(ds) == 5
        sleep.assert_called_once_with(7.0)

    def test_request_key_canonica(self):
        """Mesma requisição gera a mesma chave; intervalos diferentes não."""
        a = request_key(PONTO, DateRange.parse('2023-05-01', '2023-05-05'), ['T2M'])
        b = request_key(PONTO, DateRange.parse('2023-05-01', '2023-05-05'), ['t2m'])
        c = request_key(PONTO, DateRange.parse('2023-05-01', '2023-05-06'), ['T2M'])

        assert a == b
        assert a != c
