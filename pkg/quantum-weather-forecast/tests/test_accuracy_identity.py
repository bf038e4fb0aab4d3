"""
Conferência da definição de acurácia contra a tabela de referência.

A acurácia é definida como 100 * (1 - MAE). Os pares abaixo são os pares
MAE e acurácia de referência dos estudos de temperatura e vento. Na linha
da RNN de temperatura a tabela traz MAE 0.357, mas a acurácia 65.3 só é
consistente com MAE 0.347; usamos 0.347.
"""

import pytest

from quantum_weather.services.trainer import accuracy_pct

pytestmark = pytest.mark.unit

REFERENCIA = [
    # temperatura
    ('temperature', 'qnn_exp1_d1', 0.394, 60.6),
    ('temperature', 'qnn_exp1_d3', 0.338, 66.2),
    ('temperature', 'qnn_exp1_d5', 0.364, 63.6),
    ('temperature', 'qnn_exp2_d1', 0.304, 69.6),
    ('temperature', 'qnn_exp2_d3', 0.336, 66.4),
    ('temperature', 'qnn_exp2_d5', 0.355, 64.5),
    ('temperature', 'rnn', 0.347, 65.3),
    # vento
    ('wind', 'qnn_exp1_d1', 0.158, 84.2),
    ('wind', 'qnn_exp1_d3', 0.156, 84.4),
    ('wind', 'qnn_exp1_d5', 0.174, 82.6),
    ('wind', 'qnn_exp2_d1', 0.201, 79.9),
    ('wind', 'qnn_exp2_d3', 0.168, 83.2),
    ('wind', 'qnn_exp2_d5', 0.172, 82.8),
    ('wind', 'rnn', 0.167, 83.3),
]


@pytest.mark.parametrize('alvo, modelo, mae, acuracia', REFERENCIA)
def test_acuracia_de_referencia(alvo, modelo, mae, acuracia):
    """100 * (1 - MAE) reproduz a acurácia de referência em +-0.05 ponto."""
    assert abs(accuracy_pct(mae) - acuracia) <= 0.05


def test_linha_tabelada_da_rnn_diverge():
    """O MAE tabelado 0.357 não reproduz 65.3; a divergência fica registrada."""
    assert abs(accuracy_pct(0.357) - 65.3) > 0.05


@pytest.mark.parametrize('mae, acuracia', [(0.357, 64.3), (0.347, 65.3)])
def test_linha_da_rnn_de_temperatura(mae, acuracia):
    """Os dois MAE citados para a RNN de temperatura seguem a mesma definição."""
    assert accuracy_pct(mae) == pytest.approx(acuracia, abs=1e-9)
