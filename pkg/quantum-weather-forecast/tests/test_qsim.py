"""
Testes para o simulador de vetor de estado (models/qsim.py)

Cobre:
- Preparação de |0...0> e limites de capacidade
- Tabelas-verdade de RY e CNOT (qubit 0 = bit mais significativo)
- Equivalência com produto de matrizes densas (Kronecker)
- Preservação da norma e identidades de portas
- Valor esperado de Z
- Exportação das amplitudes em CSV
"""

from functools import reduce

import numpy as np
import pandas as pd
import pytest

from quantum_weather.errors import CircuitError
from quantum_weather.models.qsim import (
    GateKind,
    GateOp,
    MAX_QUBITS,
    StateVector,
    apply,
    apply_batch,
    dump_amplitudes,
    expval_z,
    gate_matrix,
    load_amplitudes,
    run_circuit,
    zero_batch,
    zero_state,
)

pytestmark = pytest.mark.unit

I2 = np.eye(2, dtype=np.complex128)
P0 = np.array([[1, 0], [0, 0]], dtype=np.complex128)
P1 = np.array([[0, 0], [0, 1]], dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def dense_unitary(gate: GateOp, n: int) -> np.ndarray:
    """Matriz 2^n x 2^n da porta, com o qubit 0 à esquerda do produto de Kronecker."""
    if gate.kind is GateKind.CNOT:
        ramo0 = [P0 if q == gate.control else I2 for q in range(n)]
        ramo1 = [P1 if q == gate.control else X if q == gate.target else I2 for q in range(n)]
        return reduce(np.kron, ramo0) + reduce(np.kron, ramo1)
    fatores = [gate_matrix(gate) if q == gate.target else I2 for q in range(n)]
    return reduce(np.kron, fatores)


def random_gate(rng: np.random.Generator, n: int) -> GateOp:
    opcoes = ['RY', 'RZ', 'ROT'] + (['CNOT'] if n > 1 else [])
    tipo = opcoes[rng.integers(len(opcoes))]
    alvo = int(rng.integers(n))
    if tipo == 'CNOT':
        controle = int(rng.choice([q for q in range(n) if q != alvo]))
        return GateOp.cnot(controle, alvo)
    if tipo == 'ROT':
        return GateOp.rot(alvo, *rng.uniform(-2 * np.pi, 2 * np.pi, 3))
    angulo = float(rng.uniform(-2 * np.pi, 2 * np.pi))
    return GateOp.ry(alvo, angulo) if tipo == 'RY' else GateOp.rz(alvo, angulo)


class TestZeroState:
    """Testes para zero_state()."""

    def test_um_qubit(self):
        np.testing.assert_array_equal(zero_state(1).amplitudes, [1, 0])

    def test_tres_qubits(self):
        estado = zero_state(3)

        assert len(estado.amplitudes) == 8
        assert estado.amplitudes[0] == 1
        assert estado.norm_squared == 1.0

    @pytest.mark.parametrize('n', [0, MAX_QUBITS + 1])
    def test_capacidade(self, n):
        with pytest.raises(CircuitError):
            zero_state(n)

    def test_estado_tamanho_errado(self):
        with pytest.raises(CircuitError):
            StateVector(2, np.zeros(3))

    @pytest.mark.parametrize('n', [0, MAX_QUBITS + 1])
    def test_estado_fora_da_capacidade(self, n):
        with pytest.raises(CircuitError, match='qubits fora'):
            StateVector(n, np.ones(1))


class TestGateOp:
    """Testes de validação de GateOp."""

    def test_cnot_controle_igual_alvo(self):
        with pytest.raises(CircuitError):
            GateOp.cnot(1, 1)

    def test_numero_de_angulos(self):
        with pytest.raises(CircuitError):
            GateOp(GateKind.ROT, 0, angles=(0.1,))

    def test_qubit_fora_do_registrador(self):
        with pytest.raises(CircuitError):
            apply(zero_state(2), GateOp.ry(2, 0.5))


class TestApply:
    """Testes para apply() e apply_batch()."""

    def test_ry_pi(self):
        """RY(pi)|0> = |1>."""
        estado = apply(zero_state(1), GateOp.ry(0, np.pi))
        np.testing.assert_allclose(estado.amplitudes, [0, 1], atol=1e-12)

    def test_tabela_verdade_cnot(self):
        """CNOT(0 -> 1) em |10> resulta em |11>; em |00> nada muda."""
        dez = apply(zero_state(2), GateOp.ry(0, np.pi))
        resultado = apply(dez, GateOp.cnot(0, 1))

        np.testing.assert_allclose(np.abs(resultado.amplitudes), [0, 0, 0, 1], atol=1e-12)
        inalterado = apply(zero_state(2), GateOp.cnot(0, 1))
        np.testing.assert_array_equal(inalterado.amplitudes, zero_state(2).amplitudes)

    def test_bit_mais_significativo(self):
        """Qubit 0 invertido em 3 qubits vai para o índice 4."""
        estado = apply(zero_state(3), GateOp.ry(0, np.pi))
        assert np.argmax(np.abs(estado.amplitudes)) == 4

    def test_cnot_alvo_antes_do_controle(self):
        """CNOT(2 -> 0) em |001> resulta em |101>."""
        estado = apply(zero_state(3), GateOp.ry(2, np.pi))
        estado = apply(estado, GateOp.cnot(2, 0))
        assert np.argmax(np.abs(estado.amplitudes)) == 5

    def test_oraculo_tres_qubits_vinte_portas(self):
        """Circuito aleatório de 20 portas igual ao produto denso 8x8."""
        rng = np.random.default_rng(11)
        portas = [random_gate(rng, 3) for _ in range(20)]

        simulado = run_circuit(3, portas)[0]
        densa = reduce(lambda acc, g: dense_unitary(g, 3) @ acc, portas, np.eye(8, dtype=np.complex128))

        np.testing.assert_allclose(simulado, densa[:, 0], atol=1e-12)

    @pytest.mark.slow
    def test_oraculo_duzentos_circuitos(self):
        """n <= 4, 200 circuitos aleatórios: simulador = matriz densa."""
        rng = np.random.default_rng(12)
        for _ in range(200):
            n = int(rng.integers(1, 5))
            portas = [random_gate(rng, n) for _ in range(int(rng.integers(1, 31)))]
            estado = zero_state(n).amplitudes
            for porta in portas:
                estado = dense_unitary(porta, n) @ estado

            np.testing.assert_allclose(run_circuit(n, portas)[0], estado, atol=1e-12)

    def test_angulos_por_linha(self):
        """Lote com ângulos diferentes por linha equivale a estados separados."""
        angulos = np.array([0.0, 0.7, np.pi])
        lote = apply_batch(zero_batch(2, 3), 2, GateOp.ry(1, angulos))

        for i, t in enumerate(angulos):
            individual = apply(zero_state(2), GateOp.ry(1, float(t)))
            np.testing.assert_allclose(lote[i], individual.amplitudes, atol=1e-15)

    def test_lote_com_tamanho_errado(self):
        with pytest.raises(CircuitError):
            apply_batch(zero_batch(2, 3), 2, GateOp.ry(0, np.zeros(2)))


class TestInvariantes:
    """Norma preservada e identidades de portas."""

    @pytest.mark.slow
    def test_norma_em_dez_mil_portas(self):
        rng = np.random.default_rng(13)
        amps = zero_batch(4, 1)
        for _ in range(10_000):
            amps = apply_batch(amps, 4, random_gate(rng, 4))
            assert abs(np.sum(np.abs(amps) ** 2) - 1.0) <= 1e-10

    def test_cnot_ao_quadrado(self):
        rng = np.random.default_rng(14)
        estado = zero_state(3)
        for porta in [random_gate(rng, 3) for _ in range(8)]:
            estado = apply(estado, porta)

        duas_vezes = apply(apply(estado, GateOp.cnot(0, 2)), GateOp.cnot(0, 2))
        np.testing.assert_allclose(duas_vezes.amplitudes, estado.amplitudes, atol=1e-12)

    def test_ry_inversa(self):
        estado = apply(zero_state(2), GateOp.rot(0, 0.3, 1.1, -0.4))
        ida_e_volta = apply(apply(estado, GateOp.ry(1, 0.9)), GateOp.ry(1, -0.9))
        np.testing.assert_allclose(ida_e_volta.amplitudes, estado.amplitudes, atol=1e-12)

    def test_rot_decomposicao(self):
        """ROT(a, b, g) = RZ(g) . RY(b) . RZ(a)."""
        a, b, g = 0.4, -1.2, 2.5
        rot = apply(zero_state(1), GateOp.rot(0, a, b, g))
        seq = apply(apply(apply(zero_state(1), GateOp.rz(0, a)), GateOp.ry(0, b)), GateOp.rz(0, g))
        np.testing.assert_allclose(rot.amplitudes, seq.amplitudes, atol=1e-12)


class TestExpvalZ:
    """Testes para expval_z()."""

    def test_estado_zero(self):
        assert expval_z(zero_state(1), 0) == 1.0

    @pytest.mark.parametrize('x', [0.0, np.pi / 4, np.pi / 2, np.pi, 1.234, -2.5])
    def test_cosseno(self, x):
        """<Z> de RY(x)|0> = cos(x)."""
        estado = apply(zero_state(1), GateOp.ry(0, x))
        assert expval_z(estado, 0) == pytest.approx(np.cos(x), abs=1e-12)

    def test_superposicao_uniforme(self):
        estado = zero_state(4)
        for q in range(4):
            estado = apply(estado, GateOp.ry(q, np.pi / 2))

        for q in range(4):
            assert expval_z(estado, q) == pytest.approx(0.0, abs=1e-12)

    def test_intervalo(self):
        rng = np.random.default_rng(15)
        amps = run_circuit(3, [random_gate(rng, 3) for _ in range(30)])
        estado = StateVector(3, amps[0])

        for q in range(3):
            assert -1.0 <= expval_z(estado, q) <= 1.0

    def test_qubit_invalido(self):
        with pytest.raises(CircuitError):
            expval_z(zero_state(2), 2)


class TestDumpAmplitudes:
    """Testes para dump_amplitudes() e load_amplitudes()."""

    def test_csv(self, tmp_path):
        estado = apply(apply(zero_state(2), GateOp.ry(0, 0.3)), GateOp.rz(0, 1.7))
        caminho = dump_amplitudes(estado, tmp_path / 'amps.csv')

        frame = pd.read_csv(caminho)
        assert list(frame.columns) == ['index', 're', 'im']
        assert list(frame['index']) == [0, 1, 2, 3]
        np.testing.assert_array_equal(load_amplitudes(caminho).amplitudes, estado.amplitudes)
