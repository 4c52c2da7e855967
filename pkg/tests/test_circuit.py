import numpy as np
import pytest

from qfftsim.circuit import (
    Layer,
    QfftCircuit,
    bit_reversal,
    circuit_from_json,
    circuit_to_json,
    circuit_to_unitary,
    nontrivial_phase_positions,
    perturb_circuit,
    relabeling_swaps,
    set_phases,
    synthesize_qfft,
)
from qfftsim.errors import DomainError, ValidationError
from qfftsim.fourier import qft_matrix
from qfftsim.linalg import fidelity


class TestSynthesis:
    def test_p1_structure(self):
        c = synthesize_qfft(1)
        assert c.m == 2
        assert len(c.layers) == 1
        assert c.layers[0].couplers == ((0, 1),)
        assert c.layers[0].phases == {}
        assert c.output_relabeling == (0, 1)
        assert np.allclose(circuit_to_unitary(c), qft_matrix(2))

    def test_p2_coupler_count(self):
        assert synthesize_qfft(2).coupler_count == 4

    def test_p3_structure(self):
        c = synthesize_qfft(3)
        assert c.coupler_count == 12
        assert relabeling_swaps(c) == [(2, 5), (4, 7)]
        assert nontrivial_phase_positions(c) == [(2, 5), (2, 6), (2, 7), (3, 3), (3, 7)]

    def test_p3_nominal_phase_values(self):
        # regression freeze of the five nominal shifter values
        c = synthesize_qfft(3)
        assert c.layers[0].phases == {}
        assert c.layers[1].phases == pytest.approx(
            {5: np.pi / 4, 6: np.pi / 2, 7: 3 * np.pi / 4}
        )
        assert c.layers[2].phases == pytest.approx({3: np.pi / 2, 7: np.pi / 2})

    @pytest.mark.parametrize("p", range(1, 7))
    def test_composes_to_fourier_matrix(self, p):
        c = synthesize_qfft(p)
        assert fidelity(circuit_to_unitary(c), qft_matrix(2**p)) >= 1 - 1e-10

    @pytest.mark.parametrize("p", range(1, 7))
    def test_coupler_count_formula(self, p):
        assert synthesize_qfft(p).coupler_count == (2**p // 2) * p

    @pytest.mark.parametrize("p", range(1, 7))
    def test_each_layer_pairs_one_bit(self, p):
        c = synthesize_qfft(p)
        for layer in c.layers:
            diffs = {a ^ b for a, b in layer.couplers}
            assert len(diffs) == 1
            bit = diffs.pop()
            assert bit & (bit - 1) == 0  # exactly one bit position
            assert bit == 1 << (p - layer.step)

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            synthesize_qfft(0)
        with pytest.raises(DomainError):
            synthesize_qfft(11)


class TestComposition:
    def test_mode_reuse_rejected(self):
        bad = QfftCircuit(
            p=1,
            m=2,
            layers=(Layer(step=1, couplers=((0, 1), (0, 1))),),
            output_relabeling=(0, 1),
        )
        with pytest.raises(ValidationError):
            circuit_to_unitary(bad)

    def test_uncoupled_mode_rejected(self):
        bad = QfftCircuit(
            p=2,
            m=4,
            layers=(
                Layer(step=1, couplers=((0, 2),)),
                Layer(step=2, couplers=((0, 1), (2, 3))),
            ),
            output_relabeling=(0, 1, 2, 3),
        )
        with pytest.raises(ValidationError):
            circuit_to_unitary(bad)

    def test_result_is_unitary(self):
        from qfftsim.linalg import is_unitary

        rng = np.random.default_rng(5)
        c = synthesize_qfft(3)
        positions = nontrivial_phase_positions(c)
        c = perturb_circuit(c, {pos: rng.uniform(0, 2 * np.pi) for pos in positions})
        assert is_unitary(circuit_to_unitary(c))


class TestPerturbation:
    def test_empty_perturbation_is_identity(self):
        c = synthesize_qfft(3)
        assert np.allclose(circuit_to_unitary(perturb_circuit(c, {})), circuit_to_unitary(c))

    def test_first_layer_phase_acts_on_one_column(self):
        # a phase before any coupler multiplies exactly one column of the matrix
        c = synthesize_qfft(3)
        eps = 0.321
        u0 = circuit_to_unitary(c)
        u1 = circuit_to_unitary(perturb_circuit(c, {(1, 6): eps}))
        expected = u0.copy()
        expected[:, 6] *= np.exp(1j * eps)
        assert np.allclose(u1, expected)

    def test_five_random_phases_break_fidelity(self):
        rng = np.random.default_rng(17)
        c = synthesize_qfft(3)
        errors = {pos: rng.uniform(0.3, 2.0) for pos in nontrivial_phase_positions(c)}
        u = circuit_to_unitary(perturb_circuit(c, errors))
        assert fidelity(u, qft_matrix(8)) < 1 - 1e-6

    def test_perturb_adds_to_nominal(self):
        c = synthesize_qfft(3)
        nominal = c.layers[1].phases[5]
        shifted = perturb_circuit(c, {(2, 5): 0.25})
        assert shifted.layers[1].phases[5] == pytest.approx((nominal + 0.25) % (2 * np.pi))

    def test_set_phases_is_absolute(self):
        c = synthesize_qfft(3)
        fixed = set_phases(c, {(2, 5): 0.25})
        assert fixed.layers[1].phases[5] == pytest.approx(0.25)

    def test_unknown_positions_rejected(self):
        c = synthesize_qfft(2)
        with pytest.raises(DomainError):
            perturb_circuit(c, {(3, 0): 0.1})
        with pytest.raises(DomainError):
            perturb_circuit(c, {(1, 4): 0.1})


class TestBitReversal:
    def test_p3(self):
        assert bit_reversal(3) == (0, 4, 2, 6, 1, 5, 3, 7)

    @pytest.mark.parametrize("p", range(1, 7))
    def test_involution(self, p):
        perm = bit_reversal(p)
        assert all(perm[perm[k]] == k for k in range(len(perm)))


class TestCircuitJson:
    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_round_trip(self, p):
        c = synthesize_qfft(p)
        again = circuit_from_json(circuit_to_json(c))
        assert again == c

    def test_relabeling_serialised_as_swaps(self):
        obj = circuit_to_json(synthesize_qfft(3))
        assert obj["relabeling"] == [[2, 5], [4, 7]]

    def test_modes_are_one_based(self):
        obj = circuit_to_json(synthesize_qfft(2))
        assert obj["layers"][0]["couplers"] == [[1, 3], [2, 4]]
        assert obj["layers"][1]["phases"] == {"4": pytest.approx(np.pi / 2)}

    def test_malformed_rejected(self):
        with pytest.raises(ValidationError):
            circuit_from_json({"p": 1, "m": 2})
