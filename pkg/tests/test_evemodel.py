"""
Attacks: decomposition into probe states, symmetrization, presets, attack files
"""

import numpy as np
import pytest

from qkd_security.components.evemodel import (
    PRESETS,
    MeasurementContext,
    channel_prob,
    channel_prob_vector,
    cnot_probe_attack,
    conditional_probes,
    decompose,
    error_distribution,
    SymmetrizedAttack,
    identity_attack,
    info_posterior,
    intercept_resend,
    jt_probabilities,
    load_attack,
    preset_by_name,
    probe_matrix,
    random_attack,
    save_attack,
    swap_attack,
    sym_probe_overlaps,
    symmetrize,
    symmetrized_probe_formula,
)
from qkd_security.logging_exception import (
    ConfigError,
    DimensionMismatchError,
    ImpossibleTranscriptError,
    ResourceCapError,
)
from qkd_security.components.qstate import StateVector
from qkd_security.utils.bits import all_bitstrings, bits_to_int, merge_by_selector

SYMMETRY_CASES = ["random", "swap", "half-swap", "intercept-random", "cnot-probe", "bit-flip"]
SELECTORS = ["01", "10"]


@pytest.fixture(params=SYMMETRY_CASES)
def symmetrized_pair(request, rng):
    """(base, symmetrized) on two qubits"""
    if request.param == "random":
        base = random_attack(2, 1, rng)
    else:
        base = preset_by_name(request.param, 2)
    return base, symmetrize(base).as_attack()


def positive_contexts(attack, tol=1e-10):
    """Every (b, s, i_T, j_T) with one test and one info qubit and p(j_T | ...) > 0 for all i_I"""
    for s in SELECTORS:
        for b in all_bitstrings(2):
            for i_T in "01":
                for j_T in "01":
                    if jt_probabilities(attack, b, s, i_T, j_T).min() > tol:
                        yield b, s, i_T, j_T


class TestDecompose:

    def test_identity_keeps_bits(self):
        probs = channel_prob(identity_attack(2), "10", "01")
        assert probs["10"] == pytest.approx(1.0)
        assert sum(probs.values()) == pytest.approx(1.0)

    def test_cnot_probe_single_qubit(self):
        parts = decompose(cnot_probe_attack(1), "0", "0")
        np.testing.assert_allclose(parts["0"].vector.amps, [1, 0], atol=1e-12)
        np.testing.assert_allclose(parts["1"].vector.amps, [0, 0], atol=1e-12)

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_outcomes_are_complete(self, name):
        attack = preset_by_name(name, 2)
        for b in ("00", "01", "11"):
            assert channel_prob_vector(attack, "10", b).sum() == pytest.approx(1.0)

    def test_swap_error_rate_is_one_half(self):
        attack = swap_attack(1)
        for b in ("0", "1"):
            np.testing.assert_allclose(error_distribution(attack, b), [0.5, 0.5], atol=1e-12)

    def test_intercept_z_only_disturbs_x(self):
        attack = intercept_resend(1, "z")
        np.testing.assert_allclose(error_distribution(attack, "0"), [1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(error_distribution(attack, "1"), [0.5, 0.5], atol=1e-12)

    def test_bob_basis_mismatch(self):
        """A z state read in x gives a uniform outcome"""
        probs = channel_prob_vector(identity_attack(1), "1", "0")
        assert probs[1] == pytest.approx(1.0)
        mat = probe_matrix(identity_attack(1), "1", "0", bob_basis="1")
        np.testing.assert_allclose(np.abs(mat[0]) ** 2, [0.5, 0.5], atol=1e-12)

    def test_length_checked(self):
        with pytest.raises(DimensionMismatchError):
            decompose(identity_attack(2), "1", "0")


class TestSymmetrize:

    def test_identity_stays_error_free(self):
        sym = symmetrize(identity_attack(2)).as_attack()
        for i in all_bitstrings(2):
            for b in all_bitstrings(2):
                probs = channel_prob_vector(sym, i, b)
                assert probs[bits_to_int(i)] == pytest.approx(1.0)

    @pytest.mark.parametrize("n", [1, 2])
    def test_matches_closed_form(self, n, rng):
        base = random_attack(n, 1, rng)
        sym = symmetrize(base).as_attack()
        strings = all_bitstrings(n)
        for b in strings:
            for i in strings:
                mat = probe_matrix(sym, i, b)
                for j_val, j in enumerate(strings):
                    np.testing.assert_allclose(mat[:, j_val], symmetrized_probe_formula(base, i, j, b), atol=1e-9)

    def test_error_law_independent_of_bits(self, rng):
        base = random_attack(2, 1, rng)
        sym = symmetrize(base).as_attack()
        for b in all_bitstrings(2):
            averaged = error_distribution(base, b)
            for i in all_bitstrings(2):
                probs = channel_prob_vector(sym, i, b)
                by_error = probs[np.arange(4) ^ bits_to_int(i)]
                np.testing.assert_allclose(by_error, averaged, atol=1e-10)

    def test_qubit_cap(self):
        with pytest.raises(ResourceCapError):
            symmetrize(identity_attack(5))

    def test_m_register_matches_qubits(self, rng):
        sym = symmetrize(random_attack(2, 1, rng))
        assert sym.m_probe_qubits == 2
        assert sym.m_init.dims == (2, 2)
        assert sym.as_attack().probe_dims == (2, 2, 2)

    def test_m_register_size_checked(self, rng):
        sym = symmetrize(random_attack(2, 1, rng))
        with pytest.raises(DimensionMismatchError):
            SymmetrizedAttack(sym.base, 1, sym.U_sym, StateVector.uniform(1))


class TestSymmetryInvariants:

    def test_error_law_preserved(self, symmetrized_pair):
        base, sym = symmetrized_pair
        for b in all_bitstrings(2):
            np.testing.assert_allclose(error_distribution(sym, b), error_distribution(base, b), atol=1e-10)

    @pytest.mark.parametrize("s", SELECTORS)
    def test_test_outcome_free_of_info_bits(self, symmetrized_pair, s):
        _, sym = symmetrized_pair
        for b in all_bitstrings(2):
            for i_T in "01":
                for j_T in "01":
                    p = jt_probabilities(sym, b, s, i_T, j_T)
                    np.testing.assert_allclose(p, p[0], atol=1e-10)

    @pytest.mark.parametrize("s", SELECTORS)
    def test_test_outcome_free_of_info_bases(self, symmetrized_pair, s):
        _, sym = symmetrized_pair
        for b_T in "01":
            for i_T in "01":
                for j_T in "01":
                    by_basis = [jt_probabilities(sym, merge_by_selector(b_T, b_I, s), s, i_T, j_T) for b_I in "01"]
                    np.testing.assert_allclose(by_basis[1], by_basis[0], atol=1e-10)

    def test_info_posterior_uniform(self, symmetrized_pair):
        _, sym = symmetrized_pair
        contexts = list(positive_contexts(sym))
        assert contexts
        for ctx in contexts:
            np.testing.assert_allclose(info_posterior(sym, *ctx), 0.5, atol=1e-10)

    def test_gram_diagonal_is_info_outcome_law(self, symmetrized_pair):
        _, sym = symmetrized_pair
        for b, s, i_T, j_T in positive_contexts(sym):
            gram = sym_probe_overlaps(sym, b, s, i_T, j_T)
            j_cols = [bits_to_int(merge_by_selector(j_T, j_I, s)) for j_I in "01"]
            for a, i_I in enumerate("01"):
                probs = channel_prob_vector(sym, merge_by_selector(i_T, i_I, s), b)[j_cols]
                diag = [gram[a, 0, a, 0], gram[a, 1, a, 1]]
                np.testing.assert_allclose(diag, probs / probs.sum(), atol=1e-10)

    def test_overlaps_phase_covariant(self, symmetrized_pair):
        _, sym = symmetrized_pair
        for ctx in positive_contexts(sym):
            gram = sym_probe_overlaps(sym, *ctx)
            for i, j, i2, j2 in np.ndindex(2, 2, 2, 2):
                sign = -1.0 if (i ^ j ^ i2 ^ j2) else 1.0
                assert gram[1 - i, 1 - j, 1 - i2, 1 - j2] == pytest.approx(sign * gram[i, j, i2, j2], abs=1e-10)

    def test_unsymmetrized_posterior_can_be_skewed(self, rng):
        base = random_attack(2, 1, rng)
        posterior = info_posterior(base, "00", "01", "0", "0")
        assert posterior.sum() == pytest.approx(1.0)
        assert np.max(np.abs(posterior - 0.5)) > 1e-6


class TestConditionalProbes:

    def test_normalized_post_test_states(self, rng):
        sym = symmetrize(random_attack(2, 1, rng)).as_attack()
        fam = conditional_probes(sym, "01", "10", "1", "1")
        norms = np.sum(np.abs(fam.probes) ** 2, axis=(1, 2))
        np.testing.assert_allclose(norms, 1.0, atol=1e-10)

    def test_overlaps_are_hermitian(self, rng):
        sym = symmetrize(random_attack(2, 1, rng))
        gram = sym_probe_overlaps(sym, "00", "01", "0", "0").reshape(4, 4)
        np.testing.assert_allclose(gram, gram.conj().T, atol=1e-10)

    def test_zero_probability_outcome(self):
        with pytest.raises(ImpossibleTranscriptError):
            conditional_probes(identity_attack(2), "00", "01", "0", "1")


class TestPresetsAndFiles:

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset_by_name("teleport", 2)

    def test_swap_measurement_reads_held_qubits(self):
        attack = swap_attack(2)
        rows = attack.measurement()(MeasurementContext(b="01", s="10", i_T="0", j_T="0"))
        np.testing.assert_allclose(rows @ rows.conj().T, np.eye(4), atol=1e-12)

    def test_saved_attack_loads(self, tmp_path):
        path = save_attack(cnot_probe_attack(1), tmp_path / "cnot.json")
        loaded = load_attack(str(path), 1)
        np.testing.assert_allclose(loaded.U.dense(), cnot_probe_attack(1).U.dense(), atol=1e-12)

    def test_saved_attack_wrong_size(self, tmp_path):
        path = save_attack(cnot_probe_attack(1), tmp_path / "cnot.json")
        with pytest.raises(ConfigError):
            load_attack(str(path), 2)

    def test_missing_attack_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_attack(str(tmp_path / "none.json"), 1)
