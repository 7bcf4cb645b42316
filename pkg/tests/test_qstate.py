"""
State algebra: encoding, unitaries, projection, partial trace, trace norm
"""

import numpy as np
import pytest
from scipy.stats import unitary_group

from qkd_security.components.evemodel import s_gate
from qkd_security.components.qstate import (
    HADAMARD,
    PAULI_X,
    DensityMatrix,
    StateVector,
    UnitaryOp,
    apply,
    density,
    embed,
    encode_bb84,
    partial_trace,
    project_component,
    random_state,
    trace_norm_distance,
)
from qkd_security.logging_exception import DimensionMismatchError, NonHermitianError, ResourceCapError

SQ = 1.0 / np.sqrt(2.0)


def bell() -> StateVector:
    return StateVector.qubits([SQ, 0, 0, SQ], 2)


class TestEncodeBB84:

    def test_single_x_qubit(self):
        psi = encode_bb84("1", "1")
        np.testing.assert_allclose(psi.amps, [SQ, -SQ], atol=1e-12)

    def test_two_qubits_mixed_bases(self):
        """|1>_z |0>_x = (0, 0, 1/sqrt2, 1/sqrt2)"""
        psi = encode_bb84("10", "01")
        np.testing.assert_allclose(psi.amps, [0, 0, SQ, SQ], atol=1e-12)

    @pytest.mark.parametrize("i,b", [("000", "000"), ("101", "110"), ("111", "111")])
    def test_normalized(self, i, b):
        assert encode_bb84(i, b).norm_squared() == pytest.approx(1.0)

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            encode_bb84("10", "1")


class TestUnitaries:

    def test_hadamard_on_zero(self):
        out = apply(UnitaryOp(HADAMARD, (2,)), StateVector.qubits([1, 0], 1))
        np.testing.assert_allclose(out.amps, [SQ, SQ], atol=1e-12)

    @pytest.mark.parametrize("dims", [(2,), (2, 3), (2, 2, 2, 2), (2,) * 6])
    def test_norm_preserved(self, dims, rng):
        dim = int(np.prod(dims))
        U = UnitaryOp(unitary_group.rvs(dim, random_state=rng), dims)
        for _ in range(5):
            psi = StateVector(0.7 * random_state(dims, rng).amps, dims)
            assert abs(apply(U, psi).norm() - psi.norm()) <= 1e-10

    def test_non_unitary_rejected(self):
        with pytest.raises(DimensionMismatchError):
            UnitaryOp(np.array([[1, 1], [0, 1]], dtype=complex), (2,))

    def test_s_gate_picks_up_sign(self):
        """S|1>|1> = -|0>|1> with the data qubit in the z basis"""
        out = apply(s_gate(1), StateVector.basis(3, (2, 2)))
        np.testing.assert_allclose(out.amps, [0, -1, 0, 0], atol=1e-12)

    def test_embed_targets_second_qubit(self):
        U = embed(PAULI_X, [1], (2, 2))
        out = apply(U, StateVector.basis(0, (2, 2)))
        np.testing.assert_allclose(out.amps, [0, 1, 0, 0], atol=1e-12)

    def test_dagger_inverts(self):
        U = embed(HADAMARD, [0], (2, 2)).compose(embed(PAULI_X, [1], (2, 2)))
        np.testing.assert_allclose(U.dagger().compose(U).dense(), np.eye(4), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            apply(UnitaryOp.identity((2,)), bell())

    def test_dimension_cap(self, monkeypatch):
        monkeypatch.setenv("QKD_MAX_DIM", "4")
        with pytest.raises(ResourceCapError):
            UnitaryOp.identity((2, 2, 2))


class TestProjectComponent:

    def test_bell_first_qubit_one(self):
        rest, p = project_component(bell(), [0], "1", "0")
        assert p == pytest.approx(0.5)
        np.testing.assert_allclose(rest.amps, [0, SQ], atol=1e-12)

    def test_z_state_measured_in_x(self):
        _, p = project_component(encode_bb84("0", "0"), [0], "0", "1")
        assert p == pytest.approx(0.5)

    def test_probabilities_sum_to_norm(self, rng):
        psi = random_state((2, 2, 2), rng)
        total = sum(project_component(psi, [0, 2], o, "10")[1] for o in ("00", "01", "10", "11"))
        assert total == pytest.approx(1.0)

    def test_repeated_index(self):
        with pytest.raises(DimensionMismatchError):
            project_component(bell(), [0, 0], "00", "00")


class TestPartialTrace:

    def test_bell_reduces_to_maximally_mixed(self):
        rho = partial_trace(density(bell()), [1])
        np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-12)

    def test_pure_state_path_matches_density_path(self, rng):
        psi = random_state((2, 3, 2), rng)
        a = partial_trace(psi, [2, 0])
        b = partial_trace(density(psi), [2, 0])
        np.testing.assert_allclose(a.entries, b.entries, atol=1e-12)
        assert a.dims == (2, 2)

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3, 2)])
    def test_keeping_everything_is_identity(self, dims, rng):
        psi = random_state(dims, rng)
        keep = list(range(len(dims)))
        expected = np.outer(psi.amps, psi.amps.conj())
        np.testing.assert_allclose(partial_trace(psi, keep).entries, expected, atol=1e-12)
        np.testing.assert_allclose(partial_trace(density(psi), keep).entries, expected, atol=1e-12)

    def test_trace_preserved(self, rng):
        psi = random_state((2, 2, 2), rng)
        assert partial_trace(psi, [1]).trace() == pytest.approx(1.0)

    def test_ensemble_of_basis_states(self):
        rho = DensityMatrix.from_ensemble([encode_bb84("0", "0"), encode_bb84("1", "0")])
        np.testing.assert_allclose(rho.entries, np.eye(2) / 2, atol=1e-12)


class TestTraceNormDistance:

    def test_zero_against_plus(self):
        r0 = density(encode_bb84("0", "0"))
        r1 = density(encode_bb84("0", "1"))
        assert trace_norm_distance(r0, r1) == pytest.approx(np.sqrt(2.0))

    def test_orthogonal_states(self):
        r0 = density(encode_bb84("0", "1"))
        r1 = density(encode_bb84("1", "1"))
        assert trace_norm_distance(r0, r1) == pytest.approx(2.0)

    def test_identical_states(self, rng):
        rho = density(random_state((2, 2), rng))
        assert trace_norm_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("dims", [(2, 2), (2, 2, 2)])
    def test_metric_on_mixed_states(self, dims, rng):
        keep = [0, 1]
        for _ in range(10):
            r0, r1, r2 = (partial_trace(random_state(dims, rng), keep) for _ in range(3))
            d01, d10 = trace_norm_distance(r0, r1), trace_norm_distance(r1, r0)
            assert d01 == pytest.approx(d10, abs=1e-9)
            assert d01 <= trace_norm_distance(r0, r2) + trace_norm_distance(r2, r1) + 1e-9

    def test_non_hermitian_input(self):
        with pytest.raises(NonHermitianError):
            DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]))
