"""
Small-system quantum state algebra
Dense/sparse complex linear algebra for a handful of qubits plus probe registers:
BB84 encoding, unitary application, projection, partial trace, trace norm
"""

import logging
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, sparse

from qkd_security.constants import (
    DEFAULT_MAX_DIM,
    ENV_MAX_DIM,
    HERMITIAN_TOL,
    NORM_TOL,
    PSD_TOL,
    UNITARY_TOL,
)
from qkd_security.logging_exception import (
    DimensionMismatchError,
    NonHermitianError,
    ResourceCapError,
)
from qkd_security.utils.bits import BitsLike, to_bits
from qkd_security.utils.settings import env_int

logger = logging.getLogger(__name__)

SQRT_HALF = 1.0 / np.sqrt(2.0)

# Columns are |0>_b and |1>_b for b = 0 (z) and b = 1 (x)
SINGLE_QUBIT_BASES = {
    0: np.eye(2, dtype=complex),
    1: np.array([[SQRT_HALF, SQRT_HALF], [SQRT_HALF, -SQRT_HALF]], dtype=complex),
}

HADAMARD = SINGLE_QUBIT_BASES[1].copy()
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def max_dim() -> int:
    """Configured total dimension cap (QKD_MAX_DIM, default 2^12)"""
    return env_int(ENV_MAX_DIM, DEFAULT_MAX_DIM)


def check_dim(dim: int, what: str = "operator") -> None:
    cap = max_dim()
    if dim > cap:
        raise ResourceCapError(f"{what} dimension {dim} exceeds cap {cap}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


class StateVector:
    """
    Pure (possibly unnormalized) state on a tensor product of subsystems

    Args:
        amps (array-like): Complex amplitudes, one per basis index
        dims (Sequence[int]): Subsystem dimensions; defaults to one subsystem
        normalized (bool): Require |sum |amp|^2 - 1| <= 1e-10
    """

    def __init__(self, amps, dims: Optional[Sequence[int]] = None, normalized: bool = False):
        amps = _frozen(np.asarray(amps).reshape(-1))
        dims = tuple(int(d) for d in (dims if dims is not None else (amps.size,)))
        if int(np.prod(dims, dtype=np.int64)) != amps.size:
            raise DimensionMismatchError(
                f"Amplitude count {amps.size} does not match dims {dims}"
            )
        check_dim(amps.size, "state")
        self.amps = amps
        self.dims = dims
        if normalized and abs(self.norm_squared() - 1.0) > NORM_TOL:
            raise DimensionMismatchError(
                f"State marked normalized has squared norm {self.norm_squared():.12f}"
            )

    @classmethod
    def qubits(cls, amps, n_qubits: int, normalized: bool = False) -> "StateVector":
        return cls(amps, (2,) * n_qubits, normalized)

    @classmethod
    def basis(cls, index: int, dims: Sequence[int]) -> "StateVector":
        check_dim(int(np.prod(dims, dtype=np.int64)), "state")
        amps = np.zeros(int(np.prod(dims, dtype=np.int64)), dtype=complex)
        amps[index] = 1.0
        return cls(amps, dims, normalized=True)

    @classmethod
    def uniform(cls, n_qubits: int) -> "StateVector":
        """(1/2^{n/2}) sum_m |m>"""
        dim = 1 << n_qubits
        check_dim(dim, "state")
        return cls(np.full(dim, 1.0 / np.sqrt(dim)), (2,) * n_qubits, normalized=True)

    @property
    def dim(self) -> int:
        return self.amps.size

    def norm_squared(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def norm(self) -> float:
        return float(np.sqrt(self.norm_squared()))

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise DimensionMismatchError("Cannot normalize the zero vector")
        return StateVector(self.amps / nrm, self.dims, normalized=True)

    def inner(self, other: "StateVector") -> complex:
        """<self|other>"""
        if self.dim != other.dim:
            raise DimensionMismatchError(f"Inner product of dims {self.dim} and {other.dim}")
        return complex(np.vdot(self.amps, other.amps))

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amps, other.amps), self.dims + other.dims)

    def tensor_array(self) -> np.ndarray:
        return self.amps.reshape(self.dims)

    def __repr__(self) -> str:
        return f"StateVector(dims={self.dims}, norm={self.norm():.6f})"


class DensityMatrix:
    """
    Density operator on a tensor product of subsystems

    Validation: Hermitian to 1e-10; with normalized=True also trace 1 and
    minimum eigenvalue >= -1e-8.
    """

    def __init__(self, entries, dims: Optional[Sequence[int]] = None, normalized: bool = True):
        entries = _frozen(np.asarray(entries))
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatchError(f"Density matrix must be square, got {entries.shape}")
        dims = tuple(int(d) for d in (dims if dims is not None else (entries.shape[0],)))
        if int(np.prod(dims, dtype=np.int64)) != entries.shape[0]:
            raise DimensionMismatchError(f"dims {dims} do not match size {entries.shape[0]}")
        check_dim(entries.shape[0], "density matrix")
        if np.max(np.abs(entries - entries.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise NonHermitianError("Density matrix is not Hermitian")
        if normalized:
            tr = np.trace(entries).real
            if abs(tr - 1.0) > NORM_TOL:
                raise DimensionMismatchError(f"Density matrix trace is {tr:.12f}, expected 1")
            min_eig = float(linalg.eigvalsh(entries)[0]) if entries.shape[0] else 0.0
            if min_eig < -PSD_TOL:
                raise DimensionMismatchError(f"Density matrix has eigenvalue {min_eig:.3e}")
        self.entries = entries
        self.dims = dims

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_ensemble(
        cls,
        states: Iterable[StateVector],
        weights: Optional[Iterable[float]] = None,
        normalized: bool = True,
    ) -> "DensityMatrix":
        """sum_k w_k |psi_k><psi_k|"""
        states = list(states)
        if not states:
            raise DimensionMismatchError("Empty ensemble")
        weights = list(weights) if weights is not None else [1.0 / len(states)] * len(states)
        mat = np.stack([s.amps for s in states], axis=1)
        rho = (mat * np.asarray(weights)[None, :]) @ mat.conj().T
        return cls(rho, states[0].dims, normalized=normalized)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def __repr__(self) -> str:
        return f"DensityMatrix(dims={self.dims}, trace={self.trace():.6f})"


class UnitaryOp:
    """
    Unitary on a tensor product of subsystems, stored dense or scipy.sparse

    Args:
        entries: np.ndarray or scipy.sparse matrix
        dims (Sequence[int]): Subsystem dimensions
        check (bool): Verify max|U^dag U - I| <= 1e-9
    """

    def __init__(self, entries, dims: Optional[Sequence[int]] = None, check: bool = True):
        if sparse.issparse(entries):
            entries = sparse.csr_matrix(entries, dtype=complex)
        else:
            entries = _frozen(np.asarray(entries))
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatchError(f"Unitary must be square, got {entries.shape}")
        dims = tuple(int(d) for d in (dims if dims is not None else (entries.shape[0],)))
        if int(np.prod(dims, dtype=np.int64)) != entries.shape[0]:
            raise DimensionMismatchError(f"dims {dims} do not match size {entries.shape[0]}")
        check_dim(entries.shape[0], "unitary")
        self.entries = entries
        self.dims = dims
        if check:
            dev = self.unitarity_deviation()
            if dev > UNITARY_TOL:
                raise DimensionMismatchError(f"Operator is not unitary (max deviation {dev:.3e})")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.entries)

    @classmethod
    def identity(cls, dims: Sequence[int]) -> "UnitaryOp":
        dim = int(np.prod(dims, dtype=np.int64))
        check_dim(dim, "unitary")
        return cls(sparse.identity(dim, dtype=complex, format="csr"), dims, check=False)

    def dense(self) -> np.ndarray:
        if self.is_sparse:
            return self.entries.toarray()
        return np.array(self.entries)

    def unitarity_deviation(self) -> float:
        prod = self.entries.conj().T @ self.entries
        if sparse.issparse(prod):
            diff = (prod - sparse.identity(self.dim, dtype=complex, format="csr")).tocoo()
            return float(np.max(np.abs(diff.data), initial=0.0))
        return float(np.max(np.abs(prod - np.eye(self.dim)), initial=0.0))

    def dagger(self) -> "UnitaryOp":
        return UnitaryOp(self.entries.conj().T, self.dims, check=False)

    def compose(self, other: "UnitaryOp") -> "UnitaryOp":
        """self @ other"""
        if self.dim != other.dim:
            raise DimensionMismatchError(f"Cannot compose dims {self.dim} and {other.dim}")
        return UnitaryOp(self.entries @ other.entries, self.dims, check=False)

    def kron(self, other: "UnitaryOp") -> "UnitaryOp":
        if self.is_sparse or other.is_sparse:
            mat = sparse.kron(sparse.csr_matrix(self.entries), sparse.csr_matrix(other.entries), format="csr")
        else:
            mat = np.kron(self.entries, other.entries)
        return UnitaryOp(mat, self.dims + other.dims, check=False)

    def permute(self, order: Sequence[int]) -> "UnitaryOp":
        """Reorder subsystems: new subsystem k is old subsystem order[k]"""
        perm = permutation_matrix(self.dims, order)
        mat = perm @ sparse.csr_matrix(self.entries) @ perm.T
        if not self.is_sparse:
            mat = mat.toarray()
        return UnitaryOp(mat, tuple(self.dims[k] for k in order), check=False)

    def __repr__(self) -> str:
        kind = "sparse" if self.is_sparse else "dense"
        return f"UnitaryOp(dims={self.dims}, {kind})"


def permutation_matrix(dims: Sequence[int], order: Sequence[int]) -> sparse.csr_matrix:
    """
    Sparse permutation P with P|x_0..x_k> = |x_order[0]..x_order[k]>

    Args:
        dims (Sequence[int]): Current subsystem dimensions
        order (Sequence[int]): New position k holds old subsystem order[k]

    Returns:
        sparse.csr_matrix: Real permutation matrix
    """
    dims = tuple(dims)
    order = list(order)
    if sorted(order) != list(range(len(dims))):
        raise DimensionMismatchError(f"{order} is not a permutation of {len(dims)} subsystems")
    total = int(np.prod(dims, dtype=np.int64))
    old_index = np.arange(total).reshape(dims)
    new_of_old = np.transpose(old_index, order).reshape(-1)
    rows = np.arange(total)
    return sparse.csr_matrix((np.ones(total), (rows, new_of_old)), shape=(total, total))


def embed(gate, targets: Sequence[int], dims: Sequence[int]) -> UnitaryOp:
    """
    Lift a gate acting on the target subsystems to the full register

    Args:
        gate (np.ndarray | UnitaryOp): Operator on the targets, in target order
        targets (Sequence[int]): Subsystem indices the gate acts on
        dims (Sequence[int]): Dimensions of the full register

    Returns:
        UnitaryOp: Sparse operator on the full register
    """
    dims = tuple(dims)
    targets = list(targets)
    mat = gate.entries if isinstance(gate, UnitaryOp) else np.asarray(gate, dtype=complex)
    target_dim = int(np.prod([dims[t] for t in targets], dtype=np.int64))
    if mat.shape != (target_dim, target_dim):
        raise DimensionMismatchError(f"Gate shape {mat.shape} does not match targets of dim {target_dim}")
    rest = [k for k in range(len(dims)) if k not in targets]
    rest_dim = int(np.prod([dims[k] for k in rest], dtype=np.int64))
    check_dim(target_dim * rest_dim)
    order = targets + rest
    front = sparse.kron(sparse.csr_matrix(mat), sparse.identity(rest_dim, format="csr"), format="csr")
    perm = permutation_matrix(dims, order)
    full = perm.T @ front @ perm
    return UnitaryOp(sparse.csr_matrix(full, dtype=complex), dims, check=False)


def basis_matrix(b: BitsLike) -> np.ndarray:
    """Unitary whose column x is |x>_b"""
    b = to_bits(b)
    check_dim(1 << len(b), "basis matrix")
    mat = np.ones((1, 1), dtype=complex)
    for bk in b:
        mat = np.kron(mat, SINGLE_QUBIT_BASES[int(bk)])
    return mat


def encode_bb84(i: BitsLike, b: BitsLike) -> StateVector:
    """
    Prepare the product state of BB84 qubits |i_k>_{b_k}

    Args:
        i (BitsLike): Bit values
        b (BitsLike): Bases, 0 for z and 1 for x

    Returns:
        StateVector: Normalized n-qubit state
    """
    i = to_bits(i)
    b = to_bits(b)
    if len(i) != len(b):
        raise DimensionMismatchError(f"|i|={len(i)} but |b|={len(b)}")
    amps = np.ones(1, dtype=complex)
    for ik, bk in zip(i, b):
        amps = np.kron(amps, SINGLE_QUBIT_BASES[int(bk)][:, int(ik)])
    return StateVector(amps, (2,) * len(i), normalized=True)


def apply(U: UnitaryOp, psi: StateVector) -> StateVector:
    if U.dim != psi.dim:
        raise DimensionMismatchError(f"Unitary dim {U.dim} does not match state dim {psi.dim}")
    out = U.entries @ psi.amps
    return StateVector(np.asarray(out).reshape(-1), psi.dims)


def project_component(
    psi: StateVector,
    subsystem: Sequence[int],
    outcome: BitsLike,
    basis: BitsLike,
) -> Tuple[StateVector, float]:
    """
    Apply <outcome|_basis to the named qubit subsystems

    Args:
        psi (StateVector): State, possibly unnormalized
        subsystem (Sequence[int]): Indices of qubit subsystems to project
        outcome (BitsLike): One outcome bit per projected qubit
        basis (BitsLike): One basis bit per projected qubit

    Returns:
        Tuple[StateVector, float]: Unnormalized remainder on the other subsystems
        and its squared norm
    """
    subsystem = list(subsystem)
    outcome = to_bits(outcome, len(subsystem))
    basis = to_bits(basis, len(subsystem))
    if len(set(subsystem)) != len(subsystem):
        raise DimensionMismatchError(f"Repeated subsystem index in {subsystem}")
    for k in subsystem:
        if k < 0 or k >= len(psi.dims):
            raise DimensionMismatchError(f"Subsystem {k} out of range for dims {psi.dims}")
        if psi.dims[k] != 2:
            raise DimensionMismatchError(f"Subsystem {k} is not a qubit (dim {psi.dims[k]})")

    tensor = psi.tensor_array()
    # Contract from the highest axis down so earlier axis numbers stay valid
    for k, o, bb in sorted(zip(subsystem, outcome, basis), key=lambda t: -t[0]):
        bra = SINGLE_QUBIT_BASES[int(bb)][:, int(o)].conj()
        tensor = np.tensordot(tensor, bra, axes=([k], [0]))
    rest_dims = tuple(d for k, d in enumerate(psi.dims) if k not in subsystem)
    if not rest_dims:
        rest_dims = (1,)
    remainder = StateVector(np.asarray(tensor).reshape(-1), rest_dims)
    return remainder, remainder.norm_squared()


def density(psi: StateVector) -> DensityMatrix:
    return DensityMatrix(np.outer(psi.amps, psi.amps.conj()), psi.dims, normalized=False)


def partial_trace(rho: Union[DensityMatrix, StateVector], keep: Sequence[int]) -> DensityMatrix:
    """
    Trace out every subsystem not listed in keep

    Args:
        rho (DensityMatrix | StateVector): Input operator or pure state
        keep (Sequence[int]): Subsystems to keep, returned in this order

    Returns:
        DensityMatrix: Reduced operator with the same trace as the input
    """
    dims = rho.dims
    keep = list(keep)
    if any(k < 0 or k >= len(dims) for k in keep) or len(set(keep)) != len(keep):
        raise DimensionMismatchError(f"Invalid keep set {keep} for dims {dims}")
    traced = [k for k in range(len(dims)) if k not in keep]
    d_keep = int(np.prod([dims[k] for k in keep], dtype=np.int64))
    d_tr = int(np.prod([dims[k] for k in traced], dtype=np.int64))

    if isinstance(rho, StateVector):
        mat = np.transpose(rho.tensor_array(), keep + traced).reshape(d_keep, d_tr)
        reduced = mat @ mat.conj().T
    else:
        n = len(dims)
        tensor = rho.entries.reshape(dims + dims)
        axes = keep + traced + [n + k for k in keep] + [n + k for k in traced]
        tensor = np.transpose(tensor, axes).reshape(d_keep, d_tr, d_keep, d_tr)
        reduced = np.einsum("ajbj->ab", tensor)
    kept_dims = tuple(dims[k] for k in keep) or (1,)
    return DensityMatrix(reduced, kept_dims, normalized=False)


def trace_norm_distance(r0: DensityMatrix, r1: DensityMatrix) -> float:
    """
    Tr|r0 - r1|, the sum of absolute eigenvalues of the Hermitian difference

    Args:
        r0 (DensityMatrix): First operator
        r1 (DensityMatrix): Second operator

    Returns:
        float: Trace norm, in [0, 2] for normalized states
    """
    if r0.dim != r1.dim:
        raise DimensionMismatchError(f"Cannot compare dims {r0.dim} and {r1.dim}")
    diff = np.asarray(r0.entries) - np.asarray(r1.entries)
    if np.max(np.abs(diff - diff.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise NonHermitianError("Difference of operators is not Hermitian")
    eigs = linalg.eigvalsh((diff + diff.conj().T) / 2.0)
    return float(np.sum(np.abs(eigs)))


def random_state(dims: Sequence[int], rng: np.random.Generator) -> StateVector:
    dim = int(np.prod(dims, dtype=np.int64))
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return StateVector(amps / np.linalg.norm(amps), dims, normalized=True)
