"""
Eavesdropping model
Eve's probe + joint unitary, the E'_{i,j} decomposition, the symmetrized
attack and the named attack presets
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.stats import unitary_group

from qkd_security.components.qstate import (
    HADAMARD,
    PAULI_X,
    SINGLE_QUBIT_BASES,
    StateVector,
    UnitaryOp,
    basis_matrix,
    check_dim,
    embed,
    encode_bb84,
    permutation_matrix,
)
from qkd_security.constants import MAX_SYMMETRIZE_QUBITS, NORM_TOL
from qkd_security.logging_exception import (
    ConfigError,
    DimensionMismatchError,
    ImpossibleTranscriptError,
    ResourceCapError,
)
from qkd_security.utils.bits import (
    BitsLike,
    all_bitstrings,
    bits_to_int,
    bits_to_str,
    merge_by_selector,
    to_bits,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeasurementContext:
    """Classical data public when Eve finally measures her probe"""

    b: str
    s: str
    i_T: str
    j_T: str
    xi: str = ""


# Rows of the returned (k, probe_dim) array are measurement vectors |m_e>;
# outcome e has probability |<m_e|probe>|^2 and sum_e |m_e><m_e| = I
EveMeasurement = Callable[[MeasurementContext], np.ndarray]


def computational_measurement(probe_dim: int) -> EveMeasurement:
    rows = np.eye(probe_dim, dtype=complex)
    return lambda ctx: rows


@dataclass(frozen=True)
class AttackSpec:
    """
    Eve's attack: probe initial state |E> and a unitary U on probe (x) qubits

    The probe may itself consist of several subsystems (probe_init.dims).
    """

    n_qubits: int
    probe_init: StateVector
    U: UnitaryOp
    name: str = "custom"
    eve_measurement: Optional[EveMeasurement] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        expected = self.probe_dim * (1 << self.n_qubits)
        if self.U.dim != expected:
            raise DimensionMismatchError(
                f"U has dim {self.U.dim}, expected probe_dim*2^n = {expected}"
            )
        if abs(self.probe_init.norm_squared() - 1.0) > NORM_TOL:
            raise DimensionMismatchError("Probe initial state is not normalized")

    @property
    def probe_dim(self) -> int:
        return self.probe_init.dim

    @property
    def probe_dims(self) -> Tuple[int, ...]:
        return self.probe_init.dims

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.probe_dims + (2,) * self.n_qubits

    def measurement(self) -> EveMeasurement:
        return self.eve_measurement or computational_measurement(self.probe_dim)


@dataclass(frozen=True)
class ConditionalProbe:
    """Unnormalized Eve state E'_{i,j} attached to Bob's outcome j"""

    i: str
    j: str
    b: str
    vector: StateVector

    @property
    def probability(self) -> float:
        return self.vector.norm_squared()


def _check_bits(attack: AttackSpec, *strings: np.ndarray) -> None:
    for x in strings:
        if len(x) != attack.n_qubits:
            raise DimensionMismatchError(
                f"Bit string of length {len(x)} for an attack on {attack.n_qubits} qubits"
            )


def probe_matrix(
    attack: AttackSpec,
    i: BitsLike,
    b: BitsLike,
    bob_basis: Optional[BitsLike] = None,
) -> np.ndarray:
    """
    All E'_{i,j} at once

    Args:
        attack (AttackSpec): Eve's attack
        i (BitsLike): Alice's bits
        b (BitsLike): Alice's bases
        bob_basis (BitsLike): Bob's measurement bases, defaults to b

    Returns:
        np.ndarray: (probe_dim, 2^n) array whose column j is E'_{i,j}
    """
    i, b = to_bits(i), to_bits(b)
    bob = b if bob_basis is None else to_bits(bob_basis)
    _check_bits(attack, i, b, bob)
    psi = np.kron(attack.probe_init.amps, encode_bb84(i, b).amps)
    out = np.asarray(attack.U.entries @ psi).reshape((attack.probe_dim,) + (2,) * attack.n_qubits)
    for k, bk in enumerate(bob):
        if bk:
            bra = SINGLE_QUBIT_BASES[1].conj()
            out = np.moveaxis(np.tensordot(out, bra, axes=([k + 1], [0])), -1, k + 1)
    return out.reshape(attack.probe_dim, 1 << attack.n_qubits)


def decompose(
    attack: AttackSpec,
    i: BitsLike,
    b: BitsLike,
    bob_basis: Optional[BitsLike] = None,
) -> Dict[str, ConditionalProbe]:
    """
    Split U|E>|i>_b into sum_j E'_{i,j} (x) |j>_b

    Args:
        attack (AttackSpec): Eve's attack
        i (BitsLike): Alice's bits
        b (BitsLike): Alice's bases (also Bob's unless bob_basis is given)
        bob_basis (BitsLike): Bob's measurement bases

    Returns:
        Dict[str, ConditionalProbe]: One entry per Bob outcome j
    """
    mat = probe_matrix(attack, i, b, bob_basis)
    i_str, b_str = bits_to_str(i), bits_to_str(b)
    rows = all_bitstrings(attack.n_qubits)
    return {
        bits_to_str(j): ConditionalProbe(i_str, bits_to_str(j), b_str, StateVector(mat[:, idx], attack.probe_dims))
        for idx, j in enumerate(rows)
    }


def channel_prob_vector(
    attack: AttackSpec,
    i: BitsLike,
    b: BitsLike,
    bob_basis: Optional[BitsLike] = None,
) -> np.ndarray:
    mat = probe_matrix(attack, i, b, bob_basis)
    return np.sum(np.abs(mat) ** 2, axis=0)


def channel_prob(attack: AttackSpec, i: BitsLike, b: BitsLike) -> Dict[str, float]:
    """p(j|i,b) = <E'_{i,j}|E'_{i,j}> for every j"""
    probs = channel_prob_vector(attack, i, b)
    rows = all_bitstrings(attack.n_qubits)
    return {bits_to_str(j): float(p) for j, p in zip(rows, probs)}


def error_distribution(attack: AttackSpec, b: BitsLike) -> np.ndarray:
    """
    p(c|b) = 2^{-n} sum_i p(i xor c | i, b), indexed by the integer value of c
    """
    b = to_bits(b)
    n = attack.n_qubits
    dim = 1 << n
    out = np.zeros(dim)
    idx = np.arange(dim)
    for i_val, i in enumerate(all_bitstrings(n)):
        probs = channel_prob_vector(attack, i, b)
        out[idx ^ i_val] += probs
    return out / dim


def s_gate(n_qubits: int) -> UnitaryOp:
    """
    S on A (x) M: S|x>|m> = (-1)^{x.m} |x xor m>|m> in the computational basis

    Per qubit pair this is a controlled sigma_x sigma_z with M as control;
    in the basis b it acts as S|i>_b|m> = (-1)^{(i xor b).m}|i xor m>_b|m>.
    """
    dim = 1 << n_qubits
    x = np.repeat(np.arange(dim), dim)
    m = np.tile(np.arange(dim), dim)
    overlap = x & m
    parity = np.array([bin(v).count("1") & 1 for v in range(dim)])[overlap]
    signs = 1.0 - 2.0 * parity
    rows = (x ^ m) * dim + m
    cols = x * dim + m
    mat = sparse.csr_matrix((signs.astype(complex), (rows, cols)), shape=(dim * dim, dim * dim))
    return UnitaryOp(mat, (2,) * (2 * n_qubits), check=False)


@dataclass(frozen=True)
class SymmetrizedAttack:
    """
    Symmetrized attack: second probe M in uniform superposition and
    U_sym = (1_E (x) S^dag)(U (x) 1_M)(1_E (x) S), subsystems ordered E, A, M
    """

    base: AttackSpec
    m_probe_qubits: int
    U_sym: UnitaryOp
    m_init: StateVector

    def __post_init__(self):
        if self.m_probe_qubits != self.base.n_qubits:
            raise DimensionMismatchError(
                f"M register has {self.m_probe_qubits} qubits, attack acts on {self.base.n_qubits}"
            )
        if self.m_init.dims != (2,) * self.m_probe_qubits:
            raise DimensionMismatchError(f"M initial state has dims {self.m_init.dims}")

    @property
    def n_qubits(self) -> int:
        return self.base.n_qubits

    def as_attack(self) -> AttackSpec:
        """Same operator with the probe (E, M) in front of the qubits A"""
        e = len(self.base.probe_dims)
        n, m = self.n_qubits, self.m_probe_qubits
        order = list(range(e)) + list(range(e + n, e + n + m)) + list(range(e, e + n))
        reordered = self.U_sym.permute(order)
        probe_init = self.base.probe_init.tensor(self.m_init)
        return AttackSpec(n, probe_init, reordered, name=f"{self.base.name}+sym")


def symmetrize(attack: AttackSpec) -> SymmetrizedAttack:
    """
    Build the symmetrized form of an attack

    Raises:
        ResourceCapError: more than four qubits, or total dimension over the cap
    """
    n = attack.n_qubits
    m_qubits = n
    if n > MAX_SYMMETRIZE_QUBITS:
        raise ResourceCapError(f"symmetrize supports at most {MAX_SYMMETRIZE_QUBITS} qubits, got {n}")
    total = attack.U.dim * (1 << m_qubits)
    check_dim(total, "symmetrized attack")
    probe_eye = sparse.identity(attack.probe_dim, dtype=complex, format="csr")
    m_eye = sparse.identity(1 << m_qubits, dtype=complex, format="csr")
    s_full = sparse.kron(probe_eye, s_gate(n).entries, format="csr")
    u_full = sparse.kron(sparse.csr_matrix(attack.U.entries), m_eye, format="csr")
    u_sym = s_full.conj().T @ u_full @ s_full
    dims = attack.dims + (2,) * m_qubits
    op = UnitaryOp(sparse.csr_matrix(u_sym), dims)
    logger.debug(f"Symmetrized {attack.name}: dim {op.dim}, nnz {op.entries.nnz}")
    return SymmetrizedAttack(
        base=attack, m_probe_qubits=m_qubits, U_sym=op, m_init=StateVector.uniform(m_qubits)
    )


def symmetrized_probe_formula(attack: AttackSpec, i: BitsLike, j: BitsLike, b: BitsLike) -> np.ndarray:
    """
    Right-hand side of the symmetrization identity:
    2^{-n/2} sum_m (-1)^{(i xor j).m} E'_{i xor m, j xor m} (x) |m>

    Returns:
        np.ndarray: Vector on E (x) M
    """
    i, j, b = to_bits(i), to_bits(j), to_bits(b)
    n = attack.n_qubits
    dim = 1 << n
    out = np.zeros((attack.probe_dim, dim), dtype=complex)
    for m_val, m in enumerate(all_bitstrings(n)):
        sign = -1.0 if int(np.sum((i ^ j) & m)) & 1 else 1.0
        column = probe_matrix(attack, i ^ m, b)[:, bits_to_int(j ^ m)]
        out[:, m_val] = sign * column
    return out.reshape(-1) / np.sqrt(dim)


@dataclass(frozen=True)
class ConditionalFamily:
    """
    Post-test probe states E_{i_I, j_I} for one public context

    probes[i_I, j_I] is E'_{i,j} restricted to the context and divided by
    sqrt(p(j_T | i_T, i_I, b, s)).
    """

    n_info: int
    b: str
    s: str
    i_T: str
    j_T: str
    probes: np.ndarray
    p_jT: np.ndarray
    probe_dims: Tuple[int, ...]


def conditional_probes(
    attack: Union[AttackSpec, SymmetrizedAttack],
    b: BitsLike,
    s: BitsLike,
    i_T: BitsLike,
    j_T: BitsLike,
) -> ConditionalFamily:
    """
    Project on Bob's test outcome j_T and normalize

    Raises:
        ImpossibleTranscriptError: p(j_T | i_T, i_I, b, s) = 0 for some i_I
    """
    if isinstance(attack, SymmetrizedAttack):
        attack = attack.as_attack()
    b, s = to_bits(b), to_bits(s)
    n_info = int(s.sum())
    i_T, j_T = to_bits(i_T, len(s) - n_info), to_bits(j_T, len(s) - n_info)
    blocks = _context_blocks(attack, b, s, i_T, j_T)
    p_jT = np.sum(np.abs(blocks) ** 2, axis=(1, 2))
    for i_I, p in zip(all_bitstrings(n_info), p_jT):
        if p <= NORM_TOL ** 2:
            raise ImpossibleTranscriptError(
                f"j_T={bits_to_str(j_T)} has probability 0 given i_T={bits_to_str(i_T)}, "
                f"i_I={bits_to_str(i_I)}, b={bits_to_str(b)}, s={bits_to_str(s)}"
            )
    probes = blocks / np.sqrt(p_jT)[:, None, None]
    return ConditionalFamily(
        n_info, bits_to_str(b), bits_to_str(s), bits_to_str(i_T), bits_to_str(j_T), probes, p_jT, attack.probe_dims
    )


def _context_blocks(attack: AttackSpec, b: np.ndarray, s: np.ndarray, i_T: np.ndarray, j_T: np.ndarray) -> np.ndarray:
    """blocks[i_I, j_I] = E'_{i,j} with i = (i_T, i_I) and j = (j_T, j_I) merged by s"""
    _check_bits(attack, b, s)
    n_info = int(s.sum())
    info_rows = all_bitstrings(n_info)
    k = 1 << n_info
    blocks = np.zeros((k, k, attack.probe_dim), dtype=complex)
    j_cols = [bits_to_int(merge_by_selector(j_T, j_I, s)) for j_I in info_rows]
    for a, i_I in enumerate(info_rows):
        mat = probe_matrix(attack, merge_by_selector(i_T, i_I, s), b)
        blocks[a] = mat[:, j_cols].T
    return blocks


def jt_probabilities(
    attack: Union[AttackSpec, SymmetrizedAttack],
    b: BitsLike,
    s: BitsLike,
    i_T: BitsLike,
    j_T: BitsLike,
) -> np.ndarray:
    """
    p(j_T | i_T, i_I, b, s) for every i_I, zero entries allowed

    Returns:
        np.ndarray: One probability per i_I, indexed by its integer value
    """
    if isinstance(attack, SymmetrizedAttack):
        attack = attack.as_attack()
    b, s = to_bits(b), to_bits(s)
    n_test = len(s) - int(s.sum())
    blocks = _context_blocks(attack, b, s, to_bits(i_T, n_test), to_bits(j_T, n_test))
    return np.sum(np.abs(blocks) ** 2, axis=(1, 2))


def info_posterior(
    attack: Union[AttackSpec, SymmetrizedAttack],
    b: BitsLike,
    s: BitsLike,
    i_T: BitsLike,
    j_T: BitsLike,
) -> np.ndarray:
    """
    p(i_I | i_T, j_T, b, s) under a uniform prior on i_I

    Raises:
        ImpossibleTranscriptError: j_T has probability 0 for every i_I
    """
    p = jt_probabilities(attack, b, s, i_T, j_T)
    total = float(p.sum())
    if total <= NORM_TOL ** 2:
        raise ImpossibleTranscriptError(f"j_T={bits_to_str(j_T)} has probability 0 given i_T={bits_to_str(i_T)}")
    return p / total


def sym_probe_overlaps(
    sym: Union[SymmetrizedAttack, AttackSpec],
    b: BitsLike,
    s: BitsLike,
    i_T: BitsLike,
    j_T: BitsLike,
) -> np.ndarray:
    """
    Gram table G[i_I, j_I, i'_I, j'_I] = <E_{i_I,j_I}|E_{i'_I,j'_I}> of the
    post-test probe states

    Raises:
        ImpossibleTranscriptError: zero-probability test outcome
    """
    fam = conditional_probes(sym, b, s, i_T, j_T)
    k = 1 << fam.n_info
    flat = fam.probes.reshape(k * k, -1)
    gram = flat.conj() @ flat.T
    return gram.reshape(k, k, k, k)


# Presets


def _probe_plus(n: int) -> StateVector:
    return StateVector.uniform(n)


def _swap_order(probe_subsystems: int, front: int, n: int) -> list:
    """Subsystem order exchanging probe register [front, front+n) with the n qubits"""
    order = list(range(probe_subsystems + n))
    for k in range(n):
        order[front + k], order[probe_subsystems + k] = probe_subsystems + k, front + k
    return order


def identity_attack(n: int) -> AttackSpec:
    return AttackSpec(
        n, StateVector([1.0], (1,), normalized=True), UnitaryOp.identity((1,) + (2,) * n),
        name="identity", eve_measurement=computational_measurement(1),
    )


def bit_flip_attack(n: int) -> AttackSpec:
    """X on every qubit, no probe"""
    op = UnitaryOp(sparse.csr_matrix(np.ones((1, 1))), (1,), check=False)
    x = UnitaryOp(sparse.csr_matrix(PAULI_X), (2,), check=False)
    for _ in range(n):
        op = op.kron(x)
    return AttackSpec(n, StateVector([1.0], (1,), normalized=True), op, name="bit-flip")


def _swap_op(probe_dims: Sequence[int], front: int, n: int) -> UnitaryOp:
    dims = tuple(probe_dims) + (2,) * n
    if front + n != len(probe_dims):
        raise DimensionMismatchError("Swap register must be the last n probe subsystems")
    order = _swap_order(len(probe_dims), front, n)
    return UnitaryOp(permutation_matrix(dims, order).astype(complex), dims, check=False)


def _basis_measurement_rows(bases: np.ndarray) -> np.ndarray:
    return basis_matrix(bases).T


def swap_attack(n: int, rng_model: str = "superposition") -> AttackSpec:
    """
    Eve keeps Alice's qubits and forwards her own register to Bob

    Args:
        n (int): Number of transmitted qubits
        rng_model (str): What Bob receives, purified inside Eve's probe:
            "superposition" |+>^n; "entangled" halves of Bell pairs
            (maximally mixed at Bob); "bb84" a fresh uniformly random
            BB84 state per qubit (purified by value and basis ancillas)

    Returns:
        AttackSpec: SWAP attack; its measurement reads the held qubits in Alice's bases
    """
    if rng_model == "superposition":
        probe = _probe_plus(n)
    elif rng_model == "entangled":
        bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2.0)
        pairs = np.ones(1, dtype=complex)
        for _ in range(n):
            pairs = np.kron(pairs, bell)
        # pairs are ordered (R_1 P_1 R_2 P_2 ...); regroup as R then P
        interleaved = StateVector(pairs, (2,) * (2 * n))
        order = [2 * k for k in range(n)] + [2 * k + 1 for k in range(n)]
        perm = permutation_matrix(interleaved.dims, order)
        probe = StateVector(perm @ interleaved.amps, (2,) * (2 * n), normalized=True)
    elif rng_model == "bb84":
        states = np.zeros((4, 2), dtype=complex)
        for x in range(2):
            for beta in range(2):
                states[2 * x + beta] = SINGLE_QUBIT_BASES[beta][:, x] / 2.0
        # per qubit: value ancilla, basis ancilla, prepared qubit
        single = np.zeros(8, dtype=complex)
        for x in range(2):
            for beta in range(2):
                single[(x * 2 + beta) * 2: (x * 2 + beta) * 2 + 2] = states[2 * x + beta]
        full = np.ones(1, dtype=complex)
        for _ in range(n):
            full = np.kron(full, single)
        grouped = StateVector(full, (2,) * (3 * n))
        order = [3 * k for k in range(n)] + [3 * k + 1 for k in range(n)] + [3 * k + 2 for k in range(n)]
        perm = permutation_matrix(grouped.dims, order)
        probe = StateVector(perm @ grouped.amps, (2,) * (3 * n), normalized=True)
    else:
        raise ConfigError(f"Unknown SWAP randomness model: {rng_model}")
    front = len(probe.dims) - n
    op = _swap_op(probe.dims, front, n)

    def measure(ctx: MeasurementContext) -> np.ndarray:
        held = _basis_measurement_rows(to_bits(ctx.b))
        if front == 0:
            return held
        return np.kron(np.eye(1 << front, dtype=complex), held)

    return AttackSpec(n, probe, op, name=f"swap-{rng_model}", eve_measurement=measure)


def half_swap_attack(n: int) -> AttackSpec:
    """
    With a control qubit in |+>: U|0>|p>|i> = |0>|p>|i>, U|1>|p>|i> = |1>|i>|p>

    Eve's measurement reads the control; on 1 she reads the held qubits in
    Alice's bases, otherwise her unused register in the computational basis.
    """
    probe = StateVector.uniform(1).tensor(_probe_plus(n))
    inner = _swap_op((2,) * n, 0, n)
    proj0 = sparse.csr_matrix(np.diag([1.0, 0.0]).astype(complex))
    proj1 = sparse.csr_matrix(np.diag([0.0, 1.0]).astype(complex))
    full_dim = 1 << (2 * n)
    mat = sparse.kron(proj0, sparse.identity(full_dim, dtype=complex), format="csr") + \
        sparse.kron(proj1, inner.entries, format="csr")
    op = UnitaryOp(mat, (2,) + (2,) * (2 * n), check=False)

    def measure(ctx: MeasurementContext) -> np.ndarray:
        kept = np.eye(1 << n, dtype=complex)
        held = _basis_measurement_rows(to_bits(ctx.b))
        return np.vstack([np.kron([1.0, 0.0], kept), np.kron([0.0, 1.0], held)])

    return AttackSpec(n, probe, op, name="half-swap", eve_measurement=measure)


def _cnot_copy(flip_basis: bool) -> np.ndarray:
    """4x4 gate on (P, A): P ^= value of A in z (or x if flip_basis)"""
    cnot = np.zeros((4, 4), dtype=complex)
    for p in range(2):
        for a in range(2):
            cnot[(p ^ a) * 2 + a, p * 2 + a] = 1.0
    if not flip_basis:
        return cnot
    h_a = np.kron(np.eye(2), HADAMARD)
    return h_a @ cnot @ h_a


def intercept_resend(n: int, basis_strategy: str = "z") -> AttackSpec:
    """
    Eve copies each qubit's value in a chosen basis into a probe qubit

    Args:
        n (int): Number of transmitted qubits
        basis_strategy (str): "z", "x" or "random" (basis ancilla in |+>)

    Returns:
        AttackSpec: Probe registers ordered (basis ancillas,) copies, then qubits
    """
    if basis_strategy in ("z", "x"):
        gate = _cnot_copy(basis_strategy == "x")
        probe = StateVector.basis(0, (2,) * n)
        dims = (2,) * (2 * n)
        op = UnitaryOp.identity(dims)
        for k in range(n):
            op = embed(gate, [k, n + k], dims).compose(op)
    elif basis_strategy == "random":
        zgate, xgate = _cnot_copy(False), _cnot_copy(True)
        gate = np.zeros((8, 8), dtype=complex)
        gate[:4, :4] = zgate
        gate[4:, 4:] = xgate
        probe = StateVector.uniform(n).tensor(StateVector.basis(0, (2,) * n))
        dims = (2,) * (3 * n)
        op = UnitaryOp.identity(dims)
        for k in range(n):
            op = embed(gate, [k, n + k, 2 * n + k], dims).compose(op)
    else:
        raise ConfigError(f"Unknown intercept-resend basis strategy: {basis_strategy}")
    return AttackSpec(n, probe, op, name=f"intercept-{basis_strategy}",
                      eve_measurement=computational_measurement(probe.dim))


def cnot_probe_attack(n: int) -> AttackSpec:
    """CNOT from each qubit onto a fresh probe qubit"""
    attack = intercept_resend(n, "z")
    return AttackSpec(n, attack.probe_init, attack.U, name="cnot-probe", eve_measurement=attack.eve_measurement)


def random_attack(n_qubits: int, probe_qubits: int, rng: np.random.Generator) -> AttackSpec:
    """Haar-random joint unitary with the probe starting in |0...0>"""
    dim = 1 << (n_qubits + probe_qubits)
    check_dim(dim, "random attack")
    mat = unitary_group.rvs(dim, random_state=rng)
    probe_dims = (2,) * probe_qubits if probe_qubits else (1,)
    probe = StateVector.basis(0, probe_dims)
    return AttackSpec(n_qubits, probe, UnitaryOp(mat, probe_dims + (2,) * n_qubits), name="random")


PRESETS = {
    "identity": lambda n: identity_attack(n),
    "swap": lambda n: swap_attack(n, "superposition"),
    "swap-entangled": lambda n: swap_attack(n, "entangled"),
    "swap-bb84": lambda n: swap_attack(n, "bb84"),
    "half-swap": lambda n: half_swap_attack(n),
    "intercept-z": lambda n: intercept_resend(n, "z"),
    "intercept-x": lambda n: intercept_resend(n, "x"),
    "intercept-random": lambda n: intercept_resend(n, "random"),
    "cnot-probe": lambda n: cnot_probe_attack(n),
    "bit-flip": lambda n: bit_flip_attack(n),
}


def preset_by_name(name: str, n_qubits: int) -> AttackSpec:
    if name not in PRESETS:
        raise ConfigError(f"Unknown attack preset '{name}'. Known: {', '.join(sorted(PRESETS))}")
    return PRESETS[name](n_qubits)


def _pairs(values: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in np.asarray(values).reshape(-1)]


def _from_pairs(pairs, size: int) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape != (size, 2):
        raise DimensionMismatchError(f"Expected {size} [re, im] pairs, got shape {arr.shape}")
    return arr[:, 0] + 1j * arr[:, 1]


def attack_to_json(attack: AttackSpec) -> dict:
    return {
        "n_qubits": attack.n_qubits,
        "probe_dim": attack.probe_dim,
        "probe_dims": list(attack.probe_dims),
        "name": attack.name,
        "probe_init": _pairs(attack.probe_init.amps),
        "U": _pairs(attack.U.dense()),
    }


def attack_from_json(data: dict) -> AttackSpec:
    try:
        n = int(data["n_qubits"])
        probe_dim = int(data["probe_dim"])
        probe_dims = tuple(data.get("probe_dims", [probe_dim]))
        dim = probe_dim * (1 << n)
        probe = StateVector(_from_pairs(data["probe_init"], probe_dim), probe_dims, normalized=True)
        mat = _from_pairs(data["U"], dim * dim).reshape(dim, dim)
    except KeyError as e:
        raise ConfigError(f"Attack JSON is missing field {e}") from e
    return AttackSpec(n, probe, UnitaryOp(mat, probe_dims + (2,) * n), name=data.get("name", "custom"))


def save_attack(attack: AttackSpec, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(attack_to_json(attack)), encoding="utf-8")
    return path


def load_attack(spec: str, n_qubits: int) -> AttackSpec:
    """Preset name or path to an attack JSON file"""
    if spec in PRESETS:
        return preset_by_name(spec, n_qubits)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"'{spec}' is neither a preset nor an existing attack file")
    attack = attack_from_json(json.loads(path.read_text(encoding="utf-8")))
    if attack.n_qubits != n_qubits:
        raise ConfigError(f"Attack file {path} attacks {attack.n_qubits} qubits, run needs {n_qubits}")
    return attack
