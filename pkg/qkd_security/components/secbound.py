"""
Information versus disturbance
Purified Eve states, the Fourier (eta) basis and its d_l^2 spectrum, parity
density matrices and the trace-norm bounds on Eve's information
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

import numpy as np

from qkd_security.components.analytic import h2
from qkd_security.components.evemodel import (
    AttackSpec,
    ConditionalFamily,
    SymmetrizedAttack,
    conditional_probes,
)
from qkd_security.components.gf2code import (
    CodeSpec,
    Gf2Matrix,
    complete_basis,
    coset_leader,
    distance_to_span,
    iter_span,
    syndrome,
    zerosum,
)
from qkd_security.components.qstate import DensityMatrix, StateVector, trace_norm_distance
from qkd_security.constants import NORM_TOL
from qkd_security.logging_exception import CodeSpecError, DimensionMismatchError
from qkd_security.utils.bits import BitsLike, all_bitstrings, bits_to_int, bits_to_str, to_bits

logger = logging.getLogger(__name__)

__all__ = [
    "PurifiedFamily",
    "EtaSpectrum",
    "ParityEnsemble",
    "purify",
    "eta_spectrum",
    "parity_ensembles",
    "sd_exact_bound",
    "sd_tight_bound",
    "sd_loose_bound",
    "info_m_bound",
    "helstrom_lower_bound",
    "conjugate_basis_error_law",
    "aggregate_spectrum",
    "eta_orthogonality",
    "spectrum_report",
    "zerosum",
]


def _hadamard_signs(n: int) -> np.ndarray:
    """(-1)^{i.l} for all i, l"""
    rows = all_bitstrings(n).astype(np.int64)
    return 1.0 - 2.0 * ((rows @ rows.T) & 1)


@dataclass(frozen=True)
class PurifiedFamily:
    """phi[i_I] = sum_{j_I} E_{i_I,j_I} (x) |i_I xor j_I>, one row per i_I"""

    n_info: int
    phi: np.ndarray
    probe_dims: tuple
    context: Dict[str, str]

    @property
    def dims(self) -> tuple:
        return tuple(self.probe_dims) + (2,) * self.n_info

    def state(self, i_I: BitsLike) -> StateVector:
        return StateVector(self.phi[bits_to_int(to_bits(i_I, self.n_info))], self.dims)

    def overlaps(self) -> np.ndarray:
        """Phi[l, l'] = <phi_l|phi_l'>"""
        return self.phi.conj() @ self.phi.T


def purify(family: ConditionalFamily) -> PurifiedFamily:
    """
    Purify Eve's post-test states with a register holding i_I xor j_I

    Args:
        family (ConditionalFamily): Normalized post-test probes for one context

    Returns:
        PurifiedFamily: Normalized phi_i for every i_I
    """
    n = family.n_info
    k = 1 << n
    probe_dim = family.probes.shape[2]
    phi = np.zeros((k, probe_dim, k), dtype=complex)
    idx = np.arange(k)
    for i in range(k):
        # column i xor j of phi_i holds E_{i,j}
        phi[i][:, i ^ idx] = family.probes[i].T
    phi = phi.reshape(k, probe_dim * k)
    norms = np.sum(np.abs(phi) ** 2, axis=1)
    if np.max(np.abs(norms - 1.0)) > NORM_TOL:
        raise DimensionMismatchError(f"Purified states are not normalized (max deviation {np.max(np.abs(norms - 1.0)):.3e})")
    context = {"b": family.b, "s": family.s, "i_T": family.i_T, "j_T": family.j_T}
    return PurifiedFamily(n, phi, tuple(family.probe_dims), context)


@dataclass(frozen=True)
class EtaSpectrum:
    """eta[l] = 2^{-n} sum_i (-1)^{i.l} phi_i and d2[l] = <eta_l|eta_l>"""

    n_info: int
    eta: np.ndarray
    d2: np.ndarray
    residual: float

    def d2_by_string(self) -> Dict[str, float]:
        return {bits_to_str(l): float(v) for l, v in zip(all_bitstrings(self.n_info), self.d2)}

    def weight_mass(self, min_weight: float) -> float:
        """sum of d_l^2 over |l| >= min_weight"""
        weights = all_bitstrings(self.n_info).sum(axis=1)
        return float(np.sum(self.d2[weights >= min_weight]))


def eta_spectrum(fam: PurifiedFamily) -> EtaSpectrum:
    """
    Fourier transform of the purified family over the inputs i_I

    Returns:
        EtaSpectrum: eta vectors, d_l^2 and the reconstruction residual
        max_i ||phi_i - sum_l (-1)^{i.l} eta_l||
    """
    n = fam.n_info
    signs = _hadamard_signs(n)
    eta = (signs @ fam.phi) / float(1 << n)
    d2 = np.sum(np.abs(eta) ** 2, axis=1)
    rebuilt = signs @ eta
    residual = float(np.max(np.linalg.norm(rebuilt - fam.phi, axis=1)))
    return EtaSpectrum(n, eta, d2, residual)


def eta_orthogonality(spec: EtaSpectrum) -> float:
    """max over i != j of |<eta_j|eta_i>|"""
    gram = spec.eta.conj() @ spec.eta.T
    off = gram - np.diag(np.diag(gram))
    return float(np.max(np.abs(off), initial=0.0))


@dataclass(frozen=True)
class ParityEnsemble:
    """Eve's states for key bit a = i_I . v given syndrome xi"""

    code: CodeSpec
    xi: str
    v: str
    rho0: DensityMatrix
    rho1: DensityMatrix
    coset_size: int


def parity_ensembles(fam: PurifiedFamily, code: CodeSpec, xi: BitsLike, v_index: int = 0) -> ParityEnsemble:
    """
    rho_a = 2^{-(n-r-1)} sum over i_I in the xi coset with i_I . v = a of |phi_i><phi_i|

    Args:
        fam (PurifiedFamily): Purified states for all i_I
        code (CodeSpec): ECC+PA code over the n information bits
        xi (BitsLike): ECC syndrome
        v_index (int): Which PA row defines the key bit

    Raises:
        CodeSpecError: v lies in the span of the ECC rows
    """
    if code.n != fam.n_info:
        raise DimensionMismatchError(f"Code length {code.n} does not match {fam.n_info} information bits")
    if not 0 <= v_index < code.m:
        raise CodeSpecError(f"PA row {v_index} does not exist (m={code.m})")
    xi = to_bits(xi, code.r)
    v = code.P_PA.bits[v_index]
    if distance_to_span(v, code.P_C) == 0:
        raise CodeSpecError(f"PA row {bits_to_str(v)} is in the span of the ECC rows; its key bit is public")

    inputs = all_bitstrings(code.n)
    in_coset = np.array([np.array_equal(syndrome(code.P_C, x), xi) for x in inputs])
    parity = (inputs.astype(np.int64) @ v.astype(np.int64)) & 1
    expected = 1 << (code.n - code.r - 1)
    rhos = []
    for a in (0, 1):
        members = np.nonzero(in_coset & (parity == a))[0]
        if len(members) != expected:
            raise CodeSpecError(f"Coset/parity class has {len(members)} members, expected {expected}")
        vecs = fam.phi[members]
        rho = (vecs.T @ vecs.conj()) / expected
        rhos.append(DensityMatrix(rho, fam.dims))
    return ParityEnsemble(code, bits_to_str(xi), bits_to_str(v), rhos[0], rhos[1], expected)


def sd_exact_bound(ens: ParityEnsemble) -> float:
    """Half the trace norm of rho_0 - rho_1"""
    return 0.5 * trace_norm_distance(ens.rho0, ens.rho1)


def sd_tight_bound(spec: EtaSpectrum, v_hat: int) -> float:
    """2 sqrt(sum_{|l| >= v_hat/2} d_l^2), reported raw (may exceed 1)"""
    return float(2.0 * np.sqrt(spec.weight_mass(v_hat / 2.0)))


def sd_loose_bound(spec: EtaSpectrum, v_hat: int, r: int) -> float:
    return float(2 ** (r + 1) * np.sqrt(spec.weight_mass(v_hat / 2.0)))


def info_m_bound(spec: EtaSpectrum, code: CodeSpec) -> float:
    """2m sqrt(P[|C_I| >= v_hat/2]) with the probability read off the d^2 spectrum"""
    if code.m == 0:
        return 0.0
    return float(2.0 * code.m * np.sqrt(spec.weight_mass(code.v_hat / 2.0)))


def helstrom_lower_bound(ens: ParityEnsemble) -> float:
    """
    Mutual information achieved by the optimal two-outcome measurement
    on equiprobable rho_0, rho_1: 1 - H2(1/2 + D/4) with D = Tr|rho_0 - rho_1|
    """
    dist = trace_norm_distance(ens.rho0, ens.rho1)
    return 1.0 - h2(min(1.0, 0.5 + dist / 4.0))


def conjugate_basis_error_law(
    attack: Union[AttackSpec, SymmetrizedAttack],
    b: BitsLike,
    s: BitsLike,
    i_T: BitsLike,
    j_T: BitsLike,
) -> np.ndarray:
    """
    P[C_I = c | i_T, j_T, b xor s, s] by running the attack with the
    information-bit bases flipped, indexed by the integer value of c

    Returns:
        np.ndarray: Distribution over c_I, uniform average over i_I
    """
    b, s = to_bits(b), to_bits(s)
    fam = conditional_probes(attack, b ^ s, s, i_T, j_T)
    k = 1 << fam.n_info
    law = np.zeros(k)
    idx = np.arange(k)
    for i in range(k):
        law[idx] += np.sum(np.abs(fam.probes[i, i ^ idx]) ** 2, axis=1)
    return law / k


@dataclass(frozen=True)
class AggregatedSpectrum:
    """eta'_m over representatives m of GF(2)^n / V_r and the d'^2 values"""

    representatives: List[str]
    eta_prime: np.ndarray
    d2_prime: np.ndarray
    d2_coset_sums: np.ndarray


def aggregate_spectrum(spec: EtaSpectrum, code: CodeSpec, xi: BitsLike) -> AggregatedSpectrum:
    """
    eta'_m = sum_{u in V_r} (-1)^{i_xi . u} eta_{m xor u}, V_r the span of the ECC rows

    Args:
        spec (EtaSpectrum): Spectrum of the purified family
        code (CodeSpec): Code whose ECC rows span V_r
        xi (BitsLike): Syndrome fixing the coset representative i_xi

    Returns:
        AggregatedSpectrum: d'^2 from the eta' vectors and from coset sums of d^2
    """
    n = code.n
    i_xi = coset_leader(code.P_C, xi).astype(np.int64)
    v_r = np.concatenate(list(iter_span(code.P_C))) if code.r else np.zeros((1, n), dtype=np.uint8)
    full = complete_basis(code.P_C)
    extra = Gf2Matrix(full.bits[code.r:], cols=n)
    if extra.rows:
        reps = np.concatenate(list(iter_span(extra)))
    else:
        reps = np.zeros((1, n), dtype=np.uint8)
    rep_vals = [bits_to_int(m) for m in reps]
    u_vals = [bits_to_int(u) for u in v_r]
    u_signs = [(-1.0) ** (int(np.sum(i_xi & u.astype(np.int64))) & 1) for u in v_r]

    eta_prime = np.zeros((len(reps), spec.eta.shape[1]), dtype=complex)
    coset_sums = np.zeros(len(reps))
    for a, m in enumerate(rep_vals):
        for u, sign in zip(u_vals, u_signs):
            eta_prime[a] += sign * spec.eta[m ^ u]
            coset_sums[a] += spec.d2[m ^ u]
    d2_prime = np.sum(np.abs(eta_prime) ** 2, axis=1)
    return AggregatedSpectrum([bits_to_str(m) for m in reps], eta_prime, d2_prime, coset_sums)


def spectrum_report(
    spec: EtaSpectrum,
    code: CodeSpec,
    ens: Optional[ParityEnsemble] = None,
    context: Optional[Dict[str, str]] = None,
) -> Dict:
    """
    Spectrum dump: context, d2 by string, v_hat and every bound

    Returns:
        Dict: JSON-ready report
    """
    v_hat = code.v_hat
    tight = sd_tight_bound(spec, v_hat)
    bounds = {
        "tight": tight,
        "tight_clamped": min(1.0, tight),
        "loose": sd_loose_bound(spec, v_hat, code.r),
        "m_bit": info_m_bound(spec, code),
    }
    if ens is not None:
        bounds["exact"] = sd_exact_bound(ens)
        bounds["helstrom"] = helstrom_lower_bound(ens)
    return {
        "context": dict(context or {}),
        "d2": spec.d2_by_string(),
        "v_hat": v_hat,
        "eta_orthogonality": eta_orthogonality(spec),
        "bounds": bounds,
    }
