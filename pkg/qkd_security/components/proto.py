"""
Protocol state machines
used-bits-BB84 and full BB84 (sifting + reduction), the Monte Carlo harness,
exhaustive sampling checks and the security-criterion evaluator
"""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats

from qkd_security.components.analytic import theorem_split
from qkd_security.components.channel_models import QuantumChannel
from qkd_security.components.evemodel import AttackSpec, MeasurementContext, probe_matrix
from qkd_security.components.gf2code import CodeSpec, decode_to_coset, syndrome
from qkd_security.components.information import entropy, mutual_information
from qkd_security.constants import MAX_CRITERION_QUBITS
from qkd_security.logging_exception import (
    ConfigError,
    DimensionMismatchError,
    ProtocolOrderError,
    ResourceCapError,
)
from qkd_security.utils.bits import all_bitstrings, bits_to_int, bits_to_str, split_by_selector, to_bits
from qkd_security.utils.seeding import derive_rng

logger = logging.getLogger(__name__)

__all__ = [
    "ProtocolParams",
    "Transcript",
    "PublicChannel",
    "run_used_bits",
    "run_full_bb84",
    "monte_carlo",
    "hoeffding_exhaustive",
    "evaluate_security_criterion",
    "average_information_by_test_syndrome",
    "hoeffding_sweep",
    "entropy",
    "mutual_information",
]

MODES = ("used-bits", "full")

# Public messages in the only order the protocol may produce them
MESSAGE_ORDER = [
    "quantum_transmission",
    "bob_receipt",
    "bases",
    "bob_bases",
    "sifting",
    "test_selection",
    "test_bits",
    "test_result",
    "syndrome",
    "privacy_amplification",
]


@dataclass(frozen=True)
class ProtocolParams:
    """
    Run parameters

    n is the number of information bits (2n qubits are used); code acts on
    the n information bits.
    """

    n: int
    p_allowed: float
    eps_sec: float
    eps_rel: float
    code: CodeSpec
    mode: str = "used-bits"
    delta_num: float = 0.5
    seed: int = 0
    loss_tolerant: bool = False
    check_security: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError(f"n must be positive, got {self.n}")
        if not 0.0 < self.p_allowed < 0.5:
            raise ConfigError(f"p_allowed must lie in (0, 0.5), got {self.p_allowed}")
        if self.eps_sec <= 0.0 or self.eps_rel <= 0.0:
            raise ConfigError("eps_sec and eps_rel must be positive")
        if self.code.n != self.n:
            raise ConfigError(f"Code length {self.code.n} does not match n = {self.n}")
        if self.mode not in MODES:
            raise ConfigError(f"Unknown mode '{self.mode}'")
        if self.delta_num < 0.0:
            raise ConfigError("delta_num must be nonnegative")
        if self.check_security and self.code.m and self.code.v_hat is not None:
            limit = self.code.v_hat / (2.0 * self.n)
            if self.p_allowed + self.eps_sec > limit + 1e-12:
                raise ConfigError(
                    f"p_allowed + eps_sec = {self.p_allowed + self.eps_sec:.4f} exceeds v_hat/2n = {limit:.4f}"
                )

    @property
    def n_full_qubits(self) -> int:
        """n'' = ceil((4 + delta_num) n)"""
        return int(math.ceil((4.0 + self.delta_num) * self.n - 1e-12))

    def test_passes(self, c_T_weight: int) -> bool:
        return c_T_weight <= self.n * self.p_allowed + 1e-12


class PublicChannel:
    """
    Ordered log of classical messages; publishing or reading out of order
    raises ProtocolOrderError
    """

    def __init__(self):
        self.messages: List[Dict[str, Any]] = []
        self._payloads: Dict[str, Any] = {}

    def publish(self, sender: str, label: str, payload: Any = None) -> None:
        if label not in MESSAGE_ORDER:
            raise ProtocolOrderError(f"Unknown message '{label}'")
        if label in self._payloads:
            raise ProtocolOrderError(f"Message '{label}' already published")
        if self.messages:
            last = MESSAGE_ORDER.index(self.messages[-1]["label"])
            if MESSAGE_ORDER.index(label) <= last:
                raise ProtocolOrderError(f"'{label}' cannot follow '{self.messages[-1]['label']}'")
        self.messages.append({"sender": sender, "label": label, "payload": payload})
        self._payloads[label] = payload

    def read(self, label: str) -> Any:
        if label not in self._payloads:
            raise ProtocolOrderError(f"'{label}' read before it was published")
        return self._payloads[label]

    def labels(self) -> List[str]:
        return [msg["label"] for msg in self.messages]


@dataclass
class Transcript:
    """Full record of one protocol run; bit strings are '0'/'1' text"""

    mode: str
    i: str
    b: str
    s: str = ""
    j: str = ""
    i_T: str = ""
    j_T: str = ""
    c_T: str = ""
    i_I: str = ""
    j_I: str = ""
    xi: str = ""
    test_pass: bool = False
    j_bob: str = ""
    key_alice: str = ""
    key_bob: str = ""
    aborted: bool = False
    n_sifted: Optional[int] = None
    lost: List[int] = field(default_factory=list)
    messages: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def c_I(self) -> str:
        if not self.i_I:
            return ""
        return bits_to_str(to_bits(self.i_I) ^ to_bits(self.j_I))

    @property
    def keys_equal(self) -> bool:
        return self.test_pass and self.key_alice == self.key_bob

    def to_json(self) -> Dict[str, Any]:
        data = asdict(self)
        data["c_I"] = self.c_I
        return data


def _lost_positions(channel, count: int, lost: Optional[Sequence[int]], rng: np.random.Generator) -> List[int]:
    if lost is not None:
        return sorted(int(k) for k in lost)
    loss_prob = getattr(channel, "loss_prob", 0.0)
    if loss_prob <= 0.0:
        return []
    return [int(k) for k in np.nonzero(rng.random(count) < loss_prob)[0]]


def _replace_lost(j: np.ndarray, bob_basis: np.ndarray, lost: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Bob measures a fresh uniformly random BB84 state in place of each missing qubit"""
    j = j.copy()
    for k in lost:
        value, basis = int(rng.integers(0, 2)), int(rng.integers(0, 2))
        j[k] = value if basis == bob_basis[k] else int(rng.integers(0, 2))
    return j


def _balanced_selector(two_n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform over all C(2n, n) strings with n ones: shuffle then split"""
    perm = rng.permutation(two_n)
    s = np.zeros(two_n, dtype=np.uint8)
    s[perm[two_n // 2:]] = 1
    return s


def _finish(params: ProtocolParams, public: PublicChannel, transcript: Transcript,
            i: np.ndarray, j: np.ndarray, rng: np.random.Generator) -> Transcript:
    """Test, error correction and privacy amplification on the 2n used bits"""
    s = _balanced_selector(2 * params.n, rng)
    public.publish("alice", "test_selection", bits_to_str(s))
    i_T, i_I = split_by_selector(i, s)
    j_T, j_I = split_by_selector(j, s)
    public.publish("both", "test_bits", {"i_T": bits_to_str(i_T), "j_T": bits_to_str(j_T)})
    c_T = i_T ^ j_T
    passed = params.test_passes(int(c_T.sum()))
    public.publish("alice", "test_result", "pass" if passed else "fail")

    transcript.s, transcript.j = bits_to_str(s), bits_to_str(j)
    transcript.i_T, transcript.j_T, transcript.c_T = bits_to_str(i_T), bits_to_str(j_T), bits_to_str(c_T)
    transcript.i_I, transcript.j_I = bits_to_str(i_I), bits_to_str(j_I)
    transcript.test_pass = passed
    if passed:
        code = params.code
        xi = syndrome(code.P_C, i_I)
        public.publish("alice", "syndrome", bits_to_str(xi))
        j_bob = decode_to_coset(code, j_I, public.read("syndrome"))
        public.publish("both", "privacy_amplification", {"m": code.m})
        transcript.xi = bits_to_str(xi)
        transcript.j_bob = bits_to_str(j_bob)
        transcript.key_alice = bits_to_str(code.key(i_I))
        transcript.key_bob = bits_to_str(code.key(j_bob))
    transcript.messages = list(public.messages)
    return transcript


def run_used_bits(params: ProtocolParams, channel, rng: np.random.Generator,
                  lost: Optional[Sequence[int]] = None) -> Transcript:
    """
    One run of used-bits-BB84: Bob stores the qubits and measures in the
    bases Alice publishes after he confirms receipt

    Args:
        params (ProtocolParams): Run parameters
        channel: QuantumChannel, ClassicalChannel or FixedErrorChannel
        rng (np.random.Generator): Randomness for Alice, Bob and the channel
        lost (Sequence[int]): Positions the channel drops (overrides the channel's loss model)

    Returns:
        Transcript: Full record; keys only when the test passes
    """
    two_n = 2 * params.n
    if isinstance(channel, QuantumChannel) and channel.attack.n_qubits != two_n:
        raise DimensionMismatchError(f"Attack on {channel.attack.n_qubits} qubits, run sends {two_n}")
    public = PublicChannel()
    i = rng.integers(0, 2, size=two_n, dtype=np.uint8)
    b = rng.integers(0, 2, size=two_n, dtype=np.uint8)
    public.publish("alice", "quantum_transmission", {"qubits": two_n})
    missing = _lost_positions(channel, two_n, lost, rng)
    public.publish("bob", "bob_receipt", {"missing": missing})
    public.publish("alice", "bases", bits_to_str(b))
    bases = to_bits(public.read("bases"))
    j = channel.transmit(i, b, bases, rng)
    j = _replace_lost(j, bases, missing, rng)
    transcript = Transcript(mode="used-bits", i=bits_to_str(i), b=bits_to_str(b), lost=missing)
    return _finish(params, public, transcript, i, j, rng)


def run_full_bb84(params: ProtocolParams, channel, rng: np.random.Generator,
                  lost: Optional[Sequence[int]] = None) -> Transcript:
    """
    Full BB84: n'' qubits, Bob measures at once in random bases, sifting keeps
    matching bases and the first 2n sifted bits feed the used-bits phase

    With params.loss_tolerant Bob reports missing qubits before the bases are
    revealed and those positions are dropped from sifting; otherwise Bob
    substitutes a random BB84 state for each missing qubit.
    """
    n_full = params.n_full_qubits
    if isinstance(channel, QuantumChannel) and channel.attack.n_qubits != n_full:
        raise DimensionMismatchError(f"Attack on {channel.attack.n_qubits} qubits, run sends {n_full}")
    public = PublicChannel()
    i_all = rng.integers(0, 2, size=n_full, dtype=np.uint8)
    b_all = rng.integers(0, 2, size=n_full, dtype=np.uint8)
    bob_all = rng.integers(0, 2, size=n_full, dtype=np.uint8)
    public.publish("alice", "quantum_transmission", {"qubits": n_full})
    j_all = channel.transmit(i_all, b_all, bob_all, rng)
    missing = _lost_positions(channel, n_full, lost, rng)
    if params.loss_tolerant:
        public.publish("bob", "bob_receipt", {"missing": missing})
    else:
        j_all = _replace_lost(j_all, bob_all, missing, rng)
        public.publish("bob", "bob_receipt", {"missing": []})
    public.publish("alice", "bases", bits_to_str(b_all))
    public.publish("bob", "bob_bases", bits_to_str(bob_all))

    keep = b_all == bob_all
    if params.loss_tolerant and missing:
        keep[missing] = False
    sifted = np.nonzero(keep)[0]
    public.publish("both", "sifting", {"n_sifted": int(len(sifted))})
    transcript = Transcript(mode="full", i=bits_to_str(i_all), b=bits_to_str(b_all),
                            n_sifted=int(len(sifted)), lost=missing)
    two_n = 2 * params.n
    if len(sifted) < two_n:
        logger.debug(f"Aborted: {len(sifted)} sifted bits < 2n = {two_n}")
        transcript.aborted = True
        transcript.messages = list(public.messages)
        return transcript
    used = sifted[:two_n]
    transcript.i = bits_to_str(i_all[used])
    transcript.b = bits_to_str(b_all[used])
    return _finish(params, public, transcript, i_all[used], j_all[used], rng)


def _run_trial(params: ProtocolParams, channel, trial: int, eps: float,
               lost: Optional[Sequence[int]]) -> Dict[str, Any]:
    rng = derive_rng(params.seed, "proto.trial", trial)
    runner = run_full_bb84 if params.mode == "full" else run_used_bits
    tr = runner(params, channel, rng, lost)
    n = params.n
    c_T = tr.c_T.count("1") if tr.c_T else 0
    c_I = tr.c_I.count("1") if tr.c_I else 0
    bad = (not tr.aborted) and (c_I / n > params.p_allowed + eps) and (c_T / n <= params.p_allowed)
    return {
        "trial": trial,
        "aborted": tr.aborted,
        "pass": tr.test_pass,
        "c_T": c_T,
        "c_I": c_I,
        "keys_equal": tr.keys_equal,
        "joint_bad": bool(bad),
    }


@dataclass
class MonteCarloSummary:
    frame: pd.DataFrame
    pass_frequency: float
    key_agreement_frequency: float
    joint_bad_frequency: float
    abort_frequency: float
    test_error_rate: float
    c_T_histogram: Dict[int, int]
    c_I_histogram: Dict[int, int]

    def aggregate(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("frame")
        return data


def monte_carlo(params: ProtocolParams, channel, trials: int, workers: int = 1,
                eps: Optional[float] = None, lost: Optional[Sequence[int]] = None) -> MonteCarloSummary:
    """
    Independent protocol runs with per-trial seeds derived from params.seed

    Args:
        params (ProtocolParams): Run parameters (mode picks the protocol)
        channel: Channel backend shared by all trials
        trials (int): Number of runs
        workers (int): Thread count; results do not depend on it
        eps (float): Margin of the joint bad event, defaults to eps_rel
        lost (Sequence[int]): Fixed dropped positions for every trial

    Returns:
        MonteCarloSummary: per-trial table and aggregates
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    eps = params.eps_rel if eps is None else eps
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda t: _run_trial(params, channel, t, eps, lost), range(trials)))
    else:
        rows = [_run_trial(params, channel, t, eps, lost) for t in range(trials)]
    frame = pd.DataFrame(rows).sort_values("trial").reset_index(drop=True)
    ran = frame[~frame["aborted"]]
    passed = frame[frame["pass"]]
    summary = MonteCarloSummary(
        frame=frame,
        pass_frequency=float(frame["pass"].mean()),
        key_agreement_frequency=float(passed["keys_equal"].mean()) if len(passed) else float("nan"),
        joint_bad_frequency=float(frame["joint_bad"].mean()),
        abort_frequency=float(frame["aborted"].mean()),
        test_error_rate=float(ran["c_T"].mean() / params.n) if len(ran) else float("nan"),
        c_T_histogram={int(k): int(v) for k, v in ran["c_T"].value_counts().sort_index().items()},
        c_I_histogram={int(k): int(v) for k, v in ran["c_I"].value_counts().sort_index().items()},
    )
    logger.info(
        f"✓ Monte Carlo: {trials} trials, pass {summary.pass_frequency:.4f}, "
        f"keys equal {summary.key_agreement_frequency:.4f}"
    )
    return summary


@dataclass(frozen=True)
class HoeffdingResult:
    two_n: int
    weight: int
    eps: float
    probability: float
    worst_p_allowed: float
    bound: float
    hypergeometric: float

    @property
    def holds(self) -> bool:
        return self.probability <= self.bound + 1e-12


def _balanced_selectors(two_n: int) -> np.ndarray:
    n = two_n // 2
    combos = np.array(list(itertools.combinations(range(two_n), n)), dtype=np.int64)
    s = np.zeros((len(combos), two_n), dtype=np.uint8)
    np.put_along_axis(s, combos, 1, axis=1)
    return s


def hoeffding_exhaustive(two_n: int, weight: int, eps: float,
                         p_allowed: Optional[float] = None,
                         selectors: Optional[np.ndarray] = None) -> HoeffdingResult:
    """
    Exact P[(|C_I|/n > p_a + eps) and (|C_T|/n <= p_a)] over all balanced s for
    an error string of the given weight

    Args:
        two_n (int): Number of used bits
        weight (int): |c|
        eps (float): Margin
        p_allowed (float): Allowed rate; None takes the worst case over p_a = k/n
        selectors (np.ndarray): Precomputed balanced strings, reused across weights

    Returns:
        HoeffdingResult: probability, the bound e^{-n eps^2/2} and the
        hypergeometric closed form of the same probability
    """
    if two_n % 2 or not 0 <= weight <= two_n:
        raise DimensionMismatchError(f"Need even 2n and 0 <= |c| <= 2n, got {two_n}, {weight}")
    n = two_n // 2
    s = _balanced_selectors(two_n) if selectors is None else selectors
    # permutation invariance: put the errors on the first |c| positions
    c_I = s[:, :weight].sum(axis=1).astype(np.int64)
    c_T = weight - c_I
    candidates = [p_allowed] if p_allowed is not None else [k / n for k in range(n + 1)]
    dist = stats.hypergeom(two_n, weight, n)
    best, best_p, best_h = -1.0, None, 0.0
    for p_a in candidates:
        bad = (c_I / n > p_a + eps + 1e-12) & (c_T / n <= p_a + 1e-12)
        prob = float(bad.mean())
        ks = np.arange(0, min(weight, n) + 1)
        mask = (ks / n > p_a + eps + 1e-12) & ((weight - ks) / n <= p_a + 1e-12)
        closed = float(np.sum(dist.pmf(ks[mask])))
        if prob > best:
            best, best_p, best_h = prob, p_a, closed
    return HoeffdingResult(two_n, weight, eps, best, float(best_p), math.exp(-n * eps ** 2 / 2.0), best_h)


def hoeffding_sweep(two_n: int, eps: float) -> pd.DataFrame:
    """hoeffding_exhaustive for every error weight 0..2n"""
    selectors = _balanced_selectors(two_n)
    rows = []
    for w in range(two_n + 1):
        res = hoeffding_exhaustive(two_n, w, eps, selectors=selectors)
        rows.append({**asdict(res), "holds": res.holds})
    return pd.DataFrame(rows)


def average_information_by_test_syndrome(contexts: pd.DataFrame) -> float:
    """
    Sum over passing c_T of P[C_T = c_T] times the mean information over the
    contexts sharing that c_T

    Args:
        contexts (pd.DataFrame): Per-context rows with c_T, probability, info and pass columns

    Returns:
        float: The c_T-grouped form of <I'_Eve>
    """
    passed = contexts[contexts["pass"]]
    total = 0.0
    for _, group in passed.groupby("c_T"):
        p_c = float(group["probability"].sum())
        if p_c > 0.0:
            total += p_c * float((group["probability"] * group["info"]).sum() / p_c)
    return total


@dataclass
class CriterionResult:
    mean_info_prime: float
    p_pass: float
    info_given_pass: float
    identity_residual: float
    by_test_errors: float
    threshold: float
    p_pass_and_info_above: float
    contexts: pd.DataFrame

    def summary(self) -> Dict[str, float]:
        data = asdict(self)
        data.pop("contexts")
        return data


def evaluate_security_criterion(params: ProtocolParams, attack: AttackSpec,
                                exhaustive: bool = True,
                                threshold: Optional[float] = None) -> CriterionResult:
    """
    Exact <I'_Eve> and P[pass and I_Eve >= threshold] by enumerating i, b, s,
    Bob's outcomes and Eve's measurement outcomes

    Args:
        params (ProtocolParams): Protocol parameters (2n <= 4)
        attack (AttackSpec): Attack carrying Eve's measurement per public context
        exhaustive (bool): Only exhaustive evaluation is available
        threshold (float): Information threshold; defaults to A_info e^{-beta_info n}

    Returns:
        CriterionResult: expectation, pass probability, the consistency
        residual of <I'> = I(A;E | pass) P[pass], and per-context values
    """
    two_n = 2 * params.n
    if not exhaustive:
        raise ConfigError("Only exhaustive criterion evaluation is supported")
    if two_n > MAX_CRITERION_QUBITS:
        raise ResourceCapError(f"Criterion enumeration supports 2n <= {MAX_CRITERION_QUBITS}, got {two_n}")
    if attack.n_qubits != two_n:
        raise DimensionMismatchError(f"Attack on {attack.n_qubits} qubits, protocol uses {two_n}")
    code = params.code
    measure = attack.measurement()
    if threshold is None:
        split = theorem_split(code.m, params.eps_sec)
        threshold = split["A_info"] * math.exp(-split["beta_info"] * params.n)

    strings = all_bitstrings(two_n)
    selectors = _balanced_selectors(two_n)
    weight = 1.0 / (len(strings) ** 2 * len(selectors))
    tables: Dict[tuple, np.ndarray] = {}
    cache: Dict[tuple, np.ndarray] = {}

    for b in strings:
        b_str = bits_to_str(b)
        for s in selectors:
            s_str = bits_to_str(s)
            for i in strings:
                i_T, i_I = split_by_selector(i, s)
                xi = bits_to_str(syndrome(code.P_C, i_I))
                key = bits_to_int(code.key(i_I)) if code.m else 0
                mat = probe_matrix(attack, i, b)
                for j_val, j in enumerate(strings):
                    j_T, _ = split_by_selector(j, s)
                    ctx = (b_str, s_str, bits_to_str(i_T), bits_to_str(j_T), xi)
                    if ctx not in cache:
                        cache[ctx] = np.asarray(measure(MeasurementContext(*ctx)))
                    rows = cache[ctx]
                    probs = np.abs(rows.conj() @ mat[:, j_val]) ** 2
                    if ctx not in tables:
                        tables[ctx] = np.zeros((1 << code.m, rows.shape[0]))
                    tables[ctx][key] += weight * probs

    records = []
    for (b_str, s_str, i_T, j_T, xi), table in tables.items():
        p_ctx = float(table.sum())
        if p_ctx <= 0.0:
            continue
        c_T = bits_to_str(to_bits(i_T) ^ to_bits(j_T))
        records.append({
            "b": b_str, "s": s_str, "i_T": i_T, "j_T": j_T, "xi": xi, "c_T": c_T,
            "probability": p_ctx,
            "info": mutual_information(table) if code.m else 0.0,
            "pass": params.test_passes(c_T.count("1")),
        })
    frame = pd.DataFrame(records)
    passed = frame[frame["pass"]]
    p_pass = float(passed["probability"].sum())
    mean_info_prime = float((passed["probability"] * passed["info"]).sum())
    info_given_pass = float((passed["probability"] * passed["info"]).sum() / p_pass) if p_pass > 0 else 0.0
    residual = abs(mean_info_prime - info_given_pass * p_pass)

    by_c_T = average_information_by_test_syndrome(frame)
    above = float(passed.loc[passed["info"] >= threshold, "probability"].sum())
    logger.info(f"✓ Criterion evaluated over {len(frame)} contexts: <I'> = {mean_info_prime:.6f}, P[pass] = {p_pass:.6f}")
    return CriterionResult(mean_info_prime, p_pass, info_given_pass, residual, by_c_T, threshold, above, frame)

