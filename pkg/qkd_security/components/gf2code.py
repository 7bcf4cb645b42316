"""
GF(2) linear algebra and ECC+PA codes
Parity-check matrices, spans, distances, random linear codes, the dual-code
security parameters and brute-force coset decoding
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, List, Optional, Tuple, Union

import numpy as np

from qkd_security.constants import DEFAULT_SPAN_CAP_BITS, ENV_SPAN_CAP_BITS
from qkd_security.logging_exception import CodeSpecError, DimensionMismatchError, ResourceCapError
from qkd_security.utils.bits import BitsLike, all_bitstrings, bits_to_str, to_bits
from qkd_security.utils.settings import env_int

logger = logging.getLogger(__name__)

CHUNK_BITS = 14


def span_cap_bits() -> int:
    return env_int(ENV_SPAN_CAP_BITS, DEFAULT_SPAN_CAP_BITS)


def _check_enumerable(k: int, what: str) -> None:
    cap = span_cap_bits()
    if k > cap:
        raise ResourceCapError(f"{what}: 2^{k} elements exceeds enumeration cap 2^{cap}")


def rref(mat: np.ndarray) -> Tuple[np.ndarray, List[int]]:
    """
    Reduced row echelon form over GF(2)

    Returns:
        Tuple[np.ndarray, List[int]]: (reduced matrix with zero rows dropped, pivot columns)
    """
    a = (np.array(mat, dtype=np.uint8) & 1).copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
        others = np.nonzero(a[:, c])[0]
        others = others[others != r]
        a[others] ^= a[r]
        pivots.append(c)
        r += 1
    return a[:r], pivots


class Gf2Matrix:
    """
    Binary matrix stored as a (rows, cols) uint8 array

    Args:
        bits: 2-D array-like of 0/1 values, or a list of '0'/'1' strings
        cols (int): Column count, needed when there are no rows
    """

    def __init__(self, bits, cols: Optional[int] = None):
        if isinstance(bits, Gf2Matrix):
            arr = bits.bits
        elif len(bits) and isinstance(bits[0], str):
            arr = np.stack([to_bits(row) for row in bits])
        else:
            arr = np.array(bits, dtype=np.uint8)
        if arr.size == 0:
            width = cols if cols is not None else (arr.shape[1] if arr.ndim == 2 else 0)
            arr = np.zeros((0, width), dtype=np.uint8)
        if arr.ndim != 2:
            raise DimensionMismatchError(f"Gf2Matrix needs a 2-D array, got shape {arr.shape}")
        if cols is not None and arr.shape[1] != cols:
            raise DimensionMismatchError(f"Expected {cols} columns, got {arr.shape[1]}")
        if arr.size and arr.max() > 1:
            raise DimensionMismatchError("Gf2Matrix entries must be 0 or 1")
        arr = arr.astype(np.uint8)
        arr.setflags(write=False)
        self.bits = arr

    @property
    def rows(self) -> int:
        return self.bits.shape[0]

    @property
    def cols(self) -> int:
        return self.bits.shape[1]

    @cached_property
    def rank(self) -> int:
        return len(rref(self.bits)[1])

    def stack(self, other: "Gf2Matrix") -> "Gf2Matrix":
        return Gf2Matrix(np.vstack([self.bits, other.bits]), cols=self.cols)

    def row_strings(self) -> List[str]:
        return [bits_to_str(row) for row in self.bits]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Gf2Matrix):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash((self.bits.shape, self.bits.tobytes()))

    def __repr__(self) -> str:
        return f"Gf2Matrix({self.rows}x{self.cols}, rank={self.rank})"


def hamming(x: BitsLike, y: BitsLike) -> int:
    x = to_bits(x)
    return int(np.sum(x ^ to_bits(y, len(x))))


def weight(x: BitsLike) -> int:
    return int(np.sum(to_bits(x)))


def syndrome(P: Gf2Matrix, x: BitsLike) -> np.ndarray:
    """
    Parities of x against every row of P

    Args:
        P (Gf2Matrix): Parity rows
        x (BitsLike): Bit string of length P.cols

    Returns:
        np.ndarray: xi with xi_q = x . v_q mod 2
    """
    x = to_bits(x, P.cols)
    return ((P.bits.astype(np.int64) @ x.astype(np.int64)) & 1).astype(np.uint8)


def iter_span(rows: Gf2Matrix, offset: Optional[np.ndarray] = None) -> Iterator[np.ndarray]:
    """Yield chunks of (offset xor) every element of the row span"""
    k = rows.rows
    _check_enumerable(k, "span")
    gens = rows.bits.astype(np.int64)
    chunk = min(k, CHUNK_BITS)
    low = all_bitstrings(chunk).astype(np.int64)
    low_words = (low @ gens[k - chunk:]) & 1 if chunk else np.zeros((1, rows.cols), dtype=np.int64)
    for high in range(1 << (k - chunk)):
        high_bits = np.array([(high >> (k - chunk - 1 - q)) & 1 for q in range(k - chunk)], dtype=np.int64)
        base = (high_bits @ gens[: k - chunk]) & 1 if k - chunk else np.zeros(rows.cols, dtype=np.int64)
        words = low_words ^ base[None, :]
        if offset is not None:
            words = words ^ offset[None, :].astype(np.int64)
        yield words.astype(np.uint8)


def min_distance(rows: Gf2Matrix) -> int:
    """
    Minimum Hamming weight over the nonzero elements of the row span

    Raises:
        CodeSpecError: rank 0
        ResourceCapError: span not enumerable under the cap
    """
    if rows.rank == 0:
        raise CodeSpecError("min_distance needs at least one nonzero row")
    basis = Gf2Matrix(rref(rows.bits)[0], cols=rows.cols)
    best = rows.cols + 1
    for words in iter_span(basis):
        w = words.sum(axis=1)
        w = w[w > 0]
        if w.size:
            best = min(best, int(w.min()))
    return best


def distance_to_span(v: BitsLike, rows: Gf2Matrix) -> int:
    """min over c in span(rows) of |v xor c|"""
    v = to_bits(v, rows.cols)
    if rows.rows == 0:
        return int(v.sum())
    basis = Gf2Matrix(rref(rows.bits)[0], cols=rows.cols)
    if basis.rows == 0:
        return int(v.sum())
    return min(int(words.sum(axis=1).min()) for words in iter_span(basis, offset=v))


def null_space_basis(P: Gf2Matrix) -> Gf2Matrix:
    """Rows spanning {x : x P^T = 0}"""
    n = P.cols
    reduced, pivots = rref(P.bits)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for q, f in enumerate(free):
        basis[q, f] = 1
        for row, pc in zip(reduced, pivots):
            if row[f]:
                basis[q, pc] = 1
    return Gf2Matrix(basis, cols=n)


def particular_solution(P: Gf2Matrix, xi: BitsLike) -> Optional[np.ndarray]:
    """Some x with x P^T = xi, or None when the system is inconsistent"""
    xi = to_bits(xi, P.rows)
    aug = np.hstack([P.bits, xi[:, None]])
    reduced, pivots = rref(aug)
    if P.cols in pivots:
        return None
    x = np.zeros(P.cols, dtype=np.uint8)
    for row, pc in zip(reduced, pivots):
        x[pc] = row[-1]
    return x


def _lexicographic_argmin(words: np.ndarray, mask: np.ndarray) -> int:
    idx = np.nonzero(mask)[0]
    cand = words[idx]
    # np.lexsort uses the last key as primary
    order = np.lexsort(cand.T[::-1])
    return int(idx[order[0]])


def coset_leader(P: Gf2Matrix, xi: BitsLike) -> np.ndarray:
    """
    Lexicographically smallest solution of i P^T = xi

    Raises:
        CodeSpecError: xi unreachable (P not of full rank)
    """
    return decode_to_coset_rows(P, np.zeros(P.cols, dtype=np.uint8), xi, by_distance=False)


def decode_to_coset_rows(P: Gf2Matrix, target: BitsLike, xi: BitsLike, by_distance: bool = True) -> np.ndarray:
    target = to_bits(target, P.cols)
    x0 = particular_solution(P, xi)
    if x0 is None:
        raise CodeSpecError(f"Syndrome {bits_to_str(xi)} has an empty coset")
    kernel = null_space_basis(P)
    best_word, best_key = None, None
    for words in iter_span(kernel, offset=x0) if kernel.rows else [x0[None, :]]:
        dist = (words ^ target[None, :]).sum(axis=1) if by_distance else np.zeros(len(words), dtype=np.int64)
        low = dist.min()
        pick = words[_lexicographic_argmin(words, dist == low)]
        key = (int(low), bits_to_str(pick))
        if best_key is None or key < best_key:
            best_word, best_key = pick.copy(), key
    return best_word.astype(np.uint8)


@dataclass(frozen=True)
class CodeSpec:
    """
    ECC+PA code pair

    P_C holds the r error-correction parity rows and P_PA the m privacy
    amplification rows, both over n information bits.
    """

    P_C: Gf2Matrix
    P_PA: Gf2Matrix
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.P_C.cols != self.P_PA.cols:
            raise CodeSpecError(f"P_C has {self.P_C.cols} columns but P_PA has {self.P_PA.cols}")
        if self.r + self.m > self.n:
            raise CodeSpecError(f"r+m = {self.r + self.m} exceeds n = {self.n}")
        if self.all_rows.rank != self.r + self.m:
            raise CodeSpecError(f"ECC+PA rows have rank {self.all_rows.rank}, expected {self.r + self.m}")

    @classmethod
    def from_rows(cls, ecc_rows, pa_rows, n: Optional[int] = None, label: str = "") -> "CodeSpec":
        if n is None:
            first = list(ecc_rows) + list(pa_rows)
            n = len(first[0]) if first else 0
        return cls(Gf2Matrix(list(ecc_rows), cols=n), Gf2Matrix(list(pa_rows), cols=n), label)

    @property
    def n(self) -> int:
        return self.P_C.cols

    @property
    def r(self) -> int:
        return self.P_C.rows

    @property
    def m(self) -> int:
        return self.P_PA.rows

    @cached_property
    def all_rows(self) -> Gf2Matrix:
        return self.P_C.stack(self.P_PA)

    @cached_property
    def d(self) -> Optional[int]:
        """ECC minimum distance (None when the code is {0})"""
        return code_distance(self)

    @cached_property
    def d_perp(self) -> Optional[int]:
        if self.r + self.m == 0:
            return None
        return min_distance(self.all_rows)

    @cached_property
    def v_hat(self) -> Optional[int]:
        return v_hat(self)

    def correctable_errors(self) -> int:
        """t with d >= 2t+1"""
        return 0 if self.d is None else (self.d - 1) // 2

    def key(self, x: BitsLike) -> np.ndarray:
        return syndrome(self.P_PA, x)

    def __repr__(self) -> str:
        return f"CodeSpec(n={self.n}, r={self.r}, m={self.m})"


def code_distance(code: CodeSpec) -> Optional[int]:
    kernel = null_space_basis(code.P_C)
    if kernel.rows == 0:
        return None
    return min_distance(kernel)


def decode_to_coset(code: CodeSpec, j_I: BitsLike, xi: BitsLike) -> np.ndarray:
    """
    Nearest member of the coset with syndrome xi

    Args:
        code (CodeSpec): Code whose P_C defines the cosets
        j_I (BitsLike): Bob's information bits
        xi (BitsLike): Syndrome announced by Alice

    Returns:
        np.ndarray: j_Bob minimizing |j_Bob xor j_I|, ties to the lexicographically smallest
    """
    return decode_to_coset_rows(code.P_C, j_I, xi, by_distance=True)


def v_hat(code: CodeSpec) -> Optional[int]:
    """
    Minimum over PA rows of the distance to the span of all other rows

    Returns:
        int | None: v_hat, or None when there are no PA rows
    """
    if code.m == 0:
        return None
    rows = code.all_rows.bits
    best = None
    for q in range(code.r, code.r + code.m):
        others = Gf2Matrix(np.delete(rows, q, axis=0), cols=code.n)
        dist = distance_to_span(rows[q], others)
        best = dist if best is None else min(best, dist)
    return best


def v_hat_chain(code: CodeSpec) -> Optional[int]:
    """
    Chained form: min over PA rows of the distance from row r'+1 to the span
    of rows 1..r' (ECC rows first). Used only as a cross-check against v_hat.
    """
    if code.m == 0:
        return None
    rows = code.all_rows.bits
    best = None
    for q in range(code.r, code.r + code.m):
        dist = distance_to_span(rows[q], Gf2Matrix(rows[:q], cols=code.n))
        best = dist if best is None else min(best, dist)
    return best


def zerosum(rows: Gf2Matrix, a: BitsLike) -> int:
    """sum over c in span(rows) of (-1)^{c.a}"""
    a = to_bits(a, rows.cols).astype(np.int64)
    basis = Gf2Matrix(rref(rows.bits)[0], cols=rows.cols)
    if basis.rows == 0:
        return 1
    total = 0
    for words in iter_span(basis):
        parity = (words.astype(np.int64) @ a) & 1
        total += int(np.sum(1 - 2 * parity))
    return total


def complete_basis(rows: Gf2Matrix) -> Gf2Matrix:
    """Independent rows followed by unit vectors completing a basis of GF(2)^n"""
    if rows.rank != rows.rows:
        raise CodeSpecError("complete_basis needs linearly independent rows")
    n = rows.cols
    current = rows.bits.copy()
    for c in range(n):
        unit = np.zeros((1, n), dtype=np.uint8)
        unit[0, c] = 1
        trial = np.vstack([current, unit])
        if len(rref(trial)[1]) == trial.shape[0]:
            current = trial
        if current.shape[0] == n:
            break
    return Gf2Matrix(current, cols=n)


def random_linear_code(n: int, r: int, m: int, rng: np.random.Generator, max_draws: int = 10000) -> CodeSpec:
    """
    Draw uniformly random parity rows, redrawing until they have rank r+m

    Args:
        n (int): Block length
        r (int): ECC parity rows
        m (int): PA rows
        rng (np.random.Generator): Source of randomness
        max_draws (int): Give up after this many rank-deficient draws

    Returns:
        CodeSpec: Code of full rank r+m
    """
    if r < 0 or m < 0 or r + m > n:
        raise CodeSpecError(f"Need 0 <= r, m and r+m <= n, got n={n}, r={r}, m={m}")
    for attempt in range(max_draws):
        rows = rng.integers(0, 2, size=(r + m, n), dtype=np.uint8)
        if len(rref(rows)[1]) == r + m:
            logger.debug(f"Random linear code accepted after {attempt + 1} draw(s)")
            return CodeSpec(Gf2Matrix(rows[:r], cols=n), Gf2Matrix(rows[r:], cols=n), label="rlc")
    raise CodeSpecError(f"No full-rank draw in {max_draws} attempts for n={n}, r={r}, m={m}")


def write_code_file(code: CodeSpec, path: Union[str, Path]) -> Path:
    """Plain text: 'n r m' then the r+m rows (P_C first)"""
    path = Path(path)
    lines = [f"{code.n} {code.r} {code.m}"] + code.all_rows.row_strings()
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    logger.info(f"Wrote code file {path} (n={code.n}, r={code.r}, m={code.m})")
    return path


def read_code_file(path: Union[str, Path]) -> CodeSpec:
    path = Path(path)
    if not path.exists():
        raise CodeSpecError(f"Code file not found: {path}")
    lines = [line.strip() for line in path.read_text(encoding="ascii").splitlines() if line.strip()]
    try:
        n, r, m = (int(tok) for tok in lines[0].split())
    except (IndexError, ValueError) as e:
        raise CodeSpecError(f"Bad header in {path}: expected 'n r m'") from e
    rows = lines[1:]
    if len(rows) != r + m or any(len(row) != n for row in rows):
        raise CodeSpecError(f"{path}: expected {r + m} rows of {n} bits")
    return CodeSpec.from_rows(rows[:r], rows[r:], n=n, label=path.stem)
