"""
Bit-string helpers

Bit strings are numpy uint8 arrays internally and '0'/'1' text at the
edges. Position 0 is the leftmost character and the most significant bit
of the integer index.
"""

from typing import Iterable, Tuple, Union

import numpy as np

from qkd_security.logging_exception import DimensionMismatchError

BitsLike = Union[str, Iterable[int], np.ndarray]


def to_bits(x: BitsLike, length: int = None) -> np.ndarray:
    """
    Convert a bit-string in any accepted form to a uint8 array

    Args:
        x (str | sequence | np.ndarray): '0'/'1' text or a sequence of 0/1 values
        length (int): Expected length, checked when given

    Returns:
        np.ndarray: Array of 0/1 values, dtype uint8
    """
    if isinstance(x, str):
        if any(ch not in "01" for ch in x):
            raise DimensionMismatchError(f"Not a bit string: {x!r}")
        arr = np.frombuffer(x.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(list(x) if not isinstance(x, np.ndarray) else x, dtype=np.int64)
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise DimensionMismatchError("Bit arrays may only hold 0 and 1")
        arr = arr.astype(np.uint8)
    arr = arr.reshape(-1)
    if length is not None and arr.size != length:
        raise DimensionMismatchError(f"Expected {length} bits, got {arr.size}")
    return arr


def bits_to_str(x: BitsLike) -> str:
    return "".join("1" if v else "0" for v in to_bits(x))


def bits_to_int(x: BitsLike) -> int:
    value = 0
    for v in to_bits(x):
        value = (value << 1) | int(v)
    return value


def int_to_bits(value: int, n: int) -> np.ndarray:
    if value < 0 or value >= (1 << n):
        raise DimensionMismatchError(f"{value} does not fit in {n} bits")
    return np.array([(value >> (n - 1 - k)) & 1 for k in range(n)], dtype=np.uint8)


def all_bitstrings(n: int) -> np.ndarray:
    """Every n-bit string as rows of a (2^n, n) array, in index order"""
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def split_by_selector(x: BitsLike, s: BitsLike) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split x into test bits (s_k = 0) and information bits (s_k = 1)

    Returns:
        Tuple[np.ndarray, np.ndarray]: (x_T, x_I), order preserved
    """
    x = to_bits(x)
    s = to_bits(s, len(x))
    return x[s == 0], x[s == 1]


def merge_by_selector(x_t: BitsLike, x_i: BitsLike, s: BitsLike) -> np.ndarray:
    s = to_bits(s)
    x_t = to_bits(x_t, int(np.sum(s == 0)))
    x_i = to_bits(x_i, int(np.sum(s == 1)))
    out = np.zeros(len(s), dtype=np.uint8)
    out[s == 0] = x_t
    out[s == 1] = x_i
    return out
