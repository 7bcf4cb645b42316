from qkd_security.utils.bits import (
    all_bitstrings,
    bits_to_int,
    bits_to_str,
    int_to_bits,
    merge_by_selector,
    split_by_selector,
    to_bits,
)
from qkd_security.utils.report import write_csv, write_json
from qkd_security.utils.seeding import derive_rng, derive_seed_sequence
from qkd_security.utils.settings import env_int, env_str

__all__ = [
    "all_bitstrings",
    "bits_to_int",
    "bits_to_str",
    "int_to_bits",
    "merge_by_selector",
    "split_by_selector",
    "to_bits",
    "derive_rng",
    "derive_seed_sequence",
    "env_int",
    "env_str",
    "write_csv",
    "write_json",
]
