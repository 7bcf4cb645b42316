"""
GF(2) codes: syndromes, distances, v_hat, coset decoding, code files
"""

import numpy as np
import pytest

from qkd_security.components.gf2code import (
    CodeSpec,
    Gf2Matrix,
    coset_leader,
    decode_to_coset,
    hamming,
    min_distance,
    random_linear_code,
    read_code_file,
    syndrome,
    v_hat,
    v_hat_chain,
    weight,
    write_code_file,
    zerosum,
)
from qkd_security.logging_exception import CodeSpecError, ResourceCapError
from qkd_security.utils.bits import all_bitstrings, bits_to_str


def code_correcting_errors(n, rng):
    """Random code with r = n//2 + 1 parity rows that corrects at least one error"""
    for _ in range(100):
        code = random_linear_code(n, n // 2 + 1, 1, rng)
        if code.correctable_errors() >= 1:
            return code
    raise AssertionError(f"no one-error-correcting draw at n={n}")


class TestBitHelpers:

    def test_hamming(self):
        assert hamming("101", "011") == 2

    def test_weight(self):
        assert weight("1111") == 4

    @pytest.mark.parametrize("n, rows", [(5, 2), (8, 3), (12, 6)])
    def test_syndrome_is_linear(self, n, rows, rng):
        P = Gf2Matrix(rng.integers(0, 2, size=(rows, n), dtype=np.uint8))
        for _ in range(20):
            x = rng.integers(0, 2, n, dtype=np.uint8)
            y = rng.integers(0, 2, n, dtype=np.uint8)
            np.testing.assert_array_equal(syndrome(P, x ^ y), syndrome(P, x) ^ syndrome(P, y))

    def test_syndrome(self):
        P = Gf2Matrix(["110", "011"])
        assert bits_to_str(syndrome(P, "100")) == "10"


class TestDistances:

    def test_min_distance(self):
        assert min_distance(Gf2Matrix(["110", "011"])) == 2

    def test_min_distance_of_zero_rows(self):
        with pytest.raises(CodeSpecError):
            min_distance(Gf2Matrix(["000"]))

    def test_repetition_code_parameters(self, repetition_code):
        assert repetition_code.d == 3
        assert repetition_code.d_perp == 1
        assert repetition_code.correctable_errors() == 1

    def test_zerosum_orthogonal_and_not(self):
        rows = Gf2Matrix(["110"])
        assert zerosum(rows, "001") == 2
        assert zerosum(rows, "100") == 0

    def test_enumeration_cap(self, monkeypatch):
        monkeypatch.setenv("QKD_SPAN_CAP_BITS", "2")
        with pytest.raises(ResourceCapError):
            min_distance(Gf2Matrix(["1000", "0100", "0010"]))


class TestVHat:

    def test_repetition_code(self, repetition_code):
        assert v_hat(repetition_code) == 1

    def test_no_ecc_all_ones_key(self):
        code = CodeSpec.from_rows([], ["1111"], n=4)
        assert v_hat(code) == 4

    def test_no_pa_rows(self):
        assert v_hat(CodeSpec.from_rows(["110"], [], n=3)) is None

    @pytest.mark.parametrize("n, r, m", [(6, 2, 1), (8, 3, 2), (10, 4, 2), (12, 5, 3)])
    def test_at_least_dual_distance(self, n, r, m, rng):
        for _ in range(10):
            code = random_linear_code(n, r, m, rng)
            assert code.v_hat >= code.d_perp

    def test_chain_form_never_smaller(self, rng):
        """Distance to the span of all other rows is at most the chained distance"""
        for _ in range(10):
            code = random_linear_code(8, 3, 2, rng)
            assert v_hat(code) <= v_hat_chain(code)


class TestDecoding:

    def test_nearest_coset_member(self, repetition_code):
        assert bits_to_str(decode_to_coset(repetition_code, "110", "00")) == "111"

    def test_correctable_error_removed(self, repetition_code, rng):
        for _ in range(20):
            i_I = rng.integers(0, 2, 3, dtype=np.uint8)
            xi = syndrome(repetition_code.P_C, i_I)
            error = np.zeros(3, dtype=np.uint8)
            error[rng.integers(0, 3)] = 1
            np.testing.assert_array_equal(decode_to_coset(repetition_code, i_I ^ error, xi), i_I)

    @pytest.mark.parametrize("n", [6, 8, 10, 12])
    def test_every_correctable_pattern_decodes(self, n, rng):
        code = code_correcting_errors(n, rng)
        t = code.correctable_errors()
        patterns = [e for e in all_bitstrings(n) if 0 < int(e.sum()) <= t]
        for _ in range(3):
            i_I = rng.integers(0, 2, n, dtype=np.uint8)
            xi = syndrome(code.P_C, i_I)
            for e in patterns:
                np.testing.assert_array_equal(decode_to_coset(code, i_I ^ e, xi), i_I)

    def test_lexicographic_tie_break(self):
        """Coset {01, 10} is equidistant from 00; the smaller string wins"""
        code = CodeSpec.from_rows(["11"], [], n=2)
        assert bits_to_str(decode_to_coset(code, "00", "1")) == "01"

    def test_coset_leader(self):
        assert bits_to_str(coset_leader(Gf2Matrix(["110", "011"]), "11")) == "010"


class TestRandomLinearCode:

    def test_full_rank(self, rng):
        code = random_linear_code(10, 4, 2, rng)
        assert (code.r, code.m, code.all_rows.rank) == (4, 2, 6)

    def test_too_many_rows(self, rng):
        with pytest.raises(CodeSpecError):
            random_linear_code(4, 4, 1, rng)

    def test_seeded_draw_is_reproducible(self):
        a = random_linear_code(8, 3, 1, np.random.default_rng(5))
        b = random_linear_code(8, 3, 1, np.random.default_rng(5))
        assert a == b


class TestCodeFiles:

    def test_write_then_read(self, tmp_path, repetition_code):
        path = write_code_file(repetition_code, tmp_path / "rep.txt")
        assert path.read_text().splitlines()[0] == "3 2 1"
        assert read_code_file(path) == repetition_code

    def test_missing_file(self, tmp_path):
        with pytest.raises(CodeSpecError):
            read_code_file(tmp_path / "absent.txt")

    def test_bad_row_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 1 1\n110\n")
        with pytest.raises(CodeSpecError):
            read_code_file(path)

    def test_rank_deficient_rows(self):
        with pytest.raises(CodeSpecError):
            CodeSpec.from_rows(["110"], ["110"], n=3)
