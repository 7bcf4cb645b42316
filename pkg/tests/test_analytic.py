"""
Closed-form bounds, thresholds and the reliability/rate table
"""

import math

import pytest

from qkd_security.components.analytic import (
    THRESHOLD_MODES,
    RateResult,
    bound_report,
    eve_info_bound,
    feasibility,
    gallager_g,
    h2,
    is_starred,
    max_rate,
    rate_display,
    reliability_bound,
    reliability_display,
    reliability_from_delta,
    solve_threshold,
    table1,
    table1_display,
    theorem_split,
    threshold_residual,
)
from qkd_security.logging_exception import ConfigError


class TestEntropy:

    @pytest.mark.parametrize("x,expected", [(0.0, 0.0), (1.0, 0.0), (0.5, 1.0), (0.11, 0.4999)])
    def test_h2(self, x, expected):
        assert h2(x) == pytest.approx(expected, abs=1e-4)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            h2(1.5)


class TestThresholds:

    @pytest.mark.parametrize("mode,expected", [("strict", 0.05501), ("relaxed", 0.0756), ("shor-preskill", 0.1100)])
    def test_solutions(self, mode, expected):
        assert solve_threshold(mode) == pytest.approx(expected, abs=1e-4)

    @pytest.mark.parametrize("mode", THRESHOLD_MODES)
    def test_residual_vanishes_at_root(self, mode):
        assert threshold_residual(mode, solve_threshold(mode)) == pytest.approx(0.0, abs=1e-9)

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            solve_threshold("optimistic")


class TestBounds:

    def test_reliability(self):
        assert reliability_bound(12500, 0.01) == pytest.approx(math.exp(-0.625))

    def test_reliability_from_delta(self):
        assert reliability_from_delta(100, 0.02, 0.25) == pytest.approx(math.exp(-0.5))
        assert reliability_from_delta(100, 0.02, 0.13, strict=False) == pytest.approx(math.exp(-0.5))

    def test_eve_info(self):
        assert eve_info_bound(1000, 3, 0.1) == pytest.approx(6.0 * math.exp(-2.5))

    def test_gallager_edges(self):
        assert gallager_g(100, 40, 0.0) == 0.0
        assert gallager_g(100, 40, 0.5) == math.inf

    def test_gallager_shrinks_with_rows(self):
        assert gallager_g(100, 60, 0.06) < gallager_g(100, 40, 0.06)

    def test_theorem_split_recombines(self):
        split = theorem_split(m=50, eps_sec=0.02)
        assert split["A_info"] * split["A_luck"] == pytest.approx(100.0)
        assert split["beta_info"] + split["beta_luck"] == pytest.approx(0.02 ** 2 / 4.0)

    def test_feasible_large_block(self):
        r_over_n = h2(0.06) + 0.01
        feas = feasibility(None, 0.02, 0.01, 0.01, r_over_n, 0.05)
        assert feas.feasible
        assert feas.ecc_slack == pytest.approx(0.01)

    def test_infeasible_above_threshold(self):
        assert not feasibility(None, 0.06, 0.01, 0.01, None, 0.01).feasible

    def test_bound_report(self):
        report = bound_report(800000, 0.02, 0.01, 0.01, m=100000, r=400000)
        assert report.R_secret == pytest.approx(0.125)
        assert report.h == pytest.approx(math.exp(-40.0))
        assert set(report.to_dict()) >= {"g1", "g2", "A_info", "beta_luck", "feasible"}

    def test_bound_report_too_many_rows(self):
        with pytest.raises(ConfigError):
            bound_report(10, 0.02, 0.1, 0.1, m=6, r=6)


class TestRates:

    def test_plain_cell(self):
        result = max_rate(None, 0.02, 0.005)
        assert result.rate == pytest.approx(0.99 - 2.0 * h2(0.05))
        assert rate_display(result) == "41.7%"

    def test_out_of_range(self):
        result = max_rate(None, 0.05, 0.02)
        assert not result.feasible
        assert rate_display(result) == "out of range"

    def test_starred_cell(self):
        assert is_starred(0.035, 0.02)
        assert rate_display(max_rate(None, 0.035, 0.02, 0.9999)) == "0.007%*"

    def test_truncation(self):
        assert rate_display(RateResult(0.41789, True, 0.99)) == "41.7%"


class TestTable1:

    @pytest.mark.parametrize("h,text", [
        (math.exp(-0.625), "0.54"),
        (math.exp(-2.5), "1/12"),
        (math.exp(-10.0), "1/22026"),
        (math.exp(-40.0), "4e-18"),
        (math.exp(-160.0), "~1e-70"),
    ])
    def test_reliability_display(self, h, text):
        assert reliability_display(h) == text

    def test_grid(self):
        table = table1()
        assert table.reliability_text.loc[12500, 0.01] == "0.54"
        assert table.reliability_text.loc[12500, 0.005] == ""
        assert table.reliability_text.loc[3200000, 0.01] == "~1e-70"
        assert table.rates_text.loc[0.05, 0.005] == "0.007%*"
        assert table.rates_text.loc[0.02, 0.005] == "41.7%"

    def test_display(self):
        text = table1_display(table1())
        assert "eps=0.01" in text
        assert "1/22026" in text
