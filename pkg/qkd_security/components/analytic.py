"""
Closed-form bound calculator
Reliability and Eve-information bounds, Gallager code-failure probabilities,
rate equations, threshold solvers and the published reliability/rate table
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd
from scipy import optimize, special

from qkd_security.constants import (
    RATE_RHS,
    RATE_RHS_STARRED,
    TABLE1_BLANK_CELLS,
    TABLE1_EPS_VALUES,
    TABLE1_N_VALUES,
    TABLE1_P_ALLOWED_VALUES,
)
from qkd_security.logging_exception import ConfigError

logger = logging.getLogger(__name__)

THRESHOLD_MODES = ("strict", "relaxed", "shor-preskill")


def h2(x: float) -> float:
    """
    Binary entropy in bits

    Args:
        x (float): Probability in [0, 1]

    Returns:
        float: -x log2 x - (1-x) log2 (1-x), with h2(0) = h2(1) = 0
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"h2 needs 0 <= x <= 1, got {x}")
    return float((special.entr(x) + special.entr(1.0 - x)) / math.log(2.0))


def _inv_n(n: Optional[int]) -> float:
    return 0.0 if n is None else 1.0 / n


def reliability_bound(n: int, eps_rel: float) -> float:
    """h = e^{-n eps_rel^2 / 2}"""
    return math.exp(-n * eps_rel ** 2 / 2.0)


def reliability_from_delta(n: int, p_a: float, delta: float, strict: bool = True) -> float:
    """
    Reliability bound written through the ECC target distance delta:
    e^{-(n/8)(delta - 1/n - 2p_a)^2} (strict) or e^{-(n/2)(delta - 1/n - p_a)^2} (relaxed)
    """
    if strict:
        return math.exp(-(n / 8.0) * (delta - 1.0 / n - 2.0 * p_a) ** 2)
    return math.exp(-(n / 2.0) * (delta - 1.0 / n - p_a) ** 2)


def eve_info_bound(n: int, m: int, eps_sec: float) -> float:
    """2m sqrt(e^{-n eps_sec^2 / 2})"""
    return 2.0 * m * math.sqrt(math.exp(-n * eps_sec ** 2 / 2.0))


def c_delta(delta: float) -> float:
    return (1.0 / (1.0 - 2.0 * delta)) * math.sqrt((1.0 - delta) / (2.0 * math.pi * delta))


def gallager_g(n: int, r_dim: int, delta: float) -> float:
    """
    Upper bound on P[d/n < delta] for a random linear code with r_dim parity rows

    Args:
        n (int): Block length
        r_dim (int): Number of random parity rows (r for the ECC, n-r-m for dual+PA)
        delta (float): Target relative distance in [0, 1/2)

    Returns:
        float: c(delta)/sqrt(n) 2^{n(H2(delta) - r_dim/n)}; 0 at delta = 0, inf for delta >= 1/2
    """
    if delta <= 0.0:
        return 0.0
    if delta >= 0.5:
        return math.inf
    return c_delta(delta) / math.sqrt(n) * 2.0 ** (n * (h2(delta) - r_dim / n))


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    ecc_slack: float
    pa_slack: float
    delta: float
    delta_perp: float


def feasibility(
    n: Optional[int],
    p_a: float,
    eps_sec: float,
    eps_rel: float,
    r_over_n: Optional[float],
    R_secret: float,
    strict: bool = True,
) -> Feasibility:
    """
    Check H2(delta) < r/n and H2(delta_perp) + r/n + R_secret < 1

    Args:
        n (int | None): Block length, None for the n -> infinity limit
        p_a (float): Allowed test error rate
        eps_sec (float): Security margin
        eps_rel (float): Reliability margin
        r_over_n (float | None): ECC rate r/n; None asks whether any r/n works
        R_secret (float): Secret-key rate m/n
        strict (bool): d >= 2t+1 decoding (True) or Shannon decoding d >= t+1

    Returns:
        Feasibility: verdict and both slacks (positive means satisfied)
    """
    inv = _inv_n(n)
    delta = 2.0 * (p_a + eps_rel) + inv if strict else p_a + eps_rel + inv
    delta_perp = 2.0 * (p_a + eps_sec)
    if delta >= 0.5 or delta_perp >= 0.5:
        return Feasibility(False, -math.inf, -math.inf, delta, delta_perp)
    h_delta = h2(delta)
    if r_over_n is None:
        r_over_n = h_delta
        ecc_slack = 0.0
        pa_slack = 1.0 - h2(delta_perp) - r_over_n - R_secret
        ok = pa_slack > 0.0
    else:
        ecc_slack = r_over_n - h_delta
        pa_slack = 1.0 - h2(delta_perp) - r_over_n - R_secret
        ok = ecc_slack > 0.0 and pa_slack > 0.0
    return Feasibility(ok, ecc_slack, pa_slack, delta, delta_perp)


def _threshold_equation(mode: str):
    if mode == "strict":
        return lambda p: 2.0 * h2(2.0 * p) - 1.0, 0.25
    if mode == "relaxed":
        return lambda p: h2(2.0 * p) + h2(p) - 1.0, 0.25
    if mode == "shor-preskill":
        return lambda p: 2.0 * h2(p) - 1.0, 0.5
    raise ConfigError(f"Unknown threshold mode '{mode}'. Known: {', '.join(THRESHOLD_MODES)}")


def threshold_residual(mode: str, p: float) -> float:
    fn, _ = _threshold_equation(mode)
    return fn(p)


def solve_threshold(mode: str) -> float:
    """
    Largest tolerable p_allowed in the n -> infinity, eps -> 0 limit

    Args:
        mode (str): "strict" (2 H2(2p) = 1), "relaxed" (H2(2p) + H2(p) = 1)
            or "shor-preskill" (2 H2(p) = 1)

    Returns:
        float: Root of the entropy equation
    """
    fn, upper = _threshold_equation(mode)
    root = optimize.bisect(fn, 1e-9, upper, xtol=1e-14, maxiter=200)
    logger.debug(f"Threshold ({mode}) = {root:.8f}")
    return float(root)


@dataclass(frozen=True)
class RateResult:
    rate: float
    feasible: bool
    rhs_const: float


def max_rate(n: Optional[int], p_a: float, eps: float, rhs_const: float = RATE_RHS) -> RateResult:
    """R = rhs - H2(2p_a + 2eps) - H2(2p_a + 2eps + 1/n); negative means out of range"""
    x = 2.0 * p_a + 2.0 * eps
    y = x + _inv_n(n)
    if x >= 0.5 or y >= 0.5:
        return RateResult(-math.inf, False, rhs_const)
    rate = rhs_const - h2(x) - h2(y)
    return RateResult(rate, rate > 0.0, rhs_const)


def theorem_split(
    m: int,
    eps_sec: float,
    A_info: Optional[float] = None,
    beta_info: Optional[float] = None,
) -> Dict[str, float]:
    """
    Split 2m e^{-n eps^2/4} into information and luck factors

    Defaults to A_info = A_luck = sqrt(2m), beta_info = beta_luck = eps^2/8.
    """
    total_beta = eps_sec ** 2 / 4.0
    if A_info is None:
        A_info = math.sqrt(2.0 * m)
    if beta_info is None:
        beta_info = total_beta / 2.0
    if A_info <= 0.0 and m > 0:
        raise ConfigError("A_info must be positive")
    A_luck = 2.0 * m / A_info if A_info > 0.0 else 0.0
    return {"A_info": A_info, "beta_info": beta_info, "A_luck": A_luck, "beta_luck": total_beta - beta_info}


@dataclass(frozen=True)
class BoundReport:
    n: int
    p_allowed: float
    eps_sec: float
    eps_rel: float
    m: int
    r: int
    h: float
    eve_bound: float
    g1: float
    g2: float
    A_info: float
    beta_info: float
    A_luck: float
    beta_luck: float
    R_secret: float
    feasible: bool
    strict: bool = True

    def to_dict(self) -> Dict:
        return asdict(self)


def bound_report(
    n: int,
    p_allowed: float,
    eps_sec: float,
    eps_rel: float,
    m: int,
    r: int,
    strict: bool = True,
    A_info: Optional[float] = None,
    beta_info: Optional[float] = None,
) -> BoundReport:
    """
    Assemble every closed-form bound for one parameter set

    Args:
        n (int): Number of information bits
        p_allowed (float): Allowed test error rate
        eps_sec (float): Security margin
        eps_rel (float): Reliability margin
        m (int): Final key length (PA rows)
        r (int): ECC parity rows
        strict (bool): Strict (d >= 2t+1) or relaxed decoding target for g1
        A_info (float): Optional override of the theorem split
        beta_info (float): Optional override of the theorem split

    Returns:
        BoundReport: h, eve_bound, g1, g2, the theorem split, R_secret and feasibility
    """
    if r + m > n:
        raise ConfigError(f"r+m = {r + m} exceeds n = {n}")
    split = theorem_split(m, eps_sec, A_info, beta_info)
    feas = feasibility(n, p_allowed, eps_sec, eps_rel, r / n, m / n, strict)
    report = BoundReport(
        n=n,
        p_allowed=p_allowed,
        eps_sec=eps_sec,
        eps_rel=eps_rel,
        m=m,
        r=r,
        h=reliability_bound(n, eps_rel),
        eve_bound=eve_info_bound(n, m, eps_sec),
        g1=gallager_g(n, r, feas.delta),
        g2=gallager_g(n, n - r - m, feas.delta_perp),
        R_secret=m / n,
        feasible=feas.feasible,
        strict=strict,
        **split,
    )
    logger.debug(f"Bound report: {report}")
    return report


def is_starred(p_a: float, eps: float) -> bool:
    """Cells whose argument 2p_a + 2eps hits 0.11 use the 0.9999 right-hand side"""
    return math.isclose(2.0 * p_a + 2.0 * eps, 0.11, abs_tol=1e-12)


def reliability_display(h: float) -> str:
    """Render a reliability bound the way the published table prints it"""
    if h >= 0.1:
        return f"{h:.2f}"
    if h >= 1e-6:
        return f"1/{round(1.0 / h)}"
    exponent = math.floor(math.log10(h))
    mantissa = h / 10.0 ** exponent
    if h >= 1e-30:
        return f"{mantissa:.0f}e{exponent}"
    return f"~1e{exponent}"


def rate_display(rate: RateResult) -> str:
    if not rate.feasible:
        return "out of range"
    if rate.rhs_const != RATE_RHS:
        pct = 100.0 * rate.rate
        digits = -math.floor(math.log10(pct))
        return f"{round(pct, digits):.{max(digits, 0)}f}%*"
    # truncated, not rounded, to one decimal place
    return f"{math.floor(1000.0 * rate.rate + 1e-9) / 10.0:.1f}%"


@dataclass(frozen=True)
class Table1:
    reliability: pd.DataFrame
    rates: pd.DataFrame
    reliability_text: pd.DataFrame
    rates_text: pd.DataFrame


def table1(n_rate: Optional[int] = None) -> Table1:
    """
    Reproduce both sub-tables: reliability e^{-n eps^2/2} over (n, eps) and
    rates over (p_allowed, eps) in the large-n limit

    Args:
        n_rate (int | None): Block length for the 1/n term of the rate equation

    Returns:
        Table1: numeric grids (NaN for blank cells) and their printed forms
    """
    rel = pd.DataFrame(index=pd.Index(TABLE1_N_VALUES, name="n"), columns=TABLE1_EPS_VALUES, dtype=float)
    rel_text = pd.DataFrame(index=rel.index, columns=TABLE1_EPS_VALUES, dtype=object)
    for n in TABLE1_N_VALUES:
        for eps in TABLE1_EPS_VALUES:
            if (n, eps) in TABLE1_BLANK_CELLS:
                rel_text.loc[n, eps] = ""
                continue
            h = reliability_bound(n, eps)
            rel.loc[n, eps] = h
            rel_text.loc[n, eps] = reliability_display(h)

    rates = pd.DataFrame(index=pd.Index(TABLE1_P_ALLOWED_VALUES, name="p_allowed"), columns=TABLE1_EPS_VALUES, dtype=float)
    rates_text = pd.DataFrame(index=rates.index, columns=TABLE1_EPS_VALUES, dtype=object)
    for p_a in TABLE1_P_ALLOWED_VALUES:
        for eps in TABLE1_EPS_VALUES:
            rhs = RATE_RHS_STARRED if is_starred(p_a, eps) else RATE_RHS
            result = max_rate(n_rate, p_a, eps, rhs)
            rates.loc[p_a, eps] = result.rate if result.feasible else np.nan
            rates_text.loc[p_a, eps] = rate_display(result)
    rel.columns.name = rates.columns.name = "eps"
    logger.info("✓ Reliability/rate table computed")
    return Table1(rel, rates, rel_text, rates_text)


def table1_display(table: Table1) -> str:
    """Both sub-tables as printed text, blank cells left empty"""
    def _render(frame: pd.DataFrame, title: str) -> str:
        shown = frame.copy()
        shown.columns = [f"eps={c:g}" for c in shown.columns]
        return f"{title}\n{shown.to_string()}"

    return "\n\n".join([
        _render(table.reliability_text, "Reliability bound e^{-n eps^2/2}"),
        _render(table.rates_text, "Secret key rate R_secret"),
    ])
