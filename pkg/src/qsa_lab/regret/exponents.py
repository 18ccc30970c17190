from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from ..errors import MissingParameter, NonPositiveValue, TooFewPoints, ValidationError


MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class RegretExponent:
    value: float
    gap_term_dropped: bool = False


def theoretical_regret_exponent(
    algo: Literal["boltzmann", "seg"],
    a: float,
    b: Optional[float] = None,
    d: Optional[float] = None,
    e: Optional[float] = None,
    gap: Optional[float] = None,
) -> RegretExponent:
    """Exponent of N in the regret upper bound."""
    if algo == "boltzmann":
        if b is None:
            raise MissingParameter("b")
        if gap is None:
            raise MissingParameter("gap")
        if math.isinf(gap):
            # no suboptimal action: only the concentration term remains
            return RegretExponent(min(1.0, 0.5 + 4 * a), gap_term_dropped=True)
        return RegretExponent(min(1.0, max(0.5 + 4 * a, 1.0 - b * gap / 2.0)))
    if algo == "seg":
        if d is None or e is None:
            raise MissingParameter("d" if d is None else "e")
        if math.isclose(a, 0.1) and math.isclose(d, 0.1):
            return RegretExponent(min(1.0, 0.9 + 2 * e))
        value = max(1 - d, 0.5 + a + 3 * d + 2 * e, 2 * a + 4 * d + 3 * e, 1 - (d - e))
        return RegretExponent(min(1.0, value))
    raise ValidationError(f"unknown algo {algo!r}")


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    r2: float
    points: int


def fit_power_law(n: np.ndarray, values: np.ndarray, window: Optional[tuple[float, float]] = None) -> PowerLawFit:
    """Least-squares slope of log(value) against log(n) over the window."""
    n = np.asarray(n, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        keep = (n >= window[0]) & (n <= window[1])
        n, values = n[keep], values[keep]
    if len(n) < MIN_FIT_POINTS:
        raise TooFewPoints(f"{len(n)} points in the fit window, need {MIN_FIT_POINTS}", points=len(n))
    if np.any(n <= 0) or np.any(values <= 0):
        raise NonPositiveValue("log-log fit needs positive n and values")
    x, y = np.log(n), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(intercept), r2, len(n))


@dataclass(frozen=True)
class FrozenTrend:
    slope: float
    nonincreasing: bool


def frozen_trend(n: np.ndarray, terms: np.ndarray, window: Optional[tuple[float, float]] = None) -> FrozenTrend:
    """Sign of the log-log slope of the per-checkpoint frozen terms.

    Terms at or below zero are dropped; with too few left the endpoints decide.
    """
    n = np.asarray(n, dtype=float)
    terms = np.asarray(terms, dtype=float)
    keep = (n > 0) & (terms > 0)
    if window is not None:
        keep &= (n >= window[0]) & (n <= window[1])
    if keep.sum() < MIN_FIT_POINTS:
        flag = bool(terms[-1] <= terms[0]) if len(terms) else True
        return FrozenTrend(math.nan, flag)
    fit = fit_power_law(n[keep], terms[keep])
    return FrozenTrend(fit.exponent, fit.exponent <= 0.0)
