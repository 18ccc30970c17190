from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Optional, Sequence

import numpy as np

from ..errors import MissingParameter
from .bounds import Algo, BoundSpec


Purpose = Literal["concentration", "regret"]

N0_GRID_LIMIT = 10**6
EQ_TOL = 1e-12


@dataclass(frozen=True)
class ConditionResult:
    id: str
    satisfied: bool
    lhs: float
    rhs: float
    required: bool = True
    note: str = ""
    witness: Optional[int] = None  # first grid point where a "for all n" condition fails
    lhs_decays_faster: Optional[bool] = None
    tail_holds: Optional[bool] = None


@dataclass(frozen=True)
class ConditionReport:
    algo: str
    results: tuple[ConditionResult, ...]

    @property
    def failing(self) -> list[str]:
        return [r.id for r in self.results if r.required and not r.satisfied]

    @property
    def advisories(self) -> list[str]:
        return [r.id for r in self.results if not r.required and not r.satisfied and not r.note]

    @property
    def ok(self) -> bool:
        return not self.failing

    def __iter__(self):
        return iter(self.results)

    def by_id(self, cid: str) -> ConditionResult:
        for r in self.results:
            if r.id == cid:
                return r
        raise KeyError(cid)

    def merged(self, other: "ConditionReport") -> "ConditionReport":
        return ConditionReport(self.algo, self.results + other.results)


@dataclass(frozen=True)
class ConditionExtras:
    """Instance quantities the algorithm-specific condition sets refer to."""

    b: Optional[float] = None
    d: Optional[float] = None
    e: Optional[float] = None
    gap: Optional[float] = None
    rmax: Optional[float] = None
    gamma: Optional[float] = None
    mu_min_s: Optional[float] = None
    num_actions: Optional[int] = None
    q_l1_min: Optional[float] = None  # min over states of ||Q*(s, .)||_1

    def need(self, *names: str) -> tuple:
        values = []
        for name in names:
            v = getattr(self, name)
            if v is None:
                raise MissingParameter(name)
            values.append(v)
        return tuple(values)


@dataclass
class _Checks:
    results: list[ConditionResult] = field(default_factory=list)

    def lt(self, cid: str, lhs: float, rhs: float, required: bool = True) -> None:
        self.results.append(ConditionResult(cid, lhs < rhs, lhs, rhs, required))

    def le(self, cid: str, lhs: float, rhs: float) -> None:
        self.results.append(ConditionResult(cid, lhs <= rhs + EQ_TOL, lhs, rhs))

    def ge(self, cid: str, lhs: float, rhs: float) -> None:
        self.results.append(ConditionResult(cid, lhs >= rhs - EQ_TOL, lhs, rhs))

    def unit(self, cid: str, value: float) -> None:
        self.results.append(ConditionResult(cid, 0.0 <= value <= 1.0, value, 1.0))

    def fail(self, cid: str, note: str) -> None:
        self.results.append(ConditionResult(cid, False, math.nan, math.nan, note=note))

    def n0_at_least(self, cid: str, n0: int, base: float, power: float) -> None:
        # a non-positive base makes the bound vacuous
        if base <= 0.0:
            self.results.append(ConditionResult(cid, True, float(n0), 0.0))
            return
        try:
            need = math.pow(base, power)
        except OverflowError:
            need = math.inf
        self.results.append(ConditionResult(cid, n0 >= need, float(n0), need))


def _eq(x: float, y: float) -> bool:
    return math.isclose(x, y, rel_tol=0.0, abs_tol=EQ_TOL)


def _need_c3(spec: BoundSpec) -> float:
    c3 = spec.c("c3")
    if c3 is None:
        raise MissingParameter("c3")
    return c3


def _generic(spec: BoundSpec, out: _Checks) -> None:
    a, k1, k2, k3, beta, n0 = spec.a, spec.kappa1, spec.kappa2, spec.kappa3, spec.beta, spec.n0
    for name, value in (("a", a), ("kappa1", k1), ("kappa2", k2), ("kappa3", k3)):
        out.unit(f"sa:{name} in [0,1]", value)
    out.lt("sa:2a+6k1+3k3<1", 2 * a + 6 * k1 + 3 * k3, 1.0)
    out.lt("sa:a+6k1+k2+2k3<1", a + 6 * k1 + k2 + 2 * k3, 1.0)

    if _eq(a, 0.0):
        out.ge("sa.a=0:beta>=2(1-2k1)", beta, 2 * (1 - 2 * k1))
        out.lt("sa.a=0:2k1+k3<1", 2 * k1 + k3, 1.0)
    else:
        out.lt("sa.a>0:a+2k1<1", a + 2 * k1, 1.0)
        out.lt("sa.a>0:2k1+k3<1+a", 2 * k1 + k3, 1.0 + a)
        out.n0_at_least("sa.a>0:n0>=(2(1-a-2k1)/beta)^(1/a)", n0, 2 * ((1 - a) - 2 * k1) / beta, 1 / a)
        out.n0_at_least("sa.a>0:n0>=(2(1-a-k1)/beta)^(1/a)", n0, 2 * (1 - a - k1) / beta, 1 / a)
        out.n0_at_least("sa.a>0:n0>=(2(1-a-2k1-k3)/beta)^(1/a)", n0, 2 * (1 - (a + 2 * k1 + k3)) / beta, 1 / a)
        out.n0_at_least("sa.a>0:n0>=((1-2k1-k2)/beta)^(1/a)", n0, (1 - (2 * k1 + k2)) / beta, 1 / a)

    if a > 0 and _eq(a, k1):
        bc3 = beta * _need_c3(spec)
        out.lt("sa.a=k1:3a+4k1+2k3<1", 3 * a + 4 * k1 + 2 * k3, 1.0)
        out.ge("sa.a=k1:beta*c3>=1-(3a+4k1+2k3)", bc3, 1 - (3 * a + 4 * k1 + 2 * k3))
        out.ge("sa.a=k1:beta*c3>=2-(4a+6k1+4k3)", bc3, 2 - (4 * a + 6 * k1 + 4 * k3))
        out.lt("sa.a=k1:a+3k1+k2+k3<1", a + 3 * k1 + k2 + k3, 1.0)
        out.ge("sa.a=k1:beta*c3>=2-(2a+6k1+2k2+2k3)", bc3, 2 - (2 * a + 6 * k1 + 2 * k2 + 2 * k3))
    elif a > k1:
        bc3 = beta * _need_c3(spec)
        p = 1 / (a - k1)
        out.lt("sa.a>k1:a+6k1+2k3<1", a + 6 * k1 + 2 * k3, 1.0)
        out.lt("sa.a>k1:4k1+k2+k3<1", 4 * k1 + k2 + k3, 1.0)
        out.n0_at_least("sa.a>k1:n0>=((1-a-6k1-2k3)/(beta*c3))^(1/(a-k1))", n0, (1 - (a + 6 * k1 + 2 * k3)) / bc3, p)
        out.n0_at_least("sa.a>k1:n0>=(2(1-a-4k1-2k3)/(beta*c3))^(1/(a-k1))", n0, 2 * (1 - (a + 4 * k1 + 2 * k3)) / bc3, p)
        out.n0_at_least("sa.a>k1:n0>=(2(1-4k1-k2-k3)/(beta*c3))^(1/(a-k1))", n0, 2 * (1 - (4 * k1 + k2 + k3)) / bc3, p)
    elif a > 0:
        out.fail("sa:0<a<k1", "stepsize exponent between zero and the contraction exponent is not covered")


def _boltzmann(spec: BoundSpec, extras: ConditionExtras, purpose: Purpose, out: _Checks) -> None:
    b, rmax, gamma, mu, n_act = extras.need("b", "rmax", "gamma", "mu_min_s", "num_actions")
    a, beta, n0 = spec.a, spec.beta, spec.n0
    k1 = b * rmax / (1 - gamma)
    c3 = (1 - gamma) * mu / n_act
    bc3 = beta * c3

    out.unit("boltzmann:a in [0,1]", a)
    out.unit("boltzmann:k1 in [0,1]", k1)
    out.lt("boltzmann:2a+6k1<1", 2 * a + 6 * k1, 1.0)
    if _eq(a, 0.0):
        out.ge("boltzmann.a=0:beta>=2(1-2k1)", beta, 2 * (1 - 2 * k1))
        out.ge("boltzmann.a=0:beta>=2(1-(a+2k1))", beta, 2 * (1 - (a + 2 * k1)))
        out.lt("boltzmann.a=0:2k1<1", 2 * k1, 1.0)
    else:
        out.lt("boltzmann.a>0:a+k1<1", a + k1, 1.0)
        out.lt("boltzmann.a>0:2k1<1+a", 2 * k1, 1.0 + a)
        out.n0_at_least("boltzmann.a>0:n0>=(2(1-a-2k1)/beta)^(1/a)", n0, 2 * ((1 - a) - 2 * k1) / beta, 1 / a)
        out.n0_at_least("boltzmann.a>0:n0>=(2(1-a-k1)/beta)^(1/a)", n0, 2 * (1 - a - k1) / beta, 1 / a)
        out.n0_at_least("boltzmann.a>0:n0>=((1-2k1)/beta)^(1/a)", n0, (1 - 2 * k1) / beta, 1 / a)
    if a > 0 and _eq(a, k1):
        out.lt("boltzmann.a=k1:7a<1", 7 * a, 1.0)
        out.ge("boltzmann.a=k1:beta*c3>=1-7a", bc3, 1 - 7 * a)
        out.ge("boltzmann.a=k1:beta*c3>=2-8a", bc3, 2 - 8 * a)
    elif a > k1:
        p = 1 / (a - k1)
        out.lt("boltzmann.a>k1:a+6k1<1", a + 6 * k1, 1.0)
        out.n0_at_least("boltzmann.a>k1:n0>=((1-a-6k1)/(beta*c3))^(1/(a-k1))", n0, (1 - (a + 6 * k1)) / bc3, p)
        out.n0_at_least("boltzmann.a>k1:n0>=(2(1-a-4k1)/(beta*c3))^(1/(a-k1))", n0, 2 * (1 - (a + 4 * k1)) / bc3, p)
        out.n0_at_least("boltzmann.a>k1:n0>=(2(1-4k1)/(beta*c3))^(1/(a-k1))", n0, 2 * (1 - 4 * k1) / bc3, p)
    elif a > 0:
        out.fail("boltzmann:0<a<k1", "stepsize exponent between zero and the temperature exponent is not covered")

    out.lt("boltzmann.concentration:a+3k1<1/2", a + 3 * k1, 0.5)
    out.lt("boltzmann.concentration:a+6k1<1", a + 6 * k1, 1.0)
    if _eq(a, 0.0):
        out.lt("boltzmann.concentration.a=0:k1<1/2", k1, 0.5)
        out.ge("boltzmann.concentration.a=0:beta>=2(1-2k1)", beta, 2 * (1 - 2 * k1))
    else:
        out.lt("boltzmann.concentration.a>0:a+2k1<1", a + 2 * k1, 1.0)

    if purpose == "regret":
        out.le("boltzmann.regret:b*rmax/(1-gamma)<=a", k1, a)


def _seg_beta_floor(a: float, d: float, e: float, gamma: float, mu: float, n_act: int) -> float:
    worst = max(1 - (3 * a + 4 * d + 2 * e), 2 - (4 * a + 6 * d + 4 * e), 2 - (2 * a + 6 * d + 4 * e))
    return n_act / (2 * (1 - gamma) * mu) * worst


def _seg(spec: BoundSpec, extras: ConditionExtras, purpose: Purpose, out: _Checks) -> None:
    d, e = extras.need("d", "e")
    a, beta = spec.a, spec.beta

    out.lt("seg:2a+6d+3e<1", 2 * a + 6 * d + 3 * e, 1.0)
    out.lt("seg:a+6d+3e<1", a + 6 * d + 3 * e, 1.0)
    out.lt("seg:2d+e<1+a", 2 * d + e, 1.0 + a)
    out.lt("seg:a+d<1", a + d, 1.0)
    out.lt("seg:2d+e<1", 2 * d + e, 1.0)
    if _eq(a, 0.0):
        out.ge("seg.a=0:beta>=2(1-2d)", beta, 2 * (1 - 2 * d))
    if _eq(a, d):
        gamma, mu, n_act = extras.need("gamma", "mu_min_s", "num_actions")
        out.lt("seg.a=d:3a+4d+2e<1", 3 * a + 4 * d + 2 * e, 1.0)
        out.ge("seg.a=d:beta>=|A|/(2(1-gamma)mu)*max(...)", beta, _seg_beta_floor(a, d, e, gamma, mu, n_act))

    for name, value in (("a", a), ("d", d), ("e", e)):
        out.unit(f"seg.concentration:{name} in [0,1]", value)
    out.lt("seg.concentration:a+3d+e<1/2", a + 3 * d + e, 0.5)
    if _eq(a, 0.0):
        out.lt("seg.concentration.a=0:d<1/2", d, 0.5)
        out.ge("seg.concentration.a=0:beta>=2(1-2d)", beta, 2 * (1 - 2 * d))
    else:
        out.lt("seg.concentration.a>0:a+2d<1", a + 2 * d, 1.0)

    if purpose == "regret":
        out.lt("seg.regret:2a+6d+4e<1", 2 * a + 6 * d + 4 * e, 1.0)
        out.lt("seg.regret:e<d", e, d)
        out.lt("seg.regret:a-e<1", a - e, 1.0)
        out.le("seg.regret:d<=a", d, a)
        out.lt("seg.regret:e>0", 0.0, e, required=False)


def check_conditions(
    spec: BoundSpec,
    algo: Algo,
    extras: ConditionExtras = ConditionExtras(),
    purpose: Purpose = "concentration",
) -> ConditionReport:
    """Evaluate every hyperparameter inequality that applies to `algo`.

    The generic stochastic-approximation set is always evaluated on the
    exponents stored in `spec`; the Q-learning sets are added for boltzmann and seg.
    """
    out = _Checks()
    _generic(spec, out)
    if algo == "boltzmann":
        _boltzmann(spec, extras, purpose, out)
    elif algo == "seg":
        _seg(spec, extras, purpose, out)
    return ConditionReport(algo, tuple(out.results))


# --- n0 conditions over a grid ---------------------------------------------

Rate = tuple[float, float]  # side ~ n^power * log(n)^log_power


def default_n0_grid(limit: int = N0_GRID_LIMIT, points: int = 241) -> np.ndarray:
    grid = np.unique(np.floor(np.geomspace(1, limit, points)).astype(np.int64))
    return np.concatenate([[0], grid])


def _for_all(
    cid: str,
    grid: np.ndarray,
    lhs: Callable[[np.ndarray], np.ndarray],
    rhs: Callable[[np.ndarray], np.ndarray],
    op: Literal[">", "<"],
    lhs_rate: Rate,
    rhs_rate: Rate,
) -> ConditionResult:
    left = np.broadcast_to(np.asarray(lhs(grid), dtype=float), grid.shape)
    right = np.broadcast_to(np.asarray(rhs(grid), dtype=float), grid.shape)
    holds = left > right if op == ">" else left < right
    bad = np.flatnonzero(~holds)
    at = int(bad[0]) if bad.size else len(grid) - 1

    faster = lhs_rate < rhs_rate
    if lhs_rate == rhs_rate:
        tail = None
    else:
        tail = (lhs_rate > rhs_rate) if op == ">" else faster
    return ConditionResult(
        cid,
        bool(holds.all()) and tail is not False,
        float(left[at]),
        float(right[at]),
        witness=int(grid[bad[0]]) if bad.size else None,
        lhs_decays_faster=faster,
        tail_holds=tail,
    )


def _not_applicable(cid: str, why: str) -> ConditionResult:
    return ConditionResult(cid, True, math.nan, math.nan, required=False, note=f"not applicable: {why}")


def _g_parts(spec: BoundSpec, n: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = n + spec.n0
    k1 = spec.kappa1
    g = np.sqrt(np.log(n.astype(float) ** 2 / spec.delta) / m ** (1 - (spec.a + 2 * k1)))
    g1 = np.log(m) / m ** (1 - (spec.a + 2 * k1 + spec.kappa3))
    g2 = 1.0 / m ** (1 - (2 * k1 + spec.kappa2))
    return g, g1, g2


def _bound_rate(spec: BoundSpec) -> Rate:
    k1, k2, k3, a = spec.kappa1, spec.kappa2, spec.kappa3, spec.a
    return max((-(1 - (a + 2 * k1)) / 2, 0.5), (-(1 - (a + 2 * k1 + k3)), 1.0), (-(1 - (2 * k1 + k2)), 0.0))


def _gap_margin(cid: str, spec: BoundSpec, gap: float, grid: np.ndarray, growth: float) -> ConditionResult:
    C = spec.constants
    if any(k not in C for k in ("C4", "C5", "C6", "c3")):
        return _not_applicable(cid, "C4, C5, C6 and c3 must all be defined")
    if math.isinf(gap):
        return ConditionResult(cid, True, math.inf, 0.0, note="infinite gap")
    n = grid[grid >= 1]

    def rhs(n: np.ndarray) -> np.ndarray:
        g, g1, g2 = _g_parts(spec, n)
        m = n + spec.n0
        return 4 * np.log(m) * m**growth / C["c3"] * (C["C4"] * g + C["C5"] * g1 + C["C6"] * g2)

    power, logs = _bound_rate(spec)
    return _for_all(cid, n, lambda n: np.full(n.shape, gap / 2), rhs, ">", (0.0, 0.0), (growth + power, logs + 1))


def check_n0(
    spec: BoundSpec,
    algo: Algo,
    extras: ConditionExtras = ConditionExtras(),
    grid: Optional[Sequence[int]] = None,
) -> ConditionReport:
    """Evaluate the n0 conditions on a grid of n, with a tail test from the decay exponents."""
    grid_arr = default_n0_grid() if grid is None else np.asarray(sorted(set(int(v) for v in grid)), dtype=np.int64)
    a, k1, k2, k3, n0 = spec.a, spec.kappa1, spec.kappa2, spec.kappa3, spec.n0
    C = spec.constants
    for name in ("c1", "c2", "c9"):
        if name not in C:
            raise MissingParameter(name)
    c1, c2, c9 = C["c1"], C["c2"], C["c9"]
    results: list[ConditionResult] = []

    results.append(ConditionResult("n0-I.initial-scale", 2 * c9 * c1 * c2 * n0**k1 > c1, 2 * c9 * c1 * c2 * n0**k1, c1))

    cid = "n0-II.log-term-dominates"
    if 2 * a + 2 * k1 + k3 <= 0 or 2 * a + k1 <= 0:
        results.append(_not_applicable(cid, "2a+2k1+k3 and 2a+k1 must be positive"))
    elif any(k not in C for k in ("c5", "c7", "c8", "c10")):
        results.append(_not_applicable(cid, "c5, c7, c8 and c10 must be defined"))
    else:
        coeff = (
            2 * spec.beta * c1 * c2 * (C["c10"] + 2 * c9 * c1) * c2 * c9 * C["c5"]
            * (C["c7"] + C["c8"] + c9) / (2 * a + 2 * k1 + k3)
        )
        results.append(
            _for_all(
                cid,
                grid_arr,
                lambda n: coeff * np.log(n + n0) / (n + n0) ** (1 - (a + 2 * k1 + k3)),
                lambda n: 8 * c9 * c1 * c2 / (2 * a + k1) / (n + n0) ** (1 - (a + k1)),
                ">",
                (-(1 - (a + 2 * k1 + k3)), 1.0),
                (-(1 - (a + k1)), 0.0),
            )
        )

    cid = "n0-III.smoothness-growth"
    if any(k not in C for k in ("c5", "c10")):
        results.append(_not_applicable(cid, "c5 and c10 must be defined"))
    else:
        coeff = C["c5"] * c9 * C["c10"] * c2
        results.append(
            _for_all(
                cid,
                grid_arr,
                lambda n: coeff * (n + n0) ** (k1 + k3) * np.log(n + n0),
                lambda n: np.ones(n.shape),
                ">",
                (k1 + k3, 1.0),
                (0.0, 0.0),
            )
        )

    cid = "n0-IV.stepsize-dominance"
    if 2 * a + k1 <= 0:
        results.append(_not_applicable(cid, "2a+k1 must be positive"))
    else:
        base = 2 * c9 * c1 * c2
        results.append(
            _for_all(
                cid,
                grid_arr,
                lambda n: 2 * base / (2 * a + k1) / (n + n0) ** (1 - 2 * a - k1),
                lambda n: n0**a * base / (n + n0) ** (1 - k1) + base / (n + n0) ** (1 - a - k1),
                ">",
                (-(1 - 2 * a - k1), 0.0),
                (-(1 - a - k1), 0.0),
            )
        )

    cid = "n0-V.lipschitz-growth"
    if any(k not in C for k in ("c5", "c6", "c10")):
        results.append(_not_applicable(cid, "c5, c6 and c10 must be defined"))
    else:
        coeff = (C["c10"] + 2 * c1) * c9 * c2 * C["c5"]
        results.append(
            _for_all(
                cid,
                grid_arr,
                lambda n: coeff * np.log(n + n0) * (n + n0) ** (k1 + k3),
                lambda n: np.full(n.shape, 2 * C["c6"]),
                ">",
                (k1 + k3, 1.0),
                (0.0, 0.0),
            )
        )

    if algo == "boltzmann":
        results.extend(_n0_boltzmann(spec, extras, grid_arr))
    elif algo == "seg":
        results.extend(_n0_seg(spec, extras, grid_arr))
    return ConditionReport(algo, tuple(results))


def _g1_over_g2(cid: str, spec: BoundSpec, grid: np.ndarray, op: Literal[">", "<"]) -> ConditionResult:
    C = spec.constants
    if "C5" not in C or "C6" not in C:
        return _not_applicable(cid, "C5 and C6 must be defined")
    a, k1, k2, k3 = spec.a, spec.kappa1, spec.kappa2, spec.kappa3
    n = grid[grid >= 1]
    g1_rate = (-(1 - (a + 2 * k1 + k3)), 1.0)
    g2_rate = (-(1 - (2 * k1 + k2)), 0.0)

    def c5g1(n: np.ndarray) -> np.ndarray:
        return C["C5"] * _g_parts(spec, n)[1]

    def c6g2(n: np.ndarray) -> np.ndarray:
        return C["C6"] * _g_parts(spec, n)[2]

    if op == ">":
        return _for_all(cid, n, c5g1, c6g2, ">", g1_rate, g2_rate)
    return _for_all(cid, n, c6g2, c5g1, "<", g2_rate, g1_rate)


def _n0_boltzmann(spec: BoundSpec, extras: ConditionExtras, grid: np.ndarray) -> Iterable[ConditionResult]:
    (gap,) = extras.need("gap")
    yield _g1_over_g2("n0-VI.boltzmann.g1-over-g2", spec, grid, ">")
    yield _gap_margin("n0-VII.boltzmann.gap-margin", spec, gap, grid, 2 * spec.kappa1)


def _n0_seg(spec: BoundSpec, extras: ConditionExtras, grid: np.ndarray) -> Iterable[ConditionResult]:
    d, e, gap, n_act, q_l1 = extras.need("d", "e", "gap", "num_actions", "q_l1_min")
    n0, a = spec.n0, spec.a

    yield _for_all(
        "n0-VIII.seg.epsilon-drift",
        grid,
        lambda n: d / (n + n0) ** (1 + d),
        lambda n: q_l1 / (n + n0) ** (1 - e),
        "<",
        (-(1 + d), 0.0),
        (-(1 - e), 0.0),
    )
    yield _g1_over_g2("n0-IX.seg.g2-under-g1", spec, grid, "<")
    # exp(-gap * (n+n0)^e) beats every power once e > 0
    tail_rate = (-math.inf, 0.0) if math.isinf(gap) or (e > 0 and gap > 0) else (0.0, 0.0)
    yield _for_all(
        "n0-IX.seg.epsilon-over-softmax-tail",
        grid,
        lambda n: (n + n0) ** (-d),
        lambda n: n_act * np.exp(-((n + n0) ** e) * gap),
        ">",
        (-d, 0.0),
        tail_rate,
    )
    yield _gap_margin("n0-X.seg.gap-margin", spec, gap, grid, 2 * spec.kappa1 + spec.kappa3)
    yield _for_all(
        "n0-XI.seg.gap-tail",
        grid,
        lambda n: np.exp(-(gap / 2) * (n + n0) ** e),
        lambda n: (n + n0) ** (-d),
        "<",
        tail_rate,
        (-d, 0.0),
    )
    c = spec.constants
    if any(k not in c for k in ("c1", "c2", "c3")):
        yield _not_applicable("n0-XII.seg.probability-floor", "c1, c2 and c3 must be defined")
    else:
        spread = c["c1"] + c["c2"] + c["c3"]
        yield _for_all(
            "n0-XII.seg.probability-floor",
            grid,
            lambda n: (n + n0) ** (-d) + n_act * spread / (n + n0) ** (1 + d - a),
            lambda n: n_act * (1 + e) / (n + n0) ** (d - e),
            "<",
            max((-d, 0.0), (-(1 + d - a), 0.0)),
            (-(d - e), 0.0),
        )
