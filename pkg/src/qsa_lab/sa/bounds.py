from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Mapping, Optional

from ..errors import InstanceTooLarge, MissingParameter, PreconditionUnmet, Unreachable, ValidationError
from ..markov.diameter import mdp_diameter
from ..mdp.model import Mdp
from ..policies.kernels import mu_min_s


Algo = Literal["genericSA", "boltzmann", "seg"]

BASE_CONSTANTS = ("c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "c9", "c10")


@dataclass(frozen=True)
class BoundSpec:
    a: float = 0.0
    kappa1: float = 0.0
    kappa2: float = 0.0
    kappa3: float = 0.0
    beta: float = 1.0
    n0: int = 1
    delta: float = 0.01
    constants: Mapping[str, float] = field(default_factory=dict)
    d: int = 1

    def __post_init__(self) -> None:
        if not (0.0 < self.delta < 1.0):
            raise ValidationError(f"delta={self.delta!r} outside (0, 1)", delta=self.delta)
        for name, value in self.constants.items():
            if not value > 0.0:
                raise ValidationError(f"constant {name}={value!r} must be > 0", name=name)

    def c(self, name: str) -> Optional[float]:
        return self.constants.get(name)

    def with_constants(self, **overrides: float) -> "BoundSpec":
        merged = dict(self.constants)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return replace(self, constants=merged)


@dataclass(frozen=True)
class BoundTerms:
    g: float
    g1: float
    g2: float


def bound_g(n: int, spec: BoundSpec) -> BoundTerms:
    if n < 1:
        raise ValidationError("n must be >= 1")
    m = n + spec.n0
    k1 = spec.kappa1
    g = math.sqrt(math.log(n * n / spec.delta) / m ** (1.0 - (spec.a + 2 * k1)))
    g1 = math.log(m) / m ** (1.0 - (spec.a + 2 * k1 + spec.kappa3))
    g2 = 1.0 / m ** (1.0 - (2 * k1 + spec.kappa2))
    return BoundTerms(g=g, g1=g1, g2=g2)


@dataclass(frozen=True)
class RateReport:
    """Polynomial exponents of the error bound (negative means decay).

    `headline` is the summary rate sqrt(1/n) n^{2k1 + max(a+k3, k2)};
    the others are the exponents of n^{2k1+k3} times g, g1 and g2.
    """

    headline: float
    g_term: float
    g1_term: float
    g2_term: float

    @property
    def dominant(self) -> float:
        return max(self.g_term, self.g1_term, self.g2_term)


def convergence_rate(spec: BoundSpec) -> RateReport:
    """Decay exponents of the iterate error: the headline rate and the three detailed terms."""
    a, k1, k2, k3 = spec.a, spec.kappa1, spec.kappa2, spec.kappa3
    lead = 2 * k1 + k3
    return RateReport(
        headline=-0.5 + 2 * k1 + max(a + k3, k2),
        g_term=lead - (1.0 - (a + 2 * k1)) / 2.0,
        g1_term=lead - (1.0 - (a + 2 * k1 + k3)),
        g2_term=lead - (1.0 - (2 * k1 + k2)),
    )


def derived_constants(spec: BoundSpec) -> dict[str, float]:
    """C1..C6 of the final error bound; entries whose inputs are missing are left out.

    C2 (and with it C5) is omitted when 2a + 2k1 + k3 = 0.
    """
    c = spec.constants
    out: dict[str, float] = {}
    a, k1, k3 = spec.a, spec.kappa1, spec.kappa3
    if all(k in c for k in ("c1", "c2", "c9")):
        out["C1"] = 16 * spec.d * math.sqrt(spec.beta) * c["c9"] * c["c1"] * c["c2"]
    denom = 2 * a + 2 * k1 + k3
    if denom > 0 and all(k in c for k in ("c1", "c2", "c5", "c7", "c8", "c9", "c10")):
        out["C2"] = (
            4 * spec.beta * c["c1"] * c["c2"] * (c["c10"] + 2 * c["c9"] * c["c1"])
            * c["c2"] * c["c9"] * c["c5"] * (c["c7"] + c["c8"] + c["c9"]) / denom
        )
    if all(k in c for k in ("c1", "c2", "c4", "c9", "c10")):
        out["C3"] = 2 * c["c2"] ** 2 * c["c1"] * c["c9"] * c["c4"] * (c["c10"] + 2 * c["c1"])
    if all(k in c for k in ("c2", "c3", "c5", "c9", "c10")):
        factor = 2 * c["c5"] * c["c9"] * c["c10"] * c["c2"] / c["c3"]
        for src, dst in (("C1", "C4"), ("C2", "C5"), ("C3", "C6")):
            if src in out:
                out[dst] = factor * out[src]
    return out


def with_derived(spec: BoundSpec) -> BoundSpec:
    base = {k: v for k, v in spec.constants.items() if k in BASE_CONSTANTS}
    return replace(spec, constants={**base, **derived_constants(replace(spec, constants=base))})


def identify_bound_spec(
    mdp: Mdp,
    algo: Algo,
    *,
    beta: float,
    a: float,
    n0: int,
    b: Optional[float] = None,
    d: Optional[float] = None,
    e: Optional[float] = None,
    delta: float = 0.01,
    overrides: Optional[Mapping[str, float]] = None,
    diameter: Optional[float] = None,
) -> BoundSpec:
    """BoundSpec with the exponents and constants of a Q-learning instance.

    The iterate is the flattened Q-table, so d = |S||A|.
    """
    S, A, g, rmax = mdp.num_states, mdp.num_actions, mdp.gamma, mdp.rmax
    mu_s = mu_min_s(mdp)
    if diameter is None:
        try:
            diameter = mdp_diameter(mdp)
        except (InstanceTooLarge, Unreachable):
            diameter = math.nan  # c1 and c10 then need overrides
    diam = diameter
    vmax = rmax / (1.0 - g)
    constants = {
        "c1": diam,
        "c2": 1.0 - g,
        "c6": 1.0 + g,
        "c7": vmax,
        "c8": vmax,
        "c9": vmax,
    }
    if algo == "boltzmann":
        if b is None:
            raise MissingParameter("b")
        kappa1, kappa2, kappa3 = b * rmax / (1.0 - g), 0.0, 0.0
        constants.update(
            c3=(1.0 - g) * mu_s / A,
            c4=b * A * rmax / (1.0 - g),
            c5=S**2 * A**2 * b,
            c10=mu_s * diam / A,
        )
    elif algo == "seg":
        if d is None or e is None:
            raise MissingParameter("d" if d is None else "e")
        kappa1, kappa2, kappa3 = d, e, e
        constants.update(c3=2.0 * (1.0 - g) * mu_s / A, c4=2.0 * rmax / (1.0 - g), c5=1.0, c10=mu_s * diam)
    else:
        raise ValidationError(f"no identification for algo {algo!r}")

    # zero-valued identifications (b = 0, diameter 0) stay out of the positive-constant table
    constants = {k: v for k, v in constants.items() if v > 0.0 and math.isfinite(v)}
    constants.update(overrides or {})
    spec = BoundSpec(
        a=a, kappa1=kappa1, kappa2=kappa2, kappa3=kappa3, beta=beta, n0=n0, delta=delta, constants=constants, d=S * A
    )
    return with_derived(spec)


@dataclass(frozen=True)
class RecursionCheck:
    s_n: float
    bound: float
    ok: bool
    part: int


def recursion_bound_check(a: float, b: float, rho: float, rho_prime: float, n0: int, n: int) -> RecursionCheck:
    """S_n = sum_{i<n} b_i prod_{j=i+1}^{n-1} (1 - a_j) against 2 b_n / a_n.

    a_n = a/(n+n0)^rho, b_n = b/(n+n0)^rho'. Needs either rho = 1, rho' in (1, 2]
    and a >= 2(rho' - 1), or rho < 1, rho' > rho and n0 >= (2(rho'-rho)/a)^{1/(1-rho)}.
    """
    if a <= 0 or n0 < 1 or n < 1:
        raise PreconditionUnmet("input", "need a > 0, n0 >= 1 and n >= 1")
    if rho == 1.0:
        part = 1
        if not (1.0 < rho_prime <= 2.0):
            raise PreconditionUnmet("part 1", f"rho'={rho_prime!r} outside (1, 2]")
        if a < 2.0 * (rho_prime - 1.0):
            raise PreconditionUnmet("part 1", f"a={a!r} < 2(rho' - 1)")
    elif rho < 1.0:
        part = 2
        if rho_prime <= rho:
            raise PreconditionUnmet("part 2", f"rho'={rho_prime!r} <= rho={rho!r}")
        need = (2.0 * (rho_prime - rho) / a) ** (1.0 / (1.0 - rho))
        if n0 < need:
            raise PreconditionUnmet("part 2", f"n0={n0} < {need:.6g}")
    else:
        raise PreconditionUnmet("input", f"rho={rho!r} > 1 is not covered")

    s = 0.0
    for i in range(n):
        s = (1.0 - a / (i + n0) ** rho) * s + b / (i + n0) ** rho_prime
    a_n = a / (n + n0) ** rho
    b_n = b / (n + n0) ** rho_prime
    bound = 2.0 * b_n / a_n
    return RecursionCheck(s_n=s, bound=bound, ok=s <= bound, part=part)
