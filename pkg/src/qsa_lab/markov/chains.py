from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..errors import DimensionMismatch, KernelNotStochastic, NotIrreducible, NumericalError, SingularSystem, ValidationError
from ..rng import sample_index


ROW_TOL = 1e-12
EDGE_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class Kernel:
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise DimensionMismatch(f"kernel must be square, got {rows.shape}")
        sums = rows.sum(axis=1)
        bad = np.flatnonzero((np.abs(sums - 1.0) > ROW_TOL) | np.any(rows < 0.0, axis=1))
        if bad.size:
            raise KernelNotStochastic(int(bad[0]), float(sums[bad[0]]))
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def size(self) -> int:
        return int(self.rows.shape[0])


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    probs: np.ndarray
    mu_min: float


@dataclass(frozen=True, eq=False)
class PoissonSolution:
    h: np.ndarray  # (|Y|, d)
    designated: int
    residual: float


def is_irreducible(k: Kernel) -> bool:
    graph = csr_matrix(k.rows > EDGE_FLOOR)
    n, _ = connected_components(graph, directed=True, connection="strong")
    return n == 1


def _require_irreducible(k: Kernel, n: int | None = None) -> None:
    if k.size == 1:
        return
    graph = csr_matrix(k.rows > EDGE_FLOOR)
    count, _ = connected_components(graph, directed=True, connection="strong")
    if count != 1:
        raise NotIrreducible(n=n, components=int(count))


def _solve(lhs: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    try:
        out = scipy.linalg.solve(lhs, rhs)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise SingularSystem(f"{what}: {e}") from e
    if not np.all(np.isfinite(out)):
        raise SingularSystem(f"{what}: non-finite solution")
    return out


def stationary_distribution(k: Kernel, check: bool = True) -> StationaryDistribution:
    """Unique mu with mu P = mu, sum(mu) = 1 (one balance equation swapped for normalisation)."""
    if check:
        _require_irreducible(k)
    size = k.size
    lhs = k.rows.T - np.eye(size)
    lhs[-1, :] = 1.0
    rhs = np.zeros(size)
    rhs[-1] = 1.0
    mu = _solve(lhs, rhs, "stationary distribution")
    return StationaryDistribution(probs=mu, mu_min=float(mu.min()))


def expected_hitting_times(k: Kernel, target: int, check: bool = True) -> np.ndarray:
    """E[T_target | y_0 = y]; zero at the target by pinning its row."""
    if check:
        _require_irreducible(k)
    size = k.size
    lhs = np.eye(size) - k.rows
    lhs[target, :] = 0.0
    lhs[target, target] = 1.0
    rhs = np.ones(size)
    rhs[target] = 0.0
    h = _solve(lhs, rhs, "hitting times")
    h[target] = 0.0
    return h


def poisson_residual(k: Kernel, f_values: np.ndarray, mu: StationaryDistribution, h: np.ndarray) -> float:
    f = f_values.reshape(k.size, -1)
    fbar = mu.probs @ f
    return float(np.max(np.abs(h - (f - fbar + k.rows @ h)))) if f.size else 0.0


def solve_poisson(
    k: Kernel,
    f_values: np.ndarray,
    mu: StationaryDistribution,
    i_star: int = 0,
    check: bool = True,
) -> PoissonSolution:
    """H = F - mu.F + P H with H(i*) = 0.

    The i*-equation is replaced by the pinning constraint; it is implied by the
    others because mu annihilates the right-hand side.
    """
    if check:
        _require_irreducible(k)
    size = k.size
    f = np.asarray(f_values, dtype=float).reshape(size, -1)
    fbar = mu.probs @ f
    rhs = f - fbar
    lhs = np.eye(size) - k.rows
    lhs[i_star, :] = 0.0
    lhs[i_star, i_star] = 1.0
    rhs[i_star, :] = 0.0
    h = _solve(lhs, rhs, "poisson equation")
    h[i_star, :] = 0.0
    return PoissonSolution(h=h, designated=i_star, residual=poisson_residual(k, f, mu, h))


def inf_norm(m: np.ndarray) -> float:
    """Induced sup norm: max absolute row sum."""
    return float(np.max(np.abs(m).sum(axis=1)))


def multistep_kernel_deviation(p: Kernel, p_prime: Kernel, ell: int) -> float:
    """||P^ell - P'^ell||_inf by exact matrix powers."""
    if p.size != p_prime.size:
        raise DimensionMismatch(f"kernel sizes differ: {p.size} vs {p_prime.size}")
    if ell < 1:
        raise ValidationError(f"ell must be a positive integer, got {ell}")
    value = inf_norm(np.linalg.matrix_power(p.rows, ell) - np.linalg.matrix_power(p_prime.rows, ell))
    one_step = inf_norm(p.rows - p_prime.rows)
    if value > ell * one_step + 1e-12:
        raise NumericalError(f"{ell}-step deviation {value!r} exceeds {ell} x one-step {one_step!r}")
    return value


@dataclass(frozen=True)
class StationarySensitivity:
    lhs: float  # ||mu - mu'||_inf
    rhs: float  # constant * ||P - P'||_inf / mu_min
    holds: bool


def stationary_sensitivity_check(p: Kernel, p_prime: Kernel, constant: float, mu_min: float) -> StationarySensitivity:
    mu = stationary_distribution(p).probs
    mu_p = stationary_distribution(p_prime).probs
    lhs = float(np.max(np.abs(mu - mu_p)))
    rhs = constant * inf_norm(p.rows - p_prime.rows) / mu_min
    return StationarySensitivity(lhs=lhs, rhs=rhs, holds=lhs <= rhs)


def empirical_occupancy(
    k: Kernel,
    steps: int,
    rng: np.random.Generator,
    chains: int = 1,
    burn_in: int = 0,
    start: int = 0,
) -> np.ndarray:
    """Visit frequencies of `chains` parallel copies run for `steps` steps after `burn_in`."""
    cdf = np.cumsum(k.rows, axis=1)
    counts = np.zeros(k.size)
    y = np.full(chains, start, dtype=np.int64)
    for t in range(burn_in + steps):
        u = rng.random(chains) * cdf[y, -1]
        y = np.minimum((cdf[y] <= u[:, None]).sum(axis=1), k.size - 1)
        if t >= burn_in:
            counts += np.bincount(y, minlength=k.size)
    return counts / counts.sum()


def simulate_hitting_time(k: Kernel, start: int, target: int, rng: np.random.Generator, cap: int = 10**7) -> int:
    y, t = start, 0
    while y != target and t < cap:
        y = sample_index(rng, k.rows[y])
        t += 1
    return t
