from __future__ import annotations

from typing import Any


class QsaLabError(Exception):
    """Base error. `exit_code` is what the CLI exits with; `code` names the failure."""

    exit_code = 1
    code = "error"

    def __init__(self, message: str = "", **details: Any) -> None:
        super().__init__(message or self.code)
        self.details = details

    def record(self) -> dict[str, Any]:
        return {"error": self.code, "message": str(self), "details": _jsonable(self.details)}


def _jsonable(details: dict[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in details.items():
        if isinstance(v, (str, int, float, bool)) or v is None:
            out[k] = v
        elif isinstance(v, (list, tuple)):
            out[k] = [x if isinstance(x, (str, int, float, bool)) else str(x) for x in v]
        else:
            out[k] = str(v)
    return out


# --- input files ---------------------------------------------------------


class InputFileNotFound(QsaLabError):
    exit_code = 3
    code = "file_not_found"

    def __init__(self, path: str) -> None:
        super().__init__(f"no such file: {path}", path=path)
        self.path = path


class ParseError(QsaLabError):
    exit_code = 4
    code = "parse_error"


# --- validation ----------------------------------------------------------


class ValidationError(QsaLabError):
    exit_code = 5
    code = "validation_error"


class RowSumViolation(ValidationError):
    code = "row_sum_violation"

    def __init__(self, s: int, a: int, total: float) -> None:
        super().__init__(f"transition row ({s},{a}) is not a distribution (sum={total!r})", s=s, a=a, total=total)
        self.s, self.a, self.total = s, a, total


class RewardOutOfRange(ValidationError):
    code = "reward_out_of_range"

    def __init__(self, s: int, a: int, value: float, rmax: float) -> None:
        super().__init__(f"reward ({s},{a})={value!r} outside [0, {rmax!r}]", s=s, a=a, value=value, rmax=rmax)
        self.s, self.a = s, a


class GammaOutOfRange(ValidationError):
    code = "gamma_out_of_range"

    def __init__(self, gamma: float) -> None:
        super().__init__(f"gamma={gamma!r} must lie in (0, 1)", gamma=gamma)
        self.gamma = gamma


class DimensionMismatch(ValidationError):
    code = "dimension_mismatch"


class KernelNotStochastic(ValidationError):
    code = "kernel_not_stochastic"

    def __init__(self, row: int, total: float) -> None:
        super().__init__(f"kernel row {row} is not a distribution (sum={total!r})", row=row, total=total)
        self.row = row


class PolicyRowNotStochastic(ValidationError):
    code = "policy_row_not_stochastic"

    def __init__(self, s: int, total: float) -> None:
        super().__init__(f"policy row {s} is not a distribution (sum={total!r})", s=s, total=total)
        self.s = s


class NegativeLambda(ValidationError):
    code = "negative_lambda"

    def __init__(self, lam: float) -> None:
        super().__init__(f"temperature must be >= 0, got {lam!r}", lam=lam)


class ConfigInvalid(ValidationError):
    code = "config_invalid"


class GridMismatch(ValidationError):
    code = "grid_mismatch"


class MissingParameter(ValidationError):
    code = "missing_parameter"

    def __init__(self, name: str) -> None:
        super().__init__(f"missing parameter: {name}", name=name)
        self.name = name


class PreconditionUnmet(ValidationError):
    code = "precondition_unmet"

    def __init__(self, part: str, reason: str) -> None:
        super().__init__(f"{part}: {reason}", part=part)
        self.part = part


class GapRequired(ValidationError):
    code = "gap_required"


# --- markov structure ----------------------------------------------------


class NotIrreducible(ValidationError):
    code = "not_irreducible"

    def __init__(self, n: int | None = None, components: int | None = None) -> None:
        where = f" at step {n}" if n is not None else ""
        super().__init__(f"kernel is not irreducible{where}", n=n, components=components)
        self.n = n


class Unreachable(ValidationError):
    code = "unreachable"

    def __init__(self, s: int, s_next: int) -> None:
        super().__init__(f"state {s_next} unreachable from {s} under every policy", s=s, s_next=s_next)
        self.s, self.s_next = s, s_next


class InstanceTooLarge(ValidationError):
    code = "instance_too_large"


# --- numerical -----------------------------------------------------------


class NumericalError(QsaLabError):
    exit_code = 6
    code = "numerical_error"


class NonConvergence(NumericalError):
    code = "non_convergence"

    def __init__(self, max_iters: int, residual: float) -> None:
        super().__init__(f"no convergence within {max_iters} iterations (residual={residual:.3e})", max_iters=max_iters, residual=residual)


class SingularSystem(NumericalError):
    code = "singular_system"


class LogDomain(NumericalError):
    code = "log_domain"


class LambdaUnderflow(NumericalError):
    code = "lambda_underflow"

    def __init__(self, lam: float) -> None:
        super().__init__(f"temperature {lam!r} below 1e-12; gradient undefined", lam=lam)


class StepsizeTooLarge(NumericalError):
    code = "stepsize_too_large"

    def __init__(self, j: int, beta: float) -> None:
        super().__init__(f"beta_{j}={beta!r} >= 1", j=j, beta=beta)
        self.j = j


class IterateEscaped(NumericalError):
    code = "iterate_escaped"

    def __init__(self, n: int, value: float) -> None:
        super().__init__(f"iterate left its range at step {n} (value={value!r})", n=n, value=value)
        self.n = n


class HorizonOverflow(NumericalError):
    code = "horizon_overflow"

    def __init__(self, required: int, limit: int) -> None:
        super().__init__(f"rollout horizon {required} exceeds limit {limit}", required=required, limit=limit)
        self.required = required


class WindowTooLarge(NumericalError):
    code = "window_too_large"


class TooFewPoints(NumericalError):
    code = "too_few_points"


class NonPositiveValue(NumericalError):
    code = "non_positive_value"


# --- conditions ----------------------------------------------------------


class ConditionViolated(QsaLabError):
    exit_code = 7
    code = "condition_violated"

    def __init__(self, failing: list[str]) -> None:
        super().__init__("conditions violated: " + ", ".join(failing), failing=failing)
        self.failing = failing


class SeedFailed(QsaLabError):
    code = "seed_failed"

    def __init__(self, seed: int, cause: str, message: str, exit_code: int = 1) -> None:
        super().__init__(f"seed {seed} failed: {message}", seed=seed, cause=cause)
        self.seed = seed
        self.exit_code = exit_code
