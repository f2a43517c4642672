"""Closed forms and fixed-point solvers for the two-message contagion model.

Two contradictory messages spread by word of mouth in a well-mixed
population: message 0 (the truth) and message 1 (the rumor). A mass x of
agents is biased toward the truth, the remaining 1 - x toward the rumor.
Biased agents ignore the discordant message unless they inspect it, in
which case they learn, believe, and pass on the truth no matter which
message reached them. Believers are replaced by susceptibles at rate delta;
each agent has k meetings per period and transmits per contact at rate nu.

With the diffusion rate lam = nu * k / delta, the group-level believing
fractions at a steady state are

    rho_a    = lam * theta  / (1 + lam * theta)     inspectors, either type
    rho_0_na = lam * theta0 / (1 + lam * theta0)    non-inspecting type 0
    rho_1_na = lam * theta1 / (1 + lam * theta1)    non-inspecting type 1

where theta0 / theta1 are the population prevalences of truth / rumor and
theta = theta0 + theta1. The rumor has the closed form

    theta1 = max(0, (1 - alpha1) * (1 - x) - 1/lam)

while the truth prevalence solves the scalar fixed point
theta0 = truth_map(theta0), which is strictly concave in theta0 and hence
has a unique positive root whenever one exists; it is found by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal


class ParameterError(ValueError):
    """A model parameter, rate, or state left its admissible domain."""


class SolverError(RuntimeError):
    """A fixed-point solve failed; ``bracket`` holds the last bisection bracket."""

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


@dataclass(frozen=True)
class ModelParams:
    """Exogenous model constants.

    The diffusion rate ``lam`` is derived, never stored, so
    lam == nu * k / delta holds exactly for every instance. Build from a
    diffusion rate with :meth:`from_lambda` (canonical delta = 0.5, k = 1
    make the round trip bit-exact) or from raw rates with
    :meth:`from_rates`.
    """

    nu: float
    k: float
    delta: float
    x: float

    def __post_init__(self):
        if not (self.nu > 0.0 and self.k > 0.0 and self.delta > 0.0):
            raise ParameterError(
                f"nu, k, delta must be strictly positive, got "
                f"({self.nu}, {self.k}, {self.delta})"
            )
        if not 0.0 <= self.x <= 1.0:
            raise ParameterError(f"x must lie in [0, 1], got {self.x}")

    @property
    def lam(self) -> float:
        """Diffusion rate nu * k / delta."""
        return self.nu * self.k / self.delta

    @classmethod
    def from_lambda(cls, lam: float, x: float, *, delta: float = 0.5, k: float = 1.0) -> "ModelParams":
        if not lam > 0.0:
            raise ParameterError(f"lam must be strictly positive, got {lam}")
        return cls(nu=lam * delta / k, k=k, delta=delta, x=x)

    @classmethod
    def from_rates(cls, nu: float, k: float, delta: float, x: float) -> "ModelParams":
        return cls(nu=nu, k=k, delta=delta, x=x)


Mode = Literal["uniform", "targeted"]


@dataclass(frozen=True)
class Allocation:
    """An inspection policy: one population-wide rate, or one rate per type."""

    alpha0: float
    alpha1: float
    mode: Mode = "targeted"

    def __post_init__(self):
        if self.mode not in ("uniform", "targeted"):
            raise ParameterError(f"unknown allocation mode {self.mode!r}")
        for name, v in (("alpha0", self.alpha0), ("alpha1", self.alpha1)):
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {v}")
        if self.mode == "uniform" and self.alpha0 != self.alpha1:
            raise ParameterError("uniform mode requires alpha0 == alpha1")

    @classmethod
    def uniform(cls, alpha: float) -> "Allocation":
        return cls(alpha0=alpha, alpha1=alpha, mode="uniform")

    @classmethod
    def targeted(cls, alpha0: float, alpha1: float) -> "Allocation":
        return cls(alpha0=alpha0, alpha1=alpha1, mode="targeted")

    @property
    def alpha(self) -> float:
        if self.mode != "uniform":
            raise ParameterError("alpha is only defined for uniform allocations")
        return self.alpha0

    def rates(self) -> tuple[float, float]:
        return (self.alpha0, self.alpha1)

    def inspecting_mass(self, x: float) -> float:
        """Population mass that inspects messages (also the budget spend)."""
        if self.mode == "uniform":
            return self.alpha0
        return x * self.alpha0 + (1.0 - x) * self.alpha1


@dataclass(frozen=True)
class SolverConfig:
    """Bisection settings for the truth fixed point."""

    tol: float = 1e-12
    max_iter: int = 200
    clamp_eps: float = 0.0

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ParameterError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.clamp_eps < 0.0:
            raise ParameterError(f"clamp_eps must be >= 0, got {self.clamp_eps}")


DEFAULT_SOLVER = SolverConfig()


@dataclass(frozen=True)
class SteadyState:
    """Solved prevalence bundle; ``theta == theta0 + theta1`` by construction."""

    theta0: float
    theta1: float
    theta: float
    rho_00_a: float   # believing-truth fraction among inspecting type-0 agents
    rho_10_a: float   # believing-truth fraction among inspecting type-1 agents
    rho_00_na: float  # believing-truth fraction among non-inspecting type-0 agents
    rho_11_na: float  # believing-rumor fraction among non-inspecting type-1 agents


def _clamp(value: float, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    return value if value > cfg.clamp_eps else 0.0


def eradication_threshold(p: ModelParams) -> float:
    """Smallest type-1 inspection rate that keeps the rumor extinct.

    Returns max(0, 1 - 1/(lam*(1-x))); zero means the rumor can never be
    endemic (in particular when x = 1 there is nobody to carry it).
    """
    lx = p.lam * (1.0 - p.x)
    if lx <= 1.0:
        return 0.0
    return 1.0 - 1.0 / lx


def rumor_steady_state(p: ModelParams, a: Allocation) -> float:
    """Endemic rumor prevalence; exactly 0 at or above the eradication threshold.

    Only the type-1 inspection rate matters: the rumor circulates among
    non-inspecting rumor-biased agents alone.
    """
    a1 = a.alpha1
    thr = eradication_threshold(p)
    if thr == 0.0 or a1 >= thr:
        return 0.0
    return max(0.0, (1.0 - a1) * (1.0 - p.x) - 1.0 / p.lam)


def truth_map(theta0: float, theta1: float, p: ModelParams, a: Allocation) -> float:
    """One application of the self-consistency map for the truth prevalence.

    Inspectors (mass x*alpha0 + (1-x)*alpha1; plain alpha in uniform mode)
    convert either message into truth belief, so they respond to total
    prevalence; non-inspecting type-0 agents (mass x*(1-alpha0)) respond to
    the truth alone. The steady truth prevalence is the fixed point of this
    map at the endemic rumor level.
    """
    _check_fraction("theta0", theta0)
    _check_fraction("theta1", theta1)
    lam = p.lam
    c_ins = a.inspecting_mass(p.x)
    c_bias = p.x * (1.0 - a.alpha0)
    th = theta0 + theta1
    return c_ins * lam * th / (1.0 + lam * th) + c_bias * lam * theta0 / (1.0 + lam * theta0)


def _check_fraction(name: str, v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {v}")


def no_rumor_truth(p: ModelParams, a: Allocation) -> float:
    """Truth prevalence once the rumor is extinct: max(0, x + (1-x)*alpha1 - 1/lam).

    alpha0 has no effect here; with nothing false in circulation, type-0
    inspection changes nothing about what anyone believes.
    """
    return max(0.0, p.x + (1.0 - p.x) * a.alpha1 - 1.0 / p.lam)


def no_rumor_positivity_readings(p: ModelParams) -> tuple[float, float]:
    """Two algebraic readings of the alpha threshold for positive no-rumor truth.

    The grouping of the published condition is ambiguous; the first reading,
    (1/lam - x)/(1-x), is the one consistent with the no-rumor closed form
    (it is exactly where x + (1-x)*alpha - 1/lam changes sign) and is the
    operative one. The second, 1/((1-x)*(1/lam - x)), is reported purely as
    a diagnostic. Both are nan at x = 1; the alternative is +/-inf when
    1/lam == x.
    """
    if p.x >= 1.0:
        return (math.nan, math.nan)
    g = 1.0 / p.lam - p.x
    reading = g / (1.0 - p.x)
    alt = math.inf if g == 0.0 else 1.0 / ((1.0 - p.x) * g)
    return (reading, alt)


def truth_steady_state_given_rumor(
    p: ModelParams,
    a: Allocation,
    theta1: float,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> float:
    """Solve theta0 = truth_map(theta0; theta1) with the rumor level held fixed."""
    _check_fraction("theta1", theta1)
    if theta1 <= 0.0:
        return _clamp(p.x + (1.0 - p.x) * a.alpha1 - 1.0 / p.lam, cfg)
    if a.inspecting_mass(p.x) <= 0.0:
        # the map keeps only the biased-type term; its root is closed form
        return _clamp(p.x - 1.0 / p.lam, cfg)
    return _bisect_truth(p, a, theta1, cfg)


def _bisect_truth(p: ModelParams, a: Allocation, theta1: float, cfg: SolverConfig) -> float:
    # G(0) < 0 and G(1) > 0 whenever theta1 > 0 and someone inspects, and the
    # map is strictly concave, so [0, 1] brackets the unique positive root.
    lo, hi = 0.0, 1.0
    for _ in range(cfg.max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= cfg.tol:
            return mid
        if mid - truth_map(mid, theta1, p, a) > 0.0:
            hi = mid
        else:
            lo = mid
    raise SolverError(
        f"truth fixed point did not reach tol={cfg.tol} within {cfg.max_iter} "
        f"iterations; last bracket [{lo}, {hi}]",
        bracket=(lo, hi),
    )


def truth_steady_state(p: ModelParams, a: Allocation, cfg: SolverConfig = DEFAULT_SOLVER) -> float:
    """Steady truth prevalence under the given inspection policy.

    Within cfg.tol of the eradication threshold the degenerate fixed point is
    avoided and the no-rumor closed form is used directly.
    """
    thr = eradication_threshold(p)
    if a.alpha1 >= thr - cfg.tol:
        return _clamp(p.x + (1.0 - p.x) * a.alpha1 - 1.0 / p.lam, cfg)
    theta1 = rumor_steady_state(p, a)
    return truth_steady_state_given_rumor(p, a, theta1, cfg)


def recompose_prevalence(ss: SteadyState, p: ModelParams, a: Allocation) -> tuple[float, float]:
    """Rebuild (theta0, theta1) from the group fractions and the policy weights."""
    a0, a1 = a.rates()
    theta0 = p.x * (a0 * ss.rho_00_a + (1.0 - a0) * ss.rho_00_na) + (1.0 - p.x) * a1 * ss.rho_10_a
    theta1 = (1.0 - p.x) * (1.0 - a1) * ss.rho_11_na
    return theta0, theta1


def full_steady_state(p: ModelParams, a: Allocation, cfg: SolverConfig = DEFAULT_SOLVER) -> SteadyState:
    """Solve both prevalences and fill in the four group fractions.

    The result is verified by recomposing theta0 / theta1 from the group
    fractions; disagreement beyond solver accuracy raises SolverError.
    """
    lam = p.lam
    theta1 = rumor_steady_state(p, a)
    theta0 = truth_steady_state(p, a, cfg)
    theta = theta0 + theta1
    rho_a = lam * theta / (1.0 + lam * theta)
    ss = SteadyState(
        theta0=theta0,
        theta1=theta1,
        theta=theta,
        rho_00_a=rho_a,
        rho_10_a=rho_a,
        rho_00_na=lam * theta0 / (1.0 + lam * theta0),
        rho_11_na=lam * theta1 / (1.0 + lam * theta1),
    )
    r0, r1 = recompose_prevalence(ss, p, a)
    budget = max(1e-9, 100.0 * cfg.tol)
    if max(abs(r0 - theta0), abs(r1 - theta1)) > budget:
        raise SolverError(
            f"steady state failed recomposition: |{r0} - {theta0}|, "
            f"|{r1} - {theta1}| exceed {budget}"
        )
    return ss


def total_prevalence_map(
    theta: float,
    p: ModelParams,
    a: Allocation,
    cfg: SolverConfig = DEFAULT_SOLVER,
) -> float:
    """Self-consistency map for total prevalence, evaluated at the solved split.

    This is a consistency check, not a second solver: with (theta0, theta1)
    taken from the solved steady state, the steady total prevalence is a
    fixed point of this map.
    """
    _check_fraction("theta", theta)
    lam = p.lam
    ss = full_steady_state(p, a, cfg)
    c_ins = a.inspecting_mass(p.x)
    c_bias = p.x * (1.0 - a.alpha0)
    return (
        c_ins * lam * theta / (1.0 + lam * theta)
        + c_bias * lam * ss.theta0 / (1.0 + lam * ss.theta0)
        + ss.theta1
    )
