"""Budgeted optimization of inspection rates.

Four problems are covered, all under the budget x*alpha0 + (1-x)*alpha1 <= A
with unit inspection cost:

  * minimize_rumor          -- drive the rumor down with a uniform rate
  * maximize_truth_uniform  -- maximize truth prevalence, one shared rate
  * maximize_truth_targeted -- maximize truth prevalence, per-type rates
  * maximize_platform       -- maximize total prevalence, one shared rate

Truth prevalence is piecewise smooth in the inspection rate with a kink at
the eradication threshold and possibly two local maxima, so each scalar
problem is solved by a dense grid scan followed by golden-section
refinement of the best bracketing cell; derivative-based global search is
not safe here. Ties within 1e-10 of the optimum go to the cheapest policy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .model import (
    DEFAULT_SOLVER,
    Allocation,
    ModelParams,
    ParameterError,
    SolverConfig,
    SteadyState,
    eradication_threshold,
    rumor_steady_state,
    truth_steady_state,
)

GRID_POINTS = 2001
REFINE_XTOL = 1e-10
TIE_TOL = 1e-10
SLACK_TOL = 1e-9


class FeasibilityError(ValueError):
    """The requested allocation cannot satisfy the budget constraint."""


@dataclass(frozen=True)
class Budget:
    """Total inspection budget. Inducing inspection costs one per capita."""

    total: float
    unit_cost: float = 1.0

    def __post_init__(self):
        if not self.total >= 0.0:
            raise ParameterError(f"budget must be >= 0, got {self.total}")
        if self.unit_cost != 1.0:
            raise ParameterError("unit_cost is fixed at 1")

    def spend(self, a: Allocation, x: float) -> float:
        return a.inspecting_mass(x)


def _total(budget: "Budget | float") -> float:
    A = budget.total if isinstance(budget, Budget) else float(budget)
    if not A >= 0.0:
        raise ParameterError(f"budget must be >= 0, got {A}")
    return A


@dataclass(frozen=True)
class Thresholds:
    """Closed-form and numerically located policy thresholds.

    lambda_bar is 2 + sqrt(2 - 1/(1-x)) where defined (x <= 1/2), else None.
    eradication_interval is the lam range where, at the marginal eradication
    budget, the targeted planner prefers to let the rumor live; it is empty
    (None) iff (4-x)^2 < 12. The budget fields are filled only by
    compute_thresholds: A_lower/A_upper bound the region of budgets where the
    uniform truth planner leaves slack, A_tilde is where the platform stops
    leaving slack. None means not computed or no such region found.
    """

    alpha_prime: float
    lambda_bar: float | None
    eradication_interval: tuple[float, float] | None
    A_lower: float | None = None
    A_upper: float | None = None
    A_tilde: float | None = None


@dataclass(frozen=True)
class OptResult:
    allocation: Allocation
    objective: float
    budget_spent: float
    slack: bool
    rumor_eradicated: bool
    diagnostics: Thresholds
    notes: tuple[str, ...] = ()


@dataclass(frozen=True)
class CubicConstraint:
    """Polynomial c3*t^3 + c2*t^2 + c1*t + c0 whose positive root is theta0.

    Valid for a binding targeted budget: clearing the two denominators of the
    truth fixed-point map turns it into this cubic. With c3 = lam^2 > 0 the
    coefficient signs admit at most one sign change on the feasible set, so at
    most one positive real root exists.
    """

    c3: float
    c2: float
    c1: float
    c0: float

    def __call__(self, theta0: float) -> float:
        return ((self.c3 * theta0 + self.c2) * theta0 + self.c1) * theta0 + self.c0

    def coefficients(self) -> tuple[float, float, float, float]:
        return (self.c3, self.c2, self.c1, self.c0)

    def sign_changes(self) -> int:
        signs = [c for c in self.coefficients() if c != 0.0]
        return sum(1 for u, v in zip(signs, signs[1:]) if u * v < 0.0)


def closed_thresholds(p: ModelParams) -> Thresholds:
    """The cheap, closed-form part of the threshold bundle."""
    radicand = 2.0 - 1.0 / (1.0 - p.x) if p.x < 1.0 else -1.0
    lambda_bar = 2.0 + math.sqrt(radicand) if radicand >= 0.0 else None
    disc = (4.0 - p.x) ** 2 - 12.0
    if disc < 0.0:
        interval = None
    else:
        root = math.sqrt(disc)
        interval = ((4.0 - p.x - root) / 2.0, (4.0 - p.x + root) / 2.0)
    return Thresholds(
        alpha_prime=eradication_threshold(p),
        lambda_bar=lambda_bar,
        eradication_interval=interval,
    )


# ---------------------------------------------------------------------------
# grid machinery
# ---------------------------------------------------------------------------

def _bisect_iters(cfg: SolverConfig) -> int:
    return min(cfg.max_iter, int(math.ceil(math.log2(1.0 / cfg.tol))) + 1)


def _theta_grids(
    p: ModelParams,
    c_ins: np.ndarray,
    a0s: np.ndarray,
    a1s: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (theta0, theta1) over allocation grids.

    Mirrors the scalar branch logic of truth_steady_state so that grid scans
    and the scalar recomputation of the reported optimum agree to solver
    accuracy. Only the argmax location comes from here; reported objectives
    are always recomputed with the scalar solver.
    """
    lam = p.lam
    x = p.x
    thr = eradication_threshold(p)
    no_rumor = a1s >= thr - cfg.tol
    theta1 = np.where(no_rumor, 0.0, np.maximum(0.0, (1.0 - a1s) * (1.0 - x) - 1.0 / lam))
    closed = np.maximum(0.0, x + (1.0 - x) * a1s - 1.0 / lam)
    closed_nomass = max(0.0, x - 1.0 / lam)
    c_bias = x * (1.0 - a0s)

    lo = np.zeros_like(c_ins)
    hi = np.ones_like(c_ins)
    for _ in range(_bisect_iters(cfg)):
        mid = 0.5 * (lo + hi)
        th = mid + theta1
        g = mid - (c_ins * lam * th / (1.0 + lam * th) + c_bias * lam * mid / (1.0 + lam * mid))
        above = g > 0.0
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    root = 0.5 * (lo + hi)

    theta0 = np.where(no_rumor, closed, np.where(c_ins <= 0.0, closed_nomass, root))
    return theta0, theta1


def _golden_max(f, lo: float, hi: float, xtol: float = REFINE_XTOL) -> tuple[float, float]:
    """Golden-section maximizer on [lo, hi]; ties resolve to the smaller x."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    seen: list[tuple[float, float]] = [(lo, f(lo)), (hi, f(hi))]
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    seen += [(x1, f1), (x2, f2)]
    while b - a > xtol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
            seen.append((x1, f1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
            seen.append((x2, f2))
    # strict argmax over the probes; near ties are arbitrated by the caller,
    # where genuinely distinct maxima compete
    best = max(v for _, v in seen)
    return min(xx for xx, v in seen if v == best), best


def _snap(value: float, *anchors: float, tol: float = 1e-7) -> float:
    """Collapse refinement output onto a nearby exact candidate point.

    The scalar objective is quantized at bisection accuracy, so maxima the
    refiner places within `tol` of a cell edge are indistinguishable from the
    edge itself; genuine interior maxima sit at least a grid cell inside.
    """
    for anchor in anchors:
        if abs(value - anchor) <= tol:
            return anchor
    return value


def _pick_cheapest(candidates: list[tuple[float, float]]) -> tuple[float, float]:
    """Among (x, value) pairs, the best value; ties go to the smallest x.

    Points closer together than refinement noise (1e-9) count as the same
    policy, so within such a cluster the better value wins.
    """
    best = max(v for _, v in candidates)
    ties = sorted((xx, v) for xx, v in candidates if v >= best - TIE_TOL)
    xstar, vstar = ties[0]
    for xx, v in ties[1:]:
        if xx - ties[0][0] > 1e-9:
            break
        if v > vstar:
            xstar, vstar = xx, v
    return xstar, vstar


def _scan_uniform(
    p: ModelParams,
    amax: float,
    objective,
    vec_objective,
    cfg: SolverConfig,
    grid_points: int,
) -> tuple[float, float]:
    """Shared grid + refine protocol for the single-rate problems."""
    if amax <= 0.0:
        return 0.0, objective(0.0)
    alphas = np.linspace(0.0, amax, grid_points)
    vals = vec_objective(alphas)
    best = float(vals.max())
    i = int(np.flatnonzero(vals >= best - TIE_TOL)[0])
    cell_lo = float(alphas[max(i - 1, 0)])
    cell_hi = float(alphas[min(i + 1, grid_points - 1)])
    refined, _ = _golden_max(objective, cell_lo, cell_hi)
    refined = _snap(refined, cell_lo, cell_hi)
    candidates = [(a, objective(a)) for a in {0.0, float(alphas[i]), refined, cell_lo, cell_hi, amax}]
    astar, vstar = _pick_cheapest(candidates)
    assert vstar >= best - 2.0 * TIE_TOL, "refined optimum fell below a scanned grid value"
    return astar, vstar


# ---------------------------------------------------------------------------
# the four planning problems
# ---------------------------------------------------------------------------

def minimize_rumor(p: ModelParams, budget: "Budget | float") -> OptResult:
    """Cheapest uniform rate that minimizes rumor prevalence.

    Spending beyond the eradication threshold buys nothing, so the optimum is
    min(A, alpha_prime).
    """
    A = _total(budget)
    alpha_prime = eradication_threshold(p)
    alpha = min(A, alpha_prime)
    alloc = Allocation.uniform(alpha)
    theta1 = rumor_steady_state(p, alloc)
    return OptResult(
        allocation=alloc,
        objective=theta1,
        budget_spent=alpha,
        slack=alpha < A - SLACK_TOL,
        rumor_eradicated=theta1 == 0.0,
        diagnostics=closed_thresholds(p),
    )


def maximize_truth_uniform(
    p: ModelParams,
    budget: "Budget | float",
    cfg: SolverConfig = DEFAULT_SOLVER,
    grid_points: int = GRID_POINTS,
) -> OptResult:
    """argmax of truth prevalence over uniform alpha in [0, min(A, 1)]."""
    A = _total(budget)
    amax = min(A, 1.0)

    def objective(alpha: float) -> float:
        return truth_steady_state(p, Allocation.uniform(alpha), cfg)

    def vec_objective(alphas: np.ndarray) -> np.ndarray:
        theta0, _ = _theta_grids(p, alphas, alphas, alphas, cfg)
        return theta0

    astar, vstar = _scan_uniform(p, amax, objective, vec_objective, cfg, grid_points)
    alloc = Allocation.uniform(astar)
    return OptResult(
        allocation=alloc,
        objective=vstar,
        budget_spent=astar,
        slack=astar < amax - SLACK_TOL,
        rumor_eradicated=rumor_steady_state(p, alloc) == 0.0,
        diagnostics=closed_thresholds(p),
    )


def maximize_platform(
    p: ModelParams,
    budget: "Budget | float",
    cfg: SolverConfig = DEFAULT_SOLVER,
    grid_points: int = GRID_POINTS,
) -> OptResult:
    """Same protocol as maximize_truth_uniform, but the objective is theta0 + theta1."""
    A = _total(budget)
    amax = min(A, 1.0)

    def objective(alpha: float) -> float:
        alloc = Allocation.uniform(alpha)
        return truth_steady_state(p, alloc, cfg) + rumor_steady_state(p, alloc)

    def vec_objective(alphas: np.ndarray) -> np.ndarray:
        theta0, theta1 = _theta_grids(p, alphas, alphas, alphas, cfg)
        return theta0 + theta1

    astar, vstar = _scan_uniform(p, amax, objective, vec_objective, cfg, grid_points)
    alloc = Allocation.uniform(astar)
    return OptResult(
        allocation=alloc,
        objective=vstar,
        budget_spent=astar,
        slack=astar < amax - SLACK_TOL,
        rumor_eradicated=rumor_steady_state(p, alloc) == 0.0,
        diagnostics=closed_thresholds(p),
    )


def _binding_alpha0(A: float, x: float, a1: float) -> float:
    return min(1.0, max(0.0, (A - (1.0 - x) * a1) / x))


def maximize_truth_targeted(
    p: ModelParams,
    budget: "Budget | float",
    cfg: SolverConfig = DEFAULT_SOLVER,
    grid_points: int = GRID_POINTS,
) -> OptResult:
    """argmax of truth prevalence over per-type rates under the budget.

    While the rumor is endemic, raising either rate weakly helps, so the
    search runs along the budget-binding segment, parametrized by alpha1.
    Once the rumor is extinct alpha0 is worthless, so cheaper non-binding
    eradicating policies are added as explicit candidates. Ties go to the
    smallest spend, then the smallest alpha0.
    """
    A = _total(budget)
    x = p.x
    notes: tuple[str, ...] = ()
    if A > x:
        notes = ("budget exceeds the type-0 mass; full spend is no longer guaranteed to be optimal",)

    def objective(a: Allocation) -> float:
        return truth_steady_state(p, a, cfg)

    candidates: list[Allocation] = [Allocation.targeted(0.0, 0.0)]
    if x <= 0.0:
        candidates.append(Allocation.targeted(0.0, min(1.0, A)))
    elif x >= 1.0:
        candidates.append(Allocation.targeted(min(1.0, A), 0.0))
    else:
        lo = max(0.0, (A - x) / (1.0 - x))
        hi = min(1.0, A / (1.0 - x))
        if lo <= hi:
            a1s = np.linspace(lo, hi, grid_points)
            a0s = np.clip((A - (1.0 - x) * a1s) / x, 0.0, 1.0)
            c_ins = x * a0s + (1.0 - x) * a1s
            vals, _ = _theta_grids(p, c_ins, a0s, a1s, cfg)
            best = float(vals.max())
            # prefer large alpha1 among grid ties: cheaper overall spend never
            # suffers and eradicating ties resolve away from wasted alpha0
            i = int(np.flatnonzero(vals >= best - TIE_TOL)[-1])
            cell_lo = float(a1s[max(i - 1, 0)])
            cell_hi = float(a1s[min(i + 1, grid_points - 1)])
            refined, _ = _golden_max(
                lambda a1: objective(Allocation.targeted(_binding_alpha0(A, x, a1), a1)),
                cell_lo,
                cell_hi,
            )
            refined = _snap(refined, cell_lo, cell_hi, lo, hi)
            for a1 in {float(a1s[i]), refined, cell_lo, cell_hi, lo, hi}:
                candidates.append(Allocation.targeted(_binding_alpha0(A, x, a1), a1))
        if A >= 1.0 - x:
            candidates.append(Allocation.targeted(0.0, 1.0))

    scored = [(a, objective(a)) for a in candidates]
    best = max(v for _, v in scored)
    near = [(a, v) for a, v in scored if v >= best - TIE_TOL]
    min_spend = min(a.inspecting_mass(x) for a, _ in near)
    near = [(a, v) for a, v in near if a.inspecting_mass(x) <= min_spend + TIE_TOL]
    alloc, vstar = min(near, key=lambda av: av[0].alpha0)
    spend = alloc.inspecting_mass(x)
    return OptResult(
        allocation=alloc,
        objective=vstar,
        budget_spent=spend,
        slack=spend < A - SLACK_TOL,
        rumor_eradicated=rumor_steady_state(p, alloc) == 0.0,
        diagnostics=closed_thresholds(p),
        notes=notes,
    )


# ---------------------------------------------------------------------------
# marginal conditions
# ---------------------------------------------------------------------------

def marginal_condition_uniform(p: ModelParams, a: Allocation, ss: SteadyState) -> bool:
    """True iff truth prevalence is locally increasing in the uniform rate.

    Evaluates, at the solved steady state,
    (1 + lam*theta) * (theta0*(1-x)*(1 + lam*theta) + theta1)
        > alpha * (1-x) * (1 + lam*theta0).
    """
    if a.alpha0 != a.alpha1:
        raise ParameterError("the uniform marginal condition needs a single shared rate")
    lam = p.lam
    x = p.x
    grow = 1.0 + lam * ss.theta
    lhs = grow * (ss.theta0 * (1.0 - x) * grow + ss.theta1)
    rhs = a.alpha0 * (1.0 - x) * (1.0 + lam * ss.theta0)
    return lhs > rhs


def marginal_condition_targeted(p: ModelParams, budget: "Budget | float", ss: SteadyState) -> bool:
    """True iff shifting binding budget toward alpha1 is locally beneficial.

    Evaluates theta0 * (1 + lam*theta)^2 > A * (1 + lam*theta0) at the solved
    steady state.
    """
    A = _total(budget)
    lam = p.lam
    lhs = ss.theta0 * (1.0 + lam * ss.theta) ** 2
    rhs = A * (1.0 + lam * ss.theta0)
    return lhs > rhs


# ---------------------------------------------------------------------------
# cubic form of the targeted steady-state constraint
# ---------------------------------------------------------------------------

def _targeted_alpha1(p: ModelParams, A: float, alpha0: float) -> float:
    x = p.x
    if x >= 1.0:
        if abs(alpha0 - A) > 1e-12:
            raise FeasibilityError(f"x = 1 binds the whole budget to alpha0 = A, got alpha0={alpha0}")
        return 0.0
    a1 = (A - x * alpha0) / (1.0 - x)
    if not -1e-12 <= a1 <= 1.0 + 1e-12:
        raise FeasibilityError(
            f"alpha0={alpha0} with binding budget A={A} implies alpha1={a1} outside [0, 1]"
        )
    return min(1.0, max(0.0, a1))


def cubic_coefficients(p: ModelParams, budget: "Budget | float", alpha0: float) -> CubicConstraint:
    """Cubic whose positive root is theta0 for a binding targeted budget.

    alpha1 is implied by (A - x*alpha0)/(1-x). Multiplying the fixed-point
    identity through by (1 + lam*(theta0+theta1)) * (1 + lam*theta0) and
    collecting powers of theta0 gives, with s = A + x*(1-alpha0):

        c3 = lam^2
        c2 = lam * (2 + lam*theta1 - lam*s)
        c1 = (1 + lam*theta1) * (1 - lam*s)
        c0 = -A * lam * theta1

    At the eradication boundary (theta1 = 0) the cubic factors as theta0
    times a quadratic whose positive root is the no-rumor closed form.
    """
    A = _total(budget)
    if not 0.0 <= alpha0 <= 1.0:
        raise ParameterError(f"alpha0 must lie in [0, 1], got {alpha0}")
    alpha1 = _targeted_alpha1(p, A, alpha0)
    lam = p.lam
    theta1 = rumor_steady_state(p, Allocation.targeted(alpha0, alpha1))
    s = A + p.x * (1.0 - alpha0)
    return CubicConstraint(
        c3=lam * lam,
        c2=lam * (2.0 + lam * theta1 - lam * s),
        c1=(1.0 + lam * theta1) * (1.0 - lam * s),
        c0=-A * lam * theta1,
    )


def cubic_factored_gap(p: ModelParams, budget: "Budget | float", alpha0: float) -> float:
    """Max |difference| between the cubic's coefficients and an equivalent factored form.

    The factored expressions substitute the endemic rumor closed form
    directly, so the comparison is meaningful only while the rumor is
    endemic; nan is returned otherwise. Kept as a numerical cross-check on
    the coefficient algebra.
    """
    A = _total(budget)
    alpha1 = _targeted_alpha1(p, A, alpha0)
    cubic = cubic_coefficients(p, A, alpha0)
    if rumor_steady_state(p, Allocation.targeted(alpha0, alpha1)) <= 0.0:
        return math.nan
    lam = p.lam
    x = p.x
    b_fac = lam * (1.0 + lam - 2.0 * A * lam - 2.0 * lam * x + 2.0 * alpha0 * lam * x)
    c_fac = lam * (1.0 - A - x * (1.0 - alpha0)) * (1.0 - A * lam - lam * x + alpha0 * lam * x)
    d_fac = A * (1.0 - lam + lam * A + lam * x - alpha0 * lam * x)
    return max(abs(b_fac - cubic.c2), abs(c_fac - cubic.c1), abs(d_fac - cubic.c0))


# ---------------------------------------------------------------------------
# numeric threshold location
# ---------------------------------------------------------------------------

def _slack_region(is_slack, cap: float, scan_points: int, resolution: float) -> tuple[float | None, float | None]:
    """Boundaries of the budget region where `is_slack` holds, by scan + bisection."""
    grid = np.linspace(resolution, cap, scan_points)
    flags = [is_slack(float(A)) for A in grid]
    if not any(flags):
        return None, None

    first = flags.index(True)
    last = len(flags) - 1 - flags[::-1].index(True)

    def bisect(lo: float, hi: float, want_hi_slack: bool) -> float:
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if is_slack(mid) == want_hi_slack:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    lower = float(grid[first]) if first == 0 else bisect(float(grid[first - 1]), float(grid[first]), True)
    upper = float(grid[last]) if last == len(flags) - 1 else bisect(float(grid[last]), float(grid[last + 1]), False)
    return lower, upper


def compute_thresholds(
    p: ModelParams,
    cfg: SolverConfig = DEFAULT_SOLVER,
    resolution: float = 1e-6,
    scan_points: int = 41,
    budget_cap: float = 1.0,
) -> Thresholds:
    """Closed-form thresholds plus numerically located budget boundaries.

    A_lower / A_upper bracket the budgets at which maximize_truth_uniform
    reports slack; A_tilde is the top of the analogous region for the
    platform objective. All three are None when the corresponding slack
    region is empty within [resolution, budget_cap].
    """
    base = closed_thresholds(p)

    def planner_slack(A: float) -> bool:
        return maximize_truth_uniform(p, A, cfg).slack

    def platform_slack(A: float) -> bool:
        return maximize_platform(p, A, cfg).slack

    a_lower, a_upper = _slack_region(planner_slack, budget_cap, scan_points, resolution)
    _, a_tilde = _slack_region(platform_slack, budget_cap, scan_points, resolution)
    return replace(base, A_lower=a_lower, A_upper=a_upper, A_tilde=a_tilde)


def diversification_budget_range(
    p: ModelParams,
    cfg: SolverConfig = DEFAULT_SOLVER,
    resolution: float = 1e-4,
    scan_points: int = 41,
) -> tuple[float, float] | None:
    """Empirically located budget range where the targeted planner sets alpha0 > 0.

    The range is reported, not derived: the diffusion-rate cutoff beyond
    which no such range exists is known only existentially. Budgets are
    scanned over (0, x], the regime where full spend is guaranteed.
    """
    if p.x <= 0.0:
        return None

    def diversifies(A: float) -> bool:
        return maximize_truth_targeted(p, A, cfg).allocation.alpha0 > 1e-9

    lo, hi = _slack_region(diversifies, p.x, scan_points, resolution)
    if lo is None:
        return None
    return lo, hi
