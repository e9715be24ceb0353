"""Spatially homogeneous skeleton of the competition model.

Covers the plain two-species ODE

    u' = u (1 - u - k v),      v' = gamma v (1 - v - h_comp u),

its equilibria and competition-case labels, the quadratic F(s) whose root
structure on [0, 1] splits parameter space into the clean-extinction class
(theta1) and the class admitting an exceptional plateau (theta2), the
plateau abscissa x_*, the alternating bound iteration used on the
spreading side, and the boundary vector-field inequalities of the
invariant rectangles used on the vanishing side.

The reaction coefficient is called ``h_comp`` throughout: the plain symbol
h is reserved for the right front position in the field model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    AssumptionViolated,
    InvalidSigma,
    NotInTheta2,
    StepTooLarge,
)

THETA1 = "theta1"
THETA2 = "theta2"
INAPPLICABLE = "inapplicable"

CASE_WEAK = "weak"
CASE_U_STRONG = "u_strong"
CASE_V_STRONG = "v_strong"
CASE_STRONG = "strong"
CASE_BOUNDARY = "boundary_case"

ROOT_MEMBERSHIP_TOL = 1e-12  # closed tolerance for root-in-[0,1] membership


@dataclass(frozen=True)
class ModelParams:
    """The positive constants of the reduced model.

    ``mu`` may be zero (frozen fronts); everything else must be strictly
    positive.  ``h_comp`` is the competition pressure of u on v; ``k`` the
    pressure of v on u.
    """

    d1: float
    d2: float
    k: float
    h_comp: float
    gamma: float
    mu: float
    h0: float

    @property
    def d1_tilde(self) -> float:
        return self.d1 + self.k - 1.0


def validate_params(params: ModelParams) -> ModelParams:
    for name in ("d1", "d2", "k", "h_comp", "gamma", "h0"):
        val = getattr(params, name)
        if not np.isfinite(val) or val <= 0:
            raise ValueError(f"parameter {name} must be strictly positive, got {val}")
    if not np.isfinite(params.mu) or params.mu < 0:
        raise ValueError(f"parameter mu must be nonnegative, got {params.mu}")
    return params


@dataclass(frozen=True)
class EquilibriumSet:
    R0: tuple[float, float]
    R1: tuple[float, float]
    R2: tuple[float, float]
    R_star: Optional[tuple[float, float]]
    competition_case: str


def equilibria_and_class(params: ModelParams) -> EquilibriumSet:
    """All equilibria of the plain ODE and the competition-case label.

    Depends only on (k, h_comp).  The interior equilibrium exists exactly
    when k and h_comp sit on the same side of 1.
    """
    k, h = params.k, params.h_comp
    if k == 1.0 or h == 1.0:
        case = CASE_BOUNDARY
    elif max(k, h) < 1.0:
        case = CASE_WEAK
    elif k < 1.0 < h:
        case = CASE_U_STRONG
    elif h < 1.0 < k:
        case = CASE_V_STRONG
    else:
        case = CASE_STRONG

    r_star = None
    if max(k, h) < 1.0 or min(k, h) > 1.0:
        denom = 1.0 - h * k
        r_star = ((1.0 - k) / denom, (1.0 - h) / denom)
    return EquilibriumSet(
        R0=(0.0, 0.0), R1=(1.0, 0.0), R2=(0.0, 1.0), R_star=r_star, competition_case=case
    )


@dataclass(frozen=True)
class OdeTrajectory:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def final(self) -> tuple[float, float]:
        return float(self.u[-1]), float(self.v[-1])


def _rhs(u, v, k, h, gamma):
    return u * (1.0 - u - k * v), gamma * v * (1.0 - v - h * u)


def ode_trajectory(
    params: ModelParams, init: tuple[float, float], T: float, dt: float
) -> OdeTrajectory:
    """Classical fourth-order one-step integration of the plain ODE.

    Nonnegativity is enforced by flushing below-zero undershoots to exact
    zero; a state escaping ten times the invariant box raises StepTooLarge.
    """
    if dt <= 0 or not np.isfinite(dt):
        raise ValueError("dt must be positive")
    if T < 0 or not np.isfinite(T):
        raise ValueError("T must be nonnegative and finite")
    u0, v0 = float(init[0]), float(init[1])
    if u0 < 0 or v0 < 0:
        raise ValueError("initial data must be nonnegative")

    k, h, gamma = params.k, params.h_comp, params.gamma
    cap_u = 10.0 * max(1.0, u0)
    cap_v = 10.0 * max(1.0, v0)
    n = int(math.ceil(T / dt)) if T > 0 else 0
    ts = np.empty(n + 1)
    us = np.empty(n + 1)
    vs = np.empty(n + 1)
    ts[0], us[0], vs[0] = 0.0, u0, v0
    t, u, v = 0.0, u0, v0
    for i in range(1, n + 1):
        step = min(dt, T - t)
        k1u, k1v = _rhs(u, v, k, h, gamma)
        k2u, k2v = _rhs(u + 0.5 * step * k1u, v + 0.5 * step * k1v, k, h, gamma)
        k3u, k3v = _rhs(u + 0.5 * step * k2u, v + 0.5 * step * k2v, k, h, gamma)
        k4u, k4v = _rhs(u + step * k3u, v + step * k3v, k, h, gamma)
        u = u + step / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        v = v + step / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        t += step
        # Escape is judged on the raw update: clipping must not mask a
        # gross undershoot caused by an oversized step.
        if (
            not (np.isfinite(u) and np.isfinite(v))
            or u > cap_u
            or v > cap_v
            or u < -cap_u
            or v < -cap_v
        ):
            raise StepTooLarge(f"state ({u}, {v}) escaped the invariant box at t={t}")
        if u < 0.0:
            u = 0.0
        if v < 0.0:
            v = 0.0
        ts[i], us[i], vs[i] = t, u, v
    return OdeTrajectory(t=ts, u=us, v=vs)


# -- F(s) and the theta classification -----------------------------------

@dataclass(frozen=True)
class ThetaReport:
    a: float
    b: float
    c: float
    d1_tilde: float
    k: float
    verdict_roots: str
    verdict_closed_form: str
    sufficient_condition_hit: Optional[str]
    roots_in_unit_interval: tuple[float, ...]
    x_star: Optional[float]
    discriminant: float

    def to_record(self) -> dict:
        """Flat key-value record for JSON output."""
        rec = {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "d1_tilde": self.d1_tilde,
            "k": self.k,
            "verdict_roots": self.verdict_roots,
            "verdict_closed_form": self.verdict_closed_form,
            "sufficient_condition_hit": self.sufficient_condition_hit,
            "roots_in_unit_interval": list(self.roots_in_unit_interval),
            "x_star": self.x_star,
            "discriminant": self.discriminant,
        }
        if self.a < 0:
            rec["closed_form_peak_position"] = self.b / (-2.0 * self.a)
            if self.a <= self.c:
                rec["closed_form_lower_edge"] = math.sqrt(self.c / self.a)
        return rec


def f_coefficients(params: ModelParams) -> tuple[float, float, float]:
    g, h, d2 = params.gamma, params.h_comp, params.d2
    dt1 = params.d1_tilde
    a = g * (1.0 - h * params.k)
    b = dt1 * g * h - g * (1.0 - h * params.k) - d2
    c = -dt1 * g * h
    return a, b, c


def f_value(params: ModelParams, s: float) -> float:
    a, b, c = f_coefficients(params)
    return (a * s + b) * s + c


def _quadratic_roots_unit_interval(a: float, b: float, c: float) -> tuple[float, ...]:
    """Real roots of a s^2 + b s + c inside [0, 1], stably computed.

    Near-degenerate leading coefficients fall back to the linear solve;
    discriminants within a rounding band of zero count as a double root.
    """
    scale = max(abs(b), abs(c))
    roots: list[float]
    if abs(a) < 1e-12 * max(scale, 1e-300):
        roots = [] if b == 0.0 else [-c / b]
    else:
        disc = b * b - 4.0 * a * c
        band = 64.0 * np.finfo(float).eps * (b * b + abs(4.0 * a * c))
        if disc < -band:
            roots = []
        elif disc <= band:
            roots = [b / (-2.0 * a)]
        else:
            q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
            roots = sorted({q / a, c / q} if q != 0.0 else {0.0})
    keep = tuple(
        r for r in sorted(roots) if -ROOT_MEMBERSHIP_TOL <= r <= 1.0 + ROOT_MEMBERSHIP_TOL
    )
    return keep


def theta_classify(params: ModelParams) -> ThetaReport:
    """Classify the parameter tuple by the root structure of F on [0, 1].

    Two independent verdicts are produced: explicit root solving, and the
    closed-form criterion  a <= c  and  sqrt(c/a) <= b/(-2a) <= 1  (valid
    only when d1 + k - 1 > 0, otherwise marked inapplicable).
    """
    a, b, c = f_coefficients(params)
    dt1 = params.d1_tilde
    roots = _quadratic_roots_unit_interval(a, b, c)
    verdict_roots = THETA2 if roots else THETA1

    if dt1 > 0.0:
        if a <= c:
            peak = b / (-2.0 * a)
            inside = math.sqrt(c / a) <= peak <= 1.0
            verdict_closed = THETA2 if inside else THETA1
        else:
            verdict_closed = THETA1
    else:
        verdict_closed = INAPPLICABLE

    hit = None
    if dt1 > 0.0:
        if params.d1 >= 1.0:
            hit = "d1_ge_1"
        elif params.k * params.h_comp <= 1.0 + params.d2 / params.gamma:
            hit = "kh_small"

    disc = b * b - 4.0 * a * c
    x_star = roots[0] if roots else None
    return ThetaReport(
        a=a,
        b=b,
        c=c,
        d1_tilde=dt1,
        k=params.k,
        verdict_roots=verdict_roots,
        verdict_closed_form=verdict_closed,
        sufficient_condition_hit=hit,
        roots_in_unit_interval=roots,
        x_star=x_star,
        discriminant=disc,
    )


def x_star(report: ThetaReport) -> float:
    """Smallest root of F in [0, 1]; only defined for theta2 tuples.

    The plateau level k*x_star - d1_tilde of the exceptional pattern is
    forced positive whenever this regime is reachable; a violation marks
    the tuple as outside it.
    """
    if report.verdict_roots != THETA2 or not report.roots_in_unit_interval:
        raise NotInTheta2("x_star is only defined when F has a root in [0, 1]")
    root = report.roots_in_unit_interval[0]
    if report.k * root - report.d1_tilde <= 0.0:
        raise AssumptionViolated(
            f"k*x_star - d1_tilde = {report.k * root - report.d1_tilde} is not positive"
        )
    return root


def plateau_value(report: ThetaReport) -> float:
    """Invader plateau level k*x_star - d1_tilde of the exceptional pattern."""
    return report.k * x_star(report) - report.d1_tilde


# -- alternating bound iteration (spreading side) ------------------------

@dataclass(frozen=True)
class BoundIteration:
    lower_u: np.ndarray
    upper_v: np.ndarray
    upper_u: Optional[np.ndarray]
    lower_v: Optional[np.ndarray]
    outcome: str                    # "u_dominance" | "coexistence_limits"
    dominance_step: Optional[int]   # 1-based step j with h_comp*lower_u[j] >= 1
    limits: Optional[tuple[float, float]]


def attractor_bounds(k: float, h_comp: float, j_max: int) -> BoundIteration:
    """Alternating bounds u_1 = 1-k, v_{j+1} = 1 - h*u_j, u_{j+1} = 1 - k*v_{j+1}.

    Requires k < 1.  Stops with u-dominance as soon as h_comp*u_j >= 1;
    otherwise reports the coexistence limits ((1-k)/(1-hk), (1-h)/(1-hk)).
    The mirrored upper/lower pair exists only when h_comp < 1.
    """
    if not (0.0 < k < 1.0):
        raise AssumptionViolated(f"the bound iteration needs 0 < k < 1, got k={k}")
    if h_comp <= 0.0:
        raise AssumptionViolated(f"h_comp must be positive, got {h_comp}")
    if j_max < 1:
        raise ValueError("j_max must be at least 1")

    lower_u = [1.0 - k]
    upper_v = [1.0]  # trivial first bound
    dominance = None
    for j in range(1, j_max):
        if h_comp * lower_u[-1] >= 1.0:
            dominance = j
            break
        v_next = 1.0 - h_comp * lower_u[-1]
        lower_u.append(1.0 - k * v_next)
        upper_v.append(v_next)
    else:
        if h_comp * lower_u[-1] >= 1.0:
            dominance = j_max

    upper_u = lower_v = None
    if h_comp < 1.0:
        lv = [1.0 - h_comp]
        uu = [1.0]  # trivial first bound
        for _ in range(1, j_max):
            u_next = 1.0 - k * lv[-1]
            uu.append(u_next)
            lv.append(1.0 - h_comp * u_next)
        upper_u = np.array(uu)
        lower_v = np.array(lv)

    if dominance is not None:
        outcome, limits = "u_dominance", None
    else:
        denom = 1.0 - h_comp * k
        outcome = "coexistence_limits"
        limits = ((1.0 - k) / denom, (1.0 - h_comp) / denom)
    return BoundIteration(
        lower_u=np.array(lower_u),
        upper_v=np.array(upper_v),
        upper_u=upper_u,
        lower_v=lower_v,
        outcome=outcome,
        dominance_step=dominance,
        limits=limits,
    )


# -- invariant rectangles (vanishing side) --------------------------------

@dataclass(frozen=True)
class InvariantRegion:
    sigma: float
    epsilon: float
    M_sigma: float


def make_invariant_region(
    params: ModelParams, sigma: float, epsilon_cap: float
) -> InvariantRegion:
    """Rectangle {0 <= p < M_sigma, q < sigma} in the (u, 1-v) plane.

    sigma must sit strictly inside (d1_tilde/k, 1); the margin epsilon is
    min(k*sigma - d1_tilde, epsilon_cap).
    """
    dt1 = params.d1_tilde
    if dt1 <= 0.0:
        raise AssumptionViolated("invariant rectangles need d1 + k - 1 > 0")
    lo = dt1 / params.k
    if not (lo < sigma < 1.0):
        raise InvalidSigma(f"sigma={sigma} outside ({lo}, 1)")
    if epsilon_cap <= 0.0:
        raise ValueError("epsilon_cap must be positive")
    eps = min(params.k * sigma - dt1, epsilon_cap)
    return InvariantRegion(sigma=sigma, epsilon=eps, M_sigma=params.k * sigma - dt1 + eps)


@dataclass(frozen=True)
class RegionVerdict:
    holds: bool
    u_margin: float
    v_margin: float


def invariant_region_check(
    params: ModelParams,
    region: InvariantRegion,
    m1_bound: float,
    m2_bound: float,
) -> RegionVerdict:
    """Evaluate the two boundary vector-field bounds of the rectangle.

    On the face {p = M_sigma, q <= sigma} the u-flow is bounded by
    m1_bound - M_sigma*epsilon; on {p <= M_sigma, q = sigma} the
    (1-v)-flow by m2_bound + (1-sigma)*gamma*h_comp*epsilon + F(sigma).
    The rectangle is invariant when both bounds are strictly negative.
    """
    dt1 = params.d1_tilde
    if dt1 <= 0.0:
        raise AssumptionViolated("invariant rectangles need d1 + k - 1 > 0")
    if m1_bound < 0.0 or m2_bound < 0.0:
        raise ValueError("forcing bounds must be nonnegative")
    lo = dt1 / params.k
    if not (lo < region.sigma < 1.0):
        raise InvalidSigma(f"sigma={region.sigma} outside ({lo}, 1)")

    u_margin = m1_bound - region.M_sigma * region.epsilon
    v_margin = (
        m2_bound
        + (1.0 - region.sigma) * params.gamma * params.h_comp * region.epsilon
        + f_value(params, region.sigma)
    )
    return RegionVerdict(holds=(u_margin < 0.0 and v_margin < 0.0), u_margin=u_margin, v_margin=v_margin)
