"""Explicit solver for the coupled free-boundary competition system.

The invader u lives on the moving interval (g_front, h_front) and is zero
outside it; the native v lives on a finite window standing in for the whole
line, with constant continuation of its edge values beyond the window.
Both fields sit on one uniform grid whose nodes are integer multiples of
dx, so window growth never moves existing nodes.

One explicit first-order step advances the fronts with the flux laws

    h' =  mu * integral over (g,h) of u(x) * K1(x - h) dx
    g' = -mu * integral over (g,h) of u(x) * K1(g - x) dx

(K1 the kernel cumulative mass, which reduces the double integrals of the
boundary laws to single ones), then updates the fields from the current
state.  Nodes that the fronts newly cover enter with u = 0 and fill by
dispersal influx alone.  The nonlocal operator is bounded, so the step
restriction is grid independent; `stability_bound` gives the conservative
dt cap used by scenario validation.

The same stepping core also runs the un-reduced parameterisation
(arbitrary linear reaction coefficients); `reduce_general` maps such a
parameter set to the reduced one together with the exact field/time
scalings, and the pair of runs is compared in the test-suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.signal import oaconvolve

from .dynamics import ModelParams, validate_params
from .errors import (
    InvalidInitialU,
    InvalidInitialV,
    NonPositiveParameter,
    StabilityViolated,
    WindowTooSmall,
)
from .kernels import GridStencil, ValidatedKernel, cell_weights, grid_convolve, grid_stencil

GROSS_CLAMP = -1e-12   # undershoots below this are clamped and counted
FIELD_CAP = 10.0       # fields beyond this mean the step blew up
EXPAND_MARGIN = 2.0    # expand when a front comes within this many L0 of an edge


# -- parameter containers -------------------------------------------------

@dataclass(frozen=True)
class GeneralParams:
    """Coefficients of the un-reduced system."""

    D1: float
    D2: float
    a1: float
    b1: float
    c1: float
    a2: float
    b2: float
    c2: float
    mu_hat: float
    H0: float


@dataclass(frozen=True)
class ScalingTransform:
    """Exact map between the general and reduced solutions.

    reduced u(t, x) = u_scale * U(t / time_scale, x), likewise for v; the
    fronts carry over unscaled at matched times t = time_scale * tau.
    """

    u_scale: float
    v_scale: float
    time_scale: float


def reduce_general(general: GeneralParams) -> tuple[ModelParams, ScalingTransform]:
    """Reduce the general parameterisation to the normalised one."""
    for name in ("D1", "D2", "a1", "b1", "c1", "a2", "b2", "c2", "mu_hat", "H0"):
        val = getattr(general, name)
        if not np.isfinite(val) or val <= 0:
            raise NonPositiveParameter(f"general parameter {name} must be positive, got {val}")
    g = general
    params = ModelParams(
        d1=g.D1 / g.a1,
        d2=g.D2 / g.a1,
        gamma=g.a2 / g.a1,
        k=g.a2 * g.c1 / (g.a1 * g.b2),
        h_comp=g.a1 * g.c2 / (g.a2 * g.b1),
        mu=g.mu_hat / g.b1,
        h0=g.H0,
    )
    transform = ScalingTransform(
        u_scale=g.b1 / g.a1, v_scale=g.b2 / g.a2, time_scale=g.a1
    )
    return params, transform


def _reaction_coefficients(params) -> tuple[tuple, tuple, float, float, float]:
    """(u-reaction, v-reaction, D1, D2, front mu) for either parameter kind."""
    if isinstance(params, GeneralParams):
        return (
            (params.a1, params.b1, params.c1),
            (params.a2, params.b2, params.c2),
            params.D1,
            params.D2,
            params.mu_hat,
        )
    return (
        (1.0, 1.0, params.k),
        (params.gamma, params.gamma, params.gamma * params.h_comp),
        params.d1,
        params.d2,
        params.mu,
    )


def stability_bound(params: ModelParams) -> float:
    """Conservative explicit-step cap, independent of the grid."""
    denom = (
        params.d1
        + params.d2
        + params.gamma * (1.0 + params.h_comp + 2.0)
        + (1.0 + params.k + 2.0)
    )
    return 0.2 / denom


# -- initial profiles ------------------------------------------------------

@dataclass(frozen=True)
class Profile:
    """Named initial profile or a two-column (x, value) table."""

    kind: str  # "cosine" | "constant" | "table"
    amplitude: float = 1.0
    table: Optional[np.ndarray] = None

    @staticmethod
    def cosine(u_max: float = 1.0) -> "Profile":
        return Profile(kind="cosine", amplitude=float(u_max))

    @staticmethod
    def constant(value: float) -> "Profile":
        return Profile(kind="constant", amplitude=float(value))

    @staticmethod
    def from_table(table: np.ndarray) -> "Profile":
        return Profile(kind="table", table=np.asarray(table, dtype=float))


def _sample_u0(profile: Profile, x: np.ndarray, h0: float) -> np.ndarray:
    if profile.kind == "cosine":
        if profile.amplitude <= 0:
            raise InvalidInitialU("cosine bump amplitude must be positive")
        inside = np.abs(x) < h0
        u0 = np.where(inside, profile.amplitude * np.cos(0.5 * np.pi * x / h0), 0.0)
    elif profile.kind == "table":
        if profile.table is None or profile.table.ndim != 2 or profile.table.shape[1] != 2:
            raise InvalidInitialU("u0 table must be an (n, 2) array")
        u0 = np.interp(x, profile.table[:, 0], profile.table[:, 1], left=0.0, right=0.0)
        inside = np.abs(x) < h0
    else:
        raise InvalidInitialU(f"unsupported u0 profile {profile.kind!r}")
    if np.any(u0 < 0.0):
        raise InvalidInitialU("u0 has negative values")
    if np.any(u0[~inside] != 0.0):
        raise InvalidInitialU("u0 must vanish outside (-h0, h0)")
    if np.any(u0[inside] <= 0.0):
        raise InvalidInitialU("u0 must be strictly positive inside (-h0, h0)")
    return u0


def _sample_v0(profile: Profile, x: np.ndarray) -> np.ndarray:
    if profile.kind == "constant":
        v0 = np.full_like(x, profile.amplitude)
    elif profile.kind == "table":
        if profile.table is None or profile.table.ndim != 2 or profile.table.shape[1] != 2:
            raise InvalidInitialV("v0 table must be an (n, 2) array")
        t = profile.table
        v0 = np.interp(x, t[:, 0], t[:, 1])  # edge continuation beyond the table
    else:
        raise InvalidInitialV(f"unsupported v0 profile {profile.kind!r}")
    if np.any(v0 < 0.0) or not np.all(np.isfinite(v0)):
        raise InvalidInitialV("v0 must be nonnegative and bounded")
    return v0


# -- state -----------------------------------------------------------------

@dataclass(frozen=True)
class SimState:
    """Solver state: time, fronts, fields, grid, parameters, kernels.

    ``i0`` is the lattice index of the first node (nodes are (i0 + j) * dx),
    kept as an integer so window growth reproduces node positions exactly.
    ``clamp_count`` accumulates gross negative undershoots flushed to zero.
    """

    t: float
    g_front: float
    h_front: float
    u: np.ndarray
    v: np.ndarray
    i0: int
    dx: float
    params: object            # ModelParams or GeneralParams
    j1: ValidatedKernel
    j2: ValidatedKernel
    st1: GridStencil
    st2: GridStencil
    clamp_count: int = 0
    window_growths: int = 0

    @property
    def x(self) -> np.ndarray:
        return (self.i0 + np.arange(self.u.size)) * self.dx

    @property
    def x_min(self) -> float:
        return self.i0 * self.dx

    @property
    def x_max(self) -> float:
        return (self.i0 + self.u.size - 1) * self.dx

    @property
    def support_radius_max(self) -> float:
        return max(self.j1.support_radius, self.j2.support_radius)

    @property
    def h0(self) -> float:
        if isinstance(self.params, GeneralParams):
            return self.params.H0
        return self.params.h0


def init_state(
    params,
    j1: ValidatedKernel,
    j2: ValidatedKernel,
    u0_profile: Profile,
    v0_profile: Profile,
    dx: float,
    window_pad: float,
) -> SimState:
    """Build the initial state on a symmetric window around the origin.

    The window spans at least [-h0 - window_pad, h0 + window_pad] and is
    widened immediately if that leaves a front within the expansion margin.
    """
    if isinstance(params, ModelParams):
        validate_params(params)
        h0 = params.h0
    elif isinstance(params, GeneralParams):
        reduce_general(params)  # validates positivity
        h0 = params.H0
    else:
        raise TypeError("params must be ModelParams or GeneralParams")
    if dx <= 0 or not np.isfinite(dx):
        raise ValueError("dx must be positive")
    if window_pad <= 0 or not np.isfinite(window_pad):
        raise ValueError("window_pad must be positive")

    n_half = int(math.ceil((h0 + window_pad) / dx))
    i0 = -n_half
    x = (i0 + np.arange(2 * n_half + 1)) * dx
    u0 = _sample_u0(u0_profile, x, h0)
    v0 = _sample_v0(v0_profile, x)
    state = SimState(
        t=0.0,
        g_front=-h0,
        h_front=h0,
        u=u0,
        v=v0,
        i0=i0,
        dx=dx,
        params=params,
        j1=j1,
        j2=j2,
        st1=grid_stencil(j1, dx),
        st2=grid_stencil(j2, dx),
    )
    return _ensure_window(state)


def _ensure_window(state: SimState) -> SimState:
    """Grow the window so both fronts keep EXPAND_MARGIN * L0 of clearance."""
    margin = EXPAND_MARGIN * state.support_radius_max
    grow_left = state.g_front - state.x_min < margin
    grow_right = state.x_max - state.h_front < margin
    if not (grow_left or grow_right):
        return state
    n = state.u.size
    chunk = max(n // 2, 4 * max(state.st1.half, state.st2.half), 8)
    u, v, i0 = state.u, state.v, state.i0
    if grow_left:
        u = np.concatenate([np.zeros(chunk), u])
        v = np.concatenate([np.full(chunk, v[0]), v])
        i0 -= chunk
    if grow_right:
        u = np.concatenate([u, np.zeros(chunk)])
        v = np.concatenate([v, np.full(chunk, v[-1])])
    return replace(state, u=u, v=v, i0=i0, window_growths=state.window_growths + 1)


# -- dynamics --------------------------------------------------------------

def front_speeds(state: SimState) -> tuple[float, float]:
    """(g_rate, h_rate): always g_rate <= 0 <= h_rate."""
    _, _, _, _, mu = _reaction_coefficients(state.params)
    if mu == 0.0:
        return 0.0, 0.0
    x, dx = state.x, state.dx
    g, h = state.g_front, state.h_front
    j = np.nonzero(state.u > 0.0)[0]
    if j.size == 0:
        return 0.0, 0.0
    lo = max(int(j[0]) - 1, 0)
    hi = min(int(j[-1]) + 2, x.size)
    xs = x[lo:hi]
    us = state.u[lo:hi]
    w = cell_weights(xs, dx, g, h)
    h_rate = mu * float(np.dot(w * us, np.asarray(state.j1.cdf(xs - h))))
    g_rate = -mu * float(np.dot(w * us, np.asarray(state.j1.cdf(g - xs))))
    return g_rate, h_rate


def step(state: SimState, dt: float) -> SimState:
    """One explicit step: advance fronts, then both fields, then the window."""
    if dt <= 0 or not np.isfinite(dt):
        raise ValueError("dt must be positive")
    ru, rv, D1, D2, _ = _reaction_coefficients(state.params)
    x, dx = state.x, state.dx
    u, v = state.u, state.v
    g, h = state.g_front, state.h_front

    g_rate, h_rate = front_speeds(state)
    g_new = g + dt * g_rate
    h_new = h + dt * h_rate

    cov = cell_weights(x, dx, g, h) / dx
    conv_u = grid_convolve(u * cov, state.st1)
    half2 = state.st2.half
    v_ext = np.concatenate([np.full(half2, v[0]), v, np.full(half2, v[-1])])
    if v_ext.size * (2 * half2 + 1) > 200_000:
        conv_v = oaconvolve(v_ext, state.st2.masses, mode="valid")
    else:
        conv_v = np.convolve(v_ext, state.st2.masses, mode="valid")

    a1, b1, c1 = ru
    a2, b2, c2 = rv
    u_new = u + dt * (D1 * (conv_u - u) + u * (a1 - b1 * u - c1 * v))
    v_new = v + dt * (D2 * (conv_v - v) + v * (a2 - b2 * v - c2 * u))
    u_new = np.where((x > g_new) & (x < h_new), u_new, 0.0)

    t_new = state.t + dt
    clamps = state.clamp_count
    for field in (u_new, v_new):
        top = field.max(initial=0.0)
        if not np.isfinite(top) or top > FIELD_CAP or not np.all(np.isfinite(field)):
            raise StabilityViolated(
                f"field left [{GROSS_CLAMP}, {FIELD_CAP}] at t={t_new}", t=t_new
            )
        neg = field < 0.0
        if np.any(neg):
            clamps += int(np.count_nonzero(field < GROSS_CLAMP))
            np.copyto(field, 0.0, where=neg)

    new_state = replace(
        state,
        t=t_new,
        g_front=g_new,
        h_front=h_new,
        u=u_new,
        v=v_new,
        clamp_count=clamps,
    )
    return _ensure_window(new_state)


# -- run loop ---------------------------------------------------------------

@dataclass
class TimeSeries:
    t: np.ndarray
    g_front: np.ndarray
    h_front: np.ndarray
    mass_u: np.ndarray
    sup_u: np.ndarray
    v_dev_L: np.ndarray
    sup_v: np.ndarray
    metrics_L: float


@dataclass
class RunResult:
    series: TimeSeries
    profiles: list  # (t, x, u, v) tuples
    final_state: SimState


def integrate_u(state: SimState) -> float:
    """Mass of u over the front interval."""
    w = cell_weights(state.x, state.dx, state.g_front, state.h_front)
    return float(np.dot(w, state.u))


def v_deviation(state: SimState, L: float) -> float:
    """Integral of |v - 1| over [-L, L]."""
    if L > min(-state.x_min, state.x_max):
        raise WindowTooSmall(f"[-{L}, {L}] exceeds the window [{state.x_min}, {state.x_max}]")
    w = cell_weights(state.x, state.dx, -L, L)
    return float(np.dot(w, np.abs(state.v - 1.0)))


def window_leakage(state: SimState) -> dict:
    """Far-field closure diagnostics.

    ``front_mass_outside``: J2 mass beyond the window seen from each front
    (zero while the containment invariant holds).  ``edge_variation``: how
    far v is from constant within one support radius of each window edge,
    a first-order bound on the constant-continuation error there.
    """
    R2 = state.j2.support_radius
    cdf2 = state.j2.cdf
    left = float(np.asarray(cdf2(state.x_min - state.g_front)))
    right = float(1.0 - np.asarray(cdf2(state.x_max - state.h_front)))
    m = max(int(math.ceil(R2 / state.dx)), 1) + 1
    m = min(m, state.v.size)
    lv = state.v[:m]
    rv_ = state.v[-m:]
    variation = max(float(lv.max() - lv.min()), float(rv_.max() - rv_.min()))
    return {
        "front_mass_outside_left": left,
        "front_mass_outside_right": right,
        "edge_variation": variation,
    }


def run(
    state: SimState,
    T: float,
    dt: float,
    snapshot_every: float,
    metrics_L: Optional[float] = None,
    profile_every: Optional[float] = None,
) -> RunResult:
    """Advance the state to time T, recording a metrics row every
    snapshot_every time units (plus the initial and final instants).

    Full (x, u, v) profiles are kept at the first and last snapshot, and at
    multiples of profile_every when given.  Deterministic for fixed inputs.
    """
    if T < 0 or not np.isfinite(T):
        raise ValueError("T must be nonnegative and finite")
    if snapshot_every <= 0:
        raise ValueError("snapshot_every must be positive")
    if metrics_L is None:
        metrics_L = min(2.0 * state.h0, min(-state.x_min, state.x_max))
    v_deviation(state, metrics_L)  # raises WindowTooSmall up front

    rows = {k: [] for k in ("t", "g", "h", "mass", "sup_u", "v_dev", "sup_v")}
    profiles = []

    def record(s: SimState):
        rows["t"].append(s.t)
        rows["g"].append(s.g_front)
        rows["h"].append(s.h_front)
        rows["mass"].append(integrate_u(s))
        rows["sup_u"].append(float(s.u.max(initial=0.0)))
        rows["v_dev"].append(v_deviation(s, metrics_L))
        rows["sup_v"].append(float(s.v.max(initial=0.0)))

    def keep_profile(s: SimState):
        profiles.append((s.t, s.x.copy(), s.u.copy(), s.v.copy()))

    record(state)
    keep_profile(state)
    next_snap = snapshot_every
    next_profile = profile_every if profile_every else None

    while state.t < T - 1e-12 * max(T, 1.0):
        state = step(state, min(dt, T - state.t))
        if state.t >= next_snap - 0.5 * dt and state.t < T - 1e-12 * max(T, 1.0):
            record(state)
            while next_snap <= state.t + 0.5 * dt:
                next_snap += snapshot_every
            if next_profile is not None and state.t >= next_profile - 0.5 * dt:
                keep_profile(state)
                while next_profile <= state.t + 0.5 * dt:
                    next_profile += profile_every

    if T > 0:
        record(state)
        keep_profile(state)

    series = TimeSeries(
        t=np.array(rows["t"]),
        g_front=np.array(rows["g"]),
        h_front=np.array(rows["h"]),
        mass_u=np.array(rows["mass"]),
        sup_u=np.array(rows["sup_u"]),
        v_dev_L=np.array(rows["v_dev"]),
        sup_v=np.array(rows["sup_v"]),
        metrics_L=metrics_L,
    )
    return RunResult(series=series, profiles=profiles, final_state=state)
