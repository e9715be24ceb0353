"""Dispersal kernels: validated densities, cumulative mass, grid quadrature.

A dispersal kernel is an even, nonnegative, bounded probability density
with a strictly positive value at the origin and a finite declared support
radius.  Every downstream consumer (the interval eigensolver, the field
convolutions, the front flux laws) sees kernels only through this module,
so validation, the cumulative-mass function and the discrete stencil
construction are centralised here.

Quadrature convention: node j owns the cell [x_j - dx/2, x_j + dx/2].  An
integral over an interval weights each node by the length of its cell that
the interval covers, which reproduces the composite trapezoid rule when
the interval ends on nodes and stays exact for piecewise-constant
integrands when it does not.  Discrete stencils are renormalised to exact
unit mass so that convolving a constant field returns that constant to
rounding accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.signal import oaconvolve
from scipy.special import erf

from .errors import (
    AsymmetricKernel,
    GridMismatch,
    NegativeDensity,
    ZeroAtOrigin,
    ZeroMass,
)

# Stencil cells whose density falls below this fraction of the peak are
# truncated from convolutions.
TAIL_FLOOR = 1e-12

# Relative tolerance for the symmetry probe of tabulated kernels.
SYMMETRY_TOL = 1e-12

CLOSED_FORMS = ("uniform", "triangular", "truncated_gaussian")


@dataclass(frozen=True)
class KernelSpec:
    """Declarative kernel description, prior to validation.

    ``form`` is one of ``uniform``, ``triangular``, ``truncated_gaussian``
    or ``tabulated``.  Closed forms carry a support radius ``L0`` (and the
    gaussian a scale ``sigma``); tabulated kernels carry an (n, 2) table of
    (x, density) samples with strictly increasing x.
    """

    form: str
    L0: float | None = None
    sigma: float | None = None
    table: np.ndarray | None = None

    @staticmethod
    def uniform(L0: float) -> "KernelSpec":
        return KernelSpec(form="uniform", L0=float(L0))

    @staticmethod
    def triangular(L0: float) -> "KernelSpec":
        return KernelSpec(form="triangular", L0=float(L0))

    @staticmethod
    def truncated_gaussian(sigma: float, L0: float) -> "KernelSpec":
        return KernelSpec(form="truncated_gaussian", L0=float(L0), sigma=float(sigma))

    @staticmethod
    def tabulated(table: np.ndarray) -> "KernelSpec":
        return KernelSpec(form="tabulated", table=np.asarray(table, dtype=float))


@dataclass(frozen=True)
class ValidatedKernel:
    """A kernel that passed validation, with density and cumulative mass.

    ``evaluate`` is the density (1/length), ``cdf`` the cumulative mass in
    [0, 1]; both accept scalars or arrays.  ``renorm_factor`` records the
    factor applied to bring a tabulated kernel to unit mass (1.0 for closed
    forms).
    """

    form: str
    support_radius: float
    evaluate: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    cdf: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    renorm_factor: float = 1.0
    unit_mass_tolerance: float = 1e-12


@dataclass(frozen=True)
class GridStencil:
    """Discrete kernel at spacing dx: per-cell masses with exact unit sum.

    ``masses[k]`` is the mass the kernel assigns to the cell around offset
    (k - half) * dx; ``cover[k]`` is the length of that cell inside the
    support; ``densities = masses / cover``.  ``mass_correction`` is the
    raw discrete mass divided out during normalisation.
    """

    dx: float
    half: int
    masses: np.ndarray
    cover: np.ndarray
    densities: np.ndarray
    mass_correction: float


def _phi(z):
    """Standard normal CDF."""
    return 0.5 * (1.0 + erf(z / math.sqrt(2.0)))


def _closed_form(spec: KernelSpec) -> ValidatedKernel:
    L0 = spec.L0
    if L0 is None or not np.isfinite(L0) or L0 <= 0:
        raise ValueError(f"kernel form {spec.form!r} needs a support radius L0 > 0")

    if spec.form == "uniform":
        height = 0.5 / L0

        def ev(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x) <= L0, height, 0.0)

        def cdf(s):
            s = np.asarray(s, dtype=float)
            return np.clip((s + L0) / (2.0 * L0), 0.0, 1.0)

    elif spec.form == "triangular":

        def ev(x):
            x = np.asarray(x, dtype=float)
            return np.maximum(0.0, 1.0 - np.abs(x) / L0) / L0

        def cdf(s):
            s = np.asarray(s, dtype=float)
            s = np.clip(s, -L0, L0)
            left = (s + L0) ** 2 / (2.0 * L0 * L0)
            right = 1.0 - (L0 - s) ** 2 / (2.0 * L0 * L0)
            return np.where(s <= 0.0, left, right)

    elif spec.form == "truncated_gaussian":
        sig = spec.sigma
        if sig is None or not np.isfinite(sig) or sig <= 0:
            raise ValueError("truncated_gaussian needs sigma > 0")
        plo = _phi(-L0 / sig)
        span = _phi(L0 / sig) - plo
        norm = sig * math.sqrt(2.0 * math.pi) * span

        def ev(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x) <= L0, np.exp(-0.5 * (x / sig) ** 2) / norm, 0.0)

        def cdf(s):
            s = np.asarray(s, dtype=float)
            s = np.clip(s, -L0, L0)
            return np.clip((_phi(s / sig) - plo) / span, 0.0, 1.0)

    else:  # pragma: no cover - guarded by caller
        raise ValueError(f"unknown kernel form {spec.form!r}")

    return ValidatedKernel(form=spec.form, support_radius=float(L0), evaluate=ev, cdf=cdf)


def _tabulated(spec: KernelSpec, grid_resolution: float) -> ValidatedKernel:
    table = spec.table
    if table is None:
        raise ValueError("tabulated kernel needs a sample table")
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 2:
        raise ValueError("kernel table must be an (n, 2) array with n >= 2")
    xs, ys = table[:, 0].copy(), table[:, 1].copy()
    if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(ys)):
        raise ValueError("kernel table contains non-finite entries")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("kernel table x values must be strictly increasing")

    peak = float(ys.max(initial=0.0))
    if np.any(ys < -SYMMETRY_TOL * max(peak, 1.0)):
        raise NegativeDensity("tabulated kernel has negative density samples")
    ys = np.maximum(ys, 0.0)

    radius = float(max(abs(xs[0]), abs(xs[-1])))
    if radius <= 0:
        raise ValueError("tabulated kernel has empty support")

    def raw(x):
        return np.interp(np.asarray(x, dtype=float), xs, ys, left=0.0, right=0.0)

    # Symmetry probe on the sample abscissae, their mirrors and midpoints.
    probes = np.unique(np.concatenate([xs, -xs, 0.5 * (xs[1:] + xs[:-1])]))
    if grid_resolution > 0:
        n_extra = int(min(4096, 2 * radius / grid_resolution)) + 1
        probes = np.unique(np.concatenate([probes, np.linspace(-radius, radius, n_extra)]))
    asym = np.max(np.abs(raw(probes) - raw(-probes)), initial=0.0)
    if asym > SYMMETRY_TOL * max(peak, 1e-300):
        raise AsymmetricKernel(f"tabulated kernel asymmetric by {asym:.3e}")

    if raw(0.0) <= 0.0:
        raise ZeroAtOrigin("tabulated kernel density at the origin is not positive")

    mass = float(np.trapezoid(ys, xs))
    if mass <= 1e-12:
        raise ZeroMass(f"tabulated kernel mass {mass:.3e} is numerically zero")
    factor = 1.0 / mass
    ys_n = ys * factor

    def ev(x):
        return np.interp(np.asarray(x, dtype=float), xs, ys_n, left=0.0, right=0.0)

    cum = np.concatenate([[0.0], np.cumsum(0.5 * (ys_n[1:] + ys_n[:-1]) * np.diff(xs))])
    cum /= cum[-1]  # exact 1 at the right edge despite rounding

    def cdf(s):
        return np.clip(np.interp(np.asarray(s, dtype=float), xs, cum, left=0.0, right=1.0), 0.0, 1.0)

    return ValidatedKernel(
        form="tabulated",
        support_radius=radius,
        evaluate=ev,
        cdf=cdf,
        renorm_factor=factor,
    )


def validate_kernel(spec: KernelSpec, grid_resolution: float) -> ValidatedKernel:
    """Validate a kernel spec and return the usable kernel.

    Closed forms are exact by construction; tabulated kernels are checked
    for symmetry, nonnegativity, positive origin value and nonzero mass,
    and are renormalised to unit mass (`renorm_factor` reports the factor).
    """
    if grid_resolution <= 0 or not np.isfinite(grid_resolution):
        raise ValueError("grid_resolution must be positive")
    if spec.form in CLOSED_FORMS:
        return _closed_form(spec)
    if spec.form == "tabulated":
        return _tabulated(spec, grid_resolution)
    raise ValueError(f"unknown kernel form {spec.form!r}")


def kernel_cdf(kernel: ValidatedKernel, s) -> np.ndarray | float:
    """Cumulative mass of the kernel up to s; clamps to {0, 1} outside support."""
    out = kernel.cdf(s)
    if np.ndim(s) == 0:
        return float(out)
    return out


def cell_weights(nodes: np.ndarray, dx: float, a: float, b: float) -> np.ndarray:
    """Length of each node cell covered by [a, b].

    Reduces to trapezoid weights (half cells at the ends) when [a, b] ends
    on nodes; partial cells get their covered fraction.
    """
    lo = np.maximum(nodes - 0.5 * dx, a)
    hi = np.minimum(nodes + 0.5 * dx, b)
    return np.maximum(hi - lo, 0.0)


def _clipped_cells(offsets: np.ndarray, dx: float, R: float):
    """Covered length and covered-part midpoint of each cell inside [-R, R].

    Evaluating the density at the covered midpoint instead of the node keeps
    support-edge cells robust against rounding (a node can land a few ulps
    outside the support while most of its cell is inside).
    """
    lo = np.maximum(offsets - 0.5 * dx, -R)
    hi = np.minimum(offsets + 0.5 * dx, R)
    cover = np.clip(hi - lo, 0.0, dx)
    mids = np.where(cover > 0, 0.5 * (lo + hi), offsets)
    return cover, mids


def grid_stencil(kernel: ValidatedKernel, dx: float) -> GridStencil:
    """Discrete kernel masses on cells of width dx, normalised to unit sum.

    Cells intersecting the support edge are weighted by the covered length;
    tails below TAIL_FLOOR of the peak are dropped.  The raw discrete mass
    is divided out (and reported) so convolution preserves constants.
    """
    if dx <= 0 or not np.isfinite(dx):
        raise ValueError("dx must be positive")
    R = kernel.support_radius
    half = int(math.ceil(R / dx + 0.5)) - 1
    half = max(half, 0)
    offsets = np.arange(-half, half + 1) * dx
    cover, mids = _clipped_cells(offsets, dx, R)
    vals = np.asarray(kernel.evaluate(mids), dtype=float)

    peak = vals[half]
    keep = np.nonzero(vals >= TAIL_FLOOR * peak)[0]
    trim = int(min(keep[0], 2 * half - keep[-1]))
    if trim > 0:
        offsets = offsets[trim:-trim]
        cover = cover[trim:-trim]
        vals = vals[trim:-trim]
        half -= trim

    masses = vals * cover
    raw_mass = float(masses.sum())
    if raw_mass <= 0:
        raise ZeroMass("kernel stencil has zero discrete mass")
    masses = masses / raw_mass
    masses[half] += 1.0 - masses.sum()  # pin the sum to exactly 1
    with np.errstate(divide="ignore", invalid="ignore"):
        densities = np.where(cover > 0, masses / np.maximum(cover, 1e-300), 0.0)
    return GridStencil(
        dx=dx,
        half=half,
        masses=masses,
        cover=cover,
        densities=densities,
        mass_correction=raw_mass,
    )


def grid_convolve(values: np.ndarray, stencil: GridStencil) -> np.ndarray:
    """Same-length discrete convolution of cell-weighted samples with a stencil."""
    if values.size * stencil.masses.size > 200_000:
        return oaconvolve(values, stencil.masses, mode="same")
    return np.convolve(values, stencil.masses, mode="same")


def convolve(
    kernel: ValidatedKernel,
    field_values: np.ndarray,
    nodes: np.ndarray,
    support: tuple[float, float],
    x: float,
) -> float:
    """Quadrature of ∫_support J(x−y)·field(y) dy on a uniform grid.

    The kernel's discrete mass on this grid alignment is divided out so a
    constant field convolves to that constant exactly.
    """
    nodes = np.asarray(nodes, dtype=float)
    field_values = np.asarray(field_values, dtype=float)
    if nodes.ndim != 1 or nodes.shape != field_values.shape or nodes.size < 2:
        raise GridMismatch("field and node arrays must be 1-d and of equal length >= 2")
    dx = nodes[1] - nodes[0]
    if dx <= 0 or np.max(np.abs(np.diff(nodes) - dx)) > 1e-9 * dx:
        raise GridMismatch("nodes must be uniformly spaced and increasing")
    a, b = support
    if not (a < b):
        raise GridMismatch("support interval is empty")
    if a < nodes[0] - 0.5 * dx - 1e-9 * dx or b > nodes[-1] + 0.5 * dx + 1e-9 * dx:
        raise GridMismatch("grid does not cover the support interval")
    if x < nodes[0] - 1e-9 * dx or x > nodes[-1] + 1e-9 * dx:
        raise GridMismatch("evaluation point outside the sampled window")

    R = kernel.support_radius
    lo = max(a, x - R)
    hi = min(b, x + R)
    cell_lo = np.maximum(nodes - 0.5 * dx, lo)
    cell_hi = np.minimum(nodes + 0.5 * dx, hi)
    weights = np.clip(cell_hi - cell_lo, 0.0, dx)
    mids = np.where(weights > 0, 0.5 * (cell_lo + cell_hi), nodes)
    vals = np.asarray(kernel.evaluate(x - mids), dtype=float)

    # Unit-mass normalisation on the same grid alignment, full support.
    delta = math.remainder(x - nodes[0], dx)
    half = int(math.ceil(R / dx + 0.5))
    offs = delta + np.arange(-half, half + 1) * dx
    ncover, nmids = _clipped_cells(offs, dx, R)
    norm = float(np.dot(np.asarray(kernel.evaluate(nmids), dtype=float), ncover))
    if norm <= 0:
        raise ZeroMass("kernel has zero discrete mass on this grid")
    return float(np.dot(vals * weights, field_values) / norm)
