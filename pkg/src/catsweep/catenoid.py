"""Catenoid boundary-value problem between two coaxial unit-spaced circles.

A catenoid spanning the circles of radius r at heights +-h has profile
f(x) = c*cosh(x/c); admissible c solve r = c*cosh(h/c).  In the variable
x = h/c this becomes cosh(x) = lam*x with lam = r/h, which has two roots
(or none) depending on whether lam exceeds the tangency slope.  The larger
x root gives the smaller, unstable neck; the smaller x root the stable one.
"""

import math
from dataclasses import dataclass

from .errors import DomainError, NoCatenoid, NonConvergence

TOL_ROOT = 1e-10     # relative residual demanded of c*cosh(h/c) = r
MAX_BISECT = 200     # more halvings than float64 can use

_TWO_PI = 2.0 * math.pi


def _log_cosh(x):
    # log(cosh x) evaluated without overflow; math.cosh dies near x = 710
    return x + math.log1p(math.exp(-2.0 * x)) - math.log(2.0)


_tangency_cache = None


def tangency_abscissa():
    """Root x0 of x*tanh(x) = 1, where the line lam*x first touches cosh(x).

    Bisection on [1, 2]; the function is increasing there.
    """
    global _tangency_cache
    if _tangency_cache is None:
        lo, hi = 1.0, 2.0
        for _ in range(MAX_BISECT):
            mid = 0.5 * (lo + hi)
            if mid * math.tanh(mid) < 1.0:
                lo = mid
            else:
                hi = mid
        _tangency_cache = 0.5 * (lo + hi)
    return _tangency_cache


def critical_ratio():
    """Largest h/r for which the two-circle catenoid problem is solvable."""
    return 1.0 / math.sinh(tangency_abscissa())


@dataclass(frozen=True)
class CatenoidSpec:
    """Two coaxial circles of radius r at heights -h and +h."""

    r: float
    h: float

    def __post_init__(self):
        if not (self.r > 0.0 and self.h > 0.0):
            raise DomainError("circle radius and half-separation must be positive")


@dataclass(frozen=True)
class CatenoidSolution:
    spec: CatenoidSpec
    c_unstable: float
    c_stable: float
    area_unstable: float
    area_stable: float


def _bisect_root(g, lo, hi):
    # g(lo) and g(hi) must have opposite (weak) signs; returns the midpoint
    glo = g(lo)
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if g(mid) * glo > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_parameters(spec):
    """Both roots of r = c*cosh(h/c) with their areas.

    Raises NoCatenoid when h/r exceeds the critical ratio and only the
    two-disk competitor remains.  Works in x = h/c throughout: the residual
    g(x) = log cosh(x) - log(lam*x) is monotone-free of overflow for any x.
    """
    r, h = spec.r, spec.h
    lam = r / h
    if h / r > critical_ratio() + 1e-12:
        raise NoCatenoid(
            "h/r = %.6g exceeds the critical ratio %.6g" % (h / r, critical_ratio())
        )

    log_lam = math.log(lam)

    def g(x):
        return _log_cosh(x) - log_lam - math.log(x)

    # split point: where the slope of cosh matches lam
    x_split = math.asinh(lam)
    if g(x_split) >= 0.0:
        # tangency (up to rounding): both roots coincide
        x_small = x_large = x_split
    else:
        x_small = _bisect_root(g, 1.0 / lam, x_split)
        hi = 2.0 * x_split
        while g(hi) < 0.0:
            hi *= 2.0
            if hi > 1e6:
                raise NonConvergence("no sign change found for the outer root")
        x_large = _bisect_root(g, x_split, hi)

    c_unstable = h / x_large
    c_stable = h / x_small
    for c in (c_unstable, c_stable):
        residual = abs(math.exp(math.log(c) + _log_cosh(h / c)) - r)
        if residual > TOL_ROOT * r:
            raise NonConvergence(
                "root residual %.3e exceeds %.1e * r" % (residual, TOL_ROOT)
            )

    return CatenoidSolution(
        spec=spec,
        c_unstable=c_unstable,
        c_stable=c_stable,
        area_unstable=_area_on_root(r, h, c_unstable),
        area_stable=_area_on_root(r, h, c_stable),
    )


def _area_on_root(r, h, c):
    # On a BVP root, r^2 - c^2 = c^2*sinh^2(h/c) exactly, which sidesteps the
    # catastrophic subtraction when c rounds to r (stable branch at tiny h).
    x = h / c
    if x > 30.0:
        c_sinh = math.exp(math.log(c) + _log_cosh(x))  # sinh = cosh to 1e-26 here
    else:
        c_sinh = c * math.sinh(x)
    return _TWO_PI * (r * c_sinh + h * c)


def area_of_catenoid(r, h, c):
    """Closed-form area 2*pi*r*sqrt(r^2 - c^2) + 2*pi*h*c of the spanning catenoid."""
    if not (0.0 < c < r):
        raise DomainError("need 0 < c < r, got c=%g, r=%g" % (c, r))
    return _TWO_PI * r * math.sqrt(r * r - c * c) + _TWO_PI * h * c


def excess_over_disks(r, h, c):
    """Catenoid area minus the two-disk area 2*pi*r^2, evaluated stably.

    The direct subtraction loses every significant digit once the excess
    drops below float eps * 2*pi*r^2 (h around 1e-6 and smaller), so the
    difference is rearranged into a cancellation-free product form.
    """
    if not (0.0 < c < r):
        raise DomainError("need 0 < c < r, got c=%g, r=%g" % (c, r))
    root = math.sqrt(r * r - c * c)
    return _TWO_PI * (h * c - r * c * c / (r + root))


def estimate_bound(r, h):
    """Area budget 2*pi*r^2 + 4*pi*h^2/(-log h) for the unstable catenoid."""
    if not (0.0 < h < 1.0):
        raise DomainError("the bound needs 0 < h < 1 so that -log h > 0")
    return _TWO_PI * r * r + 4.0 * math.pi * h * h / (-math.log(h))


def empirical_threshold(r, h_start=0.1, h_floor=1e-6):
    """Largest grid separation h0 (grid h_start*2^-k) with the area bound
    holding at h0 and every smaller grid point down to h_floor.

    The bound's validity constant is existential, so the threshold is
    reported from measurement rather than assumed.
    """
    grid = []
    h = h_start
    while h >= h_floor:
        grid.append(h)
        h *= 0.5
    holds = []
    for h in grid:
        sol = solve_parameters(CatenoidSpec(r=r, h=h))
        holds.append(sol.area_unstable <= estimate_bound(r, h))
    h0 = None
    for h, ok in zip(grid, holds):
        if ok and h0 is None:
            h0 = h
        elif not ok:
            h0 = None
    if h0 is None:
        raise NonConvergence("bound failed on the whole grid down to %g" % h_floor)
    return h0


@dataclass(frozen=True)
class ScanRow:
    h: float
    c_unstable: float
    area_unstable: float
    bound_value: float
    asymptotic_ratio: float


@dataclass(frozen=True)
class EstimateScan:
    r: float
    h_grid: tuple
    rows: tuple


def asymptotic_ratio_scan(r, h_grid):
    """Per-h record of the neck parameter against its h/(-log h) asymptote.

    asymptotic_ratio is c_unstable*(-log h)/h, which tends to 1 from below
    as h -> 0 (the approach is logarithmically slow).
    """
    h_grid = tuple(float(h) for h in h_grid)
    if any(b >= a for a, b in zip(h_grid, h_grid[1:])):
        raise DomainError("h_grid must be strictly decreasing")
    rows = []
    for h in h_grid:
        sol = solve_parameters(CatenoidSpec(r=r, h=h))
        rows.append(
            ScanRow(
                h=h,
                c_unstable=sol.c_unstable,
                area_unstable=sol.area_unstable,
                bound_value=estimate_bound(r, h),
                asymptotic_ratio=sol.c_unstable * (-math.log(h)) / h,
            )
        )
    return EstimateScan(r=r, h_grid=h_grid, rows=tuple(rows))
