"""One-parameter min-max over surfaces of revolution spanning two circles.

A path of profile curves runs from a pinched two-disk surrogate to the
stable catenoid; the mountain pass between those basins is the unstable
catenoid, whose area is the numerical width.  The saddle is located by a
two-phase scheme: bisection of the initial path against the basin boundary,
then edge tracking of a bracket pair along the separatrix of the area
descent flow until the pair settles onto the critical point.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .catenoid import CatenoidSpec, excess_over_disks, solve_parameters, tangency_abscissa
from .errors import DegenerateProfile, DomainError, NonConvergence
from .report import make_report

PINCH_FLOOR = 1e-4   # relative floor on profile radii, keeps the area integrand regular


@dataclass(frozen=True)
class ProfileCurve:
    """Radial profile sampled on a uniform grid over the axis interval."""

    x_nodes: np.ndarray
    f_values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x_nodes, dtype=float)
        f = np.asarray(self.f_values, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 3:
            raise DomainError("profile needs matching 1-d node and value arrays")
        steps = np.diff(x)
        if steps[0] <= 0 or np.any(np.abs(steps - steps[0]) > 1e-12 * abs(steps[0])):
            raise DomainError("profile grid must be uniform and increasing")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(f))):
            raise DomainError("profile contains non-finite entries")
        object.__setattr__(self, "x_nodes", x)
        object.__setattr__(self, "f_values", f)

    @property
    def dx(self):
        return float(self.x_nodes[1] - self.x_nodes[0])


def revolution_area(p):
    """Surface area of the profile of revolution by composite quadrature.

    The integrand is 2*pi*f*sqrt(1 + f'^2) with f' from centered differences
    (second-order one-sided stencils at the two ends), summed by the
    trapezoid rule; second-order accurate on smooth profiles.
    """
    f = p.f_values
    if np.any(f < 0.0):
        raise DegenerateProfile("negative radius in profile")
    dx = p.dx
    fp = np.gradient(f, dx, edge_order=2)
    integrand = 2.0 * np.pi * f * np.sqrt(1.0 + fp * fp)
    return float(np.trapezoid(integrand, dx=dx))


def catenoid_profile(r, h, c, n_nodes=201):
    x = np.linspace(-h, h, n_nodes)
    f = c * np.cosh(x / c)
    f[0] = r
    f[-1] = r
    return ProfileCurve(x_nodes=x, f_values=f)


def pinched_profile(r, h, n_nodes=201):
    """Two-disk surrogate: boundary radii r, interior collapsed to the pinch floor."""
    x = np.linspace(-h, h, n_nodes)
    f = np.full(n_nodes, PINCH_FLOOR * r)
    f[0] = r
    f[-1] = r
    return ProfileCurve(x_nodes=x, f_values=f)


@dataclass(frozen=True)
class RevolutionPath:
    slices: tuple

    def __post_init__(self):
        if len(self.slices) < 2:
            raise DomainError("a path needs at least two slices")
        x0 = self.slices[0].x_nodes
        for p in self.slices[1:]:
            if p.x_nodes.shape != x0.shape or np.any(p.x_nodes != x0):
                raise DomainError("all slices must share one node grid")


def initial_path(r, h, n_nodes=201, n_slices=41):
    """Straight-line interpolation from the pinched surrogate to the stable catenoid."""
    sol = solve_parameters(CatenoidSpec(r=r, h=h))
    a = pinched_profile(r, h, n_nodes).f_values
    b = catenoid_profile(r, h, sol.c_stable, n_nodes).f_values
    x = np.linspace(-h, h, n_nodes)
    slices = []
    for t in np.linspace(0.0, 1.0, n_slices):
        f = (1.0 - t) * a + t * b
        f[0] = r
        f[-1] = r
        slices.append(ProfileCurve(x_nodes=x, f_values=f))
    return RevolutionPath(slices=tuple(slices))


@dataclass(frozen=True)
class WidthResult:
    width: float
    argmax_t: float
    profile_at_max: ProfileCurve
    iterations: int


@dataclass(frozen=True)
class DescentConfig:
    step0: float = 0.25
    step_max: float = 0.5
    sep_target: float = 2e-3     # pair separation (relative to r) triggering re-bracketing
    dip_tol: float = 1e-8        # flow-speed norm below which the saddle counts as reached
    max_legs: int = 200
    max_leg_iters: int = 30000
    classify_iters: int = 20000


class _WidthEngine:
    """Preconditioned area descent plus separatrix edge tracking.

    The descent direction is the area gradient smoothed by an inverse
    Sobolev operator (I - d^2/dx^2), which equalizes time scales across
    node frequencies; the raw node gradient carries a factor dx that is
    divided out so step sizes mean the same thing at every resolution.
    """

    def __init__(self, r, h, n_nodes, cfg):
        self.r = r
        self.h = h
        self.cfg = cfg
        self.n = n_nodes
        sol = solve_parameters(CatenoidSpec(r=r, h=h))
        self.sol = sol
        self.x = np.linspace(-h, h, n_nodes)
        self.dx = self.x[1] - self.x[0]
        self.floor = PINCH_FLOOR * r
        self.mid = n_nodes // 2
        self.stable = sol.c_stable * np.cosh(self.x / sol.c_stable)
        self.stable[0] = r
        self.stable[-1] = r
        # basin thresholds: h/x_tangent bounds the unstable neck from above,
        # so the midpoint against c_stable cannot fire during a saddle linger
        self.neck_floor = max(2.0 * self.floor, 1e-3 * r)
        self.neck_stable = 0.5 * (h / tangency_abscissa() + sol.c_stable)
        self.gate_lo = 0.5 * sol.c_unstable
        self.gate_hi = 0.5 * (sol.c_unstable + sol.c_stable)
        inner = n_nodes - 2
        band = np.zeros((3, inner))
        band[0, 1:] = -1.0 / self.dx ** 2
        band[1, :] = 1.0 + 2.0 / self.dx ** 2
        band[2, :-1] = -1.0 / self.dx ** 2
        self.band = band
        self.steps_taken = 0

    def area(self, f):
        df = np.diff(f)
        slant = np.sqrt(self.dx * self.dx + df * df)
        return float(np.pi * np.sum((f[:-1] + f[1:]) * slant))

    def direction(self, f):
        df = np.diff(f)
        slant = np.sqrt(self.dx * self.dx + df * df)
        s = f[:-1] + f[1:]
        g = np.zeros_like(f)
        g[:-1] += np.pi * (slant - s * df / slant)
        g[1:] += np.pi * (slant + s * df / slant)
        return solve_banded((1, 1), self.band, g[1:-1] / self.dx)

    def step(self, f, a, st):
        # backtracking guard: never accept an area increase
        d = self.direction(f)
        self.steps_taken += 1
        for _ in range(60):
            fn = f.copy()
            fn[1:-1] = f[1:-1] - st * d
            np.clip(fn, self.floor, None, out=fn)
            an = self.area(fn)
            if an <= a:
                return fn, an, min(st * 1.3, self.cfg.step_max), d, True
            st *= 0.5
        return f, a, st, d, False

    def classify(self, f0):
        """Which basin a state falls into: -1 pinched floor, +1 stable catenoid."""
        f = f0.copy()
        a = self.area(f)
        st = self.cfg.step0
        neck_prev = f[self.mid]
        for _ in range(self.cfg.classify_iters):
            f, a, st, d, moved = self.step(f, a, st)
            if not moved:
                if np.max(np.abs(f - self.stable)) < 0.05 * self.r:
                    return 1
                raise NonConvergence("descent stalled away from both basins")
            neck = f[self.mid]
            if neck <= self.neck_floor:
                return -1
            if neck >= self.neck_stable and neck > neck_prev:
                return 1
            neck_prev = neck
        raise NonConvergence("basin classification exceeded its iteration cap")

    def run(self, path):
        cfg = self.cfg
        profiles = [p.f_values.copy() for p in path.slices]
        for f in profiles:
            if abs(f[0] - self.r) > 1e-12 * self.r or abs(f[-1] - self.r) > 1e-12 * self.r:
                raise DomainError("path slices must pin boundary radii to r")
        # arc-length parametrization of the path polyline; duplicate slices
        # contribute zero length and so do not move the parametrization
        diffs = [np.linalg.norm(b - a) for a, b in zip(profiles, profiles[1:])]
        cum = np.concatenate([[0.0], np.cumsum(diffs)])
        if cum[-1] <= 0.0:
            raise DomainError("path is a single point")
        cum /= cum[-1]

        def at(t):
            k = int(np.searchsorted(cum, t, side="right")) - 1
            k = min(max(k, 0), len(profiles) - 2)
            width_k = cum[k + 1] - cum[k]
            lam = 0.0 if width_k == 0.0 else (t - cum[k]) / width_k
            f = (1.0 - lam) * profiles[k] + lam * profiles[k + 1]
            f[0] = self.r
            f[-1] = self.r
            return f

        lo, hi = 0.0, 1.0
        if self.classify(at(lo)) != -1 or self.classify(at(hi)) != 1:
            raise NonConvergence(
                "path endpoints must fall into the pinched and stable basins"
            )
        for _ in range(80):
            if hi - lo < 5e-17:
                break
            mid = 0.5 * (lo + hi)
            if self.classify(at(mid)) == -1:
                lo = mid
            else:
                hi = mid
        argmax_t = 0.5 * (lo + hi)

        f_a, f_b = at(lo), at(hi)
        sep = cfg.sep_target * self.r
        best_dn = np.inf
        best_area = np.nan
        best_profile = None
        for _ in range(cfg.max_legs):
            a_a, a_b = self.area(f_a), self.area(f_b)
            st_a = st_b = cfg.step0
            done = False
            same_side = False
            for _ in range(cfg.max_leg_iters):
                f_a, a_a, st_a, d_a, ok_a = self.step(f_a, a_a, st_a)
                f_b, a_b, st_b, d_b, ok_b = self.step(f_b, a_b, st_b)
                dn = math.sqrt(float(np.sum(d_a * d_a)) * self.dx)
                eligible = self.gate_lo < f_a[self.mid] < self.gate_hi
                if eligible and dn < best_dn:
                    best_dn = dn
                    best_area = a_a
                    best_profile = f_a.copy()
                if np.max(np.abs(f_a - f_b)) > sep:
                    break
                if eligible and dn < cfg.dip_tol:
                    done = True
                    break
                if not ok_a and not ok_b:
                    same_side = True  # both stalled without separating
                    break
            if done or same_side:
                break
            lam_lo, lam_hi = 0.0, 1.0
            try:
                for _ in range(54):
                    lam = 0.5 * (lam_lo + lam_hi)
                    if self.classify((1.0 - lam) * f_a + lam * f_b) == -1:
                        lam_lo = lam
                    else:
                        lam_hi = lam
            except NonConvergence:
                break  # keep the best dip seen so far
            f_a, f_b = (
                (1.0 - lam_lo) * f_a + lam_lo * f_b,
                (1.0 - lam_hi) * f_a + lam_hi * f_b,
            )
        if best_profile is None or best_dn > 1e-4:
            raise NonConvergence(
                "max-slice area failed to stabilize (residual %.2e)" % best_dn
            )
        return best_area, argmax_t, best_profile, best_dn


def mountain_pass_width(r, h, path0=None, descent_config=None):
    """Saddle area of the two-circle problem found from an actual sweep.

    The initial path must connect the two stable competitors; the returned
    width matches the closed-form unstable catenoid area to the engine's
    discretization error, with the realizing profile attached.
    """
    cfg = descent_config or DescentConfig()
    if path0 is None:
        path0 = initial_path(r, h)
    n_nodes = path0.slices[0].x_nodes.size
    span = path0.slices[0].x_nodes
    if abs(span[0] + h) > 1e-12 or abs(span[-1] - h) > 1e-12:
        raise DomainError("path slices must span [-h, h]")
    engine = _WidthEngine(r, h, n_nodes, cfg)
    endpoint_areas = (engine.area(path0.slices[0].f_values), engine.area(path0.slices[-1].f_values))
    width, argmax_t, profile, _ = engine.run(path0)
    if width < max(endpoint_areas):
        raise NonConvergence("width fell below an endpoint area; path degenerated")
    return WidthResult(
        width=width,
        argmax_t=argmax_t,
        profile_at_max=ProfileCurve(x_nodes=engine.x.copy(), f_values=profile),
        iterations=engine.steps_taken,
    )


def descend_profile(p, r, steps, step0=0.25):
    """Expose single-profile area descent; returns (profile, per-step areas)."""
    cfg = DescentConfig(step0=step0)
    engine = _WidthEngine(r, float(p.x_nodes[-1]), p.x_nodes.size, cfg)
    f = p.f_values.copy()
    a = engine.area(f)
    st = step0
    areas = [a]
    for _ in range(steps):
        f, a, st, _, _ = engine.step(f, a, st)
        areas.append(a)
    return ProfileCurve(x_nodes=p.x_nodes.copy(), f_values=f), areas


def naive_sweepout(r, h, t_grid=None):
    """Family cutting growing disks out of the two end disks, joined by a cylinder.

    Slice t carries two annuli (radii t to r) plus a radius-t cylinder of
    height 2h; the maximal excess over 2*pi*r^2 is 2*pi*h^2, at t = h.
    """
    if t_grid is None:
        t_grid = np.linspace(0.0, r, 401)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0.0) or np.any(t_grid > r):
        raise DomainError("cut radii must lie in [0, r]")
    rows = []
    for t in t_grid:
        annuli = 2.0 * (np.pi * r * r - np.pi * t * t)
        cylinder = 2.0 * np.pi * t * 2.0 * h
        rows.append(
            {
                "t": float(t),
                "area": float(annuli + cylinder),
                "annuli": float(annuli),
                "cylinder": float(cylinder),
            }
        )
    budget = 2.0 * np.pi * r * r + 2.0 * np.pi * h * h
    return make_report(
        command="naive-sweepout",
        params={"r": float(r), "h": float(h), "n_t": int(t_grid.size)},
        rows=rows,
        budget=budget * (1.0 + 1e-12),  # closed-form max is attained on the grid
    )


@dataclass(frozen=True)
class ExcessRow:
    h: float
    naive_excess: float
    optimal_excess: float
    ratio: float


@dataclass(frozen=True)
class ExcessComparison:
    r: float
    rows: tuple
    slope: float


def excess_scaling_comparison(r, h_grid):
    """Naive 2*pi*h^2 excess against the true saddle excess, with a slope fit.

    The ratio grows like a multiple of -log h; the fit regresses log(ratio)
    on log(-log h), so a slope near 1 confirms the logarithmic gain.
    """
    rows = []
    lognl = []
    logratio = []
    for h in h_grid:
        sol = solve_parameters(CatenoidSpec(r=r, h=float(h)))
        naive = 2.0 * math.pi * h * h
        optimal = excess_over_disks(r, float(h), sol.c_unstable)
        rows.append(
            ExcessRow(h=float(h), naive_excess=naive, optimal_excess=optimal, ratio=naive / optimal)
        )
        lognl.append(math.log(-math.log(h)))
        logratio.append(math.log(naive / optimal))
    slope = float(np.polyfit(lognl, logratio, 1)[0])
    return ExcessComparison(r=float(r), rows=tuple(rows), slope=slope)
