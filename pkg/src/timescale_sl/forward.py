"""Forward problem: shooting across the gap, characteristic function, spectrum.

The solution phi(t, lambda) of

    -y^{ΔΔ}(t) + q(t) y^σ(t) = lambda y^σ(t),   y(0) = 1, y^Δ(0) = h,

is the classical solution of -y'' + q y = lambda y on each interval. At the
right-scattered point a1 the equation itself supplies the transfer

    y(a2)   = y(a1) + a y'(a1-)
    y'(a2+) = y'(a1-) + a (q(a1) - lambda) y(a2)

with a = a2 - a1, and y^Δ(a1) = y'(a1-).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._kernels import rk4_linear
from .domain import Grid, ProblemSpec, TimeScaleDomain
from .errors import (
    IncompleteSpectrumError,
    NotAnEigenvalueError,
    NumericOverflowError,
    StructuralError,
    UnsupportedError,
)

# RK4 step cap is STEP_FACTOR / (1 + sqrt|lambda|); small enough that the
# phase error stays below ~1e-9 relative up to sqrt(lambda) = 30.
STEP_FACTOR = 0.004
TOL_EIG = 1e-12
TOL_DENOMINATOR = 1e-10


def step_cap(lam: float, step_factor: float = STEP_FACTOR) -> float:
    return step_factor / (1.0 + math.sqrt(abs(lam)))


def _bare_grid(domain: TimeScaleDomain) -> Grid:
    return Grid(np.array([0.0, domain.a1]), np.array([domain.a2, domain.l]))


def _mesh(nodes: np.ndarray, m: int):
    """Subdivide every grid cell into m equal steps; return (points, midpoints, steps)."""
    widths = np.diff(nodes)
    frac = np.arange(m) / m
    pts = (nodes[:-1, None] + widths[:, None] * frac[None, :]).ravel()
    pts = np.append(pts, nodes[-1])
    hs = np.diff(pts)
    mids = pts[:-1] + 0.5 * hs
    return pts, mids, hs


def _sampled_q(spec: ProblemSpec, side: str, nodes: np.ndarray, m: int):
    key = (side, nodes.tobytes(), m)
    cache = spec.q.mesh_cache
    hit = cache.get(key)
    if hit is not None:
        return hit
    pts, mids, hs = _mesh(nodes, m)
    evaluate = spec.q.left_values if side == "left" else spec.q.right_values
    qs = np.empty(2 * hs.size + 1)
    qs[0::2] = evaluate(pts)
    qs[1::2] = evaluate(mids)
    rec = np.arange(nodes.size, dtype=np.int64) * m
    if len(cache) > 256:
        cache.clear()
    cache[key] = (qs, hs, rec)
    return qs, hs, rec


def _substeps(nodes: np.ndarray, cap: float) -> int:
    return max(1, math.ceil(float(np.max(np.diff(nodes))) / cap - 1e-9))


@dataclass(frozen=True)
class SolutionTrace:
    """Samples of (y, y') along T for one lambda.

    Values are stored divided by ``exp(log_scale)``; ``log_scale`` is 0
    unless the solution exceeded 1e100 somewhere.
    """

    lam: float
    t_left: np.ndarray
    y_left: np.ndarray
    dy_left: np.ndarray
    t_right: np.ndarray
    y_right: np.ndarray
    dy_right: np.ndarray
    gap: float
    q_a1: float
    log_scale: float = 0.0

    @property
    def phi0(self) -> float:
        return float(self.y_left[0])

    @property
    def dphi0(self) -> float:
        return float(self.dy_left[0])

    @property
    def phi_a1(self) -> float:
        return float(self.y_left[-1])

    @property
    def dphi_a1(self) -> float:
        """Delta derivative at a1, equal to the left derivative y'(a1-)."""
        return float(self.dy_left[-1])

    @property
    def phi_a2(self) -> float:
        return float(self.y_right[0])

    @property
    def dphi_a2(self) -> float:
        """Right derivative y'(a2+)."""
        return float(self.dy_right[0])

    @property
    def phi_l(self) -> float:
        return float(self.y_right[-1])

    @property
    def dphi_l(self) -> float:
        return float(self.dy_right[-1])

    def matching_residual(self) -> float:
        return abs(self.gap * self.dphi_a1 - (self.phi_a2 - self.phi_a1))

    def slope_jump_residual(self) -> float:
        expected = self.gap * (self.q_a1 - self.lam) * self.phi_a2
        return abs(self.dphi_a2 - self.dphi_a1 - expected)

    @property
    def t(self) -> np.ndarray:
        return np.concatenate([self.t_left, self.t_right])

    @property
    def y(self) -> np.ndarray:
        return np.concatenate([self.y_left, self.y_right])

    @property
    def dy(self) -> np.ndarray:
        return np.concatenate([self.dy_left, self.dy_right])


def shoot(
    spec: ProblemSpec,
    lam: float,
    grid: Grid | None = None,
    *,
    initial: tuple[float, float] | None = None,
    step_factor: float = STEP_FACTOR,
) -> SolutionTrace:
    """Integrate the initial value problem across T.

    ``initial`` defaults to (1, h); any other pair yields a second solution
    of the same equation (used by the Wronskian check). Every grid cell is
    split into equal RK4 steps no longer than ``step_cap(lam)``.
    """
    lam = float(lam)
    domain = spec.domain
    grid = _bare_grid(domain) if grid is None else grid
    grid.check_covers(domain)
    y0, p0 = (1.0, spec.h) if initial is None else (float(initial[0]), float(initial[1]))
    cap = step_cap(lam, step_factor)

    qs, hs, rec = _sampled_q(spec, "left", grid.left, _substeps(grid.left, cap))
    yl, pl, y, p, log_scale, ok = rk4_linear(qs, hs, lam, y0, p0, 0.0, rec)
    if not ok:
        raise NumericOverflowError(lam, "on [0, a1]")

    q_a1 = float(qs[-1])
    a = domain.a
    y = y + a * p
    p = p + a * (q_a1 - lam) * y
    m = max(abs(y), abs(p))
    if not math.isfinite(m):
        raise NumericOverflowError(lam, "across the gap")
    if m > 1e100:
        y, p, yl, pl = y / m, p / m, yl / m, pl / m
        log_scale += math.log(m)
    qs, hs, rec = _sampled_q(spec, "right", grid.right, _substeps(grid.right, cap))
    yr, pr, y, p, log_right, ok = rk4_linear(qs, hs, lam, y, p, 0.0, rec)
    if not ok:
        raise NumericOverflowError(lam, "on [a2, l]")
    if log_right:
        factor = math.exp(-log_right)
        yl, pl = yl * factor, pl * factor
        log_scale += log_right
    return SolutionTrace(
        lam, grid.left, yl, pl, grid.right, yr, pr, a, q_a1, log_scale
    )


def _char_scaled(spec: ProblemSpec, lam: float, step_factor: float = STEP_FACTOR):
    tr = shoot(spec, lam, step_factor=step_factor)
    return tr.dphi_l + spec.H * tr.phi_l, tr.log_scale


def characteristic(spec: ProblemSpec, lam, *, step_factor: float = STEP_FACTOR):
    """Delta(lambda) = phi^Δ(l) + H phi(l); accepts a scalar or an array of lambdas."""
    lam_arr = np.asarray(lam, dtype=float)
    out = np.empty(lam_arr.shape)
    for idx, value in np.ndenumerate(lam_arr):
        d, log_scale = _char_scaled(spec, float(value), step_factor)
        if log_scale:
            try:
                d = d * math.exp(log_scale)
            except OverflowError:
                raise NumericOverflowError(float(value), "Delta exceeds the float range") from None
        out[idx] = d
    return float(out) if lam_arr.ndim == 0 else out


def closed_form_char_zero_potential(domain: TimeScaleDomain, lam):
    """Exact Delta(lambda) for q = 0, h = H = 0, composed without integration.

    With C(x) = cos(sqrt(lambda) x) and S(x) = sin(sqrt(lambda) x)/sqrt(lambda)
    (hyperbolic for lambda < 0), phi(a2) = C(a1) - a lambda S(a1),
    phi'(a2+) = -lambda S(a1) - a lambda phi(a2), and
    Delta = -lambda S(b) phi(a2) + C(b) phi'(a2+) with b = l - a2.
    """
    lam = np.asarray(lam, dtype=float)
    s = np.sqrt(np.abs(lam))

    def cos_sin(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            pos = (np.cos(s * x), np.where(s > 0, np.sin(s * x) / s, x))
            neg = (np.cosh(s * x), np.where(s > 0, np.sinh(s * x) / s, x))
        return np.where(lam >= 0, pos[0], neg[0]), np.where(lam >= 0, pos[1], neg[1])

    a, b = domain.a, domain.right_length
    c1, s1 = cos_sin(domain.a1)
    cb, sb = cos_sin(b)
    y2 = c1 - a * lam * s1
    p2 = -lam * s1 - a * lam * y2
    out = -lam * sb * y2 + cb * p2
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- asymptotics


def asymptotic_phi(domain: TimeScaleDomain, h: float, lam: float, t: float) -> float:
    """Leading term of phi(t, lambda) for large lambda > 0 on the interval containing t."""
    if lam <= 0:
        raise StructuralError("asymptotic_phi needs lambda > 0")
    s = math.sqrt(lam)
    if domain.interval_of(t) == "left":
        return math.cos(s * t) + h / s * math.sin(s * t)
    return domain.a**2 * lam * math.sin(s * domain.a1) * math.sin(s * (t - domain.a2))


def asymptotic_char(domain: TimeScaleDomain, lam: float) -> float:
    """Leading term a^2 lambda^{3/2} sin(sqrt(lambda) a1) cos(sqrt(lambda) (l - a2))."""
    if lam <= 0:
        raise StructuralError("asymptotic_char needs lambda > 0")
    s = math.sqrt(lam)
    return domain.a**2 * lam * s * math.sin(s * domain.a1) * math.cos(s * domain.right_length)


def asymptotic_eigen_guess(domain: TimeScaleDomain, n: int) -> float:
    """((n - 1) pi / (2 a1))^2; only meaningful when l - a2 = a1."""
    if not domain.symmetric:
        raise UnsupportedError("eigenvalue asymptotics require l - a2 = a1")
    if n < 1:
        raise StructuralError("n must be >= 1")
    return ((n - 1) * math.pi / (2.0 * domain.a1)) ** 2


# ---------------------------------------------------------------- spectrum


@dataclass(frozen=True)
class SearchOptions:
    """Knobs of the eigenvalue scan. ``None`` fields are derived from the problem."""

    lam_floor: float | None = None
    lam_step: float = 0.25
    s_step: float | None = None
    s_ceiling: float | None = None
    xtol_rel: float = TOL_EIG
    step_factor: float = STEP_FACTOR


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues with interior ratios phi^Δ(a1)/phi(a1); flagged ratios are NaN."""

    eigenvalues: np.ndarray
    ratios: np.ndarray
    flags: np.ndarray
    brackets: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        ev = np.array(self.eigenvalues, dtype=float)
        ra = np.array(self.ratios, dtype=float)
        fl = np.array(self.flags, dtype=bool)
        if not (ev.shape == ra.shape == fl.shape) or ev.ndim != 1:
            raise StructuralError("eigenvalues, ratios and flags must be equal-length lists")
        if ev.size > 1 and not np.all(np.diff(ev) > 0):
            raise StructuralError("eigenvalues must be strictly increasing")
        for name, arr in (("eigenvalues", ev), ("ratios", ra), ("flags", fl)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def count(self) -> int:
        return int(self.eigenvalues.size)

    def head(self, n: int) -> "SpectralData":
        br = None if self.brackets is None else self.brackets[:n]
        return SpectralData(self.eigenvalues[:n], self.ratios[:n], self.flags[:n], br)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "ratios": [None if f else float(r) for r, f in zip(self.ratios, self.flags)],
            "flags": [bool(f) for f in self.flags],
        }

    @classmethod
    def from_dict(cls, data) -> "SpectralData":
        try:
            ev = data["eigenvalues"]
            ratios = data["ratios"]
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"missing field {exc.args[0]!r}") from None
        flags = data.get("flags") or [r is None for r in ratios]
        ra = [math.nan if r is None else r for r in ratios]
        flags = [bool(f) or r is None for f, r in zip(flags, ratios)]
        return cls(ev, ra, flags)


def _default_floor(spec: ProblemSpec) -> float:
    return -((spec.q.sup_abs() + abs(spec.h) + abs(spec.H) + 1.0) ** 2)


def _scan_points(spec: ProblemSpec, n_max: int, opts: SearchOptions):
    d = spec.domain
    floor = _default_floor(spec) if opts.lam_floor is None else opts.lam_floor
    ds = opts.s_step or math.pi / (8.0 * max(d.a1, d.right_length))
    if opts.s_ceiling is None:
        s_free = 2.0 * (n_max + 4) * math.pi / (d.a1 + d.right_length)
        bump = spec.q.sup_abs() + abs(spec.h) + abs(spec.H)
        s_ceiling = math.sqrt(s_free**2 + bump) + 1.0
    else:
        s_ceiling = opts.s_ceiling
    neg = np.arange(floor, 0.0, opts.lam_step) if floor < 0 else np.empty(0)
    s = np.arange(0.0, s_ceiling + ds, ds)
    if d.symmetric:
        seeds = np.arange(n_max + 4) * math.pi / (2.0 * d.a1)
        s = np.union1d(s, seeds[seeds <= s_ceiling])
    lam = np.concatenate([neg, s * s])
    return np.unique(lam), s_ceiling**2


def _tight_bracket(f, root: float, lo: float, hi: float, xtol_rel: float):
    """Smallest bracket around ``root`` (width about xtol_rel (1 + |root|), doubled as needed)
    on which f changes sign, clipped to the scan bracket [lo, hi]."""
    w = 0.45 * xtol_rel * (1.0 + abs(root))  # margin for rounding of root +- w
    while True:
        a, b = max(lo, root - w), min(hi, root + w)
        if (a, b) == (lo, hi):
            return lo, hi
        fa, fb = f(a), f(b)
        if fa == 0.0 or fb == 0.0 or (fa > 0) != (fb > 0):
            return a, b
        w *= 2.0


def _find_spectrum(spec: ProblemSpec, n_max: int, opts: SearchOptions, func=None):
    """Scan, bracket and refine; ``func(lam)`` defaults to the scaled Delta of ``spec``."""
    lams, ceiling = _scan_points(spec, n_max, opts)

    def f(x):
        if func is not None:
            return func(x)
        return _char_scaled(spec, x, opts.step_factor)[0]

    roots, brackets = [], []
    prev_x = prev_f = None
    pending_zero = None  # (root, left neighbour) awaiting its right neighbour
    for x in lams:
        fx = f(float(x))
        if pending_zero is not None:
            roots.append(pending_zero[0])
            brackets.append(_tight_bracket(f, pending_zero[0], pending_zero[1], float(x), opts.xtol_rel))
            pending_zero = None
        elif fx == 0.0:
            pending_zero = (float(x), prev_x if prev_x is not None else float(x))
        elif prev_f is not None and prev_f != 0.0 and (fx > 0) != (prev_f > 0):
            xtol = 0.5 * opts.xtol_rel * (1.0 + max(abs(prev_x), abs(x)))
            root = brentq(f, prev_x, float(x), xtol=xtol, rtol=1e-15, maxiter=200)
            roots.append(root)
            brackets.append(_tight_bracket(f, root, prev_x, float(x), opts.xtol_rel))
        if len(roots) >= n_max:
            break
        prev_x, prev_f = float(x), fx
    if len(roots) < n_max:
        raise IncompleteSpectrumError(len(roots), n_max, ceiling)
    return np.array(roots[:n_max]), np.array(brackets[:n_max])


def eigenvalues(spec: ProblemSpec, n_max: int, opts: SearchOptions | None = None) -> SpectralData:
    """The n_max smallest eigenvalues (ratios left as NaN and flagged).

    The scan runs in lambda with step ``lam_step`` from the floor
    -(sup|q| + |h| + |H| + 1)^2 to 0, then in s = sqrt(lambda) with step
    pi / (8 max(a1, l - a2)). Each sign change of Delta is refined by Brent's
    method to a bracket of width <= xtol_rel * (1 + |lambda|).
    """
    if n_max < 1:
        raise StructuralError("n_max must be >= 1")
    opts = opts or SearchOptions()
    roots, brackets = _find_spectrum(spec, n_max, opts)
    nan = np.full(roots.size, np.nan)
    return SpectralData(roots, nan, np.ones(roots.size, bool), brackets)


def _near_root(spec: ProblemSpec, lam: float, step_factor: float) -> bool:
    d0 = _char_scaled(spec, lam, step_factor)[0]
    if d0 == 0.0:
        return True
    delta = 1e-9 * (1.0 + abs(lam))
    lo = _char_scaled(spec, lam - delta, step_factor)[0]
    hi = _char_scaled(spec, lam + delta, step_factor)[0]
    return (lo > 0) != (hi > 0) or lo == 0.0 or hi == 0.0


def eigenfunction(
    spec: ProblemSpec, lambda_n: float, grid: Grid | None = None, *, step_factor: float = STEP_FACTOR
) -> SolutionTrace:
    """Trace of phi(., lambda_n) after checking that Delta changes sign within 1e-9 (1 + |lambda_n|)."""
    if not _near_root(spec, lambda_n, step_factor):
        raise NotAnEigenvalueError(f"lambda={lambda_n!r} is not near a zero of Delta")
    grid = Grid.uniform(spec.domain) if grid is None else grid
    return shoot(spec, lambda_n, grid, step_factor=step_factor)


def interior_ratio(trace: SolutionTrace) -> tuple[float, bool]:
    """(phi^Δ(a1)/phi(a1), degenerate?) for one trace."""
    s = math.sqrt(abs(trace.lam))
    scale = max(1.0, abs(trace.dphi_a1) / (1.0 + s))
    if abs(trace.phi_a1) < TOL_DENOMINATOR * scale:
        ratio = trace.dphi_a1 / trace.phi_a1 if trace.phi_a1 != 0.0 else math.nan
        return (ratio if math.isfinite(ratio) else math.nan), True
    return trace.dphi_a1 / trace.phi_a1, False


def extract_data(spec: ProblemSpec, n: int, opts: SearchOptions | None = None) -> SpectralData:
    """First n eigenvalues with interior ratios; degenerate entries are flagged, not raised."""
    opts = opts or SearchOptions()
    ev = eigenvalues(spec, n, opts)
    ratios, flags = [], []
    for lam in ev.eigenvalues:
        r, flag = interior_ratio(shoot(spec, float(lam), step_factor=opts.step_factor))
        ratios.append(r)
        flags.append(flag)
    return SpectralData(ev.eigenvalues, ratios, flags, ev.brackets)
