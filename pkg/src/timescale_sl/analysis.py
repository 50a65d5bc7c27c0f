"""Verification harness: asymptotics, Wronskian, completeness, transmission form."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import rk4_linear
from .domain import Grid, ProblemSpec
from .errors import NumericOverflowError, StructuralError, UnsupportedError
from .forward import (
    STEP_FACTOR,
    SearchOptions,
    _find_spectrum,
    _mesh,
    _substeps,
    asymptotic_phi,
    eigenvalues,
    shoot,
    step_cap,
)


@dataclass
class ConvergenceReport:
    parameters: np.ndarray
    errors: np.ndarray
    exponent: float
    passed: bool
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.parameters = np.asarray(self.parameters, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.parameters.shape != self.errors.shape:
            raise StructuralError("parameter and error sequences differ in length")

    def to_dict(self) -> dict:
        return {
            "parameters": self.parameters.tolist(),
            "errors": self.errors.tolist(),
            "exponent": self.exponent,
            "passed": self.passed,
            "details": {k: _plain(v) for k, v in self.details.items()},
        }

    def rows(self):
        return [("parameter", "error")] + list(zip(self.parameters.tolist(), self.errors.tolist()))


def _plain(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.bool_)):
        return value.item()
    return value


def fitted_exponent(x, y) -> float:
    """Least-squares slope of log y against log x (NaN when any y <= 0)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(y <= 0) or x.size < 2:
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# ---------------------------------------------------------------- asymptotic remainder

NOISE_FLOOR = 1e-9


def check_lemma1(spec: ProblemSpec, s_values, n_cells: int = 2000) -> ConvergenceReport:
    """Deviation of phi from its leading asymptotic terms as s = sqrt(lambda) grows.

    ``errors`` holds the raw sup-deviation on [0, a1]; details carry the
    left error times s and the right error divided by s, the two scalings
    under which the remainders should stay bounded. The flag fails when the
    raw left error grows between consecutive s (values below 1e-9 count as
    exact).
    """
    s_values = np.asarray(s_values, dtype=float)
    if s_values.size < 4 or np.any(np.diff(s_values) <= 0):
        raise StructuralError("s_values must be increasing with at least 4 entries")
    d = spec.domain
    grid = Grid.uniform(d, n_cells)
    left, right = [], []
    for s in s_values:
        lam = s * s
        tr = shoot(spec, lam, grid)
        scale = math.exp(tr.log_scale)
        lead_l = np.array([asymptotic_phi(d, spec.h, lam, t) for t in tr.t_left])
        lead_r = np.array([asymptotic_phi(d, spec.h, lam, t) for t in tr.t_right])
        left.append(np.max(np.abs(tr.y_left * scale - lead_l)))
        right.append(np.max(np.abs(tr.y_right * scale - lead_r)))
    left, right = np.array(left), np.array(right)
    grows = (np.diff(left) > 0) & (left[1:] > NOISE_FLOOR)
    with np.errstate(divide="ignore", invalid="ignore"):
        reduction = left[:-1] / left[1:]
    return ConvergenceReport(
        s_values,
        left,
        fitted_exponent(s_values, left),
        bool(not np.any(grows)),
        {
            "left_normalized": left * s_values,
            "right_normalized": right / s_values,
            "reduction_per_step": reduction,
        },
    )


# ---------------------------------------------------------------- eigenvalue asymptotics


def check_eq9(
    spec: ProblemSpec,
    n_range: tuple[int, int] = (10, 40),
    *,
    shift: float = 0.0,
    index_offset: int = 1,
    opts: SearchOptions | None = None,
) -> ConvergenceReport:
    """n |sqrt(lambda_n - shift) - (n - index_offset) pi / (2 a1)| over n_range.

    ``index_offset=1`` is the classical labelling. The flag requires finite
    values and a last-decade maximum within 1.2 times the first-decade
    maximum.
    """
    d = spec.domain
    if not d.symmetric:
        raise UnsupportedError("eigenvalue asymptotics require l - a2 = a1")
    lo, hi = n_range
    if not 1 <= lo < hi:
        raise StructuralError("n_range must satisfy 1 <= lo < hi")
    lam = eigenvalues(spec, hi, opts).eigenvalues - shift
    n = np.arange(lo, hi + 1)
    with np.errstate(invalid="ignore"):
        root = np.sqrt(lam[n - 1])
    values = n * np.abs(root - (n - index_offset) * math.pi / (2.0 * d.a1))
    decade = min(10, n.size // 2)
    first, last = float(np.max(values[:decade])), float(np.max(values[-decade:]))
    ok = bool(np.all(np.isfinite(values)) and last <= 1.2 * first)
    return ConvergenceReport(
        n, values, fitted_exponent(n, values), ok,
        {"first_decade_max": first, "last_decade_max": last, "index_offset": index_offset},
    )


# ---------------------------------------------------------------- Wronskian


def wronskian_bracket(u, v) -> np.ndarray:
    """u v^Δ - u^Δ v at every node of two traces of the same lambda and grid."""
    return u.y * v.dy - u.dy * v.y


def check_wronskian(
    spec: ProblemSpec, lam: float, grid: Grid | None = None, *, step_factor: float = STEP_FACTOR
) -> float:
    """max over T of |W(t) - W(0)| for solutions started at (1, h) and (0, 1).

    The node list contains a1 and a2, so the gap step is included.
    """
    grid = Grid.uniform(spec.domain) if grid is None else grid
    u = shoot(spec, lam, grid, step_factor=step_factor)
    v = shoot(spec, lam, grid, initial=(0.0, 1.0), step_factor=step_factor)
    w = wronskian_bracket(u, v) * math.exp(u.log_scale + v.log_scale)
    return float(np.max(np.abs(w - w[0])))


# ---------------------------------------------------------------- completeness


def default_probes(a1: float) -> dict:
    return {
        "1": lambda t: np.ones_like(t),
        "t": lambda t: t,
        "t^2": lambda t: t * t,
        "cos(pi t/a1)": lambda t: np.cos(np.pi * t / a1),
        "step": lambda t: (t >= 0.5 * a1).astype(float),
    }


def _quadrature(a1: float, panels: int = 256, order: int = 8):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, a1, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass
class CompletenessReport:
    n_values: list
    residuals: dict
    decreasing: dict
    strictly_decreasing: dict
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_values": list(self.n_values),
            "residuals": {k: list(map(float, v)) for k, v in self.residuals.items()},
            "decreasing": dict(self.decreasing),
            "strictly_decreasing": dict(self.strictly_decreasing),
            "warnings": list(self.warnings),
        }


def completeness_diagnostic(
    eigenvalues,
    probes: dict | None = None,
    n_values=(4, 8, 16, 32),
    *,
    a1: float = 1.0,
    ridge: float = 1e-12,
) -> CompletenessReport:
    """L2(0, a1) residual of projecting each probe onto span{cos(2 sqrt(lambda_n) t), n <= N}.

    Negative eigenvalues give cosh(2 sqrt|lambda_n| t). Projection solves the
    ridge-regularized Gram system; residuals are integrated directly.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    n_values = sorted(int(n) for n in n_values)
    if n_values[-1] > lam.size:
        raise StructuralError(f"need {n_values[-1]} eigenvalues, got {lam.size}")
    probes = default_probes(a1) if probes is None else probes
    t, w = _quadrature(a1)
    root = np.sqrt(np.abs(lam))
    basis = np.where(
        lam[None, :] >= 0,
        np.cos(2.0 * np.outer(t, root)),
        np.cosh(2.0 * np.outer(t, root)),
    )
    residuals = {name: [] for name in probes}
    warnings = []
    for n in n_values:
        B = basis[:, :n]
        gram = B.T @ (w[:, None] * B)
        cond = np.linalg.cond(gram)
        if cond * ridge > 1.0:
            warnings.append(f"N={n}: Gram condition number {cond:.3g} exceeds 1/ridge")
        for name, f in probes.items():
            fv = np.asarray(f(t), dtype=float)
            coef = np.linalg.solve(gram + ridge * np.eye(n), B.T @ (w * fv))
            err = fv - B @ coef
            residuals[name].append(float(math.sqrt(np.sum(w * err * err))))
    dec = {k: bool(np.all(np.diff(v) <= 1e-14)) for k, v in residuals.items()}
    strict = {k: bool(np.all(np.diff(v) < 0)) for k, v in residuals.items()}
    return CompletenessReport(n_values, residuals, dec, strict, warnings)


# ---------------------------------------------------------------- transmission form


def transmission_characteristic(
    spec: ProblemSpec, lam: float, *, slope_jump: str = "derived", step_factor: float = STEP_FACTOR
) -> float:
    """Delta for the classical problem on (0, a1 + l - a2) with a jump at x = a1.

    On the right piece x = t - a2 + a1 and q1(x) = q(x - a1 + a2). The value
    jump is y(a1+) = y(a1-) + a y'(a1-); the slope jump is
    y'(a1+) - y'(a1-) = -(a^2 lambda + b + 1) y(a1+) / a with
    b = -a^2 q(a1) - 1 (``"derived"``) or the same with a plus sign
    (``"printed"``).
    """
    if slope_jump not in ("derived", "printed"):
        raise StructuralError("slope_jump must be 'derived' or 'printed'")
    d = spec.domain
    a = d.a
    b = -a * a * spec.q.at_a1 - 1.0
    sign = -1.0 if slope_jump == "derived" else 1.0
    cap = step_cap(lam, step_factor)

    x_left = np.array([0.0, d.a1])
    x_right = np.array([d.a1, d.a1 + d.right_length])
    y, p = 1.0, spec.h
    log_scale = 0.0
    for piece, nodes in (("left", x_left), ("right", x_right)):
        pts, mids, hs = _mesh(nodes, _substeps(nodes, cap))
        if piece == "left":
            qs_pts, qs_mid = spec.q.left_values(pts), spec.q.left_values(mids)
        else:
            qs_pts = spec.q.right_values(pts - d.a1 + d.a2)
            qs_mid = spec.q.right_values(mids - d.a1 + d.a2)
            y = y + a * p
            p = p + sign * (a * a * lam + b + 1.0) / a * y
        qs = np.empty(2 * hs.size + 1)
        qs[0::2], qs[1::2] = qs_pts, qs_mid
        rec = np.array([0, hs.size], dtype=np.int64)
        _, _, y, p, log_scale, ok = rk4_linear(qs, hs, lam, y, p, log_scale, rec)
        if not ok:
            raise NumericOverflowError(lam, f"transmission form, {piece} piece")
    return p + spec.H * y


def transmission_eigenvalues(
    spec: ProblemSpec, n: int, opts: SearchOptions | None = None, *, slope_jump: str = "derived"
) -> np.ndarray:
    opts = opts or SearchOptions()
    roots, _ = _find_spectrum(
        spec, n, opts,
        func=lambda lam: transmission_characteristic(
            spec, lam, slope_jump=slope_jump, step_factor=opts.step_factor
        ),
    )
    return roots


def transmission_equivalence(spec: ProblemSpec, n: int, opts: SearchOptions | None = None) -> float:
    """max_n |lambda_n (time scale) - lambda_n (transmission form)|."""
    ts = eigenvalues(spec, n, opts).eigenvalues
    tr = transmission_eigenvalues(spec, n, opts)
    return float(np.max(np.abs(ts - tr)))


# ---------------------------------------------------------------- aggregate


def verify_all(spec: ProblemSpec) -> dict:
    """Every check that applies to ``spec``; symmetric-only checks are skipped otherwise."""
    out = {
        "wronskian": {str(lam): check_wronskian(spec, lam) for lam in (-1.0, 1.0, 5.0, 20.0)},
        "transmission_max_discrepancy": transmission_equivalence(spec, 8),
        "asymptotic_remainder": check_lemma1(spec, [25.0, 50.0, 100.0, 200.0]).to_dict(),
    }
    if spec.domain.symmetric:
        out["eigenvalue_asymptotics"] = check_eq9(spec).to_dict()
        ev = eigenvalues(spec, 32).eigenvalues
        out["completeness"] = completeness_diagnostic(ev, a1=spec.domain.a1).to_dict()
    return out
