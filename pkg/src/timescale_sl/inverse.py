"""Recover q from eigenvalues and interior ratios by Levenberg-Marquardt.

The unknowns are cosine coefficients on both intervals: ``n_basis_left``
modes cos(k pi t / a1) followed by ``n_basis_right`` modes
cos(k pi (t - a2) / (l - a2)). h and H are known.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import Potential, ProblemSpec, TimeScaleDomain
from .errors import ForwardSolveError, StructuralError, TimeScaleError, UnsupportedError
from .forward import SearchOptions, SpectralData, extract_data


@dataclass(frozen=True)
class FixedData:
    """The part of the problem treated as known: geometry and boundary constants."""

    domain: TimeScaleDomain
    h: float = 0.0
    H: float = 0.0

    @classmethod
    def of(cls, spec: ProblemSpec) -> "FixedData":
        return cls(spec.domain, spec.h, spec.H)


@dataclass(frozen=True)
class InverseConfig:
    n_data: int = 12
    n_basis_left: int = 4
    n_basis_right: int = 4
    reg: float = 1e-8
    max_iter: int = 50
    residual_tol: float = 1e-7
    step_tol: float = 1e-13
    damping: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 0.3
    fd_step: float = 1e-6

    def __post_init__(self):
        n_coef = self.n_basis_left + self.n_basis_right
        if self.n_basis_left < 1 or self.n_basis_right < 1:
            raise StructuralError("each interval needs at least one cosine mode")
        if self.n_data < n_coef:
            raise StructuralError(
                f"n_data >= n_basis_left + n_basis_right violated ({self.n_data} < {n_coef})"
            )
        if self.reg < 0 or self.fd_step <= 0 or self.damping <= 0:
            raise StructuralError("reg must be >= 0; fd_step and damping must be > 0")

    @property
    def n_coef(self) -> int:
        return self.n_basis_left + self.n_basis_right


@dataclass
class ReconstructionReport:
    potential: Potential
    coefficients: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    reason: str
    history: list = field(default_factory=list)
    objective_history: list = field(default_factory=list)
    eigen_misfit: float = math.nan
    ratio_misfit: float = math.nan
    singular_values: np.ndarray | None = None

    def to_dict(self) -> dict:
        kl = self.potential.left.size
        return {
            "converged": self.converged,
            "reason": self.reason,
            "iterations": self.iterations,
            "residual_norm": self.residual_norm,
            "eigenvalue_misfit": self.eigen_misfit,
            "ratio_misfit": self.ratio_misfit,
            "coefficients": {
                "left": self.coefficients[:kl].tolist(),
                "right": self.coefficients[kl:].tolist(),
            },
            "q": self.potential.to_dict(),
            "history": [float(v) for v in self.history],
            "objective_history": [float(v) for v in self.objective_history],
            "singular_values": [] if self.singular_values is None else self.singular_values.tolist(),
        }


def potential_from_coeffs(coeffs, domain: TimeScaleDomain, n_left: int) -> Potential:
    coeffs = np.asarray(coeffs, dtype=float)
    return Potential.cosine(domain, coeffs[:n_left], coeffs[n_left:])


def _usable(target: SpectralData, n_data: int) -> np.ndarray:
    if target.count < n_data:
        raise StructuralError(f"target holds {target.count} entries, {n_data} requested")
    return np.flatnonzero(~target.flags[:n_data])


def _weighted(values, reference):
    return (values - reference) / (1.0 + np.abs(reference))


def residual(
    coeffs,
    target: SpectralData,
    fixed: FixedData,
    *,
    n_data: int | None = None,
    n_left: int | None = None,
    opts: SearchOptions | None = None,
) -> np.ndarray:
    """Weighted eigenvalue mismatches followed by weighted ratio mismatches.

    Flagged target entries are dropped, so the length is 2 * (unflagged count).
    """
    if not fixed.domain.symmetric:
        raise UnsupportedError("interior data determine q only when a1 + a2 = l")
    coeffs = np.asarray(coeffs, dtype=float)
    n_data = target.count if n_data is None else n_data
    n_left = coeffs.size // 2 if n_left is None else n_left
    keep = _usable(target, n_data)
    spec = ProblemSpec(fixed.domain, potential_from_coeffs(coeffs, fixed.domain, n_left), fixed.h, fixed.H)
    try:
        data = extract_data(spec, n_data, opts)
    except TimeScaleError as exc:
        raise ForwardSolveError(coeffs, exc) from exc
    ev = _weighted(data.eigenvalues[keep], target.eigenvalues[keep])
    ra = _weighted(data.ratios[keep], target.ratios[keep])
    return np.concatenate([ev, ra])


def jacobian(coeffs, target: SpectralData, fixed: FixedData, step: float, **kw) -> np.ndarray:
    """Central differences, one column per coefficient."""
    if step <= 0:
        raise StructuralError("finite-difference step must be > 0")
    coeffs = np.asarray(coeffs, dtype=float)
    kw.setdefault("n_left", coeffs.size // 2)
    cols = []
    for k in range(coeffs.size):
        e = np.zeros_like(coeffs)
        e[k] = step
        plus = residual(coeffs + e, target, fixed, **kw)
        minus = residual(coeffs - e, target, fixed, **kw)
        cols.append((plus - minus) / (2.0 * step))
    return np.column_stack(cols)


def reconstruct(
    target: SpectralData,
    fixed: FixedData,
    config: InverseConfig | None = None,
    opts: SearchOptions | None = None,
) -> ReconstructionReport:
    """Minimize |residual|^2 + reg |c|^2 from c = 0.

    Non-convergence is reported through ``converged=False``, never raised.
    """
    cfg = config or InverseConfig()
    keep = _usable(target, cfg.n_data)
    if keep.size < cfg.n_coef:
        raise StructuralError(
            f"{keep.size} unflagged data pairs, need >= {cfg.n_coef} for {cfg.n_coef} modes"
        )
    kw = dict(n_data=cfg.n_data, n_left=cfg.n_basis_left, opts=opts)
    c = np.zeros(cfg.n_coef)
    r = residual(c, target, fixed, **kw)

    def objective(res, coef):
        return float(res @ res + cfg.reg * coef @ coef)

    obj = objective(r, c)
    mu = cfg.damping
    history = [float(np.linalg.norm(r))]
    objectives = [obj]
    reason, it, sv = "max_iter", 0, None
    eye = np.eye(cfg.n_coef)
    while True:
        if history[-1] <= cfg.residual_tol:
            reason = "residual"
            break
        if it >= cfg.max_iter:
            break
        it += 1
        J = jacobian(c, target, fixed, cfg.fd_step, **kw)
        sv = np.linalg.svd(J, compute_uv=False)
        A = J.T @ J + cfg.reg * eye
        g = J.T @ r + cfg.reg * c
        accepted = False
        for _ in range(30):
            delta = np.linalg.solve(A + mu * eye, -g)
            trial = c + delta
            try:
                r_trial = residual(trial, target, fixed, **kw)
            except ForwardSolveError:
                mu *= cfg.damping_up
                continue
            obj_trial = objective(r_trial, trial)
            if obj_trial < obj:
                c, r, obj = trial, r_trial, obj_trial
                mu = max(mu * cfg.damping_down, 1e-15)
                accepted = True
                break
            mu *= cfg.damping_up
        if not accepted:
            reason = "stalled"
            break
        history.append(float(np.linalg.norm(r)))
        objectives.append(obj)
        if np.linalg.norm(delta) <= cfg.step_tol * (1.0 + np.linalg.norm(c)):
            reason = "residual" if history[-1] <= cfg.residual_tol else "step"
            break

    m = keep.size
    return ReconstructionReport(
        potential=potential_from_coeffs(c, fixed.domain, cfg.n_basis_left),
        coefficients=c,
        residual_norm=history[-1],
        iterations=it,
        converged=history[-1] <= cfg.residual_tol,
        reason=reason,
        history=history,
        objective_history=objectives,
        eigen_misfit=float(np.linalg.norm(r[:m])),
        ratio_misfit=float(np.linalg.norm(r[m:])),
        singular_values=sv,
    )


def uniqueness_gap(target_a: SpectralData, target_b: SpectralData) -> float:
    """Largest weighted distance between two index-aligned data sets.

    Each component is |x - y| / (1 + max(|x|, |y|)), which keeps the measure
    symmetric; entries flagged in either set are skipped.
    """
    if target_a.count != target_b.count:
        raise StructuralError(
            f"data sets differ in length ({target_a.count} vs {target_b.count})"
        )
    keep = ~(target_a.flags | target_b.flags)

    def dist(x, y):
        return np.abs(x - y) / (1.0 + np.maximum(np.abs(x), np.abs(y)))

    ev = dist(target_a.eigenvalues, target_b.eigenvalues)
    ra = dist(target_a.ratios[keep], target_b.ratios[keep])
    return float(max(np.max(ev, initial=0.0), np.max(ra, initial=0.0)))
