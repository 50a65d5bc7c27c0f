"""Two-interval time scale T = [0, a1] U [a2, l], potentials and problem specs.

All types here are frozen after construction. Arrays held by them are
marked read-only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, StructuralError

SYMMETRY_RTOL = 1e-12


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise StructuralError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise StructuralError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class TimeScaleDomain:
    """Geometry of T = [0, a1] U [a2, l]; use :func:`make_domain` to build one."""

    a1: float
    a2: float
    l: float

    def __post_init__(self):
        for name in ("a1", "a2", "l"):
            object.__setattr__(self, name, _check_finite(name, getattr(self, name)))
        if not 0.0 < self.a1:
            raise StructuralError(f"0 < a1 violated (a1={self.a1!r})")
        if not self.a1 < self.a2:
            raise StructuralError(f"a1 < a2 violated (a1={self.a1!r}, a2={self.a2!r})")
        if not self.a2 < self.l:
            raise StructuralError(f"a2 < l violated (a2={self.a2!r}, l={self.l!r})")

    @property
    def a(self) -> float:
        """Gap length a2 - a1 (graininess at a1)."""
        return self.a2 - self.a1

    @property
    def right_length(self) -> float:
        return self.l - self.a2

    @property
    def symmetric(self) -> bool:
        """True when l - a2 == a1 up to 1e-12 * l."""
        return abs(self.l - self.a2 - self.a1) <= SYMMETRY_RTOL * self.l

    def contains(self, t: float) -> bool:
        return 0.0 <= t <= self.a1 or self.a2 <= t <= self.l

    def interval_of(self, t: float) -> str:
        """Return ``"left"`` or ``"right"``; raise DomainError for t outside T."""
        if 0.0 <= t <= self.a1:
            return "left"
        if self.a2 <= t <= self.l:
            return "right"
        if self.a1 < t < self.a2:
            raise DomainError(f"t={t!r} lies in the gap ({self.a1!r}, {self.a2!r})")
        raise DomainError(f"t={t!r} lies outside [0, {self.l!r}]")


def make_domain(a1: float, a2: float, l: float) -> TimeScaleDomain:
    return TimeScaleDomain(a1, a2, l)


def forward_jump(domain: TimeScaleDomain, t: float) -> tuple[float, float]:
    """Forward jump sigma(t) and graininess mu(t) on the two-interval time scale."""
    domain.interval_of(t)
    if t == domain.a1:
        return domain.a2, domain.a
    return float(t), 0.0


@dataclass(frozen=True, eq=False)
class Potential:
    """Real potential q on T, stored per interval.

    ``form="grid"``: ``left``/``right`` are samples on uniform grids spanning
    [0, a1] and [a2, l] (endpoints included, so q(a1) = left[-1] and
    q(a2) = right[0]); values in between come from a not-a-knot cubic spline.

    ``form="cosine"``: ``left[k]`` multiplies cos(k pi t / a1) and
    ``right[k]`` multiplies cos(k pi (t - a2) / (l - a2)), k = 0, 1, ...
    """

    domain: TimeScaleDomain
    form: str
    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        if self.form not in ("grid", "cosine"):
            raise StructuralError(f"q form must be 'grid' or 'cosine', got {self.form!r}")
        for side in ("left", "right"):
            arr = _frozen(getattr(self, side))
            if arr.ndim != 1:
                raise StructuralError(f"q {side} must be a flat list of numbers")
            if not np.all(np.isfinite(arr)):
                raise StructuralError(f"q {side} values must be finite")
            if self.form == "grid" and arr.size < 2:
                raise StructuralError(
                    f"q grid needs >= 2 points per interval ({side} has {arr.size})"
                )
            if self.form == "cosine" and arr.size < 1:
                raise StructuralError(f"q cosine {side} needs at least one coefficient")
            object.__setattr__(self, side, arr)

    # constructors -------------------------------------------------------

    @classmethod
    def zero(cls, domain: TimeScaleDomain) -> "Potential":
        return cls(domain, "cosine", [0.0], [0.0])

    @classmethod
    def constant(cls, domain: TimeScaleDomain, c: float) -> "Potential":
        return cls(domain, "cosine", [c], [c])

    @classmethod
    def cosine(cls, domain: TimeScaleDomain, left, right) -> "Potential":
        return cls(domain, "cosine", left, right)

    @classmethod
    def from_function(cls, domain: TimeScaleDomain, func, n_points: int = 201) -> "Potential":
        """Sample a vectorized callable on uniform grids of ``n_points`` per interval."""
        tl = np.linspace(0.0, domain.a1, n_points)
        tr = np.linspace(domain.a2, domain.l, n_points)
        return cls(domain, "grid", np.asarray(func(tl), float), np.asarray(func(tr), float))

    # evaluation ---------------------------------------------------------

    @cached_property
    def _splines(self):
        d = self.domain
        return (
            CubicSpline(np.linspace(0.0, d.a1, self.left.size), self.left)
            if self.left.size > 2
            else None,
            CubicSpline(np.linspace(d.a2, d.l, self.right.size), self.right)
            if self.right.size > 2
            else None,
        )

    def _eval_side(self, side: str, t: np.ndarray) -> np.ndarray:
        d = self.domain
        lo, hi = (0.0, d.a1) if side == "left" else (d.a2, d.l)
        vals = self.left if side == "left" else self.right
        t = np.clip(np.asarray(t, dtype=float), lo, hi)
        if self.form == "cosine":
            k = np.arange(vals.size)
            x = (t - lo) / (hi - lo)
            return np.cos(np.pi * np.multiply.outer(x, k)) @ vals
        spline = self._splines[0 if side == "left" else 1]
        if spline is None:
            # two points: linear interpolation is the unique cubic-free choice
            return np.interp(t, [lo, hi], vals)
        out = spline(t)
        # pin the samples exactly at nodes
        nodes = np.linspace(lo, hi, vals.size)
        idx = np.searchsorted(nodes, t)
        hit = (idx < nodes.size) & (nodes[np.minimum(idx, nodes.size - 1)] == t)
        if np.any(hit):
            out = np.where(hit, vals[np.minimum(idx, nodes.size - 1)], out)
        return out

    def left_values(self, t) -> np.ndarray:
        """q on [0, a1] without membership checks (inputs are clipped)."""
        return self._eval_side("left", t)

    def right_values(self, t) -> np.ndarray:
        """q on [a2, l] without membership checks (inputs are clipped)."""
        return self._eval_side("right", t)

    def __call__(self, t):
        return evaluate_potential(self, t)

    @cached_property
    def mesh_cache(self) -> dict:
        """Memo of q sampled on integration meshes, keyed by the caller."""
        return {}

    @property
    def at_a1(self) -> float:
        return float(self.left_values(self.domain.a1))

    @property
    def at_a2(self) -> float:
        return float(self.right_values(self.domain.a2))

    def sup_abs(self, n: int = 513) -> float:
        d = self.domain
        left = self.left_values(np.linspace(0.0, d.a1, n))
        right = self.right_values(np.linspace(d.a2, d.l, n))
        return float(max(np.max(np.abs(left)), np.max(np.abs(right))))

    def shifted(self, c: float) -> "Potential":
        """q + c in the same representation."""
        if self.form == "grid":
            return Potential(self.domain, "grid", self.left + c, self.right + c)
        left, right = self.left.copy(), self.right.copy()
        left[0] += c
        right[0] += c
        return Potential(self.domain, "cosine", left, right)

    def to_dict(self) -> dict:
        return {"form": self.form, "left": self.left.tolist(), "right": self.right.tolist()}


def evaluate_potential(q: Potential, t):
    """Evaluate q at t (scalar or array); any point in the open gap raises DomainError."""
    t_arr = np.asarray(t, dtype=float)
    scalar = t_arr.ndim == 0
    t_arr = np.atleast_1d(t_arr)
    d = q.domain
    in_left = (t_arr >= 0.0) & (t_arr <= d.a1)
    in_right = (t_arr >= d.a2) & (t_arr <= d.l)
    bad = ~(in_left | in_right)
    if np.any(bad):
        d.interval_of(float(t_arr[bad][0]))  # raises with a precise message
    out = np.empty_like(t_arr)
    if np.any(in_left):
        out[in_left] = q.left_values(t_arr[in_left])
    if np.any(in_right):
        out[in_right] = q.right_values(t_arr[in_right])
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class ProblemSpec:
    """The boundary value problem L = (domain, q, h, H)."""

    domain: TimeScaleDomain
    q: Potential
    h: float = 0.0
    H: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "h", _check_finite("h", self.h))
        object.__setattr__(self, "H", _check_finite("H", self.H))
        if self.q.domain != self.domain:
            raise StructuralError("potential is defined on a different domain than the problem")

    def with_potential(self, q: Potential) -> "ProblemSpec":
        return ProblemSpec(self.domain, q, self.h, self.H)

    def to_dict(self) -> dict:
        d = self.domain
        return {"a1": d.a1, "a2": d.a2, "l": d.l, "h": self.h, "H": self.H, "q": self.q.to_dict()}


def zero_problem(a1=1.0, a2=2.0, l=3.0, h=0.0, H=0.0) -> ProblemSpec:
    domain = make_domain(a1, a2, l)
    return ProblemSpec(domain, Potential.zero(domain), h, H)


_SPEC_FIELDS = ("a1", "a2", "l", "h", "H", "q")


def spec_from_dict(data: Mapping[str, Any], *, require_q: bool = True) -> ProblemSpec:
    """Build a validated ProblemSpec from the JSON object layout.

    A missing ``q`` is allowed with ``require_q=False`` and means q = 0.
    """
    if not isinstance(data, Mapping):
        raise StructuralError("problem spec must be a JSON object")
    for name in _SPEC_FIELDS:
        if name not in data and (name != "q" or require_q):
            raise StructuralError(f"missing field {name!r}")
    domain = make_domain(data["a1"], data["a2"], data["l"])
    if "q" in data:
        qd = data["q"]
        if not isinstance(qd, Mapping):
            raise StructuralError("field 'q' must be an object")
        for name in ("form", "left", "right"):
            if name not in qd:
                raise StructuralError(f"missing field 'q.{name}'")
        for side in ("left", "right"):
            if not isinstance(qd[side], list) or not all(
                isinstance(v, (int, float)) and not isinstance(v, bool) for v in qd[side]
            ):
                raise StructuralError(f"field 'q.{side}' must be a list of numbers")
        q = Potential(domain, qd["form"], qd["left"], qd["right"])
    else:
        q = Potential.zero(domain)
    return ProblemSpec(domain, q, data["h"], data["H"])


@dataclass(frozen=True)
class Grid:
    """Output nodes of a solution trace, one strictly increasing array per interval."""

    left: np.ndarray
    right: np.ndarray
    steps: tuple = field(init=False)

    def __post_init__(self):
        for side in ("left", "right"):
            arr = _frozen(getattr(self, side))
            if arr.ndim != 1 or arr.size < 2:
                raise StructuralError(f"grid {side} needs at least two nodes")
            if not np.all(np.diff(arr) > 0):
                raise StructuralError(f"grid {side} nodes must be strictly increasing")
            object.__setattr__(self, side, arr)
        object.__setattr__(
            self, "steps", (float(np.max(np.diff(self.left))), float(np.max(np.diff(self.right))))
        )

    @classmethod
    def uniform(cls, domain: TimeScaleDomain, n_cells: int = 64) -> "Grid":
        return cls(
            np.linspace(0.0, domain.a1, n_cells + 1),
            np.linspace(domain.a2, domain.l, n_cells + 1),
        )

    def check_covers(self, domain: TimeScaleDomain) -> None:
        if self.left[0] != 0.0 or self.left[-1] != domain.a1:
            raise StructuralError("grid left nodes must start at 0 and end at a1")
        if self.right[0] != domain.a2 or self.right[-1] != domain.l:
            raise StructuralError("grid right nodes must start at a2 and end at l")
