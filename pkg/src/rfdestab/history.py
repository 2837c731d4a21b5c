"""Piecewise-linear history segments on a trailing time window.

A delay system consumes, at every instant, the restriction of the state to
the window [-r, 0] (offsets relative to "now").  This module provides the
container for such restrictions: a vector-valued function on [-r, 0] stored
as samples on a strictly increasing offset grid and interpolated linearly in
between.  Segments are immutable; every operation returns a new segment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "HistorySegment",
    "sup_norm",
    "extend",
    "history_distance",
    "sample_history",
    "clip_to_ball",
]

# absolute slack accepted when a query or a grid endpoint sits just outside
# the window due to rounding
RANGE_TOL = 1e-12

# adjacent grid norms differing by more than this (relative) trigger the
# one-shot midpoint refinement inside sup_norm
REFINE_TOL = 1e-9

DEFAULT_GRID_POINTS = 64


@dataclass(frozen=True)
class HistorySegment:
    """State history on [-delay, 0], piecewise linear between grid offsets."""

    delay: float
    grid: np.ndarray     # (k,) strictly increasing offsets, covers [-delay, 0]
    values: np.ndarray   # (k, n) one state row per offset

    def __post_init__(self):
        grid = np.ascontiguousarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        values = np.ascontiguousarray(values)
        if not np.isfinite(self.delay) or self.delay <= 0.0:
            raise ValueError(f"delay must be a positive real, got {self.delay!r}")
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid needs at least the two window endpoints")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("grid offsets must be strictly increasing")
        if abs(grid[0] + self.delay) > RANGE_TOL or abs(grid[-1]) > RANGE_TOL:
            raise ValueError(
                f"grid must span [-delay, 0]; got [{grid[0]!r}, {grid[-1]!r}] "
                f"for delay {self.delay!r}"
            )
        if values.shape[0] != grid.size:
            raise ValueError("need exactly one value row per grid offset")
        if not np.isfinite(values).all():
            raise ValueError("history values must be finite")
        if grid[0] != -self.delay or grid[-1] != 0.0:
            grid = grid.copy()
            grid[0] = -self.delay
            grid[-1] = 0.0
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    # -- trusted fast path used by the integrator (skips validation) --------
    @classmethod
    def _trusted(cls, delay: float, grid: np.ndarray, values: np.ndarray):
        seg = object.__new__(cls)
        object.__setattr__(seg, "delay", delay)
        object.__setattr__(seg, "grid", grid)
        object.__setattr__(seg, "values", values)
        return seg

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    # -- constructors --------------------------------------------------------
    @classmethod
    def constant(cls, delay: float, value) -> "HistorySegment":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        grid = np.array([-delay, 0.0])
        return cls(delay, grid, np.vstack([value, value]))

    @classmethod
    def from_function(
        cls,
        delay: float,
        fn: Callable[[float], Sequence[float]],
        num_points: int = DEFAULT_GRID_POINTS,
        knots: Iterable[float] = (),
    ) -> "HistorySegment":
        """Sample ``fn`` on a uniform grid plus any user knots."""
        grid = np.linspace(-delay, 0.0, num_points)
        extra = np.asarray(list(knots), dtype=float)
        if extra.size:
            grid = np.union1d(grid, extra)
        vals = np.array([np.atleast_1d(np.asarray(fn(g), dtype=float)) for g in grid])
        return cls(delay, grid, vals)

    # -- evaluation ----------------------------------------------------------
    def eval(self, theta: float) -> np.ndarray:
        """Value at offset ``theta``; exact (bitwise) at grid offsets."""
        if theta < -self.delay - RANGE_TOL or theta > RANGE_TOL:
            raise ValueError(
                f"offset {theta!r} outside the window [{-self.delay!r}, 0]"
            )
        theta = min(max(theta, -self.delay), 0.0)
        grid = self.grid
        i = int(np.searchsorted(grid, theta, side="right")) - 1
        if i < 0:
            i = 0
        if grid[i] == theta:
            return self.values[i].copy()
        if i >= grid.size - 1:
            return self.values[-1].copy()
        w = (theta - grid[i]) / (grid[i + 1] - grid[i])
        return (1.0 - w) * self.values[i] + w * self.values[i + 1]

    def eval_many(self, thetas: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`eval`; rows of values for each offset."""
        thetas = np.asarray(thetas, dtype=float)
        if thetas.size and (
            thetas.min() < -self.delay - RANGE_TOL or thetas.max() > RANGE_TOL
        ):
            raise ValueError("offsets outside the history window")
        th = np.clip(thetas, -self.delay, 0.0)
        grid = self.grid
        idx = np.clip(np.searchsorted(grid, th, side="right") - 1, 0, grid.size - 2)
        lo = grid[idx]
        span = grid[idx + 1] - lo
        w = (th - lo) / span
        out = (1.0 - w)[:, None] * self.values[idx] + w[:, None] * self.values[idx + 1]
        exact = th == lo
        if np.any(exact):
            out[exact] = self.values[idx[exact]]
        top = th == grid[-1]
        if np.any(top):
            out[top] = self.values[-1]
        return out

    def with_knots(self, extra: np.ndarray) -> "HistorySegment":
        """Same function, denser grid (union with ``extra``)."""
        grid = np.union1d(self.grid, np.asarray(extra, dtype=float))
        return HistorySegment(self.delay, grid, self.eval_many(grid))

    def add_constant(self, w) -> "HistorySegment":
        """Shift every value row by the constant vector ``w``."""
        w = np.atleast_1d(np.asarray(w, dtype=float))
        return HistorySegment(self.delay, self.grid.copy(), self.values + w)

    # -- serialization -------------------------------------------------------
    def to_json_dict(self) -> dict:
        return {
            "r": self.delay,
            "n": self.dim,
            "grid": self.grid.tolist(),
            "values": self.values.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "HistorySegment":
        seg = cls(float(data["r"]), np.asarray(data["grid"]), np.asarray(data["values"]))
        if seg.dim != int(data["n"]):
            raise ValueError("declared dimension does not match the value rows")
        return seg


def sup_norm(segment: HistorySegment) -> float:
    """Largest Euclidean value norm over the window.

    For a piecewise-linear segment the pointwise norm is convex on every
    linear piece, so grid offsets already bracket the maximum; midpoints are
    evaluated as the single bisection refinement whenever adjacent grid norms
    disagree beyond REFINE_TOL (here: always, which is both cheaper to reason
    about and strictly more conservative).
    """
    norms = np.sqrt(np.einsum("ij,ij->i", segment.values, segment.values))
    best = float(norms.max())
    if segment.grid.size > 1:
        gaps = np.abs(np.diff(norms))
        if np.any(gaps > REFINE_TOL * (1.0 + best)):
            mids = 0.5 * (segment.values[:-1] + segment.values[1:])
            mid_norms = np.sqrt(np.einsum("ij,ij->i", mids, mids))
            best = max(best, float(mid_norms.max()))
    return best


def extend(segment: HistorySegment, v, step: float) -> HistorySegment:
    """Slide the window forward by ``step``, appending a linear ramp.

    The result at offset ``theta`` equals ``segment(theta + step)`` for
    ``theta <= -step`` and ``segment(0) + (theta + step) * v`` above; the two
    formulas agree at the knot ``-step``.  Requires ``0 <= step < delay``;
    a zero step returns the segment unchanged (segments are immutable).
    """
    if step == 0.0:
        return segment
    if not (0.0 < step < segment.delay):
        raise ValueError(
            f"step must lie inside [0, {segment.delay!r}), got {step!r}"
        )
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (segment.dim,):
        raise ValueError(f"slope must have shape ({segment.dim},)")
    r = segment.delay
    grid = segment.grid
    x0 = segment.values[-1]

    # shifted knots that survive inside [-r, -step)
    lo = step - r  # old offsets strictly above this survive
    i0 = int(np.searchsorted(grid, lo, side="right"))
    keep = grid[i0:] - step          # in (-r, 0]; the 0 maps to -step
    keep_vals = segment.values[i0:]

    head_needed = keep.size == 0 or keep[0] != -r
    parts_g = []
    parts_v = []
    if head_needed:
        parts_g.append([-r])
        parts_v.append(segment.eval(lo)[None, :])
    parts_g.append(keep)
    parts_v.append(keep_vals)
    # ramp: knot at -step carries x(0) (already present as keep[-1]); top knot 0
    parts_g.append([0.0])
    parts_v.append((x0 + step * v)[None, :])

    new_grid = np.concatenate([np.asarray(p, dtype=float) for p in parts_g])
    new_vals = np.vstack(parts_v)
    return HistorySegment(r, new_grid, new_vals)


def history_distance(a: HistorySegment, b: HistorySegment) -> float:
    """Sup norm of the difference of two segments sharing a window."""
    if abs(a.delay - b.delay) > RANGE_TOL:
        raise ValueError("segments live on different windows")
    grid = np.union1d(a.grid, b.grid)
    diff = a.eval_many(grid) - b.eval_many(grid)
    return float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).max())


def sample_history(
    rng: np.random.Generator,
    delay: float,
    dim: int,
    norm_bound: float,
    max_knots: int = 4,
    slope_cap: float | None = None,
    densify: int = 33,
) -> HistorySegment:
    """Random piecewise-linear segment inside the closed norm ball.

    Draws 1..max_knots interior knots, then walks knot values uniformly in
    the ball while clipping increments so slopes stay below ``slope_cap``
    (default ``8 * norm_bound / delay``).  ``densify`` grid points are added
    so downstream quadratures see a reasonable resolution; they do not change
    the function.
    """
    if norm_bound < 0:
        raise ValueError("norm_bound must be nonnegative")
    k = int(rng.integers(1, max_knots + 1))
    interior = np.sort(rng.uniform(-delay, 0.0, size=k))
    grid = np.concatenate([[-delay], interior, [0.0]])
    grid = np.unique(grid)
    if slope_cap is None:
        slope_cap = 8.0 * max(norm_bound, 1e-12) / delay

    def ball_point() -> np.ndarray:
        z = rng.normal(size=dim)
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return np.zeros(dim)
        radius = norm_bound * rng.random() ** (1.0 / dim)
        return z * (radius / nz)

    vals = np.empty((grid.size, dim))
    vals[0] = ball_point()
    for i in range(1, grid.size):
        target = ball_point()
        dv = target - vals[i - 1]
        span = grid[i] - grid[i - 1]
        lim = slope_cap * span
        nd = np.linalg.norm(dv)
        if nd > lim:
            dv *= lim / nd
        vals[i] = vals[i - 1] + dv
    seg = HistorySegment(delay, grid, vals)
    if densify and densify > grid.size:
        seg = seg.with_knots(np.linspace(-delay, 0.0, densify))
    return seg


def clip_to_ball(segment: HistorySegment, norm_bound: float) -> HistorySegment:
    """Radially rescale grid values so every point norm is at most the bound."""
    norms = np.sqrt(np.einsum("ij,ij->i", segment.values, segment.values))
    if norms.size == 0 or norms.max() <= norm_bound:
        return segment
    scale = np.minimum(1.0, norm_bound / np.maximum(norms, 1e-300))
    return HistorySegment(segment.delay, segment.grid, segment.values * scale[:, None])
