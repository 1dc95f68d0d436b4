"""Uniform phase-space grids, min-plus fields and off-grid sampling."""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InvalidParameterError

#: fractional offsets closer than this to a node are snapped onto it
SNAP_TOL = 1e-9


@dataclass(frozen=True)
class SpatialGrid:
    """``n_x`` evenly spaced positions from ``x_min`` to ``x_max`` inclusive."""

    x_min: float
    x_max: float
    n_x: int

    def __post_init__(self):
        if self.n_x < 2:
            raise InvalidParameterError("a spatial grid needs at least 2 nodes")
        if not self.x_max > self.x_min:
            raise InvalidParameterError("x_max must exceed x_min")

    @classmethod
    def from_spacing(cls, x_min, x_max, dx):
        """Grid with spacing as close to ``dx`` as the interval allows."""
        n = int(round((x_max - x_min) / dx)) + 1
        return cls(x_min, x_max, max(n, 2))

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def nodes(self):
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def length(self):
        return self.x_max - self.x_min

    @property
    def axis(self):
        """``(start, step, count)`` of the nodes."""
        return self.x_min, self.dx, self.n_x

    def index_of(self, x):
        """Nearest node index to ``x``."""
        return int(np.clip(round((x - self.x_min) / self.dx), 0, self.n_x - 1))

    def window(self, lo, hi):
        """Boolean mask of the nodes inside ``[lo, hi]``."""
        nodes = self.nodes
        return (nodes >= lo - SNAP_TOL * self.dx) & (nodes <= hi + SNAP_TOL * self.dx)


@dataclass(frozen=True)
class VelocityGrid:
    """Evenly spaced velocities. Callers that minimise over ``v`` need 0 to be a node."""

    v_min: float
    v_max: float
    n_v: int

    def __post_init__(self):
        if self.n_v < 2:
            raise InvalidParameterError("a velocity grid needs at least 2 nodes")
        if not self.v_max > self.v_min:
            raise InvalidParameterError("v_max must exceed v_min")

    @classmethod
    def symmetric(cls, half_width, n_v):
        """``[-half_width, half_width]`` with an odd node count, so 0 is a node."""
        if n_v % 2 == 0:
            n_v += 1
        return cls(-half_width, half_width, n_v)

    @property
    def dv(self):
        return (self.v_max - self.v_min) / (self.n_v - 1)

    @property
    def nodes(self):
        nodes = np.linspace(self.v_min, self.v_max, self.n_v)
        if self.zero_index is not None:
            nodes[self.zero_index] = 0.0
        return nodes

    @property
    def axis(self):
        return self.v_min, self.dv, self.n_v

    @property
    def zero_index(self):
        """Index of the node at 0, or ``None``."""
        p = -self.v_min / self.dv
        k = round(p)
        if abs(p - k) < SNAP_TOL and 0 <= k < self.n_v:
            return int(k)
        return None

    @property
    def contains_zero(self):
        return self.zero_index is not None

    def window(self, lo, hi):
        """Boolean mask of the nodes inside ``[lo, hi]``."""
        nodes = self.nodes
        return (nodes >= lo - SNAP_TOL * self.dv) & (nodes <= hi + SNAP_TOL * self.dv)

    def require_zero(self):
        if not self.contains_zero:
            raise InvalidParameterError(
                "velocity grid [{}, {}] with {} nodes does not contain 0".format(
                    self.v_min, self.v_max, self.n_v
                )
            )
        return self


@dataclass(frozen=True, eq=False)
class MinPlusField:
    """Costs on a spatial grid, or on a spatial times velocity grid.

    ``values`` has shape ``(n_x,)`` or ``(n_x, n_v)``. Entries may be ``inf``
    but never NaN.
    """

    values: np.ndarray
    x: SpatialGrid
    v: Optional[VelocityGrid] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = (self.x.n_x,) if self.v is None else (self.x.n_x, self.v.n_v)
        if values.shape != expected:
            raise InvalidParameterError(
                "field of shape {} does not match grid shape {}".format(values.shape, expected)
            )
        if np.isnan(values).any():
            raise InvalidParameterError("min-plus fields cannot hold NaN")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def has_velocity(self):
        return self.v is not None

    def column_min(self):
        """Minimum over velocity at each position."""
        if self.v is None:
            return self.values.copy()
        return self.values.min(axis=1)

    def shifted(self, c):
        """The field plus a constant."""
        return MinPlusField(self.values + c, self.x, self.v)

    def with_values(self, values):
        return MinPlusField(values, self.x, self.v)

    def at(self, x, v=None):
        """Value at the nearest node."""
        i = self.x.index_of(x)
        if self.v is None:
            return float(self.values[i])
        j = int(np.clip(round((v - self.v.v_min) / self.v.dv), 0, self.v.n_v - 1))
        return float(self.values[i, j])


def sample(values, grid, positions, fill=math.inf, periodic=False):
    """Linear interpolation of grid data at arbitrary positions.

    ``values`` has shape ``(n_x,)`` or ``(n_x, m)``. For 2-d data the last axis
    of ``positions`` must have length ``m``; column ``j`` of ``positions`` is
    looked up in column ``j`` of ``values``.

    An infinite neighbour makes the interpolant infinite unless the position
    lands on a node (offsets within ``SNAP_TOL`` of a node count as on it).

    Args:
        values (numpy.ndarray): Data at the grid nodes.
        grid (SpatialGrid or VelocityGrid): The grid along axis 0 of ``values``.
        positions (numpy.ndarray): Where to evaluate.
        fill (float, optional): Value outside the grid. Defaults to ``inf``.
        periodic (bool, optional): Wrap around with period ``n_x * dx`` instead
            of filling. Defaults to False.

    Returns:
        numpy.ndarray: Interpolated values, shaped like ``positions``.
    """
    values = np.asarray(values, dtype=float)
    start, step, n = grid.axis
    p = (np.asarray(positions, dtype=float) - start) / step
    nearest = np.round(p)
    p = np.where(np.abs(p - nearest) < SNAP_TOL, nearest, p)
    i0 = np.floor(p)
    theta = p - i0
    i0 = i0.astype(int)
    if periodic:
        i1 = np.mod(i0 + 1, n)
        i0 = np.mod(i0, n)
        outside = np.zeros(p.shape, dtype=bool)
    else:
        outside = (p < 0) | (p > n - 1)
        i0 = np.clip(i0, 0, n - 1)
        i1 = np.minimum(i0 + 1, n - 1)

    if values.ndim == 1:
        a, b = values[i0], values[i1]
    else:
        cols = np.arange(values.shape[1])
        a, b = values[i0, cols], values[i1, cols]

    with np.errstate(invalid="ignore"):
        blended = (1.0 - theta) * a + theta * b
    out = np.where(theta == 0, a, blended)
    return np.where(outside, fill, out)


def _log_slopes(values, periodic):
    """Minmod of the one-sided differences of ``log values`` along axis 0.

    Zero at extrema, next to empty cells and on the outer face of the end cells.
    """
    with np.errstate(divide="ignore"):
        logs = np.log(values)
    if periodic:
        before, after = np.roll(logs, 1, axis=0), np.roll(logs, -1, axis=0)
    else:
        before = np.concatenate([logs[:1], logs[:-1]], axis=0)
        after = np.concatenate([logs[1:], logs[-1:]], axis=0)
    with np.errstate(invalid="ignore"):
        left, right = logs - before, after - logs
        slope = np.where(
            left * right > 0, np.sign(right) * np.minimum(np.abs(left), np.abs(right)), 0.0
        )
    return np.where(values > 0, slope, 0.0)


def tail_fraction(q, lam):
    """Share of the mass of ``exp(q xi)``, ``0 <= xi <= 1``, lying in ``xi >= 1 - lam``.

    Example:
        >>> float(tail_fraction(0.0, 0.25))
        0.25
    """
    q, lam = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(lam, dtype=float))
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        rising = np.expm1(-q * lam) / np.expm1(-q)
        falling = np.exp(q * (1.0 - lam)) * np.expm1(q * lam) / np.expm1(q)
    return np.where(q > 0, rising, np.where(q < 0, falling, lam))


def remap(values, grid, shifts, periodic=False):
    """Move cell averages along axis 0 by ``shifts``, one shift per column.

    Each cell carries the exponential profile with its own average whose log
    slope is the minmod of the neighbouring log differences. The new value of a
    cell is the mass of the profile that lands on it, so mass is conserved
    exactly and the zero boundary only loses what flows out. Data of the form
    ``exp(c x)`` move exactly, and flat data stay flat away from the ends.

    Args:
        values (numpy.ndarray): Cell averages, shape ``(n_x,)`` or ``(n_x, m)``.
        grid (SpatialGrid): The grid along axis 0; nodes are cell centres.
        shifts (numpy.ndarray): Displacements, shape ``(m,)``.
        periodic (bool, optional): Wrap around instead of dropping mass that
            leaves the grid. Defaults to False.

    Returns:
        numpy.ndarray: Shape ``(n_x, m)``.
    """
    values = np.asarray(values, dtype=float)
    _, step, n = grid.axis
    a = np.asarray(shifts, dtype=float) / step
    nearest = np.round(a)
    a = np.where(np.abs(a - nearest) < SNAP_TOL, nearest, a)
    whole = np.floor(a)
    theta = a - whole
    slopes = _log_slopes(values, periodic)
    source = np.arange(n)[:, None] - whole.astype(int)[None, :]

    def gather(data, index):
        if periodic:
            inside, index = True, np.mod(index, n)
        else:
            inside = (index >= 0) & (index < n)
            index = np.clip(index, 0, n - 1)
        out = data[index] if data.ndim == 1 else np.take_along_axis(data, index, axis=0)
        return np.where(inside, out, 0.0)

    kept = gather(values, source) * (1.0 - tail_fraction(gather(slopes, source), theta))
    arriving = gather(values, source - 1) * tail_fraction(gather(slopes, source - 1), theta)
    return kept + arriving
