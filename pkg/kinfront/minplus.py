"""Time-discrete min-plus scheme for the minimum value and Hopf-Lax evaluation.

The scheme keeps the whole history ``mu_0, ..., mu_n`` because each step
reads every earlier one. Spatial minimisations are direct ``O(N^2)`` scans
over grid nodes.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .closed_form import indicator, mu_values
from .exceptions import InvalidParameterError, TruncationWarning
from .grids import MinPlusField, SpatialGrid, VelocityGrid, sample

logger = logging.getLogger(__name__)

#: iterations of the one-dimensional refinement in each coordinate
REFINE_ITERATIONS = 20


def default_velocity_half_width(grid, dt):
    """``2 max(1, x_max - x_min) / dt``: any node can reach any other in one step."""
    return 2.0 * max(1.0, grid.length) / dt


@dataclass(frozen=True)
class SchemeConfig:
    """Grids and step size of a min-plus run."""

    dt: float
    steps: int
    x: SpatialGrid
    n_v: int = 41
    v_half_width: Optional[float] = None

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError("time step must be positive")
        if self.steps < 0:
            raise InvalidParameterError("step count must be nonnegative")

    def velocity_grid(self, w0=0.0):
        """Symmetric velocity grid holding both 0 and ``w0`` as nodes."""
        half = self.v_half_width or default_velocity_half_width(self.x, self.dt)
        half = max(half, abs(w0))
        dv = 2.0 * half / (max(self.n_v, 3) - 1)
        if w0 != 0:
            dv = abs(w0) / math.ceil(abs(w0) / dv)
        m = math.ceil(half / dv - 1e-9)
        return VelocityGrid(-m * dv, m * dv, 2 * m + 1)


def project_initial(u0):
    """Enforce the constraint ``u <= min_w u + v^2/2`` on initial data.

    Args:
        u0 (MinPlusField): Data on the ``(x, v)`` grid. A column that is
            infinite everywhere stays infinite.

    Returns:
        MinPlusField: ``min(u0, min_w u0 + v^2/2)`` nodewise.
    """
    if not u0.has_velocity:
        raise InvalidParameterError("projection needs an (x, v) field")
    v = u0.v.nodes
    projected = np.minimum(u0.values, u0.column_min()[:, None] + 0.5 * v[None, :] ** 2)
    return u0.with_values(projected)


def constraint_residual(u):
    """``max(u - min_w u - v^2/2)`` over the finite nodes; nonpositive when the constraint holds."""
    v = u.v.nodes
    with np.errstate(invalid="ignore"):
        gap = u.values - u.column_min()[:, None] - 0.5 * v[None, :] ** 2
    gap = gap[np.isfinite(gap)]
    return float(gap.max()) if gap.size else -math.inf


def dirac_datum(x_grid, v_grid, y0=0.0, w0=0.0):
    """Projected Dirac mass ``0_{x=y0} + min(0_{v=w0}, v^2/2)`` at the nearest nodes."""
    values = np.full((x_grid.n_x, v_grid.n_v), np.inf)
    i = x_grid.index_of(y0)
    j = int(np.argmin(np.abs(v_grid.nodes - w0)))
    values[i, j] = 0.0
    return project_initial(MinPlusField(values, x_grid, v_grid))


def _parabola_scan(values, sq_dist, t):
    """``min_y (x - y)^2/(2 t^2) + values(y)`` at every node ``x``."""
    finite = np.isfinite(values)
    if not finite.any():
        return np.full(sq_dist.shape[0], np.inf)
    costs = sq_dist[:, finite] / (2.0 * t * t) + values[finite][None, :]
    return costs.min(axis=1)


@dataclass
class SchemeState:
    """History of the discrete minimum values.

    Attributes:
        dt (float): Time step.
        history (list): ``MinPlusField`` objects ``mu_0, ..., mu_n`` on the spatial grid.
        u0 (MinPlusField): Projected initial data on the ``(x, v)`` grid.
    """

    dt: float
    history: List[MinPlusField]
    u0: MinPlusField
    _sq_dist: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError("time step must be positive")
        self.u0.v.require_zero()
        if not self.history:
            raise InvalidParameterError("the history must hold at least mu_0")

    @classmethod
    def start(cls, u0, dt):
        """State at step 0: project ``u0`` and take its column minimum."""
        projected = project_initial(u0)
        mu0 = MinPlusField(projected.column_min(), projected.x)
        return cls(dt, [mu0], projected)

    @property
    def grid(self):
        return self.u0.x

    @property
    def n(self):
        return len(self.history) - 1

    @property
    def time(self):
        return self.n * self.dt

    def t(self, k):
        return k * self.dt

    @property
    def sq_dist(self):
        if self._sq_dist is None:
            x = self.grid.nodes
            self._sq_dist = (x[:, None] - x[None, :]) ** 2
        return self._sq_dist


def _transport_term(state, t):
    """``u0(x - t v_j, v_j)`` at every node ``x`` and velocity node ``v_j``."""
    x = state.grid.nodes
    v = state.u0.v.nodes
    positions = x[:, None] - t * v[None, :]
    return sample(state.u0.values, state.grid, positions)


def scheme_step(state):
    """Advance the minimum value by one step and append it to the history.

    ``mu_{n+1}(x)`` is the smaller of ``min_v u0(x - t_{n+1} v, v) + t_{n+1}``
    and ``min_k [min_v(v^2/2 + mu_{n-k}(x - t_k v)) + t_k]`` over
    ``0 <= k <= n``. The inner minima over ``v`` are scans over nodes ``y``
    with ``v = (x - y)/t_k``, so they do not interpolate. The transport term
    samples ``u0`` along the velocity nodes with conservative linear
    interpolation, and also scans the parabolas of ``min_w u0``, which the
    projected datum contains.

    Args:
        state (SchemeState): The current state; mutated in place.

    Returns:
        MinPlusField: The new ``mu_{n+1}``.

    Warns:
        TruncationWarning: When a transport minimum sits on the velocity grid boundary.
    """
    n = state.n
    t_next = state.t(n + 1)

    along = _transport_term(state, t_next)
    column = along.min(axis=1)
    parabolas = _parabola_scan(state.history[0].values, state.sq_dist, t_next)
    argmin = along.argmin(axis=1)
    clipped = np.isfinite(column) & (column < parabolas) & (
        (argmin == 0) | (argmin == state.u0.v.n_v - 1)
    )
    if clipped.any():
        warnings.warn(
            "transport minimum at the velocity grid boundary for {} nodes at step {}; "
            "widen the velocity grid".format(int(clipped.sum()), n + 1),
            TruncationWarning,
        )
    new = np.minimum(column, parabolas) + t_next

    # k = 0 keeps mu_n itself, so the minimum value never increases
    new = np.minimum(new, state.history[n].values)
    for k in range(1, n + 1):
        scan = _parabola_scan(state.history[n - k].values, state.sq_dist, state.t(k))
        new = np.minimum(new, scan + state.t(k))

    mu_next = MinPlusField(new, state.grid)
    state.history.append(mu_next)
    logger.debug("step %d: min value %.6g", n + 1, float(np.min(new)))
    return mu_next


def run_scheme(u0, dt, steps):
    """Run ``steps`` scheme steps from ``u0`` and return the final state."""
    state = SchemeState.start(u0, dt)
    for _ in range(steps):
        scheme_step(state)
    logger.info("ran %d min-plus steps of size %g on %d nodes", steps, dt, state.grid.n_x)
    return state


def mu_n_closed(n, dt, x, w=0.0):
    """Closed form of the discrete minimum value started from a Dirac mass at ``(0, w)``.

    The minimum of ``|x - t_i w|^2/(2 t_k^2) + t_{i+k}`` over the index set
    ``{i + k <= n - 1} | {(n, 0), (0, n)}``, where ``k = 0`` means the
    indicator ``0_{x = t_i w}``.

    Args:
        n (int): Step count, nonnegative.
        dt (float): Time step.
        x (float or numpy.ndarray): Positions.
        w (float, optional): Initial velocity. Defaults to 0.

    Returns:
        float or numpy.ndarray: The values.

    Example:
        >>> mu_n_closed(2, 0.5, 1.0)
        1.5
    """
    if n < 0:
        raise InvalidParameterError("step count must be nonnegative")
    x = np.asarray(x, dtype=float)
    pairs = {(i, k) for i in range(n) for k in range(n - i)} | {(n, 0), (0, n)}
    best = np.full(x.shape, np.inf)
    for i, k in sorted(pairs):
        residual = x - i * dt * w
        if k == 0:
            value = indicator(residual, x) + i * dt
        else:
            value = residual ** 2 / (2.0 * (k * dt) ** 2) + (i + k) * dt
        best = np.minimum(best, value)
    return float(best) if best.ndim == 0 else best


def datum_at(u0, y, w):
    """Bilinear conservative interpolation of an ``(x, v)`` field at ``(y, w)``."""
    column = sample(u0.values, u0.x, np.full(u0.v.n_v, y))
    return float(sample(column, u0.v, w))


def _jumped_costs(u0, t, x, v):
    """``v^2/2 + min(mu(t, x-y; v), mu(t, x-y; w)) + u0(y, w)`` over grid nodes."""
    y = u0.x.nodes
    w = u0.v.nodes
    mu_v, _ = mu_values(t, x - y, v)
    mu_w, _ = mu_values(t, (x - y)[:, None], w[None, :])
    with np.errstate(invalid="ignore"):
        costs = np.minimum(mu_v[:, None], mu_w) + u0.values
    return 0.5 * v * v + costs


def _stencil_finite(u0, i, j):
    block = u0.values[max(i - 1, 0): i + 2, max(j - 1, 0): j + 2]
    return bool(np.isfinite(block).all())


def _refine(u0, t, x, v, i, j, best):
    """Bounded scalar search (golden section with parabolic steps) around the grid
    argmin, one coordinate at a time."""
    y_star, w_star = u0.x.nodes[i], u0.v.nodes[j]

    def cost(y, w):
        m = min(mu_values(t, x - y, v)[0], mu_values(t, x - y, w)[0])
        return float(0.5 * v * v + m + datum_at(u0, y, w))

    options = {"maxiter": REFINE_ITERATIONS}
    lo, hi = max(y_star - u0.x.dx, u0.x.x_min), min(y_star + u0.x.dx, u0.x.x_max)
    res = minimize_scalar(lambda y: cost(y, w_star), bounds=(lo, hi), method="bounded", options=options)
    if res.fun < best:
        best, y_star = float(res.fun), float(res.x)
    lo, hi = max(w_star - u0.v.dv, u0.v.v_min), min(w_star + u0.v.dv, u0.v.v_max)
    res = minimize_scalar(lambda w: cost(y_star, w), bounds=(lo, hi), method="bounded", options=options)
    return min(best, float(res.fun))


def hopflax_u(u0, t, x, v, refine=True):
    """Solution of the limit system by the representation formula.

    The infimum over ``(y, w)`` of ``phi(t, x - y, v; w) + u0(y, w)``. The
    unjumped ballistic branch of ``phi`` is the transport term
    ``u0(x - t v, v) + t``. The jumped branch is minimised over the grid nodes,
    then refined in ``y`` and in ``w`` when ``u0`` is finite on the 3x3
    stencil around the grid argmin.

    Args:
        u0 (MinPlusField): Initial data on the ``(x, v)`` grid.
        t (float): Time, positive.
        x (float): Position.
        v (float): Velocity.
        refine (bool, optional): Whether to run the local refinement. Defaults to True.

    Returns:
        float: The value of ``u(t, x, v)``.
    """
    if not t > 0:
        raise InvalidParameterError("hopflax_u needs t > 0")
    transport = datum_at(u0, x - t * v, v) + t
    costs = _jumped_costs(u0, t, x, v)
    i, j = np.unravel_index(np.argmin(costs), costs.shape)
    best = float(costs[i, j])
    if refine and math.isfinite(best) and _stencil_finite(u0, i, j):
        best = _refine(u0, t, x, v, i, j, best)
    return min(transport, best)


def hopflax_min(u0, t, x):
    """Minimum value ``min_(y, w) mu(t, x - y; w) + u0(y, w)`` over grid nodes."""
    if not t >= 0:
        raise InvalidParameterError("time must be nonnegative")
    y = u0.x.nodes
    w = u0.v.nodes
    values, _ = mu_values(t, (x - y)[:, None], w[None, :])
    return float(np.min(values + u0.values))


def reconstruct_u(history, u0, dt, x, v):
    """Rebuild ``u(t_n, x, v)`` from the minimum-value history.

    ``min(u0(x - t_n v, v) + t_n, v^2/2 + min_k mu_{n-k}(x - t_k v) + t_k)``
    with ``t_n = (len(history) - 1) dt``. ``x`` and ``v`` broadcast.

    Args:
        history (list): ``MinPlusField`` values ``mu_0, ..., mu_n``.
        u0 (MinPlusField): Initial data on the ``(x, v)`` grid.
        dt (float): Time step.
        x (float or numpy.ndarray): Positions.
        v (float or numpy.ndarray): Velocities.

    Returns:
        numpy.ndarray: The reconstructed values.
    """
    n = len(history) - 1
    x, v = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(v, dtype=float))
    if n == 0:
        return np.vectorize(lambda a, b: datum_at(u0, a, b))(x, v)
    t_n = n * dt
    grid = history[0].x
    best = np.vectorize(lambda a, b: datum_at(u0, a, b))(x - t_n * v, v) + t_n
    for k in range(n + 1):
        s = k * dt
        mu = sample(history[n - k].values, grid, x - s * v)
        best = np.minimum(best, 0.5 * v * v + mu + s)
    return best
