"""Closed-form fundamental solutions of the limiting min-plus system.

Every cost here lives in the extended half line ``[0, +inf]``. The value
``PLUS_INFINITY`` is IEEE ``inf``: it saturates under addition and is the
identity of ``min``, which is all the indicator algebra needs.
"""
import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidParameterError, NoTrajectoryError

__all__ = [
    "PLUS_INFINITY",
    "BranchTag",
    "PhasePoint",
    "RateParams",
    "TravelSplit",
    "Trajectory",
    "heat_rate",
    "indicator",
    "mu",
    "mu_brute",
    "mu_gamma",
    "mu_gamma_tagged",
    "mu_gamma_values",
    "mu_reaction",
    "mu_reaction_tagged",
    "mu_values",
    "mu_zero",
    "phi",
    "phi_brute",
    "phi_brute_split",
    "phi_upper_bound",
    "phi_values",
    "psi_homog",
    "reaction_trajectory",
    "relax_homog",
    "trajectory",
    "trajectory_cost",
]

PLUS_INFINITY = math.inf

#: relative tolerance for the zero tests inside indicator functions
INDICATOR_RTOL = 1e-12


class BranchTag(enum.IntEnum):
    """Which candidate realises a minimum value.

    The integer order doubles as the tie-break order.
    """

    BALLISTIC = 0
    POWER_LAW = 1
    EDGE_PARABOLA = 2


@dataclass(frozen=True)
class PhasePoint:
    """A ``(t, x, v)`` triple in macroscopic units."""

    t: float
    x: float
    v: float

    def __post_init__(self):
        if not self.t >= 0:
            raise InvalidParameterError("time must be nonnegative, got {}".format(self.t))
        if not (math.isfinite(self.x) and math.isfinite(self.v)):
            raise InvalidParameterError("position and velocity must be finite")


@dataclass(frozen=True)
class RateParams:
    """Reaction rate ``r`` and velocity tail exponent ``gamma``."""

    r: float = 0.0
    gamma: float = 2.0

    def __post_init__(self):
        if not self.r >= 0:
            raise InvalidParameterError("reaction rate r must be >= 0, got {}".format(self.r))
        if not self.gamma >= 1:
            raise InvalidParameterError("gamma must be >= 1, got {}".format(self.gamma))


@dataclass(frozen=True)
class TravelSplit:
    """Durations of the three legs of a kernel path: at ``w``, in flight, at ``v``."""

    s1: float
    s2: float
    s3: float = 0.0

    def __post_init__(self):
        if min(self.s1, self.s2, self.s3) < 0:
            raise InvalidParameterError("travel durations must be nonnegative")

    @property
    def total(self):
        return self.s1 + self.s2 + self.s3


def indicator(value, scale=1.0):
    """The min-plus indicator ``0_{value = 0}``.

    Args:
        value (float or numpy.ndarray): The quantity tested against zero.
        scale (float or numpy.ndarray, optional): Magnitude used for the relative
            tolerance ``1e-12 * max(1, |scale|)``. Defaults to 1.

    Returns:
        float or numpy.ndarray: 0 where ``value`` vanishes, ``inf`` elsewhere.
    """
    tol = INDICATOR_RTOL * np.maximum(1.0, np.abs(scale))
    out = np.where(np.abs(value) <= tol, 0.0, np.inf)
    return float(out) if np.ndim(out) == 0 else out


def _check_time(t):
    if np.any(np.asarray(t) < 0):
        raise InvalidParameterError("time must be nonnegative")


def _candidates(t, x, w, r=0.0, gamma=2.0):
    """Stack the three candidate values, shape ``(3,) + broadcast shape``."""
    t, x, w = np.broadcast_arrays(
        np.asarray(t, dtype=float), np.asarray(x, dtype=float), np.asarray(w, dtype=float)
    )
    ax = np.abs(x)
    exponent = gamma / (gamma + 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # run at w, then rest
        s = np.where(w != 0, x / np.where(w != 0, w, 1.0), -1.0)
        ballistic = np.where(
            (w != 0) & (s >= 0) & (s <= t), (1 + r) * s - r * t, np.inf
        )

        # run at x/s for the optimal s, then rest
        scaled = np.power((1 + r) * ax, exponent)
        power_law = np.where(
            scaled <= (1 + r) * t, (1 + 1 / gamma) * scaled - r * t, np.inf
        )

        # the flight leg uses all the available time
        edge = np.where(
            t > 0,
            np.power(ax, gamma) / (gamma * np.power(np.where(t > 0, t, 1.0), gamma)) + t,
            indicator(x, x),
        )
        edge = np.where(scaled >= (1 + r) * t, edge, np.inf)
    return np.stack([ballistic, power_law, edge])


def _argmin(candidates):
    tags = np.argmin(candidates, axis=0)
    values = np.take_along_axis(candidates, tags[np.newaxis], axis=0)[0]
    # nothing admissible means the point is unreachable: blame the edge branch
    tags = np.where(np.isinf(values), int(BranchTag.EDGE_PARABOLA), tags)
    return values, tags


def mu_values(t, x, w=0.0):
    """Vectorised minimum value ``mu(t, x; w)``.

    Broadcasts ``t``, ``x`` and ``w`` with numpy rules.

    Returns:
        tuple: ``(values, tags)`` arrays; ``tags`` holds :class:`BranchTag` integers.
    """
    _check_time(t)
    return _argmin(_candidates(t, x, w))


def mu(t, x, w=0.0):
    """Minimum over velocities of the fundamental solution started at ``(0, w)``.

    Three candidates compete: the ballistic run ``x/w`` (admissible when
    ``0 <= x/w <= t``), the power law ``(3/2)|x|^(2/3)`` (when ``|x| <= t^(3/2)``)
    and the edge parabola ``x^2/(2t^2) + t`` (when ``|x| >= t^(3/2)``). Ties go
    to the earlier branch in that list.

    Args:
        t (float): Time, nonnegative.
        x (float): Position.
        w (float, optional): Initial velocity. Defaults to 0.

    Returns:
        tuple: The value (``inf`` when unreachable) and its :class:`BranchTag`.

    Raises:
        InvalidParameterError: When ``t < 0``.

    Example:
        >>> mu(2, 1, 1)
        (1.0, <BranchTag.BALLISTIC: 0>)
    """
    values, tags = mu_values(t, x, w)
    return float(values), BranchTag(int(tags))


def mu_zero(t, x):
    """``mu(t, x; 0)``: the power law inside the cone ``|x| <= t^(3/2)``, the edge parabola outside."""
    return mu(t, x, 0.0)


def heat_rate(t, x):
    """Rate function ``x^2/(4t)`` of the vanishing-viscosity heat equation.

    It decays to 0 as ``t`` grows, unlike :func:`mu_zero`.
    """
    _check_time(t)
    if t == 0:
        return indicator(x, x)
    return x * x / (4.0 * t)


def psi_homog(t, v, w):
    """Fundamental solution of the space-homogeneous problem, ``min(t + 0_{v=w}, v^2/2)``."""
    _check_time(t)
    return min(t + indicator(v - w, w), 0.5 * v * v)


def relax_homog(phi0, v, t):
    """Evolve velocity-only data by inf-convolution with :func:`psi_homog`.

    Args:
        phi0 (numpy.ndarray): Initial cost on the velocity nodes ``v``.
        v (numpy.ndarray): Velocity nodes.
        t (float): Elapsed time.

    Returns:
        numpy.ndarray: ``min(t + phi0(v), v^2/2 + min phi0)``.
    """
    _check_time(t)
    phi0 = np.asarray(phi0, dtype=float)
    return np.minimum(t + phi0, 0.5 * np.asarray(v) ** 2 + np.min(phi0))


def _zero_flight_face(t, x, w, v):
    """Cheapest ``s1 + s3`` with ``s1 w + s3 v = x``, ``s1, s3 >= 0``, ``s1 + s3 <= t``.

    This is the ``s2 = 0`` face of the kernel problem, where the flight leg
    degenerates into the indicator ``0_{x = s1 w + s3 v}``. The objective is
    linear on a segment, so the optimum sits on one of its ends.

    Returns:
        tuple: ``(cost, split)``, with ``split`` None when the face is empty.
    """
    scale = max(abs(x), abs(t * w), abs(t * v))
    points = []
    if w != 0:
        points.append((x / w, 0.0))
    if v != 0:
        points.append((0.0, x / v))
    if w != v:
        s1 = (x - t * v) / (w - v)
        points.append((s1, t - s1))
    elif w == 0:
        points.append((0.0, 0.0))
    best, split = PLUS_INFINITY, None
    for s1, s3 in points:
        if s1 < 0 or s3 < 0 or s1 + s3 > t * (1 + INDICATOR_RTOL):
            continue
        if indicator(x - s1 * w - s3 * v, scale) == 0 and s1 + s3 < best:
            best, split = s1 + s3, TravelSplit(s1, 0.0, s3)
    return best, split


def _flight_costs(residual, s2):
    with np.errstate(divide="ignore", invalid="ignore"):
        return residual * residual / (2.0 * s2 * s2)


def mu_brute(t, x, w=0.0, n=400):
    """Grid minimisation of ``(x - s1 w)^2/(2 s2^2) + s1 + s2`` over ``s1 + s2 <= t``.

    ``s1`` and ``s2`` range over ``numpy.linspace(0, t, n)``. The face ``s2 = 0``
    carries the indicator ``0_{x = s1 w}`` and is solved exactly.

    Raises:
        InvalidParameterError: When ``n < 2`` or ``t < 0``.
    """
    if n < 2:
        raise InvalidParameterError("grid resolution n must be >= 2")
    _check_time(t)
    best, _ = _zero_flight_face(t, x, w, 0.0)
    if t == 0:
        return best
    s = np.linspace(0.0, t, n)
    i, j = np.meshgrid(np.arange(n), np.arange(1, n), indexing="ij")
    feasible = i + j <= n - 1
    s1, s2 = s[i], s[j]
    values = _flight_costs(x - s1 * w, s2) + s1 + s2
    values = np.where(feasible, values, np.inf)
    return min(best, float(values.min()))


def phi_upper_bound(t, x, v):
    """The quadratic bound ``v^2/2 + x^2/(2t^2) + t`` obtained with ``s2 = t``."""
    if t <= 0:
        raise InvalidParameterError("phi needs t > 0")
    return 0.5 * v * v + x * x / (2.0 * t * t) + t


def _is_special_case(t, x, v, w):
    return v == w and w != 0 and x == t * v


def phi_values(t, x, v, w):
    """Vectorised :func:`phi`; ``x``, ``v`` and ``w`` broadcast."""
    if not t > 0:
        raise InvalidParameterError("phi needs t > 0, got {}".format(t))
    x, v, w = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(v, dtype=float), np.asarray(w, dtype=float)
    )
    jumped = 0.5 * v * v + np.minimum(mu_values(t, x, v)[0], mu_values(t, x, w)[0])
    special = (v == w) & (w != 0) & (x == t * v)
    with np.errstate(divide="ignore", invalid="ignore"):
        ballistic = np.where(special, x / np.where(w != 0, w, 1.0), np.inf)
    return np.minimum(jumped, ballistic)


def phi(t, x, v, w):
    """Fundamental solution started from a Dirac mass at ``(0, w)``.

    Equal to ``v^2/2 + min(mu(t, x; v), mu(t, x; w))``. On the set
    ``v = w = x/t`` the unjumped ballistic path also competes, and the value
    becomes ``min(x/w, w^2/2 + mu(t, x; w))``. That set is detected by exact
    equality of the inputs.

    Args:
        t (float): Time, positive.
        x (float): Position.
        v (float): Velocity.
        w (float): Initial velocity.

    Returns:
        float: The kernel value.

    Raises:
        InvalidParameterError: When ``t <= 0``.

    Example:
        >>> phi(1, 0.5, 1, 0)
        1.0
    """
    if not t > 0:
        raise InvalidParameterError("phi needs t > 0, got {}".format(t))
    jumped = 0.5 * v * v + min(mu(t, x, v)[0], mu(t, x, w)[0])
    if _is_special_case(t, x, v, w):
        return min(x / w, jumped)
    return jumped


def phi_brute(t, x, v, w, n=200):
    """Grid oracle for :func:`phi` over an ``n^3`` grid of travel splits.

    Evaluates both branches of the kernel: the unjumped ballistic path
    ``0_{x = tv} + min(0_{v=w}, v^2/2) + t``, and ``v^2/2`` plus the grid minimum
    of ``(x - s1 w - s3 v)^2/(2 s2^2) + s1 + s2 + s3``. The ``s2 = 0`` face is
    solved exactly.
    """
    return phi_brute_split(t, x, v, w, n)[0]


def phi_brute_split(t, x, v, w, n=200):
    """:func:`phi_brute` together with the minimising :class:`TravelSplit`.

    Returns:
        tuple: ``(value, split)``. ``split`` is None when the unjumped
        ballistic path wins or nothing is feasible.

    Example:
        >>> value, split = phi_brute_split(1, 0.5, 1, 0, n=3)
        >>> value, split
        (1.0, TravelSplit(s1=0.0, s2=0.0, s3=0.5))
    """
    if n < 2:
        raise InvalidParameterError("grid resolution n must be >= 2")
    if not t > 0:
        raise InvalidParameterError("phi needs t > 0, got {}".format(t))
    first = indicator(x - t * v, x) + min(indicator(v - w, w), 0.5 * v * v) + t
    inner, split = _zero_flight_face(t, x, w, v)
    s = np.linspace(0.0, t, n)
    i, k = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    s1, s3 = s[i], s[k]
    residual = x - s1 * w - s3 * v
    for j in range(1, n):
        feasible = i + j + k <= n - 1
        if not feasible.any():
            break
        values = np.where(feasible, _flight_costs(residual, s[j]) + s1 + s[j] + s3, np.inf)
        best = np.unravel_index(np.argmin(values), values.shape)
        if values[best] < inner:
            inner = float(values[best])
            split = TravelSplit(float(s1[best]), float(s[j]), float(s3[best]))
    jumped = 0.5 * v * v + inner
    if first < jumped:
        return first, None
    return jumped, split


def mu_reaction(t, x, w, params=None):
    """Minimum value with reaction, ``mu((1+r)t, (1+r)x; w) - r t``.

    Args:
        t (float): Time, nonnegative.
        x (float): Position.
        w (float): Initial velocity.
        params (RateParams, optional): Only ``r`` is used; the tail exponent is 2.
            Defaults to ``RateParams()``.

    Returns:
        float: The value, negative where the population has grown.
    """
    return mu_reaction_tagged(t, x, w, params)[0]


def mu_reaction_tagged(t, x, w, params=None):
    """:func:`mu_reaction` together with the branch realising it."""
    params = params or RateParams()
    r = params.r
    value, tag = mu((1 + r) * t, (1 + r) * x, w)
    return value - r * t, tag


def mu_gamma_values(t, x, w, params):
    """Vectorised :func:`mu_gamma`, returning ``(values, tags)``."""
    _check_time(t)
    return _argmin(_candidates(t, x, w, params.r, params.gamma))


def mu_gamma_tagged(t, x, w, params):
    """:func:`mu_gamma` together with the branch realising it."""
    values, tags = mu_gamma_values(t, x, w, params)
    return float(values), BranchTag(int(tags))


def mu_gamma(t, x, w, params):
    """Minimum value with reaction for the velocity tail ``exp(-|v|^gamma/gamma)``.

    The candidates are ``(1+r)x/w - rt`` (ballistic, same admissibility as in
    :func:`mu`), ``(1 + 1/gamma)((1+r)|x|)^(gamma/(gamma+1)) - rt`` when the
    optimal flight time ``((1+r)|x|)^(gamma/(gamma+1))/(1+r)`` fits in ``t``,
    and ``|x|^gamma/(gamma t^gamma) + t`` otherwise. At ``gamma = 2`` this is
    :func:`mu_reaction`.

    Args:
        t (float): Time, nonnegative.
        x (float): Position.
        w (float): Initial velocity.
        params (RateParams): Reaction rate and tail exponent.

    Returns:
        float: The value.

    Raises:
        InvalidParameterError: When ``gamma < 1`` or ``t < 0``.
    """
    if not isinstance(params, RateParams):
        params = RateParams(*params)
    return mu_gamma_tagged(t, x, w, params)[0]


@dataclass(frozen=True)
class Trajectory:
    """A piecewise-linear extremal path in phase space.

    ``segments`` holds ``(duration, velocity)`` pairs in order. A trailing
    zero-duration segment records the final velocity jump. ``start.v`` is the
    initial velocity, which is held without cost.
    """

    segments: tuple
    start: PhasePoint
    cost: float

    @property
    def duration(self):
        return sum(d for d, _ in self.segments)

    @property
    def switch_times(self):
        return tuple(np.cumsum([d for d, _ in self.segments]))

    @property
    def final_velocity(self):
        return self.segments[-1][1] if self.segments else self.start.v

    def position(self, tau):
        """Position ``x(tau)`` for ``0 <= tau <= duration``."""
        x, elapsed = self.start.x, 0.0
        for d, u in self.segments:
            step = min(d, max(tau - elapsed, 0.0))
            x += step * u
            elapsed += d
        return x

    def velocity(self, tau):
        """Velocity held at time ``tau`` (right-continuous)."""
        elapsed = 0.0
        for d, u in self.segments:
            if elapsed <= tau < elapsed + d:
                return u
            elapsed += d
        return self.final_velocity

    @property
    def endpoint(self):
        return PhasePoint(self.start.t + self.duration, self.position(self.duration), self.final_velocity)


def trajectory_cost(trajectory, r=0.0):
    """Cost accumulated along a path.

    Each jump to velocity ``u`` costs ``u^2/2`` and each unit of time spent at a
    nonzero velocity costs ``1 + r``; resting is free. Every unit of elapsed
    time earns ``-r``, so at ``r > 0`` the cost matches :func:`mu_reaction`.
    """
    cost, moving, previous = 0.0, 0.0, trajectory.start.v
    for d, u in trajectory.segments:
        if u != previous:
            cost += 0.5 * u * u
            previous = u
        if u != 0:
            moving += d
    return cost + (1 + r) * moving - r * trajectory.duration


def _flight_then_rest(t, x, flight_time):
    segments = []
    if x != 0 and flight_time > 0:
        segments.append((flight_time, x / flight_time))
    if t - flight_time > 0 or not segments:
        segments.append((t - flight_time if segments else t, 0.0))
    return segments


def _finish(segments, v):
    if segments[-1][1] != v:
        segments.append((0.0, v))
    return tuple(segments)


def trajectory(t, x, v, w):
    """Extremal path realising :func:`phi` from ``(0, 0, w)`` to ``(t, x, v)``.

    The path redistributes its velocity at most once before the final jump:
    either a flight at ``x/s`` for ``s = min(t, |x|^(2/3))`` then rest, a rest
    then a run at ``v`` for ``x/v``, or a run at ``w`` for ``x/w`` then rest.
    Ties go to the paths that keep ``w``.

    Raises:
        InvalidParameterError: When ``t <= 0``.
        NoTrajectoryError: When ``phi`` is infinite.

    Example:
        >>> trajectory(2, 1, 0, 1).segments
        ((1.0, 1), (1.0, 0.0))
    """
    value = phi(t, x, v, w)
    if math.isinf(value):
        raise NoTrajectoryError("no finite-cost path reaches ({}, {}, {})".format(t, x, v))
    start = PhasePoint(0.0, 0.0, w)

    if _is_special_case(t, x, v, w) and value == x / w:
        return Trajectory(((t, w),), start, value)

    mw, tag_w = mu(t, x, w)
    mv, tag_v = mu(t, x, v)
    if mw <= mv and tag_w is BranchTag.BALLISTIC:
        s = x / w
        segments = [(s, w)] if s > 0 else []
        if t - s > 0 or not segments:
            segments.append((t - s, 0.0))
        segments = _finish(segments, v)
    elif mw > mv and tag_v is BranchTag.BALLISTIC:
        s = x / v
        segments = []
        if t - s > 0:
            segments.append((t - s, 0.0))
        segments.append((s, v))
        segments = tuple(segments)
    else:
        flight_time = min(t, abs(x) ** (2.0 / 3.0))
        segments = _finish(_flight_then_rest(t, x, flight_time), v)
    return Trajectory(segments, start, value)


def reaction_trajectory(t, x, v, params=None, w0=None):
    """Extremal path towards ``(t, x, v)`` with ``x > 0`` for the reaction problem.

    Without ``w0`` the path flies at ``x/s`` for
    ``s = min(t, ((1+r)|x|)^(gamma/(gamma+1))/(1+r))`` and then rests. With a
    positive ``w0`` it keeps the initial velocity for ``x/w0`` and then rests.
    Either way it ends with the jump to ``v``.

    Args:
        t (float): Final time, positive.
        x (float): Final position, positive.
        v (float): Final velocity.
        params (RateParams, optional): Defaults to ``RateParams()``.
        w0 (float, optional): Initial velocity of a ballistic path.

    Returns:
        Trajectory: The path. Its cost comes from :func:`trajectory_cost` and
        so assumes quadratic jump costs, which is exact for ``gamma = 2``.

    Raises:
        InvalidParameterError: When ``t`` or ``x`` is not positive, or when the
            ballistic run does not fit in ``t``.
    """
    params = params or RateParams()
    if not (t > 0 and x > 0):
        raise InvalidParameterError("reaction paths need t > 0 and x > 0")
    r, gamma = params.r, params.gamma
    if w0 is None:
        s = min(t, ((1 + r) * x) ** (gamma / (gamma + 1.0)) / (1 + r))
        start = PhasePoint(0.0, 0.0, 0.0)
        segments = _flight_then_rest(t, x, s)
    else:
        if not (w0 > 0 and x / w0 <= t):
            raise InvalidParameterError(
                "a run at w0={} cannot reach x={} by t={}".format(w0, x, t)
            )
        s = x / w0
        start = PhasePoint(0.0, 0.0, w0)
        segments = [(s, w0)]
        if t - s > 0:
            segments.append((t - s, 0.0))
    path = Trajectory(_finish(segments, v), start, math.nan)
    return Trajectory(path.segments, start, trajectory_cost(path, r))
