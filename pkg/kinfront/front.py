"""Front location for the reaction problem and the checks around it.

The front ``X(t)`` is the right end of the set where the minimum value
``mu_gamma(t, x; w)`` is nonpositive. Its growth rate is only conjectured:
everything here assumes that truncating the unconstrained minimum at 0 gives
the constrained one.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import optimize

from .closed_form import (
    BranchTag,
    RateParams,
    mu_gamma,
    mu_gamma_tagged,
    mu_gamma_values,
    reaction_trajectory,
)
from .exceptions import (
    BoundsViolation,
    DegenerateFitError,
    InvalidParameterError,
    NoFrontError,
    NotInZoneError,
)

logger = logging.getLogger(__name__)

SCAN_POINTS = 1024
BISECT_RTOL = 1e-10
CEILING_MARGIN = 0.5
MIN_FIT_POINTS = 5
PROFILE_POINTS = 200
#: slack on the sign of profile differences
PROFILE_TOL = 1e-9


def _params(params):
    return params if isinstance(params, RateParams) else RateParams(*params)


@dataclass(frozen=True)
class FrontQuery:
    """Where and when to locate the front."""

    params: RateParams
    w: float = 0.0
    times: Tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", _params(self.params))
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if not self.params.r > 0:
            raise InvalidParameterError("front: a front needs r > 0")
        t = np.asarray(self.times)
        if t.size == 0 or (t <= 0).any() or (np.diff(t) <= 0).any():
            raise InvalidParameterError("front: times must be positive and increasing")


def rate_conjecture(params):
    """Conjectured prefactor of ``X(t) ~ c t^(1 + 1/gamma)``.

    ``c = ((gamma/(1+gamma)) r)^(1 + 1/gamma) / (1 + r)``.

    Example:
        >>> round(rate_conjecture(RateParams(1.0, 2.0)), 6)
        0.272166
    """
    params = _params(params)
    r, g = params.r, params.gamma
    if not r > 0:
        raise InvalidParameterError("front: the conjecture needs r > 0")
    return (g / (1.0 + g) * r) ** (1.0 + 1.0 / g) / (1.0 + r)


def bounds_check(r):
    """Rigorous bounds ``((r/(r+2))^(3/2), sqrt(2r))`` on the ``gamma = 2`` prefactor.

    Raises:
        BoundsViolation: When :func:`rate_conjecture` falls outside.
    """
    if not r > 0:
        raise InvalidParameterError("front: bounds need r > 0")
    lower, upper = (r / (r + 2.0)) ** 1.5, math.sqrt(2.0 * r)
    c = rate_conjecture(RateParams(r, 2.0))
    if not lower <= c <= upper:
        raise BoundsViolation(
            "front: conjectured prefactor {} outside [{}, {}] at r={}".format(c, lower, upper, r)
        )
    return lower, upper


def _ceiling(t, params, w):
    c = rate_conjecture(params)
    base = max(
        math.sqrt(2.0 * params.r) * t ** 1.5,
        2.0 * c * t ** (1.0 + 1.0 / params.gamma),
        abs(w) * t,
    )
    return base * (1.0 + CEILING_MARGIN)


def front_location(t, params, w=0.0):
    """Right end ``X(t)`` of ``{x >= 0 : mu_gamma(t, x; w) <= 0}``.

    The set is an interval starting at 0. A scan over ``[0, ceiling]`` brackets
    its end, then bisection refines it to a relative ``1e-10``. The ceiling
    starts from the rigorous upper bound ``sqrt(2r) t^(3/2)`` and doubles until
    the minimum value there is positive.

    Args:
        t (float): Time, positive.
        params (RateParams): ``r > 0`` and ``gamma``.
        w (float, optional): Initial velocity. Defaults to 0.

    Returns:
        float: The front location.

    Raises:
        NoFrontError: When ``r`` or ``t`` is not positive.

    Example:
        >>> round(front_location(100.0, RateParams(1.0, 2.0)), 3)
        272.166
    """
    params = _params(params)
    if not params.r > 0:
        raise NoFrontError("front: no growth without reaction (r={})".format(params.r))
    if not t > 0:
        raise NoFrontError("front: no front at t={}".format(t))

    def f(x):
        return mu_gamma(t, x, w, params)

    top = _ceiling(t, params, w)
    while f(top) <= 0:
        top *= 2.0
    grid = np.linspace(0.0, top, SCAN_POINTS + 1)
    values, _ = mu_gamma_values(t, grid, w, params)
    inside = np.flatnonzero(values <= 0)
    k = int(inside[-1])
    lo, hi = grid[k], grid[k + 1]
    if f(lo) == 0:
        return float(lo)
    x = optimize.bisect(f, lo, hi, xtol=1e-300, rtol=BISECT_RTOL, maxiter=400)
    logger.debug("front at t=%g: bracket [%g, %g] -> %.12g", t, lo, hi, x)
    return float(x)


def fit_exponent(times, locations):
    """Least-squares fit of ``log X = log a + b log t``.

    Args:
        times (array_like): At least five positive times.
        locations (array_like): Front locations at those times.

    Returns:
        tuple: ``(b, a)``, the exponent and the prefactor.

    Raises:
        InvalidParameterError: With fewer than five points.
        DegenerateFitError: When a location is not strictly positive.
    """
    t = np.asarray(times, dtype=float)
    x = np.asarray(locations, dtype=float)
    if t.size < MIN_FIT_POINTS or t.size != x.size:
        raise InvalidParameterError(
            "front: need at least {} matching points to fit".format(MIN_FIT_POINTS)
        )
    if (t <= 0).any():
        raise InvalidParameterError("front: fit times must be positive")
    if not (x > 0).all():
        raise DegenerateFitError("front: cannot fit nonpositive front locations")
    slope, intercept = np.polyfit(np.log(t), np.log(x), 1)
    return float(slope), float(math.exp(intercept))


@dataclass(frozen=True, eq=False)
class FrontTrace:
    """Front locations over a time list and the power law fitted to them.

    ``onset`` is the first time from which the power-law branch realises the
    minimum at the front for every later time; the fit uses those times when
    there are enough of them.
    """

    query: FrontQuery
    times: np.ndarray
    locations: np.ndarray
    tags: Tuple[BranchTag, ...]
    exponent: float
    prefactor: float
    residuals: np.ndarray
    onset: Optional[float]
    conjecture: float

    @property
    def local_exponents(self):
        """Slopes of ``log X`` against ``log t`` between neighbouring times, NaN first."""
        with np.errstate(divide="ignore", invalid="ignore"):
            slopes = np.diff(np.log(self.locations)) / np.diff(np.log(self.times))
        return np.concatenate([[math.nan], slopes])

    def nondecreasing_after_onset(self):
        if self.onset is None:
            return True
        x = self.locations[self.times >= self.onset]
        return bool((np.diff(x) >= 0).all())


def _onset(times, tags):
    onset = None
    for t, tag in zip(reversed(times), reversed(tags)):
        if tag is not BranchTag.POWER_LAW:
            break
        onset = float(t)
    return onset


def front_trace(query, threads=None):
    """Locate the front at every time of ``query`` and fit a power law.

    Args:
        query (FrontQuery): Parameters and times.
        threads (int, optional): Worker threads for the time sweep.

    Returns:
        FrontTrace: Locations, branch tags, the fit and its log residuals.
    """
    params, w = query.params, query.w
    times = np.asarray(query.times)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        locations = np.array(list(pool.map(lambda t: front_location(t, params, w), times)))
    tags = tuple(mu_gamma_tagged(t, x, w, params)[1] for t, x in zip(times, locations))
    onset = _onset(times, tags)

    fit_mask = np.ones(times.size, dtype=bool)
    if onset is not None and np.count_nonzero(times >= onset) >= MIN_FIT_POINTS:
        fit_mask = times >= onset
    exponent, prefactor = fit_exponent(times[fit_mask], locations[fit_mask])
    with np.errstate(divide="ignore"):
        residuals = np.log(locations) - np.log(prefactor * times ** exponent)
    logger.info(
        "front: r=%g gamma=%g w=%g exponent %.6f prefactor %.6f onset %s",
        params.r,
        params.gamma,
        w,
        exponent,
        prefactor,
        onset,
    )
    return FrontTrace(
        query=query,
        times=times,
        locations=locations,
        tags=tags,
        exponent=exponent,
        prefactor=prefactor,
        residuals=residuals,
        onset=onset,
        conjecture=rate_conjecture(params),
    )


def truncate_min(values):
    """Clamp minimum values at 0, the truncation that enforces ``min u >= 0``."""
    return np.maximum(np.asarray(values, dtype=float), 0.0)


@dataclass(frozen=True, eq=False)
class FreidlinProfile:
    """``tau -> mu_gamma(tau, x(tau); w)`` along an extremal path."""

    tau: np.ndarray
    positions: np.ndarray
    values: np.ndarray
    switch_time: float
    unimodal: bool
    concave_on_flight: bool
    positive_interior: Optional[bool]

    @property
    def ok(self):
        return self.unimodal and self.concave_on_flight


def _is_unimodal(values, tol):
    d = np.diff(values)
    falling = np.flatnonzero(d < -tol)
    if falling.size == 0:
        return True
    return not (d[falling[0]:] > tol).any()


def freidlin_profile(t, x, v, w, params=None, w0=None, n=PROFILE_POINTS):
    """Sample the minimum value along the extremal path ending at ``(t, x, v)``.

    The end point must lie in the zone ``x > 0``, ``0 <= v``, ``v t <= x``,
    where extremal paths fly and then rest (see
    :func:`kinfront.closed_form.reaction_trajectory`). The profile should rise
    then fall, and be concave while the path is flying.

    Args:
        t (float): Final time, positive.
        x (float): Final position.
        v (float): Final velocity.
        w (float): Initial velocity inside the minimum value.
        params (RateParams, optional): Defaults to ``RateParams()``.
        w0 (float, optional): Initial velocity of the path; selects the
            ballistic path instead of the free flight.
        n (int, optional): Number of sample times. Defaults to 200.

    Returns:
        FreidlinProfile: The sampled profile and its classification.

    Raises:
        NotInZoneError: When ``(t, x, v)`` is outside the zone.
    """
    params = _params(params)
    if n < PROFILE_POINTS:
        raise InvalidParameterError("front: need at least {} samples".format(PROFILE_POINTS))
    if not (t > 0 and x > 0 and v >= 0 and v * t <= x):
        raise NotInZoneError(
            "front: ({}, {}, {}) is outside the zone x > 0, 0 <= v t <= x".format(t, x, v)
        )
    path = reaction_trajectory(t, x, v, params, w0)
    switch = path.switch_times[0]

    tau = np.linspace(t / n, t, n)
    positions = np.array([path.position(s) for s in tau])
    values, _ = mu_gamma_values(tau, positions, w, params)
    tol = PROFILE_TOL * max(1.0, float(np.max(np.abs(values))))

    unimodal = _is_unimodal(values, tol)
    flying = values[tau <= switch]
    concave = bool((np.diff(flying, 2) <= tol).all()) if flying.size > 2 else True

    positive = None
    end = values[-1] + 0.5 * w * w
    if end > 0:
        positive = bool((values[:-1] + 0.5 * w * w > 0).all())
    return FreidlinProfile(tau, positions, values, switch, unimodal, concave, positive)


@dataclass
class SweepResult:
    """Outcome of :func:`freidlin_sweep`."""

    n: int
    unimodal: int
    concave: int
    failures: list

    @property
    def fraction_unimodal(self):
        return self.unimodal / self.n


def freidlin_sweep(n=500, seed=0, gamma=2.0):
    """Classify profiles at ``n`` random end points of the zone.

    Each draw picks ``t``, ``x``, ``r``, ``w``, a final velocity in
    ``[0, x/t]`` and, half of the time, a ballistic path with ``w0 >= x/t``.

    Returns:
        SweepResult: Counts and the failing draws.
    """
    rng = np.random.default_rng(seed)
    unimodal = concave = 0
    failures = []
    for _ in range(n):
        t = rng.uniform(0.1, 10.0)
        x = rng.uniform(0.01, 20.0)
        v = rng.uniform(0.0, x / t)
        w = rng.uniform(-3.0, 3.0)
        r = rng.uniform(0.05, 5.0)
        w0 = x / t + rng.uniform(0.0, 3.0) if rng.random() < 0.5 else None
        profile = freidlin_profile(t, x, v, w, RateParams(r, gamma), w0)
        unimodal += profile.unimodal
        concave += profile.concave_on_flight
        if not profile.ok:
            failures.append(dict(t=t, x=x, v=v, w=w, r=r, w0=w0))
    if failures:
        logger.warning("front: %d of %d profiles failed the Freidlin check", len(failures), n)
    return SweepResult(n, unimodal, concave, failures)
