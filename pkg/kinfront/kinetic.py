"""Semi-Lagrangian solver for the scaled BGK equation and its reaction variant.

The density obeys ``eps (f_t + v f_x) = M_eps rho - f + r rho (M_eps - f/sqrt(eps))``.
Each step integrates the relaxation exactly along characteristics and freezes
``rho`` at the step start. The Maxwellian used inside the solver is
renormalised so that the trapezoid rule integrates it to exactly one, which
makes mass conservation and the maximum principle hold to rounding.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .closed_form import phi_values
from .exceptions import (
    AccuracyWarning,
    InvalidParameterError,
    MaxPrincipleViolation,
    TruncationWarning,
)
from .grids import SpatialGrid, VelocityGrid, remap, sample

logger = logging.getLogger(__name__)

#: Gaussian tail mass that the velocity grid is allowed to cut off
TAIL_TOLERANCE = 1e-12
#: fraction of column mass allowed on the outermost velocity nodes
BOUNDARY_MASS_TOLERANCE = 1e-10
#: relative slack on the upper cap of the maximum principle
CAP_RTOL = 1e-12

BOUNDARIES = ("zero", "periodic")
INTERPOLATIONS = ("exponential", "linear", "log")
#: half width of the band around ``x = t v`` left out of :func:`wkb_error`
DISCONTINUITY_BAND = 0.25


def maxwellian(epsilon, v):
    """Gaussian velocity density with variance ``epsilon``.

    Args:
        epsilon (float): Variance, positive.
        v (float or numpy.ndarray): Velocities.

    Returns:
        float or numpy.ndarray: ``(2 pi eps)^(-1/2) exp(-v^2/(2 eps))``.

    Example:
        >>> round(maxwellian(0.1, 0), 5)
        1.26157
    """
    if not epsilon > 0:
        raise InvalidParameterError("epsilon must be positive")
    return np.exp(-np.square(v) / (2.0 * epsilon)) / math.sqrt(2.0 * math.pi * epsilon)


def velocity_half_width(epsilon, tolerance=TAIL_TOLERANCE):
    """``6 sqrt(eps |log tolerance|)``, wide enough to hide the Gaussian truncation."""
    return 6.0 * math.sqrt(epsilon * abs(math.log(tolerance)))


def velocity_grid(epsilon, n_v=200, tolerance=TAIL_TOLERANCE):
    return VelocityGrid.symmetric(velocity_half_width(epsilon, tolerance), n_v)


def discrete_maxwellian(epsilon, v_grid):
    """Maxwellian on the nodes, rescaled so its trapezoid integral is one."""
    m = maxwellian(epsilon, v_grid.nodes)
    return m / trapezoid(m, dx=v_grid.dv)


@dataclass(frozen=True, eq=False)
class KineticField:
    """Nonnegative density on the ``(x, v)`` grid at a given time."""

    epsilon: float
    x: SpatialGrid
    v: VelocityGrid
    f: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")
        f = np.asarray(self.f, dtype=float)
        if f.shape != (self.x.n_x, self.v.n_v):
            raise InvalidParameterError(
                "density of shape {} does not match the grid".format(f.shape)
            )
        if not np.isfinite(f).all():
            raise InvalidParameterError("density must be finite")
        if (f < 0).any():
            raise InvalidParameterError("density must be nonnegative")
        f.setflags(write=False)
        object.__setattr__(self, "f", f)

    def evolve(self, f, dt):
        return KineticField(self.epsilon, self.x, self.v, f, self.time + dt)

    @property
    def cap(self):
        """``sqrt(eps) M`` per velocity node, the upper bound of the maximum principle."""
        return math.sqrt(self.epsilon) * discrete_maxwellian(self.epsilon, self.v)

    def mass(self):
        return float(trapezoid(self.f, dx=self.v.dv, axis=1).sum() * self.x.dx)


@dataclass(frozen=True, eq=False)
class WKBField:
    """``u = -eps log f`` and ``b = u - v^2/2`` on the grid of a kinetic field."""

    epsilon: float
    x: SpatialGrid
    v: VelocityGrid
    u: np.ndarray
    b: np.ndarray
    time: float = 0.0


def rho(field):
    """Macroscopic density ``int f dv`` by the trapezoid rule, per position.

    Warns:
        TruncationWarning: When the outermost velocity nodes carry more than
            ``BOUNDARY_MASS_TOLERANCE`` of the column mass.
    """
    density = trapezoid(field.f, dx=field.v.dv, axis=1)
    edge = 0.5 * field.v.dv * (field.f[:, 0] + field.f[:, -1])
    heavy = edge > BOUNDARY_MASS_TOLERANCE * density
    if heavy.any():
        warnings.warn(
            "velocity grid truncates mass at {} positions".format(int(heavy.sum())),
            TruncationWarning,
        )
    return density


def _shift(values, grid, shifts, boundary, interpolation):
    periodic = boundary == "periodic"
    if interpolation == "exponential":
        return remap(values, grid, shifts, periodic=periodic)
    positions = grid.nodes[:, None] - shifts[None, :]
    if interpolation == "log":
        with np.errstate(divide="ignore"):
            logs = -np.log(values)
        return np.exp(-sample(logs, grid, positions, fill=math.inf, periodic=periodic))
    return sample(values, grid, positions, fill=0.0, periodic=periodic)


def duhamel_weights(h):
    """Weights ``(a, b)`` of ``rho(x)`` and ``rho(x - dt v)`` in the gain term.

    ``h = dt/eps``. The gain integral ``int_0^h e^(-s) rho(x - s eps v) ds`` is
    computed with ``rho`` linear along the characteristic, so ``a + b = 1 - e^(-h)``.
    """
    b = (1.0 - (1.0 + h) * math.exp(-h)) / h
    a = -math.expm1(-h) - b
    return a, b


def duhamel_step(field, dt, boundary="zero", interpolation="exponential"):
    """One step of the BGK equation without reaction.

    ``f(x, v) <- e^(-h) f(x - dt v, v) + M(v) (a rho(x) + b rho(x - dt v))``
    with ``h = dt/eps`` and the weights of :func:`duhamel_weights`.

    Args:
        field (KineticField): Density at the step start.
        dt (float): Time step, positive.
        boundary (str, optional): ``"zero"`` (no inflow) or ``"periodic"``.
            Defaults to ``"zero"``.
        interpolation (str, optional): ``"exponential"`` moves cell averages
            with the conservative remap of :func:`kinfront.grids.remap`, exact
            on profiles ``exp(-u/eps)`` with ``u`` linear. ``"linear"``
            interpolates ``f`` and also conserves mass. ``"log"`` interpolates
            ``log f`` and does not. Defaults to ``"exponential"``.

    Returns:
        KineticField: The density at ``time + dt``.

    Warns:
        AccuracyWarning: When ``dt`` exceeds ``epsilon``.
    """
    if not dt > 0:
        raise InvalidParameterError("time step must be positive")
    if boundary not in BOUNDARIES:
        raise InvalidParameterError("boundary must be one of {}".format(BOUNDARIES))
    if interpolation not in INTERPOLATIONS:
        raise InvalidParameterError("interpolation must be one of {}".format(INTERPOLATIONS))
    eps = field.epsilon
    if dt > eps:
        warnings.warn(
            "time step {} exceeds epsilon {}; the step is stable but inaccurate".format(dt, eps),
            AccuracyWarning,
        )
    h = dt / eps
    a, b = duhamel_weights(h)
    shifts = dt * field.v.nodes

    density = rho(field)
    streamed = _shift(field.f, field.x, shifts, boundary, interpolation)
    upstream = _shift(density, field.x, shifts, boundary, interpolation)
    m = discrete_maxwellian(eps, field.v)
    f = math.exp(-h) * streamed + m[None, :] * (a * density[:, None] + b * upstream)
    return field.evolve(f, dt)


def _react(field, tau, r):
    """Exact flow of ``f_t = (r rho / eps^(3/2)) (sqrt(eps) M - f)`` with ``rho`` frozen."""
    eps = field.epsilon
    density = rho(field)
    cap = field.cap
    decay = np.exp(-r * density * tau / eps ** 1.5)
    f = cap[None, :] + (field.f - cap[None, :]) * decay[:, None]
    return KineticField(eps, field.x, field.v, np.maximum(f, 0.0), field.time)


def check_max_principle(field):
    """Raise unless ``0 <= f <= sqrt(eps) M`` at every node."""
    cap = field.cap
    excess = field.f - cap[None, :] * (1 + CAP_RTOL)
    if (field.f < 0).any() or (excess > 0).any():
        raise MaxPrincipleViolation(
            "kinetic: density leaves [0, sqrt(eps) M] by {:.3g} at t={:.6g}".format(
                float(excess.max()), field.time
            )
        )


def reaction_step(field, dt, r, boundary="zero", interpolation="exponential"):
    """One Strang-split step of the reaction-transport equation.

    Half a reaction step, a :func:`duhamel_step`, then another half reaction
    step. The reaction is integrated exactly with ``rho`` frozen, so it relaxes
    ``f`` towards ``sqrt(eps) M`` without crossing it.

    Args:
        field (KineticField): Density satisfying ``0 <= f <= sqrt(eps) M``.
        dt (float): Time step.
        r (float): Reaction rate, nonnegative.
        boundary (str, optional): See :func:`duhamel_step`.
        interpolation (str, optional): See :func:`duhamel_step`.

    Returns:
        KineticField: The density at ``time + dt``.

    Raises:
        MaxPrincipleViolation: When the result leaves ``[0, sqrt(eps) M]``.
    """
    if r < 0:
        raise InvalidParameterError("reaction rate must be nonnegative")
    if r == 0:
        return duhamel_step(field, dt, boundary, interpolation)
    half = _react(field, 0.5 * dt, r)
    moved = duhamel_step(half, dt, boundary, interpolation)
    out = _react(moved, 0.5 * dt, r)
    check_max_principle(out)
    return out


def hopf_cole(field):
    """Logarithmic transform ``u = -eps log f``; ``f = 0`` maps to ``inf``."""
    with np.errstate(divide="ignore"):
        u = -field.epsilon * np.log(field.f)
    b = u - 0.5 * field.v.nodes[None, :] ** 2
    return WKBField(field.epsilon, field.x, field.v, u, b, field.time)


def initial_from_u0(u0, x_grid, v_grid, epsilon, time=0.0):
    """Density ``exp(-u0/eps)`` for a cost ``u0`` given on the grid nodes."""
    with np.errstate(over="ignore"):
        f = np.exp(-np.asarray(u0, dtype=float) / epsilon)
    return KineticField(epsilon, x_grid, v_grid, f, time)


def dirac_initial(x_grid, v_grid, epsilon, width=None):
    """Mollified Dirac datum ``u0 = x^2/(2 sigma^2) + v^2/2`` with ``sigma = 2 dx`` by default."""
    sigma = width if width is not None else 2.0 * x_grid.dx
    x, v = x_grid.nodes, v_grid.nodes
    u0 = x[:, None] ** 2 / (2.0 * sigma ** 2) + 0.5 * v[None, :] ** 2
    return initial_from_u0(u0, x_grid, v_grid, epsilon)


def indicator_initial(x_grid, v_grid, epsilon, support=(-1.0, 1.0)):
    """``1_G(x) sqrt(eps) M(v)`` for an interval ``G``, the data of the barrier estimate."""
    inside = x_grid.window(*support).astype(float)
    cap = math.sqrt(epsilon) * discrete_maxwellian(epsilon, v_grid)
    return KineticField(epsilon, x_grid, v_grid, inside[:, None] * cap[None, :])


@dataclass(frozen=True)
class KineticConfig:
    """Parameters of a kinetic run.

    ``dt`` defaults to ``epsilon / 4``. The step is shrunk so that a whole
    number of steps reaches ``t_final``.
    """

    epsilon: float
    x: SpatialGrid
    v: VelocityGrid
    t_final: float = 1.0
    dt: Optional[float] = None
    r: float = 0.0
    boundary: str = "zero"
    interpolation: str = "exponential"
    snapshot_times: Tuple[float, ...] = ()

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidParameterError("epsilon must be positive")
        if not self.t_final > 0:
            raise InvalidParameterError("final time must be positive")
        if self.r < 0:
            raise InvalidParameterError("reaction rate must be nonnegative")
        if self.boundary not in BOUNDARIES:
            raise InvalidParameterError("boundary must be one of {}".format(BOUNDARIES))
        if self.interpolation not in INTERPOLATIONS:
            raise InvalidParameterError(
                "interpolation must be one of {}".format(INTERPOLATIONS)
            )

    @property
    def steps(self):
        target = self.dt if self.dt is not None else self.epsilon / 4.0
        return max(1, int(math.ceil(self.t_final / target - 1e-9)))

    @property
    def step(self):
        return self.t_final / self.steps


@dataclass
class KineticRun:
    """Snapshots and bookkeeping of a kinetic run."""

    config: KineticConfig
    snapshots: List[KineticField] = field(default_factory=list)
    mass: List[float] = field(default_factory=list)

    @property
    def final(self):
        return self.snapshots[-1]

    def mass_drift(self):
        """Largest relative deviation of the total mass from its initial value."""
        m = np.asarray(self.mass)
        return float(np.max(np.abs(m - m[0])) / m[0]) if m[0] > 0 else 0.0


def run_kinetic(config, f0):
    """Integrate from ``f0`` to ``config.t_final``.

    Snapshots are kept at the initial time, at the steps nearest to each of
    ``config.snapshot_times`` and at the final time. With ``r > 0`` every step
    checks the maximum principle.

    Args:
        config (KineticConfig): Run parameters.
        f0 (KineticField): Initial density.

    Returns:
        KineticRun: The snapshots and the mass after every step.
    """
    dt, steps = config.step, config.steps
    keep = {int(round(t / dt)) for t in config.snapshot_times if 0 < t < config.t_final}
    run = KineticRun(config, [f0], [f0.mass()])
    field_ = f0
    for n in range(1, steps + 1):
        field_ = reaction_step(field_, dt, config.r, config.boundary, config.interpolation)
        run.mass.append(field_.mass())
        if n in keep or n == steps:
            run.snapshots.append(field_)
    logger.info(
        "kinetic run: eps=%g, %d steps of %g, mass drift %.3g",
        config.epsilon,
        steps,
        dt,
        run.mass_drift(),
    )
    return run


def _lipschitz(values, spacing, axis, periodic=False):
    if periodic:
        diffs = np.diff(values, axis=axis, append=np.take(values, [0], axis=axis))
    else:
        diffs = np.diff(values, axis=axis)
    diffs = diffs[np.isfinite(diffs)]
    return float(np.max(np.abs(diffs)) / spacing) if diffs.size else 0.0


@dataclass
class AprioriReport:
    """Bounds on ``b = u - v^2/2`` along a run.

    Each row holds the time, the observed quantity and the bound it is checked
    against, for the range of ``b`` (i), its Lipschitz constant in ``x`` (ii)
    and in ``v`` (iv).
    """

    rows: List[dict]
    ok: bool

    def failures(self):
        return [row for row in self.rows if not row["ok"]]


def apriori_report(history, periodic=False, atol=1e-6, rtol=0.05):
    """Check the a priori bounds on ``b`` over a list of :class:`WKBField`.

    With ``b0`` the first entry: ``min b0 <= b <= max b0`` (so
    ``sup|b| <= sup|b0|``), ``Lip_x b <= Lip_x b0`` and
    ``Lip_v b <= Lip_v b0 + t Lip_x b0``. The first two get ``atol`` as slack;
    the last adds ``rtol`` times the bound for the interpolation error.

    Args:
        history (list): WKB fields, the first one at the initial time.
        periodic (bool, optional): Whether the x grid wraps around. Defaults to False.
        atol (float, optional): Absolute slack. Defaults to 1e-6.
        rtol (float, optional): Relative slack of the velocity bound. Defaults to 0.05.

    Returns:
        AprioriReport: One row per field and bound.
    """
    b0 = history[0].b
    if not np.isfinite(b0).all():
        raise InvalidParameterError("the a priori bounds need a bounded b0")
    lo, hi = float(b0.min()), float(b0.max())
    t0 = history[0].time
    lip_x0 = _lipschitz(b0, history[0].x.dx, 0, periodic)
    lip_v0 = _lipschitz(b0, history[0].v.dv, 1)
    rows = []
    for wkb in history:
        b = wkb.b
        finite = np.isfinite(b).all()
        sup = float(np.max(np.abs(b))) if finite else math.inf
        rows.append(
            dict(
                time=wkb.time,
                bound="range",
                observed=sup,
                limit=max(abs(lo), abs(hi)),
                ok=bool(finite and b.min() >= lo - atol and b.max() <= hi + atol),
            )
        )
        lip_x = _lipschitz(b, wkb.x.dx, 0, periodic)
        rows.append(
            dict(time=wkb.time, bound="lip_x", observed=lip_x, limit=lip_x0, ok=lip_x <= lip_x0 + atol)
        )
        lip_v = _lipschitz(b, wkb.v.dv, 1)
        limit = lip_v0 + (wkb.time - t0) * lip_x0
        rows.append(
            dict(
                time=wkb.time,
                bound="lip_v",
                observed=lip_v,
                limit=limit,
                ok=lip_v <= limit * (1 + rtol) + atol,
            )
        )
    report = AprioriReport(rows, all(row["ok"] for row in rows))
    if not report.ok:
        logger.warning("a priori bounds violated: %s", report.failures())
    return report


def wkb_error(wkb, w=0.0, x_window=(-2.0, 2.0), v_window=(-2.0, 2.0), band=DISCONTINUITY_BAND):
    """``sup |u_eps - phi(t, x, v; w)|`` over a window of nodes.

    ``phi`` jumps across the lines ``x = t v`` and ``x = t w`` (for ``w != 0``),
    where the ballistic leg stops being admissible, and ``u_eps`` smooths the
    jump over a layer that only shrinks with ``eps``. Nodes closer than
    ``band`` to those lines are left out; ``band=0`` keeps them all.

    Raises:
        InvalidParameterError: When ``band < 0`` or no node survives.
    """
    if band < 0:
        raise InvalidParameterError("band must be nonnegative")
    xm = wkb.x.window(*x_window)
    vm = wkb.v.window(*v_window)
    x, v = wkb.x.nodes[xm], wkb.v.nodes[vm]
    t = wkb.time
    X, V = np.meshgrid(x, v, indexing="ij")
    kept = np.abs(X - t * V) >= band
    if w != 0:
        kept &= np.abs(X - t * w) >= band
    if not kept.any():
        raise InvalidParameterError("wkb_error: the band covers the whole window")
    exact = phi_values(t, X, V, w)
    u = wkb.u[np.ix_(xm, vm)]
    with np.errstate(invalid="ignore"):
        err = np.abs(u - exact)
    err = np.where(np.isinf(u) & np.isinf(exact), 0.0, err)
    return float(np.max(err[kept]))


def constraint_gap(wkb, x_window=(-2.0, 2.0), v_window=(-2.0, 2.0)):
    """``max (u - min_w u - v^2/2)`` over a window; the limit makes it nonpositive."""
    xm = wkb.x.window(*x_window)
    vm = wkb.v.window(*v_window)
    column_min = wkb.u.min(axis=1)
    v = wkb.v.nodes
    gap = wkb.u - column_min[:, None] - 0.5 * v[None, :] ** 2
    gap = gap[np.ix_(xm, vm)]
    gap = gap[np.isfinite(gap)]
    return float(gap.max()) if gap.size else -math.inf


def barrier_report(wkb, x_window=(-2.0, 2.0), v_window=(-2.0, 2.0), slack=None):
    """Two-sided barrier for data ``1_G(x) sqrt(eps) M(v)`` with ``G`` containing ``(-1, 1)``.

    Lower side: ``u >= v^2/2 + (eps/2) log(2 pi eps)``, which the maximum principle
    implies for ``eps <= 1``.
    Upper side: ``u <= v^2/2 + t + ((|x| + (t/2)|v| + 1)/(t/2))^2 / 2``, up to a
    slack that vanishes with ``eps``. The default slack is ``5 eps max(1, |log eps|)``.

    Returns:
        dict: Margins on both sides and the ``ok`` flag.
    """
    eps, t = wkb.epsilon, wkb.time
    if not t > 0:
        raise InvalidParameterError("the barrier needs t > 0")
    if slack is None:
        slack = 5.0 * eps * max(1.0, abs(math.log(eps)))
    xm = wkb.x.window(*x_window)
    vm = wkb.v.window(*v_window)
    x, v = wkb.x.nodes[xm], wkb.v.nodes[vm]
    u = wkb.u[np.ix_(xm, vm)]
    X, V = np.meshgrid(x, v, indexing="ij")
    lower = 0.5 * V ** 2 + 0.5 * eps * math.log(2.0 * math.pi * eps)
    upper = 0.5 * V ** 2 + t + 0.5 * ((np.abs(X) + 0.5 * t * np.abs(V) + 1.0) / (0.5 * t)) ** 2
    lower_margin = float(np.min(u - lower))
    upper_margin = float(np.min(upper + slack - u))
    return dict(
        time=t,
        lower_margin=lower_margin,
        upper_margin=upper_margin,
        slack=slack,
        ok=bool(lower_margin >= -1e-9 and upper_margin >= 0),
    )
