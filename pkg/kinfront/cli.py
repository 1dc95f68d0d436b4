import logging
import math
import os
import sys
from io import StringIO

import click
import numpy as np
import yaml
from click_default_group import DefaultGroup

from . import closed_form, io, minplus
from . import front as _front
from . import kinetic as _kinetic
from . import pdmp as _pdmp
from .__version__ import __version__
from .exceptions import (
    BoundsViolation,
    InvalidParameterError,
    InvariantViolation,
    KinfrontError,
    NumericalError,
)
from .grids import MinPlusField, SpatialGrid, VelocityGrid

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_NUMERICAL = 3


class RangeType(click.ParamType):
    """``a:b:n`` (``n`` evenly spaced values), ``a:b`` (unit spacing) or ``a,b,c``."""

    name = "range"

    def convert(self, value, param, ctx):
        if isinstance(value, np.ndarray):
            return value
        if isinstance(value, (int, float)):
            return np.array([float(value)])
        text = str(value).strip()
        try:
            if ":" in text:
                parts = text.split(":")
                if len(parts) not in (2, 3):
                    self.fail("expected a:b or a:b:n, got {!r}".format(text), param, ctx)
                a, b = float(parts[0]), float(parts[1])
                n = int(parts[2]) if len(parts) == 3 else int(math.floor(b - a + 1e-9)) + 1
                if b < a or n < 1:
                    self.fail("range {!r} is empty".format(text), param, ctx)
                return np.linspace(a, b, n) if n > 1 else np.array([a])
            values = [float(p) for p in text.split(",") if p.strip()]
        except ValueError:
            self.fail("cannot read {!r} as numbers".format(text), param, ctx)
        if not values:
            self.fail("range is empty", param, ctx)
        return np.array(values)


RANGE = RangeType()


def _configure_logging(verbose):
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(verbose, 2)]
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger("kinfront").setLevel(level)
    logging.captureWarnings(True)


def _default_map(group, path):
    """Turn a flat YAML mapping into click's per-subcommand ``default_map``."""
    with open(path) as handle:
        raw = yaml.safe_load(handle) or {}
    if not isinstance(raw, dict):
        raise click.BadParameter("config file must hold a flat mapping", param_hint="--config")
    flat = {str(k).replace("-", "_"): v for k, v in raw.items()}
    used = set()
    default_map = {}
    for name, command in group.commands.items():
        names = {p.name for p in command.params}
        default_map[name] = {k: v for k, v in flat.items() if k in names}
        used.update(default_map[name])
    unknown = sorted(set(flat) - used)
    if unknown:
        click.secho("Ignoring unknown config keys: " + ", ".join(unknown), fg="yellow", err=True)
    return default_map


@click.group(cls=DefaultGroup, default="mu")
@click.version_option(__version__, prog_name="kinfront")
@click.option(
    "--config",
    type=click.Path(exists=True, dir_okay=False),
    help="Flat YAML file of option defaults. Flags override it.",
)
@click.option("-v", "--verbose", count=True, help="Log more. Repeat for debug output.")
@click.pass_context
def kinfront(ctx, config, verbose):
    _configure_logging(verbose)
    if config:
        ctx.default_map = _default_map(ctx.command, config)


def common_options(f):
    f = click.option(
        "--threads",
        type=click.IntRange(min=1),
        default=None,
        help="Cap on worker threads for pdmp and front; the other commands run on one thread.",
    )(f)
    f = click.option(
        "--seed",
        type=click.IntRange(0, 2 ** 64 - 1),
        default=0,
        help="Random seed. Defaults to 0.",
    )(f)
    f = click.option(
        "-o",
        "--out",
        type=click.Path(file_okay=False),
        default=None,
        help="Output directory. Without it the main table goes to stdout.",
    )(f)
    return f


def _check(name, ok, **values):
    return dict(name=name, ok=bool(ok), **values)


def _emit(ctx, tables, checks, instantiates, extra=None, fields=None):
    """Write the tables and the manifest, report the checks and fail on any violation.

    ``tables`` maps file names to ``(header, rows)``; the first table goes to
    stdout when no output directory is given. ``fields`` maps file names to
    :class:`MinPlusField` objects, written only to the output directory in the
    format that ``--u0`` reads back.
    """
    command = ctx.info_name
    out = ctx.params.get("out")
    fields = fields or {}
    if out:
        os.makedirs(out, exist_ok=True)
        for name, (header, rows) in tables.items():
            io.save_csv(os.path.join(out, name), header, rows)
        for name, field in fields.items():
            io.write_field_csv(os.path.join(out, name), field)
        outputs = list(tables) + list(fields)
        record = io.manifest(command, dict(ctx.params), checks, instantiates, outputs, extra)
        io.save_json(os.path.join(out, "manifest.json"), record)
        click.secho("{}: wrote {} files to {}".format(command, len(outputs) + 1, out), fg="green", err=True)
    else:
        header, rows = next(iter(tables.values()))
        buffer = StringIO()
        io.write_csv(buffer, header, rows)
        click.echo(buffer.getvalue(), nl=False)

    failed = [c["name"] for c in checks if not c["ok"]]
    for c in checks:
        click.secho(
            "{}: {} {}".format(command, c["name"], "ok" if c["ok"] else "FAILED"),
            fg="green" if c["ok"] else "red",
            err=True,
        )
    if failed:
        raise InvariantViolation("{}: failed checks: {}".format(command, ", ".join(failed)))


@kinfront.command(help="Minimum value mu(t, x; w) over times and positions")
@click.option("--t", "t", type=RANGE, default="1", help="Times, e.g. 1:10 or 1,2,4.")
@click.option("--x", "x", type=RANGE, default="-15:15:61", help="Positions.")
@click.option("--w", "w", type=float, default=0.0, help="Initial velocity. Defaults to 0.")
@click.option("--brute", is_flag=True, help="Add the brute-force oracle column.")
@click.option("--brute-n", type=click.IntRange(min=2), default=600, help="Oracle grid size.")
@click.option("--tol", type=float, default=5e-3, help="Allowed oracle discrepancy.")
@click.option("--heat", is_flag=True, help="Add the heat-equation rate x^2/(4t) for contrast.")
@common_options
@click.pass_context
def mu(ctx, t, x, w, brute, brute_n, tol, heat, out, seed, threads):
    if (t < 0).any():
        raise InvalidParameterError("time must be nonnegative")
    header = ["t", "x", "w", "mu", "branch"] + (["heat"] if heat else []) + (["mu_brute"] if brute else [])
    rows, checks = [], []
    worst, below = 0.0, True
    for ti in t:
        values, tags = closed_form.mu_values(ti, x, w)
        for xi, value, tag in zip(x, values, tags):
            row = [ti, xi, w, value, closed_form.BranchTag(int(tag)).name.lower()]
            if heat:
                row.append(closed_form.heat_rate(ti, xi))
            if brute:
                oracle = closed_form.mu_brute(ti, xi, w, brute_n)
                if math.isfinite(oracle):
                    worst = max(worst, abs(value - oracle))
                below = below and value <= oracle + 1e-12
                row.append(oracle)
            rows.append(row)
    if brute:
        checks.append(_check("oracle", worst <= tol and below, max_discrepancy=worst, tol=tol))
    if w == 0:
        T, X = np.meshgrid(t, x, indexing="ij")
        stationary = (np.abs(X) <= 10) & (T >= np.abs(X) ** (2.0 / 3.0)) & (T > 0)
        values, _ = closed_form.mu_values(T, X, 0.0)
        gap = np.abs(values - 1.5 * np.abs(X) ** (2.0 / 3.0))[stationary]
        checks.append(_check("stationary_power_law", (gap <= 1e-12).all(), max_gap=float(gap.max(initial=0.0))))
    _emit(
        ctx,
        {"mu.csv": (header, rows)},
        checks,
        "mu(t,x;w) = min(x/w if 0 <= x/w <= t, (3/2)|x|^(2/3) if |x| <= t^(3/2), x^2/(2t^2) + t if |x| >= t^(3/2))",
    )


@kinfront.command(help="Fundamental solution phi(t, x, v; w)")
@click.option("--t", "t", type=RANGE, default="1", help="Times.")
@click.option("--x", "x", type=RANGE, default="-2:2:9", help="Positions.")
@click.option("--v", "v", type=RANGE, default="-2:2:9", help="Final velocities.")
@click.option("--w", "w", type=float, default=0.0, help="Initial velocity.")
@click.option("--brute", is_flag=True, help="Add the brute-force oracle column.")
@click.option("--brute-n", type=click.IntRange(min=2), default=200, help="Oracle grid size.")
@click.option("--tol", type=float, default=1e-2, help="Allowed oracle discrepancy.")
@common_options
@click.pass_context
def phi(ctx, t, x, v, w, brute, brute_n, tol, out, seed, threads):
    if (t <= 0).any():
        raise InvalidParameterError("phi needs t > 0")
    header = ["t", "x", "v", "w", "phi", "bound"] + (["phi_brute"] if brute else [])
    rows = []
    worst, below, bounded = 0.0, True, True
    for ti in t:
        for xi in x:
            values = closed_form.phi_values(ti, xi, v, w)
            for vi, value in zip(v, values):
                bound = closed_form.phi_upper_bound(ti, xi, vi)
                bounded = bounded and value <= bound + 1e-12
                row = [ti, xi, vi, w, value, bound]
                if brute:
                    oracle = closed_form.phi_brute(ti, xi, vi, w, brute_n)
                    if math.isfinite(oracle) and math.isfinite(value):
                        worst = max(worst, abs(value - oracle))
                    below = below and value <= oracle + 1e-12
                    row.append(oracle)
                rows.append(row)
    checks = [_check("quadratic_bound", bounded)]
    if brute:
        checks.append(_check("oracle", worst <= tol and below, max_discrepancy=worst, tol=tol))
    _emit(
        ctx,
        {"phi.csv": (header, rows)},
        checks,
        "phi(t,x,v;w) = min(0_{x=tv} + min(0_{v=w}, v^2/2) + t, v^2/2 + min_s (x - s1 w - s3 v)^2/(2 s2^2) + s1 + s2 + s3)",
    )


U0_HELP = (
    "Field file as written by -o, used instead of the built-in datum. "
    "Its grid replaces the grid options."
)


def _read_datum(path):
    u0 = io.read_field_csv(path)
    if not u0.has_velocity:
        raise InvalidParameterError("{}: initial data need an x, v, value field".format(path))
    return u0


def _uniform(nodes, grid_type):
    """The grid through ``nodes`` when they are evenly spaced, else None."""
    if len(nodes) < 2 or not np.allclose(np.diff(nodes), nodes[1] - nodes[0]) or nodes[1] <= nodes[0]:
        return None
    return grid_type(float(nodes[0]), float(nodes[-1]), len(nodes))


@kinfront.command(help="Time-discrete min-plus scheme from a Dirac mass or a field file")
@click.option("--dt", type=float, default=0.25, help="Time step.")
@click.option("--steps", type=click.IntRange(min=1), default=40, help="Number of steps.")
@click.option("--x-min", type=float, default=-10.0)
@click.option("--x-max", type=float, default=10.0)
@click.option("--nx", type=click.IntRange(min=2), default=401, help="Spatial nodes.")
@click.option("--nv", type=click.IntRange(min=3), default=41, help="Velocity nodes.")
@click.option("--w", "w", type=float, default=0.0, help="Initial velocity.")
@click.option("--window", type=float, default=5.0, help="Half-width of the error window.")
@click.option("--u0", "u0_path", type=click.Path(dir_okay=False), default=None, help=U0_HELP)
@common_options
@click.pass_context
def scheme(ctx, dt, steps, x_min, x_max, nx, nv, w, window, u0_path, out, seed, threads):
    if u0_path:
        u0 = _read_datum(u0_path)
    else:
        config = minplus.SchemeConfig(dt, steps, SpatialGrid(x_min, x_max, nx), nv)
        u0 = minplus.dirac_datum(config.x, config.velocity_grid(w), 0.0, w)
    state = minplus.run_scheme(u0, dt, steps)
    fields = {"u0.csv": state.u0, "mu_n.csv": state.history[-1]}
    checks = [
        _check("nonincreasing", all(
            (b.values <= a.values + 1e-12).all() for a, b in zip(state.history, state.history[1:])
        )),
    ]

    x = state.grid.nodes
    if u0_path:
        rows = []
        for n, field in enumerate(state.history):
            rows.extend(zip([n] * len(x), [n * dt] * len(x), x, field.values))
        _emit(
            ctx,
            {"scheme.csv": (["n", "t", "x", "mu_n"], rows)},
            checks,
            "mu_n(x) from the scheme started at the projected initial data",
            extra=dict(final_time=state.time),
            fields=fields,
        )
        return

    inside = np.abs(x) <= window
    rows = []
    worst_discrete = 0.0
    for n, field in enumerate(state.history):
        closed = minplus.mu_n_closed(n, dt, x, w)
        exact, _ = closed_form.mu_values(n * dt, x, w)
        both_inf = np.isinf(field.values) & np.isinf(closed)
        with np.errstate(invalid="ignore"):
            gap = np.where(both_inf, 0.0, np.abs(field.values - closed))
        worst_discrete = max(worst_discrete, float(gap.max()))
        rows.extend(zip([n] * len(x), [n * dt] * len(x), x, field.values, closed, exact))

    final = state.history[-1].values
    exact, _ = closed_form.mu_values(state.time, x, w)
    error = float(np.max(np.abs(final - exact)[inside]))
    checks.insert(
        0, _check("discrete_closed_form", worst_discrete <= 2 * state.grid.dx, max_gap=worst_discrete)
    )
    _emit(
        ctx,
        {"scheme.csv": (["n", "t", "x", "mu_n", "mu_n_closed", "mu"], rows)},
        checks,
        "mu_n(x) = min over i + k <= n - 1 of |x - t_i w|^2/(2 t_k^2) + t_(i+k)",
        extra=dict(final_time=state.time, window_error=error),
        fields=fields,
    )


def _hopflax_datum(datum, x_grid, v_grid, w, support):
    if datum == "dirac":
        return minplus.dirac_datum(x_grid, v_grid, 0.0, w)
    inside = x_grid.window(support[0], support[-1])
    values = np.where(inside[:, None], 0.5 * v_grid.nodes[None, :] ** 2, np.inf)
    return MinPlusField(values, x_grid, v_grid)


@kinfront.command(help="Limit solution u(t, x, v) by the representation formula")
@click.option("--t", "t", type=float, default=1.0, help="Time.")
@click.option("--x", "x", type=RANGE, default="-3:3:13", help="Positions.")
@click.option("--v", "v", type=RANGE, default="-2:2:9", help="Velocities.")
@click.option("--datum", type=click.Choice(["dirac", "indicator"]), default="dirac")
@click.option("--w", "w", type=float, default=0.0, help="Initial velocity of the Dirac datum.")
@click.option("--support", type=RANGE, default="-1,1", help="Interval of the indicator datum.")
@click.option("--x-min", type=float, default=-6.0)
@click.option("--x-max", type=float, default=6.0)
@click.option("--nx", type=click.IntRange(min=2), default=241)
@click.option("--v-max", type=float, default=4.0)
@click.option("--nv", type=click.IntRange(min=3), default=81)
@click.option("--refine/--no-refine", default=True, help="Refine the grid minimum.")
@click.option("--u0", "u0_path", type=click.Path(dir_okay=False), default=None, help=U0_HELP)
@common_options
@click.pass_context
def hopflax(ctx, t, x, v, datum, w, support, x_min, x_max, nx, v_max, nv, refine, u0_path,
            out, seed, threads):
    if u0_path:
        u0 = _read_datum(u0_path)
    else:
        x_grid = SpatialGrid(x_min, x_max, nx)
        u0 = _hopflax_datum(datum, x_grid, VelocityGrid.symmetric(v_max, nv), w, support)
    rows = []
    table = np.empty((len(x), len(v)))
    residual = -math.inf
    for i, xi in enumerate(x):
        floor = minplus.hopflax_min(u0, t, xi)
        for j, vi in enumerate(v):
            u = minplus.hopflax_u(u0, t, xi, vi, refine=refine)
            if math.isfinite(u):
                residual = max(residual, u - floor - 0.5 * vi * vi)
            table[i, j] = u
            rows.append([t, xi, vi, u, floor])
    checks = [_check("constraint", residual <= 1e-9, max_residual=residual)]

    fields = {"u0.csv": u0}
    x_grid, v_grid = _uniform(x, SpatialGrid), _uniform(v, VelocityGrid)
    if x_grid and v_grid:
        fields["u.csv"] = MinPlusField(table, x_grid, v_grid)
    elif out:
        logger.warning("positions or velocities are not evenly spaced; u.csv is not written")
    _emit(
        ctx,
        {"hopflax.csv": (["t", "x", "v", "u", "min_u"], rows)},
        checks,
        "u(t,x,v) = inf over (y,w) of phi(t, x - y, v; w) + u0(y, w)",
        fields=fields,
    )


def _kinetic_initial(datum, x_grid, v_grid, eps, support):
    if datum == "dirac":
        return _kinetic.dirac_initial(x_grid, v_grid, eps)
    if datum == "indicator":
        return _kinetic.indicator_initial(x_grid, v_grid, eps, (support[0], support[-1]))
    period = x_grid.n_x * x_grid.dx
    x, v = x_grid.nodes, v_grid.nodes
    b0 = 0.2 * np.sin(2 * math.pi * x / period)[:, None] + 0.1 * np.cos(v)[None, :]
    return _kinetic.initial_from_u0(0.5 * v[None, :] ** 2 + b0, x_grid, v_grid, eps)


def _snapshot_table(field):
    wkb = _kinetic.hopf_cole(field)
    x, v = field.x.nodes, field.v.nodes
    rows = (
        (x[i], v[j], field.f[i, j], wkb.u[i, j]) for i in range(len(x)) for j in range(len(v))
    )
    return ["x", "v", "f", "u"], rows


@kinfront.command(help="Semi-Lagrangian BGK solver and its WKB limit")
@click.option("--epsilon", type=RANGE, default="0.2,0.1,0.05", help="Values of epsilon.")
@click.option("--t", "t", type=float, default=1.0, help="Final time.")
@click.option("--x-min", type=float, default=-4.0)
@click.option("--x-max", type=float, default=4.0)
@click.option("--nx", type=click.IntRange(min=2), default=400)
@click.option("--nv", type=click.IntRange(min=3), default=200)
@click.option("--dt", type=float, default=None, help="Time step. Defaults to epsilon/4.")
@click.option("--r", "r", type=float, default=0.0, help="Reaction rate.")
@click.option("--datum", type=click.Choice(["dirac", "indicator", "bounded"]), default="dirac")
@click.option("--support", type=RANGE, default="-1.5,1.5", help="Interval of the indicator datum.")
@click.option("--boundary", type=click.Choice(_kinetic.BOUNDARIES), default="zero")
@click.option(
    "--interpolation",
    type=click.Choice(_kinetic.INTERPOLATIONS),
    default=None,
    help=(
        "Transport of f along x. Defaults to exponential, or to linear with --apriori, "
        "whose data-independent weights keep the a priori bounds exactly. log does not "
        "conserve mass and fails the mass check."
    ),
)
@click.option("--compare-phi", is_flag=True, help="Tabulate sup |u_eps - phi| over [-2, 2]^2.")
@click.option("--apriori", is_flag=True, help="Check the a priori bounds on b = u - v^2/2.")
@click.option(
    "--snapshot-times", type=RANGE, default=None, help="Extra times at which to keep the density."
)
@click.option(
    "--snapshots", is_flag=True, help="Write x, v, f, u for every kept time to the output directory."
)
@common_options
@click.pass_context
def kinetic(ctx, epsilon, t, x_min, x_max, nx, nv, dt, r, datum, support, boundary,
             interpolation, compare_phi, apriori, snapshot_times, snapshots, out, seed, threads):
    interpolation = interpolation or ("linear" if apriori else "exponential")
    kept = set(np.linspace(0, t, 5)[1:-1]) if apriori else set()
    if snapshot_times is not None:
        kept.update(float(s) for s in snapshot_times if 0 < s < t)
    x_grid = SpatialGrid(x_min, x_max, nx)
    rows, checks, errors = [], [], []
    tables = {"kinetic.csv": (["epsilon", "steps", "dt", "mass_drift", "wkb_error", "constraint_gap"], rows)}
    if snapshots and not out:
        logger.warning("--snapshots needs an output directory; no snapshot is written")
    for eps in sorted(epsilon, reverse=True):
        v_grid = _kinetic.velocity_grid(eps, nv)
        f0 = _kinetic_initial(datum, x_grid, v_grid, eps, support)
        config = _kinetic.KineticConfig(
            eps, x_grid, v_grid, t, dt, r, boundary, interpolation,
            snapshot_times=tuple(sorted(kept)),
        )
        run = _kinetic.run_kinetic(config, f0)
        wkb = _kinetic.hopf_cole(run.final)
        error = _kinetic.wkb_error(wkb) if compare_phi else math.nan
        errors.append(error)
        drift = run.mass_drift()
        gap = _kinetic.constraint_gap(wkb)
        rows.append([eps, config.steps, config.step, drift, error, gap])
        if r == 0:
            checks.append(_check("mass_eps_{:g}".format(eps), drift <= 1e-8, drift=drift))
        if apriori:
            report = _kinetic.apriori_report(
                [_kinetic.hopf_cole(s) for s in run.snapshots], periodic=boundary == "periodic"
            )
            checks.append(_check("apriori_eps_{:g}".format(eps), report.ok, failures=report.failures()))
        if datum == "indicator":
            barrier = _kinetic.barrier_report(wkb)
            checks.append(_check("barrier_eps_{:g}".format(eps), barrier["ok"], **barrier))
        if snapshots:
            for snapshot in run.snapshots:
                name = "snapshot_eps{:g}_t{:g}.csv".format(eps, snapshot.time)
                tables[name] = _snapshot_table(snapshot)
    if compare_phi and len(errors) > 1:
        decreasing = all(b < a for a, b in zip(errors, errors[1:]))
        checks.append(_check("wkb_convergence", decreasing, errors=errors))
    _emit(
        ctx,
        tables,
        checks,
        "u_eps = -eps log f_eps for eps (f_t + v f_x) = M rho - f + r rho (M - f/sqrt(eps))",
    )


@kinfront.command(help="Monte Carlo of the velocity-jump process")
@click.option("--epsilon", type=float, default=0.05)
@click.option("--t", "t", type=float, default=1.0, help="Final time.")
@click.option("--n", "n", type=click.IntRange(min=1), default=100000, help="Particles.")
@click.option("--w0", type=float, default=None, help="Initial velocity. Defaults to equilibrium draws.")
@click.option("--bin-width", type=float, default=0.01, help="Histogram bin width.")
@click.option("--dump", type=click.IntRange(min=0), default=0, help="Write the first N samples.")
@common_options
@click.pass_context
def pdmp(ctx, epsilon, t, n, w0, bin_width, dump, out, seed, threads):
    config = _pdmp.SimConfig(epsilon, t, n, w0, seed)
    samples = _pdmp.simulate(config, threads)
    moments = _pdmp.moment_report(samples, config)
    jumps = _pdmp.jump_count_check(samples, config)
    table = _pdmp.empirical_rate(samples, epsilon, bin_width)
    comparison = _pdmp.rate_comparison(table, epsilon, t, 0.0 if w0 is None else w0)

    checks = [
        _check("jump_mean", jumps["mean_ok"], mean=jumps["mean"], expected=jumps["expected"]),
        _check("jump_variance", jumps["variance_ok"], variance=jumps["variance"]),
    ]
    summary = dict(moments=moments, jumps=jumps, rate_comparison=comparison)
    if w0 is None or w0 == 0:
        checks.append(_check("symmetry", moments["mean_ok"], mean=moments["mean"]))
    if w0 is None:
        ks = _pdmp.ks_report(samples, epsilon)
        summary["ks"] = ks
        checks.append(_check("variance", moments["variance_ok"], variance=moments["variance"]))
        checks.append(_check("stationary_velocity", ks["ok"], pvalue=ks["pvalue"]))

    exact, _ = closed_form.mu_values(t, table.centers, 0.0 if w0 is None else w0)
    tables = {
        "rate.csv": (
            ["x", "rate", "count", "mu"],
            list(zip(table.centers, table.rates, table.counts, exact)),
        )
    }
    if dump:
        k = min(dump, n)
        tables["samples.csv"] = (
            ["x", "v", "jumps"],
            list(zip(samples.x[:k], samples.v[:k], samples.jumps[:k])),
        )
    _emit(
        ctx,
        tables,
        checks,
        "-eps log density of x(t) against mu(t,x;w)",
        extra=summary,
    )


@kinfront.command(help="Front location X(t) for the reaction problem")
@click.option("--r", "r", type=float, default=1.0, help="Reaction rate.")
@click.option("--gamma", type=float, default=2.0, help="Velocity tail exponent.")
@click.option("--w", "w", type=float, default=0.0, help="Initial velocity.")
@click.option("--t", "t", type=RANGE, default="10:100:10", help="Times, at least five.")
@click.option("--freidlin", type=click.IntRange(min=0), default=0, help="Size of a Freidlin sweep.")
@common_options
@click.pass_context
def front(ctx, r, gamma, w, t, freidlin, out, seed, threads):
    params = closed_form.RateParams(r, gamma)
    query = _front.FrontQuery(params, w, tuple(t))
    trace = _front.front_trace(query, threads)

    checks = [_check("nondecreasing_after_onset", trace.nondecreasing_after_onset())]
    extra = dict(
        exponent=trace.exponent,
        prefactor=trace.prefactor,
        conjecture=trace.conjecture,
        onset=trace.onset,
        residuals=trace.residuals,
        conditional_on="truncation of the unconstrained minimum at 0",
    )
    if gamma == 2:
        try:
            lower, upper = _front.bounds_check(r)
            extra["bounds"] = [lower, upper]
            checks.append(_check("bounds", True, lower=lower, upper=upper))
        except BoundsViolation as e:
            checks.append(_check("bounds", False, message=str(e)))
    if freidlin:
        sweep = _front.freidlin_sweep(freidlin, seed, gamma)
        extra["freidlin_failures"] = sweep.failures
        checks.append(_check("freidlin", not sweep.failures, fraction=sweep.fraction_unimodal))

    power = 1.0 + 1.0 / gamma
    rows = list(zip(
        trace.times,
        trace.locations,
        [tag.name.lower() for tag in trace.tags],
        trace.local_exponents,
        trace.conjecture * trace.times ** power,
    ))
    _emit(
        ctx,
        {"front.csv": (["t", "X", "branch", "local_exponent", "conjecture"], rows)},
        checks,
        "X(t) = sup{x >= 0 : mu_r(t,x;w) <= 0}, conjectured ((gamma/(1+gamma)) r)^(1+1/gamma)/(1+r) t^(1+1/gamma)",
        extra=extra,
    )


def _command_name(argv):
    for arg in argv:
        if arg in kinfront.commands:
            return arg
    return kinfront.default_cmd_name


def _report(prefix, error):
    message = str(error)
    if not message.startswith(prefix + ":"):
        message = "{}: {}".format(prefix, message)
    click.secho(message, fg="red", err=True)


def run(argv=None):
    """Run the command line and return the exit status instead of exiting."""
    argv = list(sys.argv[1:] if argv is None else argv)
    prefix = _command_name(argv)
    try:
        kinfront.main(args=argv, prog_name="kinfront", standalone_mode=False)
    except click.exceptions.Abort:
        click.secho("Aborted!", fg="red", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except InvalidParameterError as e:
        _report(prefix, e)
        return EXIT_USAGE
    except InvariantViolation as e:
        _report(prefix, e)
        return EXIT_INVARIANT
    except (NumericalError, FloatingPointError) as e:
        _report(prefix, e)
        return EXIT_NUMERICAL
    except KinfrontError as e:
        _report(prefix, e)
        return EXIT_NUMERICAL
    return EXIT_OK


def main():
    sys.exit(run())
