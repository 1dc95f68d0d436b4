import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from kinfront import (
    AccuracyWarning,
    InvalidParameterError,
    KineticConfig,
    MaxPrincipleViolation,
    SpatialGrid,
    duhamel_step,
    hopf_cole,
    reaction_step,
    run_kinetic,
)
from kinfront.kinetic import (
    KineticField,
    apriori_report,
    barrier_report,
    check_max_principle,
    constraint_gap,
    dirac_initial,
    discrete_maxwellian,
    duhamel_weights,
    indicator_initial,
    initial_from_u0,
    maxwellian,
    velocity_grid,
    wkb_error,
)


def _bounded_initial(x_grid, v_grid, eps):
    period = x_grid.n_x * x_grid.dx
    x, v = x_grid.nodes, v_grid.nodes
    b0 = 0.2 * np.sin(2 * math.pi * x / period)[:, None] + 0.1 * np.cos(v)[None, :]
    return initial_from_u0(0.5 * v[None, :] ** 2 + b0, x_grid, v_grid, eps)


def test_maxwellian():
    assert maxwellian(0.1, 0) == pytest.approx(1.26157, abs=1e-5)
    grid = velocity_grid(0.1, 41)
    assert grid.contains_zero
    m = discrete_maxwellian(0.1, grid)
    assert trapezoid(m, dx=grid.dv) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(InvalidParameterError):
        maxwellian(0.0, 1.0)


@pytest.mark.parametrize("h", [0.01, 0.25, 4.0])
def test_duhamel_weights(h):
    a, b = duhamel_weights(h)
    assert a > 0 and b > 0
    assert a + b == pytest.approx(1 - math.exp(-h))


def test_config_steps():
    x_grid = SpatialGrid(-1, 1, 11)
    v_grid = velocity_grid(0.1, 11)
    assert KineticConfig(0.1, x_grid, v_grid).steps == 40
    config = KineticConfig(0.1, x_grid, v_grid, dt=0.3)
    assert config.steps == 4
    assert config.step == pytest.approx(0.25)
    with pytest.raises(InvalidParameterError):
        KineticConfig(0.1, x_grid, v_grid, boundary="reflecting")
    with pytest.raises(InvalidParameterError):
        KineticConfig(0.1, x_grid, v_grid, r=-1)


def test_field_validation():
    x_grid = SpatialGrid(-1, 1, 3)
    v_grid = velocity_grid(0.1, 3)
    with pytest.raises(InvalidParameterError):
        KineticField(0.1, x_grid, v_grid, -np.ones((3, 3)))
    with pytest.raises(InvalidParameterError):
        KineticField(0.1, x_grid, v_grid, np.ones((2, 3)))

    wkb = hopf_cole(KineticField(0.1, x_grid, v_grid, np.zeros((3, 3))))
    assert np.isinf(wkb.u).all()


def test_large_step_warns():
    x_grid = SpatialGrid(-2, 2, 41)
    v_grid = velocity_grid(0.1, 21)
    f0 = dirac_initial(x_grid, v_grid, 0.1)
    with pytest.warns(AccuracyWarning):
        duhamel_step(f0, 0.2)


@pytest.mark.parametrize("interpolation", ["exponential", "linear"])
def test_periodic_mass_conservation(interpolation):
    eps = 0.1
    x_grid = SpatialGrid(-2, 2, 80)
    v_grid = velocity_grid(eps, 41)
    config = KineticConfig(
        eps, x_grid, v_grid, t_final=0.25, boundary="periodic", interpolation=interpolation
    )
    run = run_kinetic(config, _bounded_initial(x_grid, v_grid, eps))
    assert len(run.mass) == config.steps + 1
    assert run.mass_drift() <= 1e-10


def test_reaction_keeps_maximum_principle():
    eps = 0.1
    x_grid = SpatialGrid(-3, 3, 121)
    v_grid = velocity_grid(eps, 41)
    config = KineticConfig(eps, x_grid, v_grid, t_final=0.5, r=1.0)
    run = run_kinetic(config, indicator_initial(x_grid, v_grid, eps))
    final = run.final
    check_max_principle(final)
    # the population grows
    assert final.mass() > run.snapshots[0].mass()

    with pytest.raises(MaxPrincipleViolation):
        check_max_principle(final.evolve(2 * final.f + final.cap[None, :], 0.0))
    with pytest.raises(InvalidParameterError):
        reaction_step(final, 0.01, -1.0)


def test_wkb_error_shrinks_with_epsilon():
    x_grid = SpatialGrid(-4, 4, 400)
    errors = []
    for eps in (0.2, 0.1, 0.05):
        v_grid = velocity_grid(eps, 200)
        run = run_kinetic(KineticConfig(eps, x_grid, v_grid), dirac_initial(x_grid, v_grid, eps))
        wkb = hopf_cole(run.final)
        assert wkb.time == pytest.approx(1.0)
        assert run.mass_drift() <= 1e-8
        errors.append(wkb_error(wkb))
    assert errors[0] > errors[1] > errors[2]


def test_wkb_error_band():
    eps = 0.2
    x_grid = SpatialGrid(-2, 2, 41)
    v_grid = velocity_grid(eps, 41)
    f0 = dirac_initial(x_grid, v_grid, eps)
    wkb = hopf_cole(f0.evolve(f0.f, 1.0))
    # a band around x = v drops nodes, so the error can only shrink
    assert wkb_error(wkb) <= wkb_error(wkb, band=0.0)
    with pytest.raises(InvalidParameterError):
        wkb_error(wkb, band=-1.0)
    with pytest.raises(InvalidParameterError):
        wkb_error(wkb, x_window=(0, 0), v_window=(0, 0), band=1.0)


def test_reaction_step_without_reaction_is_a_transport_step():
    eps = 0.1
    x_grid = SpatialGrid(-2, 2, 41)
    v_grid = velocity_grid(eps, 21)
    f0 = dirac_initial(x_grid, v_grid, eps)
    for interpolation in ("exponential", "linear", "log"):
        moved = duhamel_step(f0, 0.02, interpolation=interpolation)
        assert np.array_equal(reaction_step(f0, 0.02, 0.0, interpolation=interpolation).f, moved.f)


def test_equilibrium_is_a_fixed_point():
    eps = 0.1
    x_grid = SpatialGrid(-2, 2, 40)
    v_grid = velocity_grid(eps, 41)
    cap = np.sqrt(eps) * discrete_maxwellian(eps, v_grid)
    field = KineticField(eps, x_grid, v_grid, np.tile(cap, (x_grid.n_x, 1)))
    for interpolation in ("exponential", "linear"):
        moved = reaction_step(field, 0.025, 1.0, boundary="periodic", interpolation=interpolation)
        assert np.allclose(moved.f, field.f, rtol=1e-12, atol=0)


def test_constraint_gap_of_projected_data():
    eps = 0.1
    x_grid = SpatialGrid(-2, 2, 41)
    v_grid = velocity_grid(eps, 41)
    wkb = hopf_cole(dirac_initial(x_grid, v_grid, eps))
    # u0 = x^2/(2 sigma^2) + v^2/2 meets the constraint with equality
    assert abs(constraint_gap(wkb)) <= 1e-9


def test_apriori_bounds():
    eps = 0.1
    x_grid = SpatialGrid(-4, 4, 200)
    v_grid = velocity_grid(eps, 61)
    config = KineticConfig(
        eps,
        x_grid,
        v_grid,
        t_final=0.5,
        boundary="periodic",
        interpolation="linear",
        snapshot_times=(0.25,),
    )
    run = run_kinetic(config, _bounded_initial(x_grid, v_grid, eps))
    assert len(run.snapshots) == 3
    report = apriori_report([hopf_cole(s) for s in run.snapshots], periodic=True)
    assert report.ok, report.failures()
    assert len(report.rows) == 9


def test_apriori_needs_bounded_data():
    eps = 0.1
    x_grid = SpatialGrid(-2, 2, 41)
    v_grid = velocity_grid(eps, 21)
    wkb = hopf_cole(indicator_initial(x_grid, v_grid, eps))
    with pytest.raises(InvalidParameterError):
        apriori_report([wkb])


def test_barrier():
    eps = 0.1
    x_grid = SpatialGrid(-4, 4, 161)
    v_grid = velocity_grid(eps, 61)
    config = KineticConfig(eps, x_grid, v_grid, t_final=0.5)
    run = run_kinetic(config, indicator_initial(x_grid, v_grid, eps, (-1.5, 1.5)))
    report = barrier_report(hopf_cole(run.final))
    assert report["ok"], report
    assert report["lower_margin"] >= 0

    with pytest.raises(InvalidParameterError):
        barrier_report(hopf_cole(run.snapshots[0]))
