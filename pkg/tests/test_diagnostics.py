"""Diagnostics: energies, diameters, envelopes, prediction, blow-up monitor."""
from __future__ import annotations

import math

import numpy as np
import pytest

from kurahydro import (
    BlowupMonitor,
    FieldState,
    InitSpec,
    Params,
    RhoGaussian,
    SERIES_COLUMNS,
    TimeSeries,
    USine,
    diameters,
    dirac_distance_bound,
    discretize_frequency,
    energies,
    ensemble_order_parameter,
    envelope_params,
    evolve,
    gronwall_bound,
    init_state,
    lyapunov,
    make_theta_grid,
    mean_phase,
    mean_velocity,
    order_parameter,
    phase_envelope,
    r_infinity_prediction,
    sample_initial,
    velocity_envelope,
)
from kurahydro.diagnostics import SeriesBuilder


class _Ens:
    """Minimal duck-typed ensemble for moment functions."""

    def __init__(self, eta, v, weight, t=0.0):
        self.eta = np.asarray(eta, dtype=float)
        self.v = np.asarray(v, dtype=float)
        self.weight = np.asarray(weight, dtype=float)
        self.t = t


def _random_ensemble(rng, n=100):
    w = rng.uniform(0.1, 1.0, size=n)
    return _Ens(
        rng.uniform(-np.pi, np.pi, size=n), rng.normal(size=n), w / w.sum()
    )


def test_series_columns_and_access():
    rows = np.arange(2 * len(SERIES_COLUMNS), dtype=float).reshape(2, -1)
    series = TimeSeries(rows)
    assert len(series) == 2
    assert series.t[1] == float(len(SERIES_COLUMNS))
    assert series.records()[0].r == 1.0
    with pytest.raises(AttributeError):
        series.nonexistent
    with pytest.raises(ValueError, match="columns"):
        TimeSeries(np.zeros((2, 3)))


def test_series_builder_row_length():
    builder = SeriesBuilder()
    with pytest.raises(AssertionError):
        builder.append((1.0, 2.0))


def test_potential_energy_factorization(rng):
    """(K/2m)(1 - r^2) equals the pairwise double sum on random ensembles."""
    params = Params(0.7, 1.9)
    for _ in range(20):
        ens = _random_ensemble(rng)
        op = ensemble_order_parameter(ens.eta, ens.weight)
        _, Ep = energies(ens, op, params)
        diff = ens.eta[:, None] - ens.eta[None, :]
        double = float(
            np.sum(ens.weight[:, None] * ens.weight[None, :] * np.cos(diff))
        )
        direct = (params.K / (2.0 * params.m)) * (1.0 - double)
        assert abs(Ep - direct) < 1e-12


def test_kinetic_energy_definition(rng):
    ens = _random_ensemble(rng)
    op = ensemble_order_parameter(ens.eta, ens.weight)
    Ek, _ = energies(ens, op, Params(1.0, 1.0))
    vc = float(np.dot(ens.weight, ens.v))
    assert Ek == pytest.approx(0.5 * np.dot(ens.weight, (ens.v - vc) ** 2), abs=1e-14)


def test_lyapunov_direct_form(rng):
    params = Params(0.4, 2.2)
    ens = _random_ensemble(rng)
    op = ensemble_order_parameter(ens.eta, ens.weight)
    L = lyapunov(ens, op, params)
    direct = 0.5 * float(
        np.dot(
            ens.weight,
            (ens.v + params.K * op.r * np.sin(ens.eta - op.phi)) ** 2,
        )
    )
    assert L == pytest.approx(direct, abs=1e-12)


def test_field_vs_ensemble_moments():
    grid = make_theta_grid(400)
    om = discretize_frequency("dirac")
    state = init_state(InitSpec(RhoGaussian(), USine(-1.0, 1.0, 0.2)), grid, om)
    ens = sample_initial(state)
    assert mean_velocity(state) == pytest.approx(mean_velocity(ens), abs=1e-12)
    assert mean_phase(state) == pytest.approx(mean_phase(ens), abs=1e-12)
    op_f = order_parameter(state)
    op_e = ensemble_order_parameter(ens.eta, ens.weight)
    assert op_f.r == pytest.approx(op_e.r, abs=1e-12)


def test_ensemble_diameters():
    ens = _Ens([0.1, -0.4, 1.2], [0.0, 2.0, -1.0], [0.3, 0.3, 0.4])
    d_eta, d_v = diameters(ens)
    assert d_eta == pytest.approx(1.6)
    assert d_v == pytest.approx(3.0)
    # zero-weight samples are excluded from the support
    ens2 = _Ens([0.1, -0.4, 9.9], [0.0, 2.0, 50.0], [0.5, 0.5, 0.0])
    d_eta2, d_v2 = diameters(ens2)
    assert d_eta2 == pytest.approx(0.5)
    assert d_v2 == pytest.approx(2.0)


def test_field_diameter_wraps_seam():
    """Support straddling +/-pi measures the short covering arc, not ~2pi."""
    grid = make_theta_grid(360)
    om = discretize_frequency("dirac")
    rho = np.zeros((1, grid.n))
    near_seam = np.abs(np.abs(grid.centers) - np.pi) < 0.3
    rho[0, near_seam] = 1.0
    rho /= grid.dtheta * rho.sum()
    st = FieldState(grid, om, rho, np.zeros_like(rho))
    d_eta, d_v = diameters(st, eps_supp=1e-12)
    assert d_eta < 0.7
    assert d_v == 0.0


def test_envelope_params_validation():
    params = Params(0.5, 0.1)
    env = envelope_params(0.5, 0.1, params)
    assert env.regime == "overdamped"
    assert env.nu1 > env.nu2 > 0
    with pytest.raises(ValueError, match="C0"):
        envelope_params(3.2, 0.5, params)  # C0 >= pi
    with pytest.raises(ValueError, match="nonnegative"):
        envelope_params(-0.1, 0.1, params)
    under = envelope_params(0.5, 0.1, Params(2.0, 2.0))
    assert under.regime == "underdamped"
    assert under.nu1 == under.nu2 == 1.0 / (2.0 * 2.0)


def test_envelopes_start_at_initial_diameters():
    for params in (Params(0.5, 0.1), Params(2.0, 2.0)):
        env = envelope_params(0.7, 0.3, params)
        assert float(phase_envelope(env, 0.0)) == pytest.approx(0.7, abs=1e-14)
        assert float(velocity_envelope(env, 0.0)) == pytest.approx(0.3, abs=1e-14)


def test_envelopes_decay_to_zero():
    env = envelope_params(0.5, 0.1, Params(0.5, 0.1))
    t = np.array([10.0, 100.0])
    assert phase_envelope(env, t)[1] < 1e-3
    assert velocity_envelope(env, t)[1] < 1e-3
    assert phase_envelope(env, t)[1] < phase_envelope(env, t)[0]


def test_gronwall_bound_equality_case():
    """a=1, b=2, c=1 (double root) reproduces e^{-t}(1 + t) exactly."""
    t = np.linspace(0.0, 10.0, 101)
    bound = gronwall_bound(1.0, 2.0, 1.0, 1.0, 0.0, t)
    assert np.max(np.abs(bound - np.exp(-t) * (1.0 + t))) < 1e-12
    with pytest.raises(ValueError, match="a must be positive"):
        gronwall_bound(0.0, 1.0, 1.0, 1.0, 0.0, t)


def test_gronwall_bound_distinct_roots_initial_conditions():
    a, b, c = 1.0, 3.0, 1.0
    x0, x1 = 0.8, -0.2
    h = 1e-6
    t = np.array([0.0, h])
    vals = gronwall_bound(a, b, c, x0, x1, t)
    assert vals[0] == pytest.approx(x0, abs=1e-14)
    assert (vals[1] - vals[0]) / h == pytest.approx(x1, abs=1e-5)


def test_r_infinity_prediction_requires_coupling():
    rows = np.zeros((2, len(SERIES_COLUMNS)))
    series = TimeSeries(rows)
    with pytest.raises(ValueError, match="K > 0"):
        r_infinity_prediction(series, Params(1.0, 0.0))


def test_r_infinity_prediction_warns_on_negative_radicand():
    rows = np.zeros((1, len(SERIES_COLUMNS)))
    rows[0, SERIES_COLUMNS.index("r")] = 0.0
    rows[0, SERIES_COLUMNS.index("Ek")] = 1.0  # forces radicand << 0
    series = TimeSeries(rows)
    with pytest.warns(UserWarning, match="radicand"):
        value = r_infinity_prediction(series, Params(1.0, 1.0))
    assert value == 0.0


def test_dirac_distance_bound_holds_on_oracle_run():
    params = Params(0.5, 0.1)
    om = discretize_frequency("dirac")
    ens0 = sample_initial(InitSpec(RhoGaussian(), USine(-1.0, 1.0, 0.3)), om, 128)
    run = evolve(ens0, params, 4.0, dt=1e-3, record_every=4000)
    measured, bound = dirac_distance_bound(run.final, ens0, params)
    assert measured <= bound + 1e-12


def test_blowup_monitor_latching_and_reasons():
    mon = BlowupMonitor(rho_factor=10.0, grad_limit=100.0)
    assert mon.observe_values(0.0, 1.0, -1.0) is None
    assert not mon.fired
    event = mon.observe_values(1.0, 11.0, -1.0)
    assert event is not None and event.reason == "density-concentration"
    # latched: later observations keep the first event
    assert mon.observe_values(2.0, 1.0, -1e9).t == 1.0

    mon2 = BlowupMonitor(rho_factor=10.0, grad_limit=100.0)
    mon2.observe_values(0.0, 1.0, -1.0)
    assert mon2.observe_values(0.5, 2.0, -101.0).reason == "gradient-collapse"

    mon3 = BlowupMonitor()
    assert mon3.observe_values(0.2, math.inf, 0.0).reason == "non-finite"


def test_blowup_monitor_reference_density():
    mon = BlowupMonitor(rho_factor=2.0, max_rho0=1.0)
    assert mon.observe_values(0.0, 1.9, 0.0) is None
    assert mon.observe_values(0.1, 2.1, 0.0) is not None
