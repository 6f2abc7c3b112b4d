import math

import numpy as np
import pytest

from stochch.grid import Field, make_grid, write_fields
from stochch.sde import (ConfigError, NoiseCoef, Scheme, SimConfig, SolverFailure, State, drift,
                         initial_data, make_noise, noise_term, pairwise_sum, run_ensemble,
                         simulate_path, step)


def _state(g, u):
    return State.from_u(0.0, Field(g, u))


# --- drift and noise ---------------------------------------------------------

def test_drift_examples():
    g = make_grid(64)
    x = g.nodes
    zero = make_noise(g, "zero")
    assert np.max(np.abs(drift(_state(g, np.zeros(64)), zero, 0.3).values)) == 0.0
    assert np.max(np.abs(drift(_state(g, np.full(64, 1.3)), zero, 0.0).values)) < 1e-13
    d = drift(_state(g, np.sin(x)), zero, 0.0).values
    assert np.max(np.abs(d + 0.6 * np.sin(2 * x))) < 1e-13


def test_drift_linear_terms():
    # u = cos 3x, nonlinear part known: check the eps and constant-sigma corrections add -(eps + s0^2/2) 9 u
    g = make_grid(64)
    x = g.nodes
    u = np.cos(3 * x)
    base = drift(_state(g, u), make_noise(g, "zero"), 0.0).values
    full = drift(_state(g, u), make_noise(g, "const:0.4"), 0.02).values
    assert np.max(np.abs(full - base + (0.02 + 0.08) * 9 * u)) < 1e-12


def test_drift_variable_sigma_corrector():
    # 1/2 sigma (sigma u_x)_x with sigma = sin x, u = sin x:
    # sigma u_x = sin x cos x = sin 2x / 2, derivative cos 2x, times sin x / 2
    g = make_grid(64)
    x = g.nodes
    u = np.sin(x)
    lin = drift(_state(g, u), make_noise(g, "sin"), 0.0).values - drift(_state(g, u), make_noise(g, "zero"), 0.0).values
    assert np.max(np.abs(lin - 0.5 * np.sin(x) * np.cos(2 * x))) < 1e-13


def test_noise_term_examples():
    g = make_grid(32)
    x = g.nodes
    st = _state(g, np.sin(x))
    assert np.all(noise_term(st, make_noise(g, "zero")).values == 0.0)
    assert np.max(np.abs(noise_term(_state(g, np.full(32, 2.0)), make_noise(g, "sin")).values)) < 1e-14
    assert np.max(np.abs(noise_term(st, make_noise(g, "const:1")).values + np.cos(x))) < 1e-14


# --- noise coefficients ------------------------------------------------------

def test_noise_derivatives_are_spectral():
    g = make_grid(64)
    x = g.nodes
    nc = make_noise(g, "sin:2")
    assert np.max(np.abs(nc.dsigma.values - 2 * np.cos(2 * x))) < 1e-12
    assert np.max(np.abs(nc.d2sigma.values + 4 * np.sin(2 * x))) < 1e-11
    assert nc.w2inf_norm == pytest.approx(1.0 + 2.0 + 4.0, rel=1e-10)
    assert nc.mean_sigma_sq == pytest.approx(0.5, abs=1e-14)
    assert make_noise(g, "zero").is_zero and not nc.is_zero


def test_noise_bump_and_smoothing():
    g = make_grid(256)
    nc = make_noise(g, "bump:3.0,1.0")
    assert nc.sigma.values.max() == pytest.approx(1.0, abs=1e-3)
    assert np.all(nc.sigma.values >= 0)
    assert nc.sigma.values[np.abs(g.nodes - 3.0) > 1.0].max() == 0.0
    sm = make_noise(g, "sin", smoothing=0.3)
    assert sm.smoothing == 0.3
    assert np.max(np.abs(sm.sigma.values - np.sin(g.nodes))) < 0.03


def test_noise_from_file_and_array(tmp_path):
    g = make_grid(16)
    p = tmp_path / "sigma.schf"
    write_fields(p, [np.cos(g.nodes)])
    assert np.array_equal(make_noise(g, {"file": str(p)}).sigma.values, np.cos(g.nodes))
    assert np.array_equal(make_noise(g, 0.5 * np.ones(16)).sigma.values, 0.5 * np.ones(16))


@pytest.mark.parametrize("spec", ["nope", "bump:1", {"x": 1}, np.full(16, np.inf), "zero:3"])
def test_noise_errors(spec):
    with pytest.raises(ConfigError) as exc:
        make_noise(make_grid(16), spec)
    assert exc.value.field == "sigma"


def test_noise_coef_from_sigma():
    g = make_grid(32)
    nc = NoiseCoef.from_sigma(Field(g, np.cos(g.nodes)))
    assert np.max(np.abs(nc.dsigma.values + np.sin(g.nodes))) < 1e-13


# --- initial data --------------------------------------------------------------

def test_peakon_normalisation():
    g = make_grid(64)
    u = initial_data({"peakon": {"c": 1.0, "x0": math.pi}}, g).values
    assert u[32] == pytest.approx(1.0, abs=1e-15)
    assert u.max() == u[32]


def test_peakon_antipeakon_zero_mean_momentum():
    g = make_grid(512)
    u = initial_data({"peakon_antipeakon": {"c": 1.3, "x1": 1.0, "x2": 1.0 + math.pi}}, g).values
    m = u - g.diff(u, 2)
    assert abs(g.h * m.sum()) < 1e-12
    # momentum of K is a unit delta, so the spectral mean is the mean of u
    assert abs(u.mean()) < 1e-12


def test_fourier_initial_data():
    g = make_grid(32)
    x = g.nodes
    assert np.allclose(initial_data({"fourier": {"1": 1.0}}, g).values, np.sin(x), atol=1e-15)
    got = initial_data({"fourier": {"sin": {"2": 0.5}, "cos": {"1": 2.0}, "const": 1.0}}, g).values
    assert np.allclose(got, 0.5 * np.sin(2 * x) + 2 * np.cos(x) + 1.0, atol=1e-14)


def test_initial_data_file_and_mollify(tmp_path):
    g = make_grid(256)
    p = tmp_path / "u0.schf"
    write_fields(p, [np.sign(np.sin(g.nodes))])
    raw = initial_data({"file": str(p)}, g).values
    smooth = initial_data({"file": str(p), "mollify": 0.3}, g).values
    assert np.abs(np.diff(smooth)).max() < 0.5 * np.abs(np.diff(raw)).max()


@pytest.mark.parametrize("spec", [{"soliton": {}}, {"peakon": {"c": 1}}, {}, "sin", {"fourier": {}, "peakon": {}}])
def test_initial_data_errors(spec):
    with pytest.raises(ConfigError):
        initial_data(spec, make_grid(16))


# --- step --------------------------------------------------------------------------

def test_step_keeps_constants():
    g = make_grid(32)
    st = _state(g, np.full(32, 0.7))
    new = step(st, 1e-3, 0.0, make_noise(g, "zero"), 0.0)
    assert new.t == pytest.approx(1e-3)
    assert np.max(np.abs(new.u.values - 0.7)) < 1e-14


@pytest.mark.parametrize("scheme", list(Scheme))
def test_one_step_against_drift(scheme):
    g = make_grid(64)
    x = g.nodes
    dt = 1e-3
    new = step(_state(g, np.sin(x)), dt, 0.0, make_noise(g, "zero"), 0.0, scheme)
    err = np.max(np.abs(new.u.values - (np.sin(x) - 0.6 * dt * np.sin(2 * x))))
    assert err < 5 * dt**2
    assert np.max(np.abs(new.q.values - g.diff(new.u.values, 1))) < 1e-10


@pytest.mark.parametrize("scheme", [Scheme.EM_IMEX, Scheme.MILSTEIN_IMEX, Scheme.HEUN_IMEX])
def test_linear_mode_decay(scheme):
    g = make_grid(32)
    x = g.nodes
    eps, s0, dt = 0.05, 0.7, 1e-2
    for k in (1, 4, 10):
        st = _state(g, np.cos(k * x))
        new = step(st, dt, 0.0, make_noise(g, f"const:{s0}"), eps, scheme, nonlinear=False)
        factor = math.exp(-(eps + 0.5 * s0**2) * k**2 * dt)
        if scheme is Scheme.MILSTEIN_IMEX:
            # the correction 1/2 s0^2 u_xx (dW^2 - dt) survives at dW = 0
            factor *= 1 + 0.5 * s0**2 * k**2 * dt
        assert np.max(np.abs(new.u.values - factor * np.cos(k * x))) < 1e-14


def test_linear_noise_step_em_and_milstein():
    # constant sigma: noise part is -s0 u_x dW; for u = cos x Milstein adds 1/2 s0^2 u_xx (dW^2 - dt)
    g = make_grid(32)
    x = g.nodes
    s0, dt, dw = 0.5, 1e-2, 0.03
    noise = make_noise(g, f"const:{s0}")
    fac = math.exp(-0.5 * s0**2 * dt)
    em = step(_state(g, np.cos(x)), dt, dw, noise, 0.0, "em_imex", nonlinear=False).u.values
    assert np.max(np.abs(em - fac * (np.cos(x) + s0 * dw * np.sin(x)))) < 1e-14
    mil = step(_state(g, np.cos(x)), dt, dw, noise, 0.0, "milstein_imex", nonlinear=False).u.values
    want = fac * (np.cos(x) + s0 * dw * np.sin(x) - 0.5 * s0**2 * (dw**2 - dt) * np.cos(x))
    assert np.max(np.abs(mil - want)) < 1e-14


def test_step_rejects_nonfinite_increment():
    g = make_grid(16)
    with pytest.raises(ValueError):
        step(_state(g, np.zeros(16)), 1e-3, math.nan, make_noise(g, "zero"), 0.0)


def test_step_reports_blowup():
    g = make_grid(16)
    with pytest.raises(SolverFailure) as exc, np.errstate(all="ignore"):
        step(_state(g, np.sin(g.nodes)), 1e-3, 1e308, make_noise(g, "const:1e10"), 0.0)
    assert exc.value.t == pytest.approx(1e-3)


# --- configuration -------------------------------------------------------------

def test_from_dict_names_missing_field():
    with pytest.raises(ConfigError) as exc:
        SimConfig.from_dict({"n": 32, "epsilon": 0.1, "t_end": 1.0})
    assert exc.value.field == "dt"


@pytest.mark.parametrize("change, field", [
    (dict(n=7), "n"), (dict(epsilon=-1.0), "epsilon"), (dict(dt=0.0), "dt"), (dict(t_end=-1.0), "t_end"),
    (dict(dt=0.003), "dt"), (dict(scheme="rk4"), "scheme"), (dict(n_paths=0), "n_paths"),
    (dict(record_every=0), "record_every"), (dict(alpha=1.0), "alpha"), (dict(seed=-1), "seed"),
    (dict(brownian_base_dt=0.03), "brownian_base_dt"), (dict(dt=0.5, t_end=1.0), "dt"),
    (dict(sigma="wobble"), "sigma"),
])
def test_validation_errors(change, field):
    cfg = SimConfig(n=32, epsilon=0.01, dt=0.01, t_end=0.1).replace(**change)
    with pytest.raises(ConfigError) as exc:
        cfg.validate()
    assert exc.value.field == field


def test_stability_bound():
    cfg = SimConfig(n=64, epsilon=0.0, dt=1e-3, t_end=0.01, sigma="sin", initial={"fourier": {"1": 2.0}})
    h = 2 * math.pi / 64
    b = 0.5 * 0.5  # max |sin^2 - 1/2| / 2
    assert cfg.stability_bound() == pytest.approx(min(0.5 * h / 2.0, 0.25 * h**2 / b), rel=1e-10)
    assert SimConfig(n=64, epsilon=0.0, dt=1e-3, t_end=0.01, initial={"fourier": {}}).stability_bound() == math.inf


def test_config_roundtrip_and_hash():
    cfg = SimConfig(n=32, epsilon=0.01, dt=0.01, t_end=0.1, sigma="sin", seed=9)
    again = SimConfig.from_dict(cfg.to_dict())
    assert again == cfg and again.config_hash() == cfg.config_hash()
    assert cfg.replace(seed=10).config_hash() != cfg.config_hash()


def test_smoothing_radius():
    cfg = SimConfig(n=128, epsilon=0.04, dt=0.01, t_end=0.1, sigma="sin", smoothing=True)
    assert cfg.smoothing_radius == pytest.approx(0.2)
    assert cfg.noise().smoothing == pytest.approx(0.2)
    assert cfg.replace(smoothing=False).smoothing_radius is None


# --- paths -------------------------------------------------------------------------

BASE = SimConfig(n=32, epsilon=0.05, dt=5e-3, t_end=0.2, sigma="sin", seed=3, record_every=5)


def test_path_determinism():
    a, b = simulate_path(BASE, 1), simulate_path(BASE, 1)
    assert a.identical_to(b)
    assert not a.identical_to(simulate_path(BASE, 2))
    assert a.times[-1] == pytest.approx(0.2)
    assert list(a.steps) == list(range(0, 41, 5))


def test_zero_noise_is_seed_independent():
    cfg = BASE.replace(sigma="zero")
    a, b = simulate_path(cfg, 0), simulate_path(cfg.replace(seed=99), 4)
    assert np.array_equal(a.u, b.u)


def test_zero_horizon():
    tr = simulate_path(BASE.replace(t_end=0.0), 0)
    assert tr.times.tolist() == [0.0]
    # the stored snapshot is the dealiased projection of the initial data
    assert np.max(np.abs(tr.u[0] - BASE.initial_field().values)) < 1e-15


def test_final_step_always_recorded():
    tr = simulate_path(BASE.replace(record_every=7), 0)
    assert tr.steps[-1] == 40 and tr.steps[-2] == 35


def test_wiener_increments_are_ground_truth():
    tr = simulate_path(BASE, 0)
    from stochch.brownian import BrownianPath
    w = BrownianPath(3, 0, 0.2, 40).values(0)
    assert np.array_equal(np.concatenate([[0.0], np.cumsum(tr.wiener)]), w)
    assert np.allclose(np.cumsum(tr.snapshot_increments()), w[tr.steps[1:]], atol=1e-15)


def test_q_is_derivative_of_u():
    tr = simulate_path(BASE, 0)
    g = BASE.grid
    for u, q in zip(tr.u, tr.q):
        assert np.max(np.abs(g.diff(u, 1) - q)) < 1e-10


def test_refined_path_shares_coarse_brownian_path():
    fine = BASE.replace(dt=BASE.dt / 4, brownian_base_dt=BASE.dt, record_every=20)
    a, b = simulate_path(BASE, 0), simulate_path(fine, 0)
    wa = np.cumsum(a.wiener)
    wb = np.cumsum(b.wiener)[3::4]
    assert np.max(np.abs(wa - wb)) < 1e-14
    # same path, finer dt: solutions close
    assert np.max(np.abs(a.u[-1] - b.u[-1])) < 1e-2


def test_failure_carries_time_and_partial_trajectory():
    cfg = SimConfig(n=64, epsilon=0.0, dt=1e-2, t_end=3.0, initial={"peakon_antipeakon": {"c": 3.0, "x1": 1.5, "x2": 4.6}})
    with pytest.raises(SolverFailure) as exc:
        simulate_path(cfg, 0)
    assert 0 < exc.value.t < 3.0
    part = exc.value.trajectory
    assert part is not None and part.failure_time == exc.value.t
    assert part.times[-1] <= exc.value.t


@pytest.mark.parametrize("scheme", list(Scheme))
def test_deterministic_h1_conservation(scheme):
    cfg = SimConfig(n=128, epsilon=0.0, dt=1e-3, t_end=0.5, record_every=100, scheme=scheme)
    tr = simulate_path(cfg, 0)
    e = cfg.grid.h * np.sum(tr.u**2 + tr.q**2, axis=1)
    tol = 1e-8 if scheme == Scheme.HEUN_IMEX else 1e-3
    assert np.max(np.abs(e / e[0] - 1)) < tol


def test_heun_conserves_better_than_em():
    cfg = SimConfig(n=128, epsilon=0.0, dt=1e-3, t_end=0.5, record_every=500)
    drifts = {}
    for scheme in ("em_imex", "heun_imex"):
        tr = simulate_path(cfg.replace(scheme=scheme), 0)
        e = cfg.grid.h * np.sum(tr.u**2 + tr.q**2, axis=1)
        drifts[scheme] = abs(e[-1] / e[0] - 1)
    assert drifts["heun_imex"] < 1e-3 * drifts["em_imex"]


# --- ensembles -------------------------------------------------------------------------

def test_pairwise_sum_order_is_fixed():
    a = np.random.default_rng(0).standard_normal((37, 3))
    assert np.allclose(pairwise_sum(a), a.sum(axis=0), atol=1e-13)
    assert np.array_equal(pairwise_sum(a), pairwise_sum(a.copy()))
    assert np.array_equal(pairwise_sum(np.zeros((0, 2))), np.zeros(2))


def test_single_path_ensemble():
    ens = run_ensemble(BASE, workers=1)
    tr = simulate_path(BASE, 0)
    assert np.array_equal(ens.mean("h1_sq"), BASE.grid.h * np.sum(tr.u**2 + tr.q**2, axis=1))
    assert np.all(ens.variance("h1_sq") == 0.0)
    assert np.all(ens.stderr("h1_sq") == 0.0)


def test_zero_noise_ensemble_has_zero_variance():
    ens = run_ensemble(BASE.replace(sigma="zero", n_paths=8), workers=1)
    assert ens.n_ok == 8
    for name in ("h1_sq", "q_pow", "sup_u", "sup_q"):
        assert np.max(ens.variance(name)) < 1e-28


def test_doubling_extends_smaller_ensemble():
    small = run_ensemble(BASE.replace(n_paths=3), workers=1)
    big = run_ensemble(BASE.replace(n_paths=6), workers=2)
    for name in small.values:
        assert np.array_equal(big.values[name][:3], small.values[name], equal_nan=True)
    assert big.path_indices == list(range(6))


def test_parallel_matches_serial():
    cfg = BASE.replace(n_paths=4)
    a, b = run_ensemble(cfg, workers=1), run_ensemble(cfg, workers=3)
    for name in a.values:
        assert np.array_equal(a.values[name], b.values[name], equal_nan=True)
    assert np.array_equal(a.mean("h1_sq"), b.mean("h1_sq"))


def test_thread_cap_env(monkeypatch):
    from stochch.sde import _worker_count
    monkeypatch.setenv("SCH_THREADS", "2")
    assert _worker_count(16) == 2
    monkeypatch.delenv("SCH_THREADS")
    assert _worker_count(5) == 5


def test_ensemble_reports_failures_without_aborting():
    # inviscid breaking drives max|u| past the advective bound on every path
    cfg = SimConfig(n=64, epsilon=0.0, dt=1e-2, t_end=3.0,
                    initial={"peakon_antipeakon": {"c": 3.0, "x1": 1.5, "x2": 4.6}}, n_paths=3)
    ens = run_ensemble(cfg, workers=1)
    assert ens.n_ok == 0 and ens.values == {}
    assert [f["path_index"] for f in ens.failures] == [0, 1, 2]
    for f in ens.failures:
        assert set(f) == {"path_index", "t", "message"}


def test_breaking_histogram_and_statistics():
    cfg = SimConfig(n=256, epsilon=1e-2, dt=1e-3, t_end=0.6, record_every=20, n_paths=2, sigma="zero",
                    initial={"peakon_antipeakon": {"c": 3.0, "x1": 1.5708, "x2": 4.7124}},
                    breaking_threshold=5.0)
    ens = run_ensemble(cfg, workers=1)
    counts, edges = ens.breaking_histogram(bins=6)
    assert counts.sum() == 2 and edges[-1] == pytest.approx(0.6)
    st = ens.statistics()
    assert set(st) >= {"h1_sq", "q_pow", "sup_u", "sup_q", "min_q"}
    assert st["min_q"]["mean"].min() < -5.0
