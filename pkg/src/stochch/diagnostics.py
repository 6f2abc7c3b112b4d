"""Pathwise and ensemble checks of the balance laws satisfied by the viscous solutions.

Stochastic integrals are Ito sums over the Brownian increments stored with
the trajectory, so a residual measures only the time discretisation error of
the path it was computed on.  The default quadrature adds the second-order
term g'(u)[G] (dW^2 - dt) / 2 to the left-point sum, where G = -sigma q is the
noise direction; plain left-point sums (``ito="left"``) carry an O(dt^1/2)
error even for the exact solution.  Deterministic time integrals use the
trapezoidal rule over the recorded snapshots.

Notation: a = sigma^2, P the nonlocal pressure, q = u_x.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from . import entropy as ent
from .entropy import EntropySpec
from .grid import Field, Grid, mollify
from .kernel import pressure_source
from .sde import EnsembleSummary, NoiseCoef, SimConfig, Trajectory, pairwise_sum, simulate_path

__all__ = [
    "DiagnosticsReport",
    "MonteCarloEstimate",
    "energy_series",
    "energy_balance_residual",
    "entropy_residual",
    "entropy_residual_u",
    "higher_integrability",
    "translation_functional",
    "translation_sup",
    "translation_slope",
    "TranslationObserver",
    "EnergyBudgetObserver",
    "HolderObserver",
    "commutator_errors",
    "wave_breaking_detector",
    "defect_field",
    "defect_estimate",
    "energy_budget",
    "energy_inequality_check",
    "holder_increments",
    "loglog_slope",
    "diagnose",
]


# --- small helpers ----------------------------------------------------------

@dataclass
class Residual:
    """Cumulative residual on [t_0, t_i] for every snapshot time t_i.

    ``raw`` is LHS - RHS of the balance law; ``relative`` divides by the
    running maximum of the dominant term (``scale``).
    """

    times: np.ndarray
    raw: np.ndarray
    scale: np.ndarray
    terms: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def relative(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = self.raw / self.scale
        return np.where(self.scale > 0, rel, 0.0)

    def l1_norm(self) -> float:
        """L1-in-time norm of the cumulative residual."""
        if self.times.size < 2:
            return 0.0
        return float(trapezoid(np.abs(self.raw), self.times))

    def interval(self, i: int, j: int) -> float:
        """Residual over [t_i, t_j]."""
        return float(self.raw[j] - self.raw[i])


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs at least two positive points")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _require_increments(traj: Trajectory) -> np.ndarray:
    if traj.wiener is None or traj.wiener.size != int(traj.steps[-1]):
        raise ValueError("trajectory does not carry its Brownian increments")
    return traj.snapshot_increments()


def _noise_arrays(noise: NoiseCoef, grid: Grid):
    noise.grid.check_same(grid)
    s = noise.sigma.values
    ds = noise.dsigma.values
    d2s = noise.d2sigma.values
    a1 = 2 * s * ds
    a2 = 2 * ds**2 + 2 * s * d2s
    return s, ds, a1, a2


def _pressure(grid: Grid, u: np.ndarray, q: np.ndarray) -> np.ndarray:
    k = grid.wavenumbers
    return np.fft.irfft(np.fft.rfft(pressure_source(u, q)) / (1 + k**2), grid.n)


def _cum_ito(g: np.ndarray, dw: np.ndarray, gp: np.ndarray, t: np.ndarray, ito: str) -> np.ndarray:
    """Cumulative Ito sum of g dW; ``gp`` is the derivative of g along the noise."""
    inc = g[:-1] * dw
    if ito == "milstein":
        inc = inc + 0.5 * gp[:-1] * (dw * dw - np.diff(t))
    elif ito != "left":
        raise ValueError(f"ito must be 'left' or 'milstein', got {ito!r}")
    return np.concatenate([[0.0], np.cumsum(inc)])


def _cum_dt(f: np.ndarray, t: np.ndarray) -> np.ndarray:
    if t.size < 2:
        return np.zeros_like(f)
    return cumulative_trapezoid(f, t, initial=0.0)


def _running_max(x: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(np.abs(x))


# --- energy balance ---------------------------------------------------------

def energy_series(traj: Trajectory) -> np.ndarray:
    """Total energy int u^2 + q^2 dx at every snapshot."""
    return traj.grid.h * np.sum(traj.u**2 + traj.q**2, axis=1)


def energy_balance_residual(traj: Trajectory, noise: NoiseCoef, epsilon: float,
                            ito: str = "milstein") -> Residual:
    """Residual of the pathwise total energy balance.

    E|_0^t + 2 eps int int (q^2 + q_x^2)
        = int int [a''/4 u^2 + (sigma'^2 - a''/4) q^2] dt + int int sigma' (u^2 - q^2) dW
    """
    dw = _require_increments(traj)
    g = traj.grid
    h = g.h
    sig, ds, _, a2 = _noise_arrays(noise, g)
    u, q = traj.u, traj.q
    qx = np.array([g.diff(row, 1) for row in q])
    big_g = -sig * q
    big_gx = np.array([g.diff(row, 1) for row in big_g])
    t = traj.times
    e = energy_series(traj)
    dissip = 2 * epsilon * h * np.sum(q**2 + qx**2, axis=1)
    drift = h * np.sum(0.25 * a2 * u**2 + (ds**2 - 0.25 * a2) * q**2, axis=1)
    mart = h * np.sum(ds * (u**2 - q**2), axis=1)
    mart_p = 2 * h * np.sum(ds * (u * big_g - q * big_gx), axis=1)
    terms = {
        "energy": e - e[0],
        "dissipation": _cum_dt(dissip, t),
        "drift": _cum_dt(drift, t),
        "martingale": _cum_ito(mart, dw, mart_p, t, ito),
    }
    raw = terms["energy"] + terms["dissipation"] - terms["drift"] - terms["martingale"]
    return Residual(t, raw, _running_max(e), terms)


# --- renormalised equations -------------------------------------------------

def _as_test_function(testfn, grid: Grid) -> np.ndarray:
    if testfn is None:
        return np.ones(grid.n)
    phi = np.asarray(testfn.values if isinstance(testfn, Field) else testfn, dtype=float)
    if phi.shape != (grid.n,):
        raise ValueError("test function does not match the grid")
    return phi


def entropy_residual(traj: Trajectory, spec: EntropySpec, noise: NoiseCoef, epsilon: float,
                     testfn=None, ito: str = "milstein") -> Residual:
    """Weak-form residual of the renormalised equation for S(q).

    Tested against phi the law reads

        d int phi S = int phi' A dt + int phi'' B dt - int phi C dt
                      + int (phi' sigma S + phi sigma' H3) dW,

    A = u S + a' H1 / 4, B = (a/2 + eps) S,
    C = eps S'' q_x^2 + S' (P - u^2) - H2 - a'' H3 / 4 - sigma'^2 S'' q^2 / 2.

    The eps S'' q_x^2 term is evaluated as -eps int (phi q_x)' S'(q) dx.
    """
    dw = _require_increments(traj)
    g = traj.grid
    h = g.h
    phi = _as_test_function(testfn, g)
    dphi = g.diff(phi, 1)
    d2phi = g.diff(phi, 2)
    sig, ds, a1, a2 = _noise_arrays(noise, g)
    a = sig**2
    nt = traj.times.size
    dens = np.empty(nt)
    flux = np.empty(nt)
    mart = np.empty(nt)
    mart_p = np.empty(nt)
    for i in range(nt):
        u, q = traj.u[i], traj.q[i]
        qx = g.diff(q, 1)
        p = _pressure(g, u, q)
        s0 = ent.s(spec, q)
        s1 = ent.s_prime(spec, q)
        s2 = ent.s_second(spec, q)
        hh1 = ent.h1(spec, q)
        hh2 = ent.h2(spec, q)
        hh3 = ent.h3(spec, q)
        big_a = u * s0 + 0.25 * a1 * hh1
        big_b = (0.5 * a + epsilon) * s0
        # eps S''(q) q_x^2 = eps q_x d_x S'(q), moved onto (phi q_x)' so that
        # the possibly discontinuous S'' never meets the quadrature
        big_c = s1 * (p - u**2) - hh2 - 0.25 * a2 * hh3 - 0.5 * ds**2 * s2 * q**2
        visc = epsilon * g.diff(phi * qx, 1) * s1
        dens[i] = h * np.sum(phi * s0)
        flux[i] = h * np.sum(dphi * big_a + d2phi * big_b - phi * big_c + visc)
        mart[i] = h * np.sum(dphi * sig * s0 + phi * ds * hh3)
        mart_p[i] = -h * np.sum((dphi * sig * s1 - phi * ds * s2 * q) * g.diff(sig * q, 1))
    t = traj.times
    terms = {"density": dens - dens[0], "drift": _cum_dt(flux, t),
             "martingale": _cum_ito(mart, dw, mart_p, t, ito)}
    raw = terms["density"] - terms["drift"] - terms["martingale"]
    return Residual(t, raw, _running_max(dens), terms)


def entropy_residual_u(traj: Trajectory, spec: EntropySpec, noise: NoiseCoef, epsilon: float,
                       testfn=None, ito: str = "milstein") -> Residual:
    """Weak-form residual of the renormalised equation for S(u).

        d int phi S = int phi' F dt + int phi'' B dt
                      - int phi (eps S'' q^2 - a'' S / 4 - S'' q P) dt
                      + int (phi' sigma S + phi sigma' S) dW,

    F = u S + S' P - G + 3 a' S / 4 with G' = S, G(0) = 0, B = (a/2 + eps) S.
    All S-quantities are evaluated at u.  The S'' terms are evaluated as
    int (phi (eps q - P))' S'(u) dx, which needs only the Lipschitz S'.
    """
    dw = _require_increments(traj)
    g = traj.grid
    h = g.h
    phi = _as_test_function(testfn, g)
    dphi = g.diff(phi, 1)
    d2phi = g.diff(phi, 2)
    sig, ds, a1, a2 = _noise_arrays(noise, g)
    a = sig**2
    nt = traj.times.size
    dens = np.empty(nt)
    flux = np.empty(nt)
    mart = np.empty(nt)
    mart_p = np.empty(nt)
    for i in range(nt):
        u, q = traj.u[i], traj.q[i]
        p = _pressure(g, u, q)
        s0 = ent.s(spec, u)
        s1 = ent.s_prime(spec, u)
        big_g = ent.antiderivative(spec, u)
        big_f = u * s0 + s1 * p - big_g + 0.75 * a1 * s0
        big_b = (0.5 * a + epsilon) * s0
        # S''(u) q (eps q - P) = (eps q - P) d_x S'(u), integrated by parts
        kink = g.diff(phi * (epsilon * q - p), 1) * s1
        dens[i] = h * np.sum(phi * s0)
        flux[i] = h * np.sum(dphi * big_f + d2phi * big_b + 0.25 * phi * a2 * s0 + kink)
        mart[i] = h * np.sum((dphi * sig + phi * ds) * s0)
        mart_p[i] = -h * np.sum((dphi * sig + phi * ds) * s1 * sig * q)
    t = traj.times
    terms = {"density": dens - dens[0], "drift": _cum_dt(flux, t),
             "martingale": _cum_ito(mart, dw, mart_p, t, ito)}
    raw = terms["density"] - terms["drift"] - terms["martingale"]
    return Residual(t, raw, _running_max(dens), terms)


# --- ensemble functionals ---------------------------------------------------

@dataclass(frozen=True)
class MonteCarloEstimate:
    value: float
    stderr: float
    n_paths: int
    n_failed: int

    def __float__(self) -> float:
        return self.value


def _mc(samples: np.ndarray, n_failed: int) -> MonteCarloEstimate:
    m = samples.size
    if m == 0:
        return MonteCarloEstimate(math.nan, math.nan, 0, n_failed)
    mean = float(pairwise_sum(samples) / m)
    se = float(np.sqrt(pairwise_sum((samples - mean) ** 2) / (m - 1) / m)) if m > 1 else 0.0
    return MonteCarloEstimate(mean, se, m, n_failed)


def higher_integrability(ensemble: EnsembleSummary, alpha: float | None = None) -> MonteCarloEstimate:
    """Monte Carlo estimate of E int_0^T int |q|^(2+alpha) dx dt.

    Uses the per-path ``q_pow`` series recorded by the default observer, so
    ``alpha`` must match the ensemble's.
    """
    if alpha is not None and not math.isclose(alpha, ensemble.alpha):
        raise ValueError(f"ensemble recorded alpha={ensemble.alpha}, asked for {alpha}")
    if ensemble.n_ok == 0:
        return MonteCarloEstimate(math.nan, math.nan, 0, len(ensemble.failures))
    series = ensemble.values["q_pow"]
    t = ensemble.times
    per_path = trapezoid(series, t, axis=1) if t.size > 1 else np.zeros(series.shape[0])
    return _mc(np.asarray(per_path), len(ensemble.failures))


def translation_functional(Q, phi, tau: float, times=None, h: float | None = None) -> float:
    """int_0^{T-tau} | int phi(x) (Q(t+tau, x) - Q(t, x)) dx | dt.

    ``Q`` has shape (n_times, n) on ``times`` (uniform over [0, T] when
    omitted).  Only g(t) = int phi Q(t) dx enters; g(t + tau) is linearly
    interpolated when tau is not a multiple of the snapshot spacing.
    """
    Q = np.asarray(Q, dtype=float)
    phi = np.asarray(phi.values if isinstance(phi, Field) else phi, dtype=float)
    if times is None:
        times = np.linspace(0.0, 1.0, Q.shape[0])
    times = np.asarray(times, dtype=float)
    if h is None:
        h = 2 * np.pi / Q.shape[1]
    g = h * Q @ phi
    return _translation_from_g(g, times, tau)


def _translation_from_g(g: np.ndarray, times: np.ndarray, tau: float) -> float:
    t0, t1 = times[0], times[-1]
    if not 0 <= tau < t1 - t0:
        raise ValueError(f"tau={tau} must lie in [0, T) with T={t1 - t0}")
    end = t1 - tau
    ts = times[times <= end + 1e-12 * max(1.0, t1)]
    if ts[-1] < end - 1e-12 * max(1.0, t1):
        ts = np.append(ts, end)
    diff = np.abs(np.interp(ts + tau, times, g) - np.interp(ts, times, g))
    return float(trapezoid(diff, ts)) if ts.size > 1 else 0.0


def _tau_grid(theta: float, times: np.ndarray, n_tau: int = 16) -> np.ndarray:
    """Geometric grid of n_tau lags in (0, theta], snapped to snapshot multiples."""
    dt = float(times[1] - times[0])
    taus = np.geomspace(theta / 64.0, theta, n_tau)
    snapped = np.maximum(np.round(taus / dt), 1) * dt
    return np.unique(snapped)


def translation_sup(Q, phi, theta: float, times, h: float | None = None, n_tau: int = 16) -> float:
    """sup of the translation functional over a geometric tau-grid in (0, theta].

    A finite grid gives a lower bound for the supremum over the continuum.
    """
    Q = np.asarray(Q, dtype=float)
    phi = np.asarray(phi.values if isinstance(phi, Field) else phi, dtype=float)
    times = np.asarray(times, dtype=float)
    if h is None:
        h = 2 * np.pi / Q.shape[1]
    g = h * Q @ phi
    return max(_translation_from_g(g, times, tau) for tau in _tau_grid(theta, times, n_tau))


@dataclass(frozen=True)
class TranslationObserver:
    """Per-path observer: sup-functional of Q = S(q) for each theta."""

    spec: EntropySpec
    phi: tuple
    thetas: tuple

    def __call__(self, traj: Trajectory) -> dict:
        phi = np.asarray(self.phi)
        q_ent = ent.s(self.spec, traj.q)
        vals = [translation_sup(q_ent, phi, th, traj.times, traj.grid.h) for th in self.thetas]
        return {"translation_sup": np.array(vals)}


def translation_slope(ensemble: EnsembleSummary, thetas) -> tuple[float, np.ndarray]:
    """Ensemble mean of the sup-functional and its log-log slope in theta."""
    mean = ensemble.mean("translation_sup")
    return loglog_slope(thetas, mean), mean


def commutator_errors(w: Field, noise: NoiseCoef, delta: float, extended: bool = False,
                      testfn=None, spec: EntropySpec | None = None):
    """Norms of the first-order commutator errors for mollification radius delta.

    Returns (||d_x E1||_L1, ||E2||_H1, ||E3||_L2) with

        E1 = (w w_x) * J - w_d (w_d)_x,
        E2 = (sigma w_x) * J - sigma (w_d)_x,
        E3 = -(sigma (sigma w_x)_x) * J / 2 + sigma (sigma (w_d)_x)_x / 2.

    With ``extended`` a fourth value is appended: |int -phi S'((w_d)_x) (E3)_x
    + phi S''((w_d)_x) ((E2)_x^2 / 2 + (sigma (w_d)_x)_x (E2)_x) dx|
    (default phi = 1, S = v^2/2).  Products are formed on a 3/2-padded grid.
    """
    g = w.grid
    g.check_same(noise.grid)
    h = g.h
    sig = noise.sigma.values
    wv = w.values
    wd = mollify(w, delta).values
    wx = g.diff(wv, 1)
    wdx = g.diff(wd, 1)

    def moll(arr):
        return mollify(Field(g, arr), delta).values

    e1 = moll(g.product(wv, wx)) - g.product(wd, wdx)
    e2 = moll(g.product(sig, wx)) - g.product(sig, wdx)
    s_wdx = g.product(sig, wdx)
    e3 = (-0.5 * moll(g.product(sig, g.diff(g.product(sig, wx), 1)))
          + 0.5 * g.product(sig, g.diff(s_wdx, 1)))
    e2x = g.diff(e2, 1)
    n1 = h * float(np.sum(np.abs(g.diff(e1, 1))))
    n2 = math.sqrt(h * float(np.sum(e2**2 + e2x**2)))
    n3 = math.sqrt(h * float(np.sum(e3**2)))
    if not extended:
        return n1, n2, n3
    spec = spec or EntropySpec.square()
    phi = _as_test_function(testfn, g)
    s1 = ent.s_prime(spec, wdx)
    s2 = ent.s_second(spec, wdx)
    integrand = (-phi * s1 * g.diff(e3, 1)
                 + phi * s2 * (0.5 * e2x**2 + g.diff(s_wdx, 1) * e2x))
    return n1, n2, n3, abs(h * float(np.sum(integrand)))


def wave_breaking_detector(traj: Trajectory, threshold: float) -> tuple[float | None, np.ndarray]:
    """First snapshot time with min q < -threshold, and the running min q series."""
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    min_q = traj.q.min(axis=1)
    hit = np.nonzero(min_q < -threshold)[0]
    return (float(traj.times[hit[0]]) if hit.size else None), min_q


# --- defect proxy -----------------------------------------------------------

def defect_field(traj: Trajectory, reference: Trajectory) -> np.ndarray:
    """(q_eps^2 - q_ref^2) / 2 on the common snapshot times."""
    if not np.array_equal(traj.times, reference.times) or traj.grid != reference.grid:
        raise ValueError("trajectories must share grid and snapshot times")
    return 0.5 * (traj.q**2 - reference.q**2)


@dataclass
class DefectResult:
    epsilon: float
    times: np.ndarray
    field: np.ndarray          # path mean of the defect proxy, (n_times, n)
    integral: np.ndarray       # path mean of int D dx
    l1: np.ndarray             # path mean of int |D| dx


def defect_estimate(configs: Sequence[SimConfig], reference_epsilon: float | None = None,
                    paths: Sequence[int] = (0,),
                    trajectories: dict | None = None) -> dict[float, DefectResult]:
    """Coupled-path defect proxy for an epsilon sweep.

    All configs must agree except for epsilon; each path index uses the same
    Brownian path at every epsilon.  The reference is the smallest epsilon
    unless given.  Pass a dict as ``trajectories`` to receive every simulated
    path keyed by (epsilon, path_index).
    """
    if not configs:
        raise ValueError("empty sweep")
    base = dict(configs[0].to_dict(), epsilon=None)
    for c in configs[1:]:
        if dict(c.to_dict(), epsilon=None) != base:
            raise ValueError("sweep configs differ in more than epsilon")
    eps = [c.epsilon for c in configs]
    ref_eps = min(eps) if reference_epsilon is None else reference_epsilon
    if ref_eps not in eps:
        raise ValueError(f"reference epsilon {ref_eps} not in the sweep")
    ref_cfg = configs[eps.index(ref_eps)]
    refs = {p: simulate_path(ref_cfg, p) for p in paths}
    out = {}
    for cfg in configs:
        fields = []
        for p in paths:
            traj = refs[p] if cfg is ref_cfg else simulate_path(cfg, p)
            if trajectories is not None:
                trajectories[(cfg.epsilon, p)] = traj
            fields.append(defect_field(traj, refs[p]))
        stack = np.array(fields)
        h = ref_cfg.grid.h
        out[cfg.epsilon] = DefectResult(
            cfg.epsilon,
            refs[paths[0]].times,
            pairwise_sum(stack) / len(paths),
            pairwise_sum(h * stack.sum(axis=2)) / len(paths),
            pairwise_sum(h * np.abs(stack).sum(axis=2)) / len(paths),
        )
    return out


# --- energy inequality in the mean ------------------------------------------

@dataclass(frozen=True)
class EnergyBudgetObserver:
    """Per-path observer: energy, cumulative drift integral and dissipation.

    ``stride`` subsamples the output (integrals use every snapshot).
    """

    sigma: tuple
    dsigma: tuple
    d2sigma: tuple
    epsilon: float
    stride: int = 1

    @classmethod
    def from_noise(cls, noise: NoiseCoef, epsilon: float, stride: int = 1):
        return cls(tuple(noise.sigma.values), tuple(noise.dsigma.values),
                   tuple(noise.d2sigma.values), epsilon, stride)

    def __call__(self, traj: Trajectory) -> dict:
        g = traj.grid
        noise = NoiseCoef(Field(g, self.sigma), Field(g, self.dsigma), Field(g, self.d2sigma))
        res = energy_balance_residual(traj, noise, self.epsilon)
        sl = slice(None, None, self.stride)
        return {
            "times": traj.times[sl],
            "energy": energy_series(traj)[sl],
            "drift_integral": res.terms["drift"][sl],
            "dissipation_integral": res.terms["dissipation"][sl],
            "martingale": res.terms["martingale"][sl],
        }


def energy_budget(traj: Trajectory, noise: NoiseCoef, epsilon: float) -> dict:
    return EnergyBudgetObserver.from_noise(noise, epsilon)(traj)


@dataclass
class InequalityReport:
    times: np.ndarray
    pairs: np.ndarray          # (m, 2) snapshot index pairs (s, t)
    mean: np.ndarray           # ensemble mean of E|_s^t - drift integral
    stderr: np.ndarray
    n_paths: int
    n_failed: int
    n_sigma: float

    @property
    def violations(self) -> np.ndarray:
        """Amount by which mean exceeds n_sigma standard errors (0 when satisfied)."""
        return np.maximum(self.mean - self.n_sigma * self.stderr, 0.0)

    @property
    def holds(self) -> bool:
        return bool(np.all(self.violations == 0.0))


def energy_inequality_check(ensemble: EnsembleSummary, n_sigma: float = 2.0,
                            times_stride: int = 1) -> InequalityReport:
    """Check E[ E|_s^t - int_s^t drift ] <= n_sigma standard errors for all s < t.

    Needs the ``energy`` and ``drift_integral`` series of
    :class:`EnergyBudgetObserver`.  The martingale term has zero mean and is
    not subtracted.
    """
    e = ensemble.values["energy"][:, ::times_stride]
    d = ensemble.values["drift_integral"][:, ::times_stride]
    m = e.shape[1]
    times = ensemble.values["times"][0, ::times_stride]
    ii, jj = np.triu_indices(m, k=1)
    x = (e[:, jj] - e[:, ii]) - (d[:, jj] - d[:, ii])
    n = x.shape[0]
    mean = pairwise_sum(x) / n
    se = np.sqrt(pairwise_sum((x - mean) ** 2) / max(n - 1, 1) / n) if n > 1 else np.zeros_like(mean)
    return InequalityReport(times, np.column_stack([ii, jj]), mean, se, n,
                            len(ensemble.failures), n_sigma)


# --- Holder-in-time monitor -------------------------------------------------

@dataclass(frozen=True)
class HolderObserver:
    """Per-path observer: time-averaged ||u(t + tau) - u(t)||_L2^2 per lag (in snapshots)."""

    lags: tuple

    def __call__(self, traj: Trajectory) -> dict:
        return {"holder": holder_increments(traj, self.lags)}


def holder_increments(traj: Trajectory, lags) -> np.ndarray:
    h = traj.grid.h
    out = []
    for lag in lags:
        d = traj.u[lag:] - traj.u[:-lag]
        out.append(h * float(np.mean(np.sum(d * d, axis=1))))
    return np.array(out)


# --- report -----------------------------------------------------------------

@dataclass
class DiagnosticsReport:
    times: np.ndarray
    energy_series: np.ndarray
    residual_series: dict[str, np.ndarray]
    breaking_time: float | None
    statistics: dict[str, float]
    metadata: dict

    def __post_init__(self):
        for name, s in self.residual_series.items():
            if np.shape(s) != np.shape(self.times):
                raise ValueError(f"series {name!r} is not on the snapshot time axis")

    def to_json(self) -> str:
        doc = {
            "breaking_time": self.breaking_time,
            "statistics": self.statistics,
            "metadata": self.metadata,
            "series": ["time", "energy", *self.residual_series],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        cols = [self.times, self.energy_series, *self.residual_series.values()]
        header = ",".join(["time", "energy", *self.residual_series])
        rows = [",".join(repr(float(c[i])) for c in cols) for i in range(self.times.size)]
        return "\n".join([header, *rows]) + "\n"


def diagnose(traj: Trajectory, config: SimConfig, ell: float = 5.0,
             threshold: float | None = None) -> DiagnosticsReport:
    """Standard per-trajectory report: energy balance, S(q) and S(u) residuals, breaking."""
    noise = config.noise()
    eps = config.epsilon
    threshold = threshold if threshold is not None else config.breaking_threshold
    eb = energy_balance_residual(traj, noise, eps)
    sq = entropy_residual(traj, EntropySpec.sell(ell), noise, eps)
    su = entropy_residual_u(traj, EntropySpec.square(), noise, eps)
    tb, min_q = wave_breaking_detector(traj, threshold)
    series = {
        "energy_residual": eb.raw,
        "energy_residual_rel": eb.relative,
        "entropy_q_residual": sq.raw,
        "entropy_q_residual_rel": sq.relative,
        "entropy_u_residual": su.raw,
        "entropy_u_residual_rel": su.relative,
        "min_q": min_q,
    }
    stats = {
        "energy_residual_l1": eb.l1_norm(),
        "entropy_q_residual_l1": sq.l1_norm(),
        "entropy_u_residual_l1": su.l1_norm(),
        "sigma_w2inf": noise.w2inf_norm,
    }
    meta = {
        "config_hash": traj.config_hash,
        "path_index": traj.path_index,
        "seed": traj.seed,
        "entropy_ell": ell,
        "breaking_threshold": threshold,
        "sigma_smoothing": noise.smoothing,
    }
    return DiagnosticsReport(traj.times, energy_series(traj), series, tb, stats, meta)
