"""Time integration of the viscous stochastic Camassa-Holm equation.

The equation is integrated in Ito form,

    du = [-u u_x - P_x + 1/2 sigma (sigma u_x)_x + eps u_xx] dt - sigma u_x dW,
    P  = K * (u^2 + u_x^2 / 2),

with a Fourier pseudospectral discretisation (2/3-rule dealiasing).  The
stiff constant-coefficient part (eps + mean(sigma^2)/2) u_xx is integrated
exactly with an integrating factor; everything else is explicit.
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
import enum
import functools
import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .brownian import BrownianPath
from .grid import Field, Grid, mollify, read_fields
from .kernel import green_kernel

log = logging.getLogger(__name__)

__all__ = [
    "Scheme",
    "NoiseCoef",
    "make_noise",
    "State",
    "SimConfig",
    "ConfigError",
    "SolverFailure",
    "Trajectory",
    "EnsembleSummary",
    "drift",
    "noise_term",
    "step",
    "simulate_path",
    "run_ensemble",
    "initial_data",
    "path_statistics",
    "pairwise_sum",
    "STABILITY_C1",
    "STABILITY_C2",
    "BLOWUP_Q",
]

STABILITY_C1 = 0.5
STABILITY_C2 = 0.25
BLOWUP_Q = 1e8


class Scheme(str, enum.Enum):
    EM_IMEX = "em_imex"
    MILSTEIN_IMEX = "milstein_imex"
    # two-stage (Heun) drift with Euler-Maruyama noise; second order when sigma = 0
    HEUN_IMEX = "heun_imex"


class ConfigError(ValueError):
    """Invalid simulation configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class SolverFailure(RuntimeError):
    """Blow-up or instability; carries the failure time and partial output."""

    def __init__(self, t: float, message: str, trajectory: "Trajectory | None" = None):
        super().__init__(f"{message} at t={t:.6g}")
        self.t = t
        self.trajectory = trajectory


# --- noise coefficient ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NoiseCoef:
    """sigma with its spectral first and second derivatives."""

    sigma: Field
    dsigma: Field
    d2sigma: Field
    smoothing: float | None = None

    @classmethod
    def from_sigma(cls, sigma: Field, smoothing: float | None = None) -> "NoiseCoef":
        if smoothing:
            sigma = mollify(sigma, smoothing)
        g = sigma.grid
        return cls(sigma, Field(g, g.diff(sigma.values, 1)), Field(g, g.diff(sigma.values, 2)), smoothing)

    @property
    def grid(self) -> Grid:
        return self.sigma.grid

    @property
    def w2inf_norm(self) -> float:
        return self.sigma.sup() + self.dsigma.sup() + self.d2sigma.sup()

    @property
    def mean_sigma_sq(self) -> float:
        return float(np.mean(self.sigma.values**2))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.sigma.values)


def _bump_profile(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def make_noise(grid: Grid, spec, smoothing: float | None = None) -> NoiseCoef:
    """Build sigma from a preset name, a ``{"file": path}`` dict or an array.

    Presets: ``zero``, ``const:c``, ``sin``, ``sin:k``, ``bump:center,width``
    (smooth bump of height 1 and half-width ``width``).
    """
    x = grid.nodes
    if isinstance(spec, dict):
        if "file" not in spec:
            raise ConfigError("sigma", f"unknown sigma document {spec!r}")
        vals = read_fields(spec["file"])[0]
    elif isinstance(spec, str):
        name, _, arg = spec.partition(":")
        if name == "zero" and not arg:
            vals = np.zeros_like(x)
        elif name == "const":
            vals = np.full_like(x, float(arg))
        elif name == "sin":
            k = int(arg) if arg else 1
            vals = np.sin(k * x)
        elif name == "bump":
            try:
                center, width = (float(a) for a in arg.split(","))
            except ValueError:
                raise ConfigError("sigma", f"bump needs 'bump:center,width', got {spec!r}") from None
            d = (x - center + np.pi) % (2 * np.pi) - np.pi
            vals = _bump_profile(d / width)
        else:
            raise ConfigError("sigma", f"unknown sigma preset {spec!r}")
    else:
        vals = np.asarray(spec, dtype=float)
    try:
        sigma = Field(grid, vals)
    except (ValueError, FloatingPointError) as exc:
        raise ConfigError("sigma", str(exc)) from None
    return NoiseCoef.from_sigma(sigma, smoothing)


# --- initial data -----------------------------------------------------------

def _peakon(x, c, x0):
    return c * green_kernel(x - x0) / green_kernel(0.0)


def initial_data(spec: dict, grid: Grid) -> Field:
    """Initial profile from a config document.

    Forms: ``{"fourier": {"1": a1, "3": a3}}`` (sine series), or
    ``{"fourier": {"sin": {...}, "cos": {...}, "const": c}}``;
    ``{"peakon": {"c", "x0"}}``; ``{"peakon_antipeakon": {"c", "x1", "x2"}}``;
    ``{"file": path}``.  An extra ``"mollify": delta`` key smooths the result.
    """
    if not isinstance(spec, dict):
        raise ConfigError("initial", f"expected an object, got {spec!r}")
    x = grid.nodes
    kinds = [k for k in spec if k != "mollify"]
    if len(kinds) != 1:
        raise ConfigError("initial", f"expected exactly one initial-data kind, got {kinds}")
    kind = kinds[0]
    body = spec[kind]
    try:
        if kind == "fourier":
            if any(key in body for key in ("sin", "cos", "const")):
                u = np.full_like(x, float(body.get("const", 0.0)))
                for k, a in body.get("sin", {}).items():
                    u += float(a) * np.sin(int(k) * x)
                for k, a in body.get("cos", {}).items():
                    u += float(a) * np.cos(int(k) * x)
            else:
                u = np.zeros_like(x)
                for k, a in body.items():
                    u += float(a) * np.sin(int(k) * x)
        elif kind == "peakon":
            u = _peakon(x, float(body["c"]), float(body["x0"]))
        elif kind == "peakon_antipeakon":
            c = float(body["c"])
            u = _peakon(x, c, float(body["x1"])) + _peakon(x, -c, float(body["x2"]))
        elif kind == "file":
            u = read_fields(body)[0]
        else:
            raise ConfigError("initial", f"unknown initial-data kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"initial.{kind}", f"missing key {exc.args[0]!r}") from None
    f = Field(grid, u)
    if spec.get("mollify"):
        f = mollify(f, float(spec["mollify"]))
    return f


# --- state and configuration ------------------------------------------------

@dataclass(frozen=True)
class State:
    t: float
    u: Field
    q: Field

    @classmethod
    def from_u(cls, t: float, u: Field) -> "State":
        return cls(t, u, Field(u.grid, u.grid.diff(u.values, 1)))


_SIM_FIELDS = ("n", "epsilon", "dt", "t_end")


@dataclass
class SimConfig:
    """Full description of a simulation or ensemble experiment."""

    n: int
    epsilon: float
    dt: float
    t_end: float
    sigma: str | dict = "zero"
    initial: dict = field(default_factory=lambda: {"fourier": {"1": 1.0}})
    scheme: str = Scheme.EM_IMEX.value
    seed: int = 0
    n_paths: int = 1
    record_every: int = 1
    smoothing: bool = False
    brownian_base_dt: float | None = None
    alpha: float = 0.5
    breaking_threshold: float = 50.0

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        missing = [k for k in _SIM_FIELDS if k not in doc]
        if missing:
            raise ConfigError(missing[0], "required field is missing")
        names = {f.name for f in dataclasses.fields(cls)}
        cfg = cls(**{k: v for k, v in doc.items() if k in names})
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scheme"] = Scheme(self.scheme).value
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    # derived quantities
    @property
    def grid(self) -> Grid:
        return Grid(self.n)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def smoothing_radius(self) -> float | None:
        """Mollification radius eps**0.5 for sigma_eps, when requested."""
        if self.smoothing and self.epsilon > 0:
            return math.sqrt(self.epsilon)
        return None

    @property
    def refinement_level(self) -> int:
        if self.brownian_base_dt is None:
            return 0
        ratio = self.brownian_base_dt / self.dt
        level = int(round(math.log2(ratio))) if ratio >= 1 else -1
        if level < 0 or abs(2.0**level - ratio) > 1e-9 * ratio:
            raise ConfigError("brownian_base_dt", f"base dt / dt = {ratio} is not a power of two")
        return level

    @property
    def base_steps(self) -> int:
        return self.n_steps // 2**self.refinement_level

    def noise(self) -> NoiseCoef:
        return make_noise(self.grid, self.sigma, self.smoothing_radius)

    def initial_field(self) -> Field:
        return initial_data(self.initial, self.grid)

    def stability_bound(self, noise: NoiseCoef | None = None, u_max: float | None = None) -> float:
        """Largest admissible dt: min(C1 h / max|u|, C2 h^2 / max|b|).

        b = (sigma^2 - mean sigma^2) / 2 is the explicitly treated
        second-order coefficient.
        """
        noise = noise if noise is not None else self.noise()
        h = self.grid.h
        if u_max is None:
            u_max = self.initial_field().sup()
        sig2 = noise.sigma.values**2
        b = 0.5 * float(np.max(np.abs(sig2 - sig2.mean())))
        adv = STABILITY_C1 * h / u_max if u_max > 0 else math.inf
        dif = STABILITY_C2 * h**2 / b if b > 1e-14 else math.inf
        return min(adv, dif)

    def validate(self) -> None:
        try:
            Grid(self.n)
        except ValueError as exc:
            raise ConfigError("n", str(exc)) from None
        if not self.epsilon >= 0:
            raise ConfigError("epsilon", f"must be >= 0, got {self.epsilon}")
        if not self.dt > 0:
            raise ConfigError("dt", f"must be > 0, got {self.dt}")
        if not self.t_end >= 0:
            raise ConfigError("t_end", f"must be >= 0, got {self.t_end}")
        if abs(self.n_steps * self.dt - self.t_end) > 1e-9 * max(1.0, self.t_end):
            raise ConfigError("dt", f"t_end={self.t_end} is not a multiple of dt={self.dt}")
        try:
            Scheme(self.scheme)
        except ValueError:
            raise ConfigError("scheme", f"unknown scheme {self.scheme!r}") from None
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigError("n_paths", f"must be a positive integer, got {self.n_paths}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError("record_every", f"must be a positive integer, got {self.record_every}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha", f"must be in (0, 1), got {self.alpha}")
        if not self.breaking_threshold > 0:
            raise ConfigError("breaking_threshold", "must be > 0")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed", "must fit in an unsigned 64-bit integer")
        level = self.refinement_level
        if self.n_steps % 2**level:
            raise ConfigError("brownian_base_dt",
                              f"t_end={self.t_end} is not a multiple of {self.brownian_base_dt}")
        noise = self.noise()
        u0 = self.initial_field()
        bound = self.stability_bound(noise, u0.sup())
        if self.dt > bound * (1 + 1e-12):
            raise ConfigError("dt", f"dt={self.dt} exceeds the stability bound {bound:.6g}")


# --- spatial operators ------------------------------------------------------

class _Operators:
    """Precomputed spectral tables for one (grid, noise, epsilon, dt)."""

    def __init__(self, noise: NoiseCoef, epsilon: float, dt: float | None = None):
        g = noise.grid
        self.grid = g
        self.n = g.n
        k = g.wavenumbers
        self.mask = g.dealias_mask
        self.ik = 1j * k
        self.ik[-1] = 0.0
        self.k2 = k**2
        self.pgrad = self.ik / (1.0 + self.k2)
        self.sigma = noise.sigma.values
        self.zero_noise = noise.is_zero
        self.sig2_mean = noise.mean_sigma_sq
        self.nu = epsilon + 0.5 * self.sig2_mean
        self.epsilon = epsilon
        if dt is not None:
            self.expo = np.exp(-self.nu * self.k2 * dt) * self.mask

    def evaluate(self, uh: np.ndarray, nonlinear: bool = True):
        """Return (u, q, N_hat, G_hat, GG_hat) for the state with spectrum uh.

        N is the explicit drift, G = -sigma q the diffusion coefficient,
        GG = sigma (sigma q)_x the Milstein operator.
        """
        n = self.n
        u = np.fft.irfft(uh, n)
        q = np.fft.irfft(self.ik * uh, n)
        nh = np.zeros_like(uh)
        if nonlinear:
            nh -= np.fft.rfft(u * q)
            nh -= self.pgrad * np.fft.rfft(u * u + 0.5 * q * q)
        if self.zero_noise:
            gh = np.zeros_like(uh)
            ggh = np.zeros_like(uh)
        else:
            sq = self.sigma * q
            sqh = np.fft.rfft(sq)
            ggh = np.fft.rfft(self.sigma * np.fft.irfft(self.ik * sqh, n))
            gh = -sqh
            nh += 0.5 * ggh + 0.5 * self.sig2_mean * self.k2 * uh
        return u, q, nh * self.mask, gh * self.mask, ggh * self.mask

    def full_drift_hat(self, uh: np.ndarray) -> np.ndarray:
        _, _, nh, _, _ = self.evaluate(uh)
        return nh - self.nu * self.k2 * uh * self.mask


def drift(state: State, noise: NoiseCoef, epsilon: float) -> Field:
    """-u u_x - P_x + 1/2 sigma (sigma u_x)_x + eps u_xx (dealiased)."""
    ops = _Operators(noise, epsilon)
    out = np.fft.irfft(ops.full_drift_hat(np.fft.rfft(state.u.values)), ops.n)
    if not np.all(np.isfinite(out)):
        raise SolverFailure(state.t, "non-finite drift")
    return Field(state.u.grid, out)


def noise_term(state: State, noise: NoiseCoef) -> Field:
    """Ito diffusion coefficient -sigma u_x."""
    return Field(state.u.grid, -noise.sigma.values * state.q.values)


def _advance(ops: _Operators, uh, dt, dw, scheme: Scheme, nonlinear=True):
    """One IMEX step in spectral space; returns (new uh, u, q) with u, q at the old state."""
    u, q, nh, gh, ggh = ops.evaluate(uh, nonlinear)
    rhs = uh + dt * nh + dw * gh
    if scheme is Scheme.MILSTEIN_IMEX:
        rhs = rhs + 0.5 * (dw * dw - dt) * ggh
    if scheme is Scheme.HEUN_IMEX:
        pred = ops.expo * rhs
        _, _, nh_pred, _, _ = ops.evaluate(pred, nonlinear)
        new = ops.expo * (uh + 0.5 * dt * nh + dw * gh) + 0.5 * dt * nh_pred * ops.mask
    else:
        new = ops.expo * rhs
    return new, u, q


def step(state: State, dt: float, dW: float, noise: NoiseCoef, epsilon: float,
         scheme=Scheme.EM_IMEX, nonlinear: bool = True) -> State:
    """Advance ``state`` by one time step with Brownian increment ``dW``.

    ``nonlinear=False`` drops the transport and pressure terms (test hook).
    """
    if not math.isfinite(dW):
        raise ValueError("dW must be finite")
    ops = _Operators(noise, epsilon, dt)
    uh = np.fft.rfft(state.u.values) * ops.mask
    new, _, _ = _advance(ops, uh, dt, dW, Scheme(scheme), nonlinear)
    u = np.fft.irfft(new, ops.n)
    t = state.t + dt
    if not np.all(np.isfinite(u)):
        raise SolverFailure(t, "blow-up or instability")
    return State.from_u(t, Field(state.u.grid, u))


# --- trajectories -----------------------------------------------------------

@dataclass(eq=False)
class Trajectory:
    """Recorded snapshots of one path together with its Brownian increments."""

    config_hash: str
    grid: Grid
    dt: float
    steps: np.ndarray          # step index of each snapshot
    times: np.ndarray
    u: np.ndarray              # (n_snapshots, n)
    q: np.ndarray
    wiener: np.ndarray         # increment of every time step
    path_index: int
    seed: int
    failure_time: float | None = None

    @property
    def snapshots(self) -> list[State]:
        return [State(float(t), Field(self.grid, u), Field(self.grid, q))
                for t, u, q in zip(self.times, self.u, self.q)]

    def snapshot_increments(self) -> np.ndarray:
        """Brownian increments aggregated over each recording interval."""
        w = np.concatenate([[0.0], np.cumsum(self.wiener)])
        return np.diff(w[self.steps])

    def identical_to(self, other: "Trajectory") -> bool:
        return (
            self.config_hash == other.config_hash
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.q, other.q)
            and np.array_equal(self.wiener, other.wiener)
        )


def simulate_path(config: SimConfig, path_index: int = 0) -> Trajectory:
    """Integrate one path; deterministic in (config, path_index).

    Raises :class:`SolverFailure` (with the partial trajectory attached) on
    NaN, ``max|q| > 1e8`` or a violated stability bound.
    """
    config.validate()
    grid = config.grid
    noise = config.noise()
    scheme = Scheme(config.scheme)
    ops = _Operators(noise, config.epsilon, config.dt)
    n_steps = config.n_steps
    dt = config.dt
    bp = BrownianPath(config.seed, path_index, config.t_end, max(config.base_steps, 1))
    wiener = np.array(bp.increments(config.refinement_level)) if n_steps else np.zeros(0)

    uh = np.fft.rfft(config.initial_field().values) * ops.mask
    rec = list(range(0, n_steps + 1, config.record_every))
    if rec[-1] != n_steps:
        rec.append(n_steps)
    rec_set = set(rec)
    us, qs = [], []
    chash = config.config_hash()

    def partial(fail_t):
        m = len(us)
        return Trajectory(chash, grid, dt, np.array(rec[:m]), np.array(rec[:m]) * dt,
                          np.array(us).reshape(m, grid.n), np.array(qs).reshape(m, grid.n),
                          wiener, path_index, config.seed, fail_t)

    def record(u, q, j):
        t = j * dt
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(q))):
            raise SolverFailure(t, "blow-up or instability", partial(t))
        umax = float(np.max(np.abs(u)))
        if umax > 0 and dt > STABILITY_C1 * grid.h / umax * (1 + 1e-12):
            raise SolverFailure(t, f"stability bound violated (max|u|={umax:.4g})", partial(t))
        us.append(u)
        qs.append(q)

    for j in range(n_steps):
        new, u, q = _advance(ops, uh, dt, wiener[j], scheme)
        qmax = float(np.max(np.abs(q)))
        if not math.isfinite(qmax) or qmax > BLOWUP_Q:
            raise SolverFailure(j * dt, "blow-up or instability", partial(j * dt))
        if j in rec_set:
            record(u, q, j)
        uh = new
    u = np.fft.irfft(uh, grid.n)
    q = np.fft.irfft(ops.ik * uh, grid.n)
    record(u, q, n_steps)
    return partial(None)


# --- ensembles --------------------------------------------------------------

def pairwise_sum(a: np.ndarray) -> np.ndarray:
    """Sum over axis 0 by fixed-order pairwise recursion."""
    m = a.shape[0]
    if m == 0:
        return np.zeros(a.shape[1:])
    if m <= 8:
        out = a[0].copy()
        for row in a[1:]:
            out = out + row
        return out
    half = m // 2
    return pairwise_sum(a[:half]) + pairwise_sum(a[half:])


def path_statistics(traj: Trajectory, alpha: float = 0.5, threshold: float = 50.0) -> dict:
    """Default per-path observables: norms, sup norms and breaking time."""
    h = traj.grid.h
    u, q = traj.u, traj.q
    min_q = q.min(axis=1)
    hit = np.nonzero(min_q < -threshold)[0]
    return {
        "h1_sq": h * np.sum(u**2 + q**2, axis=1),
        "q_pow": h * np.sum(np.abs(q) ** (2 + alpha), axis=1),
        "sup_u": np.max(np.abs(u), axis=1),
        "sup_q": np.max(np.abs(q), axis=1),
        "min_q": min_q,
        "breaking_time": float(traj.times[hit[0]]) if hit.size else math.nan,
    }


@dataclass(eq=False)
class EnsembleSummary:
    """Per-path observables (stacked in path order) and their statistics."""

    config: SimConfig
    times: np.ndarray
    alpha: float
    path_indices: list[int]
    values: dict[str, np.ndarray]
    failures: list[dict]
    trajectories: list[Trajectory] | None = None

    @property
    def n_ok(self) -> int:
        return len(self.path_indices)

    def mean(self, name: str) -> np.ndarray:
        return pairwise_sum(self.values[name]) / self.n_ok

    def variance(self, name: str) -> np.ndarray:
        """Population variance (zero for a single path)."""
        dev = self.values[name] - self.mean(name)
        return pairwise_sum(dev * dev) / self.n_ok

    def stderr(self, name: str) -> np.ndarray:
        if self.n_ok < 2:
            return np.zeros_like(self.mean(name))
        return np.sqrt(self.variance(name) * self.n_ok / (self.n_ok - 1) / self.n_ok)

    def breaking_histogram(self, bins: int = 10):
        bt = np.asarray(self.values.get("breaking_time", []), dtype=float)
        bt = bt[np.isfinite(bt)]
        return np.histogram(bt, bins=bins, range=(0.0, self.config.t_end))

    def statistics(self) -> dict:
        out = {}
        for name, arr in self.values.items():
            if arr.ndim == 2:
                out[name] = {"mean": self.mean(name), "var": self.variance(name)}
        return out


def _run_one(config: SimConfig, observers: tuple, keep: bool, path_index: int):
    try:
        traj = simulate_path(config, path_index)
    except SolverFailure as exc:
        return path_index, None, {"path_index": path_index, "t": exc.t, "message": str(exc)}, None
    obs = {}
    for fn in observers:
        obs.update(fn(traj))
    return path_index, obs, None, traj if keep else None


def _worker_count(requested: int | None) -> int:
    cap = os.environ.get("SCH_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_ensemble(config: SimConfig, observers: tuple[Callable, ...] | None = None,
                 workers: int | None = None, keep_trajectories: bool = False) -> EnsembleSummary:
    """Run ``config.n_paths`` independent paths and collect observables.

    ``observers`` map a :class:`Trajectory` to a dict of arrays/scalars; they
    run inside the worker so full trajectories need not be kept.  Failed
    paths are reported in ``failures`` and excluded from statistics.
    """
    config.validate()
    if observers is None:
        observers = (functools.partial(path_statistics, alpha=config.alpha,
                                       threshold=config.breaking_threshold),)
    observers = tuple(observers)
    job = functools.partial(_run_one, config, observers, keep_trajectories)
    indices = range(config.n_paths)
    nw = min(_worker_count(workers), config.n_paths)
    if nw > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(job, indices))
    else:
        results = [job(i) for i in indices]

    ok, failures, trajs, per_path = [], [], [], []
    for idx, obs, fail, traj in results:
        if fail is not None:
            log.warning("path %d failed: %s", idx, fail["message"])
            failures.append(fail)
            continue
        ok.append(idx)
        per_path.append(obs)
        if traj is not None:
            trajs.append(traj)
    values = {}
    if per_path:
        for key in per_path[0]:
            values[key] = np.array([np.asarray(o[key], dtype=float) for o in per_path])
    rec = list(range(0, config.n_steps + 1, config.record_every))
    if rec[-1] != config.n_steps:
        rec.append(config.n_steps)
    return EnsembleSummary(config, np.array(rec) * config.dt, config.alpha, ok, values,
                           failures, trajs if keep_trajectories else None)
