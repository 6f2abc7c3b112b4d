"""Command-line driver: ``sch <subcommand> --config FILE --output DIR``.

Every run validates the whole plan before computing, writes its numeric
artifacts plus ``manifest.json`` (config hash, defaults, versions, seeds,
artifact sha256 hashes, wall time) and, on failure, ``error.json`` with a
nonzero exit status.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from . import diagnostics as diag
from . import entropy
from .grid import Field, Grid
from .io import load_trajectory, save_trajectory, sha256_file, versions, write_csv, write_json
from .kernel import dual_path_errors, kernel_table
from .sde import ConfigError, SimConfig, SolverFailure, run_ensemble, simulate_path

log = logging.getLogger("stochch")

__all__ = ["ExperimentPlan", "parse_config", "run", "main", "MODES"]

MODES = ("simulate", "ensemble", "diagnose", "sweep", "entropy-check", "kernel-check",
         "commutator-study")
_NEEDS_SIM = {"simulate", "ensemble", "diagnose", "sweep", "commutator-study"}
_SIM_KEYS = {f.name for f in dataclasses.fields(SimConfig)}

# mode-specific parameters and their defaults
_MODE_DEFAULTS = {
    "simulate": {},
    "ensemble": {"n_bins": 10},
    "diagnose": {"ell": 5.0, "trajectory": None},
    "sweep": {"epsilons": None, "reference_epsilon": None},
    "entropy-check": {"ells": [1.0, 2.0, 5.0, 10.0], "step_fraction": 0.01},
    "kernel-check": {"n": 256, "samples": 20, "band": 16, "seed": 0},
    "commutator-study": {"deltas": [0.4, 0.2, 0.1, 0.05], "extended": True},
}


@dataclass
class ExperimentPlan:
    mode: str
    config: SimConfig | None
    params: dict
    output_dir: Path | None = None
    defaults: dict = field(default_factory=dict)

    def describe(self) -> dict:
        return {
            "mode": self.mode,
            "config": self.config.to_dict() if self.config else None,
            "params": self.params,
            "defaults_applied": self.defaults,
        }


def _sim_defaults() -> dict:
    out = {}
    for f in dataclasses.fields(SimConfig):
        if f.default is not dataclasses.MISSING:
            out[f.name] = f.default
        elif f.default_factory is not dataclasses.MISSING:
            out[f.name] = f.default_factory()
    return out


def parse_config(text, mode: str | None = None, output_dir=None, seed: int | None = None,
                 paths: int | None = None) -> ExperimentPlan:
    """Validate a JSON document (string or dict) into an :class:`ExperimentPlan`.

    Raises :class:`ConfigError` naming the offending field.
    """
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise ConfigError("document", f"invalid JSON: {exc}") from None
    else:
        doc = dict(text or {})
    if not isinstance(doc, dict):
        raise ConfigError("document", "top level must be an object")
    doc_mode = doc.pop("mode", None)
    if mode and doc_mode and mode != doc_mode:
        raise ConfigError("mode", f"document says {doc_mode!r} but {mode!r} was requested")
    mode = mode or doc_mode
    if mode not in MODES:
        raise ConfigError("mode", f"must be one of {', '.join(MODES)}, got {mode!r}")
    if seed is not None:
        doc["seed"] = seed
    if paths is not None:
        doc["n_paths"] = paths

    mode_keys = _MODE_DEFAULTS[mode]
    allowed = set(mode_keys) | (_SIM_KEYS if mode in _NEEDS_SIM else set())
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    params = {k: doc.get(k, v) for k, v in mode_keys.items()}
    defaults = {k: v for k, v in mode_keys.items() if k not in doc}

    config = None
    if mode in _NEEDS_SIM:
        sim = {k: v for k, v in doc.items() if k in _SIM_KEYS}
        if mode == "sweep":
            eps = params["epsilons"]
            if not isinstance(eps, list) or len(eps) < 2:
                raise ConfigError("epsilons", "sweep needs a list of at least two viscosities")
            sim.setdefault("epsilon", eps[0])
        defaults.update({k: v for k, v in _sim_defaults().items() if k not in sim})
        config = SimConfig.from_dict(sim)
        if mode == "sweep":
            for e in params["epsilons"]:
                try:
                    config.replace(epsilon=float(e)).validate()
                except ConfigError as exc:
                    raise ConfigError("epsilons", f"epsilon={e}: {exc}") from None
            ref = params["reference_epsilon"]
            if ref is not None and ref not in params["epsilons"]:
                raise ConfigError("reference_epsilon", "must be one of epsilons")
    _check_params(mode, params, config)
    return ExperimentPlan(mode, config, params, Path(output_dir) if output_dir else None, defaults)


def _check_params(mode: str, p: dict, config: SimConfig | None) -> None:
    if mode == "entropy-check":
        if not p["ells"] or any(not float(e) > 0 for e in p["ells"]):
            raise ConfigError("ells", "need positive values")
        if not 0 < p["step_fraction"] <= 1:
            raise ConfigError("step_fraction", "must be in (0, 1]")
    elif mode == "kernel-check":
        try:
            Grid(p["n"])
        except ValueError as exc:
            raise ConfigError("n", str(exc)) from None
        if not 0 < int(p["band"]) < p["n"] // 2:
            raise ConfigError("band", "must be in (0, n/2)")
        if int(p["samples"]) < 1:
            raise ConfigError("samples", "must be positive")
    elif mode == "commutator-study":
        if not p["deltas"] or any(not float(d) > 0 for d in p["deltas"]):
            raise ConfigError("deltas", "need positive radii")
        h = config.grid.h
        if min(float(d) for d in p["deltas"]) < 2 * h:
            raise ConfigError("deltas", f"mollifier under-resolved: radii must be >= 2h = {2 * h:.6g}")
    elif mode == "diagnose":
        if not float(p["ell"]) > 0:
            raise ConfigError("ell", "must be positive")


# --- runners ----------------------------------------------------------------

def _run_simulate(plan: ExperimentPlan, out: Path) -> list[Path]:
    cfg = plan.config
    files = []
    for i in range(cfg.n_paths):
        files += save_trajectory(simulate_path(cfg, i), out / f"path_{i:04d}")
    return files


def _run_ensemble(plan: ExperimentPlan, out: Path) -> list[Path]:
    cfg = plan.config
    ens = run_ensemble(cfg)
    cols = {"time": ens.times}
    for name, st in ens.statistics().items():
        cols[f"{name}_mean"] = st["mean"]
        cols[f"{name}_var"] = st["var"]
    files = []
    if ens.n_ok:
        files.append(write_csv(out / "ensemble.csv", cols))
        hi = diag.higher_integrability(ens)
        per = {
            "path_index": np.array(ens.path_indices),
            "h1_sq_final": ens.values["h1_sq"][:, -1],
            "q_pow_time_integral": trapezoid(ens.values["q_pow"], ens.times, axis=1)
            if ens.times.size > 1 else np.zeros(ens.n_ok),
            "sup_q_max": ens.values["sup_q"].max(axis=1),
            "breaking_time": ens.values["breaking_time"],
        }
        files.append(write_csv(out / "paths.csv", per))
    else:
        hi = None
    counts, edges = ens.breaking_histogram(plan.params["n_bins"])
    files.append(write_json(out / "ensemble.json", {
        "n_ok": ens.n_ok,
        "failures": ens.failures,
        "alpha": ens.alpha,
        "higher_integrability": dataclasses.asdict(hi) if hi else None,
        "breaking_histogram": {"counts": counts, "edges": edges},
    }))
    return files


def _run_diagnose(plan: ExperimentPlan, out: Path) -> list[Path]:
    cfg = plan.config
    files = []
    if plan.params["trajectory"]:
        trajs = [load_trajectory(plan.params["trajectory"])]
    else:
        trajs = [simulate_path(cfg, i) for i in range(cfg.n_paths)]
    for traj in trajs:
        rep = diag.diagnose(traj, cfg, ell=float(plan.params["ell"]))
        stem = out / f"diagnostics_{traj.path_index:04d}"
        stem.with_suffix(".csv").write_text(rep.to_csv())
        stem.with_suffix(".json").write_text(rep.to_json() + "\n")
        files += [stem.with_suffix(".csv"), stem.with_suffix(".json")]
    return files


def _run_sweep(plan: ExperimentPlan, out: Path) -> list[Path]:
    base = plan.config
    configs = [base.replace(epsilon=float(e)) for e in plan.params["epsilons"]]
    trajs: dict = {}
    res = diag.defect_estimate(configs, plan.params["reference_epsilon"],
                               paths=tuple(range(base.n_paths)), trajectories=trajs)
    files = []
    for (eps, p), traj in sorted(trajs.items()):
        sub = out / f"eps_{eps:g}"
        sub.mkdir(exist_ok=True)
        files += save_trajectory(traj, sub / f"path_{p:04d}")
    cols = {"time": next(iter(res.values())).times}
    for eps, r in sorted(res.items()):
        cols[f"defect_integral_eps_{eps:g}"] = r.integral
        cols[f"defect_l1_eps_{eps:g}"] = r.l1
    files.append(write_csv(out / "defect.csv", cols))
    return files


def _run_entropy_check(plan: ExperimentPlan, out: Path) -> list[Path]:
    rep = entropy.identity_report(tuple(float(e) for e in plan.params["ells"]),
                                  float(plan.params["step_fraction"]))
    return [write_json(out / "entropy_identities.json", rep)]


def _run_kernel_check(plan: ExperimentPlan, out: Path) -> list[Path]:
    p = plan.params
    grid = Grid(int(p["n"]))
    errs = dual_path_errors(grid, int(p["samples"]), int(p["band"]), int(p["seed"]))
    table = kernel_table(grid)
    f1 = write_csv(out / "kernel_dual_path.csv", {"sample": np.arange(errs.size), "sup_diff": errs})
    f2 = write_json(out / "kernel_check.json", {
        "max_sup_diff": float(errs.max()),
        "quadrature_mass": grid.h * float(np.sum(table.values)),
        "sample_mass": grid.h * float(np.sum(table.samples)),
    })
    return [f1, f2]


def _run_commutator(plan: ExperimentPlan, out: Path) -> list[Path]:
    cfg = plan.config
    noise = cfg.noise()
    if cfg.t_end > 0:
        traj = simulate_path(cfg, 0)
        w = Field(cfg.grid, traj.u[-1])
    else:
        w = cfg.initial_field()
    deltas = [float(d) for d in plan.params["deltas"]]
    rows = [diag.commutator_errors(w, noise, d, extended=bool(plan.params["extended"])) for d in deltas]
    cols = {"delta": np.array(deltas)}
    names = ["dx_e1_l1", "e2_h1", "e3_l2", "second_order_probe"]
    for j in range(len(rows[0])):
        cols[names[j]] = np.array([r[j] for r in rows])
    return [write_csv(out / "commutators.csv", cols)]


_RUNNERS = {
    "simulate": _run_simulate,
    "ensemble": _run_ensemble,
    "diagnose": _run_diagnose,
    "sweep": _run_sweep,
    "entropy-check": _run_entropy_check,
    "kernel-check": _run_kernel_check,
    "commutator-study": _run_commutator,
}


def _manifest_hash(artifacts: dict) -> str:
    blob = json.dumps(artifacts, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_error(out: Path | None, exc: BaseException, code: int) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_status": code}
    if isinstance(exc, ConfigError):
        doc["field"] = exc.field
    if isinstance(exc, SolverFailure):
        doc["failure_time"] = exc.t
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "error.json", doc)
    print(json.dumps(doc), file=sys.stderr)
    return code


def run(plan: ExperimentPlan) -> int:
    """Execute a validated plan; returns the process exit status."""
    out = plan.output_dir or Path(".")
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        files = _RUNNERS[plan.mode](plan, out)
    except ConfigError as exc:
        return _write_error(out, exc, 2)
    except SolverFailure as exc:
        return _write_error(out, exc, 3)
    except Exception as exc:  # reported, not swallowed: the status is nonzero
        log.exception("run failed")
        return _write_error(out, exc, 1)
    artifacts = {str(Path(f).relative_to(out)): sha256_file(f) for f in files}
    cfg = plan.config
    manifest = {
        **plan.describe(),
        "config_hash": cfg.config_hash() if cfg else None,
        "seeds": {"seed": cfg.seed, "n_paths": cfg.n_paths} if cfg else None,
        "sigma_smoothing_radius": cfg.smoothing_radius if cfg else None,
        "versions": versions(),
        "artifacts": artifacts,
        "manifest_hash": _manifest_hash(artifacts),
        "wall_time_s": time.perf_counter() - t0,
    }
    write_json(out / "manifest.json", manifest)
    log.info("%s finished: %d artifacts in %s", plan.mode, len(artifacts), out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sch", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", type=Path, help="JSON experiment document")
        sp.add_argument("--output", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--paths", type=int, help="override the number of paths")
        sp.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s")
    try:
        text = args.config.read_text() if args.config else "{}"
        plan = parse_config(text, mode=args.mode, output_dir=args.output,
                            seed=args.seed, paths=args.paths)
    except ConfigError as exc:
        return _write_error(args.output, exc, 2)
    except OSError as exc:
        return _write_error(args.output, exc, 2)
    return run(plan)


if __name__ == "__main__":
    sys.exit(main())
