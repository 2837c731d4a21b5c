"""Batch command-line front end.

Runs simulations, certificate checks, falsification sweeps, full example
reproductions, and envelope-table fits from a JSON config plus flag
overrides, writing deterministic CSV/JSON artifacts and a manifest that
records versions, seeds, tolerances, and content hashes.  Exit status: 0 when
everything passed, 1 when a check failed or a counterexample was found, 2 on
configuration or I/O errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .compfn import constant
from .examples import REGISTRY, ExampleBundle, build_example
from .history import HistorySegment, sample_history
from .signals import SignalSpec, constant_signal, sample_signal
from .simulator import IntegrateOpts, integrate, trajectory_to_csv
from .verify import fit_kl_envelope

__all__ = ["RunConfig", "ConfigError", "run", "main"]

COMMANDS = ("simulate", "check", "falsify", "reproduce", "envelope")
FALSIFIER_CHECKERS = ("check_lyapunov_decay", "check_lyapunov_ios", "check_razumikhin")


class ConfigError(Exception):
    """Invalid run configuration (maps to exit status 2)."""


@dataclass
class RunConfig:
    """Validated description of one batch run."""

    command: str
    system_name: str
    system_params: dict = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "artifacts"
    tolerance: float | None = None
    samples: int | None = None
    step: float | None = None
    horizon: float | None = None
    certificate: str | None = None
    simulate: dict = field(default_factory=dict)
    envelope: dict = field(default_factory=dict)

    @staticmethod
    def from_dict(raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - {
            "command", "system", "seed", "out", "tolerance", "samples",
            "step", "horizon", "certificate", "simulate", "envelope",
        }
        if unknown:
            raise ConfigError(
                f"unknown config keys: {sorted(unknown)} (system parameters "
                "go under system: {name, params})"
            )
        command = raw.get("command")
        if command not in COMMANDS:
            raise ConfigError(
                f"command must be one of {list(COMMANDS)}, got {command!r}"
            )
        system = raw.get("system")
        if isinstance(system, str):
            system = {"name": system}
        if not isinstance(system, dict) or "name" not in system:
            raise ConfigError("config requires a system: {name, params}")
        bad_sys = set(system) - {"name", "params"}
        if bad_sys:
            raise ConfigError(f"unknown system keys: {sorted(bad_sys)}")
        if "seed" not in raw or raw["seed"] is None:
            raise ConfigError("config requires an explicit seed (no nondeterministic defaults)")
        seed = int(raw["seed"])
        if seed < 0:
            raise ConfigError("seed must be a nonnegative integer")

        def opt_float(key):
            return None if raw.get(key) is None else float(raw[key])

        return RunConfig(
            command=command,
            system_name=str(system["name"]),
            system_params=dict(system.get("params") or {}),
            seed=seed,
            out_dir=str(raw.get("out", "artifacts")),
            tolerance=opt_float("tolerance"),
            samples=None if raw.get("samples") is None else int(raw["samples"]),
            step=opt_float("step"),
            horizon=opt_float("horizon"),
            certificate=raw.get("certificate"),
            simulate=dict(raw.get("simulate") or {}),
            envelope=dict(raw.get("envelope") or {}),
        )

    def public_dict(self) -> dict:
        return {
            "command": self.command,
            "system": {"name": self.system_name, "params": self.system_params},
            "seed": self.seed,
            "out": self.out_dir,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "step": self.step,
            "horizon": self.horizon,
            "certificate": self.certificate,
            "simulate": self.simulate,
            "envelope": self.envelope,
        }


def _jsonable(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


class _ArtifactWriter:
    """Serialized artifact writes with content hashes for the manifest."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.hashes: dict = {}
        out_dir.mkdir(parents=True, exist_ok=True)

    def write_text(self, name: str, text: str) -> None:
        data = text.encode("utf-8")
        (self.out_dir / name).write_bytes(data)
        self.hashes[name] = hashlib.sha256(data).hexdigest()

    def write_json(self, name: str, obj) -> None:
        self.write_text(name, json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")


def _signal_from(spec, box, t_hi: float, seed: int):
    if spec is None:
        return None
    if not isinstance(spec, dict):
        raise ConfigError("signal specs must be JSON objects")
    kind = spec.get("kind", "zero")
    if kind == "zero":
        return None
    if box is None or box.shape[0] == 0:
        raise ConfigError("system has no channel for the requested signal")
    if kind == "constant":
        value = np.asarray(spec.get("value"), dtype=float)
        if value.ndim != 1 or value.size != box.shape[0]:
            raise ConfigError(
                f"constant signal value must have {box.shape[0]} entries"
            )
        return constant_signal(value)
    if kind == "random":
        mean_dwell = float(spec.get("mean_dwell", 0.5))
        return sample_signal(SignalSpec(box, max(t_hi, 1e-6), mean_dwell, seed=seed))
    raise ConfigError(f"unknown signal kind {kind!r}")


def _initial_from(spec, delay: float, dim: int, rng) -> HistorySegment:
    if spec is None:
        spec = {"kind": "zero"}
    kind = spec.get("kind", "zero")
    if kind == "zero":
        return HistorySegment.constant(delay, np.zeros(dim))
    if kind == "constant":
        value = np.asarray(spec.get("value"), dtype=float)
        if value.ndim != 1 or value.size != dim:
            raise ConfigError(f"initial value must have {dim} entries")
        return HistorySegment.constant(delay, value)
    if kind == "random":
        return sample_history(rng, delay, dim, float(spec.get("norm_bound", 1.0)))
    raise ConfigError(f"unknown initial-segment kind {kind!r}")


def _cmd_simulate(cfg: RunConfig, bundle: ExampleBundle, writer: _ArtifactWriter) -> int:
    system = bundle.system
    sc = cfg.simulate
    t0 = float(sc.get("t0", 0.0))
    duration = cfg.horizon if cfg.horizon is not None else 5.0
    step = cfg.step if cfg.step is not None else 1e-3
    rng = np.random.default_rng(cfg.seed)
    x0 = _initial_from(sc.get("initial"), system.delay_r, system.dim_n, rng)
    t_end = t0 + duration
    d_sig = _signal_from(sc.get("disturbance"), system.d_box, t_end, cfg.seed * 2 + 1)
    u_sig = _signal_from(sc.get("input"), system.u_box, t_end, cfg.seed * 2 + 2)
    traj = integrate(system, t0, x0, u_sig, d_sig, t_end, IntegrateOpts(step_req=step))
    writer.write_text("trajectory.csv", trajectory_to_csv(traj))
    report = {
        "status": traj.status,
        "t0": t0,
        "t_end": float(traj.times[-1]),
        "t_event": traj.t_event,
        "nodes": int(traj.times.size),
        "max_state_norm": float(np.linalg.norm(traj.states, axis=1).max()),
        "max_output_norm": float(traj.output_norms().max()),
    }
    writer.write_json("simulate_report.json", report)
    return 0 if traj.status == "completed" else 1


def _selected_certificates(cfg: RunConfig, bundle: ExampleBundle, falsifiers_only: bool):
    if cfg.certificate is not None:
        try:
            certs = (bundle.certificate(cfg.certificate),)
        except KeyError as exc:
            raise ConfigError(exc.args[0]) from exc
    elif falsifiers_only:
        certs = tuple(c for c in bundle.certificates if c.checker in FALSIFIER_CHECKERS)
        if not certs:
            raise ConfigError(f"bundle {bundle.name!r} has no falsification certificate")
        certs = certs[:1]
    else:
        certs = bundle.certificates
    if falsifiers_only:
        bad = [c.name for c in certs if c.checker not in FALSIFIER_CHECKERS]
        if bad:
            raise ConfigError(f"certificate {bad[0]!r} is not a falsification sweep")
    return certs


def _run_certificates(cfg: RunConfig, bundle: ExampleBundle, writer: _ArtifactWriter, certs):
    overrides = {
        "seed": cfg.seed,
        "samples": cfg.samples,
        "tolerance": cfg.tolerance,
        "step": cfg.step,
        "horizon": cfg.horizon,
    }
    rows = []
    for cert in certs:
        report = cert.runner(**overrides)
        writer.write_json(
            f"report-{cert.name}.json",
            {
                "certificate": cert.name,
                "checker": cert.checker,
                "description": cert.description,
                "expected": cert.expected,
                "verdict": report.verdict,
                "matches_expected": report.verdict == cert.expected,
                "report": report.to_json_dict(),
            },
        )
        rows.append(
            {
                "certificate": cert.name,
                "checker": cert.checker,
                "expected": cert.expected,
                "verdict": report.verdict,
                "matches_expected": report.verdict == cert.expected,
            }
        )
    return rows


def _cmd_check(cfg: RunConfig, bundle: ExampleBundle, writer: _ArtifactWriter) -> int:
    rows = _run_certificates(cfg, bundle, writer, _selected_certificates(cfg, bundle, False))
    ok = all(r["matches_expected"] for r in rows)
    writer.write_json("summary.json", {"certificates": rows, "all_match_expected": ok})
    return 0 if ok else 1


def _cmd_falsify(cfg: RunConfig, bundle: ExampleBundle, writer: _ArtifactWriter) -> int:
    certs = _selected_certificates(cfg, bundle, True)
    rows = _run_certificates(cfg, bundle, writer, certs)
    verdict = rows[0]["verdict"]
    writer.write_json("summary.json", {"certificates": rows, "verdict": verdict})
    return 0 if verdict == "no_counterexample" else 1


def _cmd_reproduce(cfg: RunConfig, bundle: ExampleBundle, writer: _ArtifactWriter) -> int:
    writer.write_json(
        "bundle.json",
        {"name": bundle.name, "params": bundle.params, "notes": bundle.notes},
    )
    rows = _run_certificates(cfg, bundle, writer, bundle.certificates)
    ok = all(r["matches_expected"] for r in rows)
    writer.write_json("summary.json", {"certificates": rows, "all_match_expected": ok})
    return 0 if ok else 1


def _cmd_envelope(cfg: RunConfig, bundle: ExampleBundle, writer: _ArtifactWriter) -> int:
    system = bundle.system
    duration = cfg.horizon if cfg.horizon is not None else 8.0
    step = cfg.step if cfg.step is not None else 4e-3
    count = cfg.samples if cfg.samples is not None else 20
    ec = cfg.envelope
    norm_bound = float(ec.get("norm_bound", 2.0))
    mean_dwell = float(ec.get("mean_dwell", 0.5))
    bins = int(ec.get("bins", 4))
    rng = np.random.default_rng(cfg.seed)
    opts = IntegrateOpts(step_req=step)
    trajs = []
    for _ in range(count):
        x0 = sample_history(rng, system.delay_r, system.dim_n, norm_bound)
        d_sig = sample_signal(
            SignalSpec(system.d_box, duration, mean_dwell, seed=int(rng.integers(2 ** 32)))
        )
        trajs.append(integrate(system, 0.0, x0, None, d_sig, duration, opts))
    sigma = fit_kl_envelope(trajs, constant(1.0), bins=bins)
    s_points = int(ec.get("s_points", 8))
    t_points = int(ec.get("t_points", 33))
    s_vals = np.linspace(norm_bound / s_points, norm_bound, s_points)
    t_vals = np.linspace(0.0, duration, t_points)
    lines = ["s,t,sigma"]
    for s in s_vals:
        for t in t_vals:
            lines.append(f"{float(s)!r},{float(t)!r},{float(sigma(s, t))!r}")
    writer.write_text("envelope.csv", "\n".join(lines) + "\n")
    writer.write_json(
        "envelope_report.json",
        {
            "trajectories": count,
            "completed": sum(tr.status == "completed" for tr in trajs),
            "norm_bound": norm_bound,
            "bins": bins,
            "duration": duration,
            "step": step,
        },
    )
    return 0


_HANDLERS = {
    "simulate": _cmd_simulate,
    "check": _cmd_check,
    "falsify": _cmd_falsify,
    "reproduce": _cmd_reproduce,
    "envelope": _cmd_envelope,
}


def run(cfg: RunConfig) -> int:
    """Execute a validated config, write artifacts, and return the exit status."""
    if cfg.system_name not in REGISTRY:
        raise ConfigError(
            f"unknown registry name {cfg.system_name!r}; known: {sorted(REGISTRY)}"
        )
    try:
        bundle = build_example(cfg.system_name, cfg.system_params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    writer = _ArtifactWriter(Path(cfg.out_dir))
    status = _HANDLERS[cfg.command](cfg, bundle, writer)
    manifest = {
        "config": cfg.public_dict(),
        "versions": {
            "rfdestab": __version__,
            "python": sys.version.split()[0],
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "artifacts": writer.hashes,
        "exit_status": status,
    }
    writer.write_json("manifest.json", manifest)
    return status


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rfdestab",
        description=(
            "Simulate registered delay systems, run their stability "
            "certificates, falsify decay inequalities, and emit deterministic "
            "CSV/JSON artifacts."
        ),
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="what to run")
    parser.add_argument("system", nargs="?", help="registry name, e.g. example-5.4")
    parser.add_argument("--config", help="JSON config file mirroring RunConfig")
    parser.add_argument("--certificate", help="run a single named certificate")
    parser.add_argument("--seed", type=int, help="master seed (required here or in config)")
    parser.add_argument("--out", help="artifact output directory")
    parser.add_argument("--tolerance", type=float, help="tolerance override")
    parser.add_argument("--samples", type=int, help="sample/ensemble-size override")
    parser.add_argument("--step", type=float, help="integration step request")
    parser.add_argument("--horizon", type=float, help="time-horizon override")
    args = parser.parse_args(argv)

    try:
        raw: dict = {}
        if args.config is not None:
            try:
                raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config {args.config!r} is not valid JSON: {exc}") from exc
        if args.command is not None:
            raw["command"] = args.command
        if args.system is not None:
            raw["system"] = {"name": args.system, "params": dict((raw.get("system") or {}).get("params") or {}) if isinstance(raw.get("system"), dict) else {}}
        if args.seed is not None:
            raw["seed"] = args.seed
        elif "seed" not in raw:
            raw.setdefault("seed", 0)
        if args.out is not None:
            raw["out"] = args.out
        if args.certificate is not None:
            raw["certificate"] = args.certificate
        for key in ("tolerance", "samples", "step", "horizon"):
            value = getattr(args, key)
            if value is not None:
                raw[key] = value
        cfg = RunConfig.from_dict(raw)
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
