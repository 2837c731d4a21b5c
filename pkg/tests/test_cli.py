"""End-to-end tests of the batch command-line front end.

Covers config validation, the exit-status contract (0 pass / 1 failed check
or counterexample / 2 config or I/O error), artifact shapes, error messages
that name the offending item, and byte-level determinism of reruns.
"""

import hashlib
import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from rfdestab.cli import COMMANDS, ConfigError, RunConfig, main


def read_tree(out_dir: Path) -> dict:
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir()) if p.is_file()}


def load_json(out_dir: Path, name: str) -> dict:
    return json.loads((out_dir / name).read_text(encoding="utf-8"))


def write_config(tmp_path: Path, payload: dict) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# RunConfig validation
# ---------------------------------------------------------------------------


class TestRunConfig:
    def test_requires_a_known_command(self):
        with pytest.raises(ConfigError, match="command"):
            RunConfig.from_dict({"system": "example-4.8", "seed": 0})
        with pytest.raises(ConfigError, match="'bogus'"):
            RunConfig.from_dict({"command": "bogus", "system": "example-4.8", "seed": 0})

    def test_requires_a_system(self):
        with pytest.raises(ConfigError, match="system"):
            RunConfig.from_dict({"command": "check", "seed": 0})

    def test_unknown_top_level_key_rejected(self):
        # a typo must not silently run something else (e.g. system params
        # placed at the top level instead of under system.params)
        with pytest.raises(ConfigError, match=r"unknown config keys.*params"):
            RunConfig.from_dict(
                {"command": "check", "system": "example-5.2", "seed": 0,
                 "params": {"r": 1.2}}
            )

    def test_unknown_system_key_rejected(self):
        with pytest.raises(ConfigError, match=r"unknown system keys.*delay"):
            RunConfig.from_dict(
                {"command": "check", "seed": 0,
                 "system": {"name": "example-5.2", "delay": 1.2}}
            )

    def test_string_system_shorthand(self):
        cfg = RunConfig.from_dict({"command": "check", "system": "example-5.4", "seed": 3})
        assert cfg.system_name == "example-5.4"
        assert cfg.system_params == {}
        assert cfg.out_dir == "artifacts"
        assert cfg.certificate is None

    def test_requires_an_explicit_seed(self):
        with pytest.raises(ConfigError, match="seed"):
            RunConfig.from_dict({"command": "check", "system": "example-5.4"})
        with pytest.raises(ConfigError, match="seed"):
            RunConfig.from_dict({"command": "check", "system": "example-5.4", "seed": None})
        with pytest.raises(ConfigError, match="nonnegative"):
            RunConfig.from_dict({"command": "check", "system": "example-5.4", "seed": -1})

    def test_public_dict_round_trips(self):
        raw = {
            "command": "falsify",
            "system": {"name": "example-4.8", "params": {"r": 0.5}},
            "seed": 5,
            "out": "somewhere",
            "samples": 10,
            "tolerance": 1e-6,
            "step": 0.01,
            "horizon": 3.0,
            "certificate": "weighted-input-decay",
        }
        cfg = RunConfig.from_dict(raw)
        assert RunConfig.from_dict(cfg.public_dict()) == cfg

    def test_command_list_matches_parser_choices(self):
        assert COMMANDS == ("simulate", "check", "falsify", "reproduce", "envelope")


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


class TestSimulate:
    def test_zero_defaults_stay_at_equilibrium(self, tmp_path):
        out = tmp_path / "art"
        rc = main(
            [
                "simulate",
                "example-4.8",
                "--seed",
                "0",
                "--out",
                str(out),
                "--horizon",
                "1.0",
                "--step",
                "1e-2",
            ]
        )
        assert rc == 0
        csv_lines = (out / "trajectory.csv").read_text(encoding="utf-8").splitlines()
        assert csv_lines[0] == "t,x_1,x_2,|x|,out_1"
        data = np.array([[float(v) for v in line.split(",")] for line in csv_lines[1:]])
        assert np.all(data[:, 1:] == 0.0)
        report = load_json(out, "simulate_report.json")
        assert report["status"] == "completed"
        assert report["t0"] == 0.0
        assert report["t_end"] == pytest.approx(1.0, abs=1e-9)
        assert report["max_state_norm"] == 0.0
        assert report["max_output_norm"] == 0.0

    def test_manifest_hashes_every_other_artifact(self, tmp_path):
        out = tmp_path / "art"
        rc = main(
            ["simulate", "example-5.4", "--seed", "2", "--out", str(out), "--horizon", "1.0", "--step", "1e-2"]
        )
        assert rc == 0
        manifest = load_json(out, "manifest.json")
        files = read_tree(out)
        assert set(manifest["artifacts"]) == set(files) - {"manifest.json"}
        for name, digest in manifest["artifacts"].items():
            assert hashlib.sha256(files[name]).hexdigest() == digest
        assert manifest["exit_status"] == 0
        assert manifest["config"]["seed"] == 2
        for key in ("rfdestab", "python", "numpy", "scipy"):
            assert manifest["versions"][key]

    def test_rich_run_with_signals_completes(self, tmp_path):
        out = tmp_path / "art"
        cfg = write_config(
            tmp_path,
            {
                "command": "simulate",
                "system": "example-5.4",
                "seed": 11,
                "out": str(out),
                "horizon": 2.0,
                "step": 5e-3,
                "simulate": {
                    "initial": {"kind": "random", "norm_bound": 1.5},
                    "disturbance": {"kind": "random", "mean_dwell": 0.4},
                    "input": {"kind": "constant", "value": [0.5]},
                },
            },
        )
        rc = main(["--config", cfg])
        assert rc == 0
        report = load_json(out, "simulate_report.json")
        assert report["status"] == "completed"
        assert report["max_state_norm"] > 0.0

    def test_blow_up_exits_1_with_event_time(self, tmp_path):
        # constant unit disturbance makes the first coordinate grow like e^t,
        # so the norm guard at 1e9 trips near t = ln(1e9), well before the
        # requested horizon
        out = tmp_path / "art"
        cfg = write_config(
            tmp_path,
            {
                "command": "simulate",
                "system": "example-4.8",
                "seed": 0,
                "out": str(out),
                "horizon": 24.0,
                "step": 2e-3,
                "simulate": {
                    "initial": {"kind": "constant", "value": [1.0, 0.0]},
                    "input": {"kind": "constant", "value": [1.0]},
                    "disturbance": {"kind": "constant", "value": [1.0]},
                },
            },
        )
        rc = main(["--config", cfg])
        assert rc == 1
        report = load_json(out, "simulate_report.json")
        assert report["status"] == "blew_up"
        assert report["t_event"] == pytest.approx(np.log(1e9), abs=0.5)
        assert load_json(out, "manifest.json")["exit_status"] == 1


# ---------------------------------------------------------------------------
# check / falsify / reproduce
# ---------------------------------------------------------------------------


class TestCheckAndFalsify:
    def test_check_single_certificate_pass(self, tmp_path):
        out = tmp_path / "art"
        rc = main(
            [
                "check",
                "example-5.2",
                "--certificate",
                "energy-bounded-by-initial",
                "--samples",
                "4",
                "--seed",
                "0",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        summary = load_json(out, "summary.json")
        assert summary["all_match_expected"] is True
        assert [row["certificate"] for row in summary["certificates"]] == [
            "energy-bounded-by-initial"
        ]
        report = load_json(out, "report-energy-bounded-by-initial.json")
        assert report["matches_expected"] is True
        assert report["verdict"] == report["expected"] == "pass"

    def test_falsify_defaults_to_first_sweep_and_passes(self, tmp_path):
        out = tmp_path / "art"
        rc = main(
            ["falsify", "example-4.8", "--samples", "200", "--seed", "0", "--out", str(out)]
        )
        assert rc == 0
        summary = load_json(out, "summary.json")
        assert summary["verdict"] == "no_counterexample"
        assert summary["certificates"][0]["certificate"] == "weighted-input-decay"
        assert (out / "report-weighted-input-decay.json").exists()

    def test_falsify_counterexample_exits_1(self, tmp_path):
        out = tmp_path / "art"
        rc = main(
            [
                "falsify",
                "example-4.8",
                "--certificate",
                "unweighted-guard-fails",
                "--samples",
                "800",
                "--seed",
                "0",
                "--out",
                str(out),
            ]
        )
        assert rc == 1
        summary = load_json(out, "summary.json")
        assert summary["verdict"] == "counterexample"
        report = load_json(out, "report-unweighted-guard-fails.json")
        # the bundled expectation is that this guard fails, so the sweep
        # still matches its declared outcome even though the exit code is 1
        assert report["matches_expected"] is True

    def test_falsify_rejects_non_sweep_certificate(self, tmp_path, capsys):
        rc = main(
            [
                "falsify",
                "example-4.8",
                "--certificate",
                "bounded-input-divergence",
                "--seed",
                "0",
                "--out",
                str(tmp_path / "art"),
            ]
        )
        assert rc == 2
        err = capsys.readouterr().err
        assert "bounded-input-divergence" in err
        assert "not a falsification sweep" in err

    def test_unknown_certificate_is_named(self, tmp_path, capsys):
        rc = main(
            [
                "check",
                "example-4.8",
                "--certificate",
                "no-such-certificate",
                "--seed",
                "0",
                "--out",
                str(tmp_path / "art"),
            ]
        )
        assert rc == 2
        err = capsys.readouterr().err
        assert "no-such-certificate" in err


class TestReproduce:
    def test_reproduce_runs_every_certificate(self, tmp_path):
        out = tmp_path / "art"
        rc = main(
            [
                "reproduce",
                "example-4.8",
                "--samples",
                "800",
                "--step",
                "2e-3",
                "--seed",
                "0",
                "--out",
                str(out),
            ]
        )
        assert rc == 0
        bundle = load_json(out, "bundle.json")
        assert bundle["name"] == "example-4.8"
        assert bundle["params"]["r"] == 0.5
        assert bundle["notes"]
        summary = load_json(out, "summary.json")
        assert summary["all_match_expected"] is True
        names = [row["certificate"] for row in summary["certificates"]]
        assert names == [
            "weighted-input-decay",
            "unweighted-guard-fails",
            "bounded-input-divergence",
        ]
        for name in names:
            assert (out / f"report-{name}.json").exists()
        assert load_json(out, "manifest.json")["exit_status"] == 0

    def test_reproduce_rejects_infeasible_delay(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "command": "reproduce",
                "system": {"name": "example-5.2", "params": {"r": 1.2}},
                "seed": 0,
                "out": str(tmp_path / "art"),
            },
        )
        rc = main(["--config", cfg])
        assert rc == 2
        err = capsys.readouterr().err
        assert "2.12132" in err
        assert "3.98414" in err


# ---------------------------------------------------------------------------
# envelope
# ---------------------------------------------------------------------------


class TestEnvelope:
    def test_envelope_table_is_monotone_and_hashed(self, tmp_path):
        out = tmp_path / "art"
        cfg = write_config(
            tmp_path,
            {
                "command": "envelope",
                "system": "example-5.2",
                "seed": 3,
                "out": str(out),
                "samples": 3,
                "horizon": 2.0,
                "step": 1e-2,
            },
        )
        rc = main(["--config", cfg])
        assert rc == 0
        lines = (out / "envelope.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "s,t,sigma"
        assert len(lines) == 1 + 8 * 33
        rows = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
        s_vals, t_vals, sig = rows[:, 0], rows[:, 1], rows[:, 2]
        assert np.all(np.isfinite(sig)) and np.all(sig >= 0.0)
        table = sig.reshape(8, 33)
        # nonincreasing in elapsed time for each level, nondecreasing in the
        # level for each time
        assert np.all(np.diff(table, axis=1) <= 1e-12)
        assert np.all(np.diff(table, axis=0) >= -1e-12)
        assert s_vals.min() > 0.0 and t_vals.max() == pytest.approx(2.0)
        report = load_json(out, "envelope_report.json")
        assert report["trajectories"] == 3
        assert report["completed"] == 3
        assert report["bins"] == 4


# ---------------------------------------------------------------------------
# error paths
# ---------------------------------------------------------------------------


class TestErrorPaths:
    def test_unknown_system_lists_known_names(self, tmp_path, capsys):
        rc = main(["check", "no-such-system", "--seed", "0", "--out", str(tmp_path / "a")])
        assert rc == 2
        err = capsys.readouterr().err
        assert "unknown registry name" in err
        assert "example-5.2" in err

    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["--config", str(tmp_path / "nope.json")])
        assert rc == 2
        assert "cannot read config" in capsys.readouterr().err

    def test_invalid_json_config(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        rc = main(["--config", str(bad)])
        assert rc == 2
        assert "not valid JSON" in capsys.readouterr().err

    def test_constant_signal_length_is_checked(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "command": "simulate",
                "system": "example-4.8",
                "seed": 0,
                "out": str(tmp_path / "a"),
                "horizon": 0.5,
                "simulate": {"input": {"kind": "constant", "value": [0.1, 0.2]}},
            },
        )
        rc = main(["--config", cfg])
        assert rc == 2
        assert "must have 1 entries" in capsys.readouterr().err

    def test_signal_on_missing_channel_is_rejected(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "command": "simulate",
                "system": "example-5.2",
                "seed": 0,
                "out": str(tmp_path / "a"),
                "horizon": 0.5,
                "simulate": {"input": {"kind": "constant", "value": [0.5]}},
            },
        )
        rc = main(["--config", cfg])
        assert rc == 2
        assert "no channel" in capsys.readouterr().err

    def test_unknown_signal_and_initial_kinds(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {
                "command": "simulate",
                "system": "example-4.8",
                "seed": 0,
                "out": str(tmp_path / "a"),
                "horizon": 0.5,
                "simulate": {"disturbance": {"kind": "sine"}},
            },
        )
        assert main(["--config", cfg]) == 2
        assert "'sine'" in capsys.readouterr().err
        cfg2 = write_config(
            tmp_path,
            {
                "command": "simulate",
                "system": "example-4.8",
                "seed": 0,
                "out": str(tmp_path / "a"),
                "horizon": 0.5,
                "simulate": {"initial": {"kind": "spline"}},
            },
        )
        assert main(["--config", cfg2]) == 2
        assert "'spline'" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# determinism and entry points
# ---------------------------------------------------------------------------


class TestDeterminism:
    def test_same_config_rerun_is_byte_identical(self, tmp_path):
        out = tmp_path / "art"
        cfg = write_config(
            tmp_path,
            {
                "command": "simulate",
                "system": "example-5.4",
                "seed": 7,
                "out": str(out),
                "horizon": 2.0,
                "step": 5e-3,
                "simulate": {
                    "initial": {"kind": "random", "norm_bound": 1.5},
                    "disturbance": {"kind": "random"},
                },
            },
        )
        assert main(["--config", cfg]) == 0
        first = read_tree(out)
        assert main(["--config", cfg]) == 0
        second = read_tree(out)
        assert first == second

    def test_default_seed_is_zero_and_seed_matters(self, tmp_path):
        def run_into(out, extra):
            cfg = write_config(
                tmp_path,
                {
                    "command": "simulate",
                    "system": "example-5.4",
                    "out": str(out),
                    "horizon": 1.0,
                    "step": 1e-2,
                    "simulate": {"initial": {"kind": "random", "norm_bound": 1.0}},
                },
            )
            assert main(["--config", cfg] + extra) == 0
            return (out / "trajectory.csv").read_bytes()

        implicit = run_into(tmp_path / "a", [])
        explicit = run_into(tmp_path / "b", ["--seed", "0"])
        other = run_into(tmp_path / "c", ["--seed", "1"])
        assert implicit == explicit
        assert implicit != other
        manifest = load_json(tmp_path / "a", "manifest.json")
        assert manifest["config"]["seed"] == 0

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "art"
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "rfdestab.cli",
                "simulate",
                "example-5.4",
                "--seed",
                "1",
                "--horizon",
                "1.0",
                "--step",
                "1e-2",
                "--out",
                str(out),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert (out / "manifest.json").exists()

    def test_console_script_if_installed(self, tmp_path):
        exe = shutil.which("rfdestab")
        if exe is None:
            pytest.skip("console script not on PATH in this environment")
        proc = subprocess.run([exe, "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "simulate" in proc.stdout
