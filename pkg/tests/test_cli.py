import json

import pytest

from truncgibbs.cli import main

NN_KERNEL = {"preset": "nn", "dimension": 1}


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def run(subcommand, config_path, out_dir, *extra):
    return main([subcommand, "--config", config_path, "--out", str(out_dir), *extra])


def test_sandwich_artifacts(tmp_path):
    cfg = write_config(tmp_path, "s.json", {
        "kernel": NN_KERNEL, "geometry": {"kind": "torus", "extents": [16]},
        "interval": [0.0, 1.0], "seed": 7, "sweeps": 40,
    })
    assert run("sandwich", cfg, tmp_path / "out") == 0
    trace = (tmp_path / "out" / "trace.csv").read_text().splitlines()
    assert trace[0] == "sweep,sup_gap,mean_gap"
    assert trace[1] == "0,1.0,1.0"
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["config"]["seed"] == 7
    assert summary["initial_sup_gap"] == 1.0


def test_cftp_artifacts(tmp_path):
    cfg = write_config(tmp_path, "c.json", {
        "kernel": NN_KERNEL, "geometry": {"kind": "box", "sites": [[0], [1]]},
        "interval": [0.0, 1.0], "boundary": {"values": [[[-1], 0.0], [[2], 1.0]]},
        "seed": 3, "n_samples": 400, "n_q": 128,
    })
    assert run("cftp", cfg, tmp_path / "out") == 0
    rows = (tmp_path / "out" / "samples.csv").read_text().splitlines()
    assert rows[0] == "site_0,site_1"
    assert len(rows) == 401
    verdicts = json.loads((tmp_path / "out" / "verdicts.json").read_text())
    assert {v["name"] for v in verdicts["mean_verdicts"]} == {"mean[site_0]", "mean[site_1]"}
    assert verdicts["pass"] is True


def test_ident4_artifacts(tmp_path):
    cfg = write_config(tmp_path, "i.json", {
        "kernel": NN_KERNEL, "geometry": {"kind": "torus", "extents": [8]},
        "interval": [-1.0, 1.0], "seed": 2, "burn_in": 100, "sweeps": 800,
    })
    assert run("ident4", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "verdicts.json").read_text())
    names = [v["name"] for v in payload["verdicts"]]
    assert names == ["mean_shift_zero", "local_mean_balance"]
    assert all(set(v) == {"name", "estimate", "se", "target", "z", "pass"}
               for v in payload["verdicts"])


def test_spec_check_artifacts(tmp_path):
    cfg = write_config(tmp_path, "sc.json", {
        "kernel": NN_KERNEL, "volume": [[0], [1]], "interval": [0.0, 1.0],
        "boundary": {"values": [[[-1], 0.0], [[2], 1.0]]}, "seed": 5,
    })
    assert run("spec-check", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "spec.json").read_text())
    assert payload["precision"] == [[1.0, -0.5], [-0.5, 1.0]]
    assert payload["quadratic_vs_pairsum_max"] <= 1e-10
    assert payload["mean"] == pytest.approx([1 / 3, 2 / 3], abs=1e-12)


def test_pd_check_artifacts(tmp_path):
    cfg = write_config(tmp_path, "pd.json", {
        "kernel": NN_KERNEL, "volume": [[0], [1]], "seed": 5,
    })
    assert run("pd-check", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "certificate.json").read_text())
    assert payload["reassembly_residual"] <= 1e-14
    assert payload["min_eigenvalue"] > 0.0
    assert payload["terms"][0]["offset"] == [1]


def test_beta_check_artifacts(tmp_path):
    cfg = write_config(tmp_path, "b.json", {
        "kernel": NN_KERNEL, "volume": [[0], [1], [2]], "interval": [0.0, 1.0],
        "seed": 5,
    })
    assert run("beta-check", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "beta.json").read_text())
    assert [r["beta"] for r in payload["results"]] == [0.25, 1.0, 2.5, 10.0]
    assert all(r["max_residual"] <= 1e-10 for r in payload["results"])


def test_af_probe_artifacts(tmp_path):
    cfg = write_config(tmp_path, "af.json", {
        "kernel": NN_KERNEL, "volume": [[0], [1]], "interval": [0.0, 1.0],
        "boundary": {"constant": 0.25}, "seed": 4, "trials": 32,
    })
    assert run("af-probe", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "af_probe.json").read_text())
    assert len(payload["deltas"]) == 32
    assert set(payload) >= {"deltas", "mean", "spread", "config"}


def test_oracle_check_artifacts(tmp_path):
    cfg = write_config(tmp_path, "o.json", {
        "kernel": NN_KERNEL, "volume": [[0]], "interval": [0.0, 1.0],
        "boundary": {"values": [[[-1], 0.2], [[1], 0.8]]}, "seed": 6, "n_q": 128,
    })
    assert run("oracle-check", cfg, tmp_path / "out") == 0
    payload = json.loads((tmp_path / "out" / "oracle.json").read_text())
    assert payload["closed_form_difference"] <= 1e-8
    assert payload["refinement_mean_shift"] < 1e-6


def test_missing_field_reports_path(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad.json", {"kernel": {"preset": "nn"}})
    assert run("sandwich", cfg, tmp_path / "out") == 2
    assert "kernel.dimension" in capsys.readouterr().err


def test_unknown_preset_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad.json", {
        "kernel": {"preset": "dragon", "dimension": 1},
        "geometry": {"kind": "torus", "extents": [8]},
        "interval": [0.0, 1.0],
    })
    assert run("sandwich", cfg, tmp_path / "out") == 2
    assert "kernel.preset" in capsys.readouterr().err


def test_invalid_interval_rejected(tmp_path, capsys):
    cfg = write_config(tmp_path, "bad.json", {
        "kernel": NN_KERNEL, "geometry": {"kind": "torus", "extents": [8]},
        "interval": [1.0, 0.0],
    })
    assert run("sandwich", cfg, tmp_path / "out") == 2
    assert "interval" in capsys.readouterr().err


def test_malformed_json_rejected(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run("sandwich", str(path), tmp_path / "out") == 2


def test_missing_config_file_is_io_error(tmp_path, capsys):
    assert run("sandwich", str(tmp_path / "nope.json"), tmp_path / "out") == 2
    assert "io error" in capsys.readouterr().err


def test_forced_order_violation_fails_run(tmp_path, capsys):
    cfg = write_config(tmp_path, "fault.json", {
        "kernel": NN_KERNEL, "geometry": {"kind": "torus", "extents": [8]},
        "interval": [0.0, 1.0], "seed": 1, "sweeps": 10,
        "inject_order_fault": 13,
    })
    assert run("sandwich", cfg, tmp_path / "out") == 1
    assert "OrderViolation" in capsys.readouterr().err


def test_seed_override_changes_payload(tmp_path):
    cfg = write_config(tmp_path, "s.json", {
        "kernel": NN_KERNEL, "geometry": {"kind": "torus", "extents": [8]},
        "interval": [0.0, 1.0], "seed": 1, "sweeps": 10,
    })
    assert run("sandwich", cfg, tmp_path / "a") == 0
    assert run("sandwich", cfg, tmp_path / "b", "--seed", "99") == 0
    a = (tmp_path / "a" / "trace.csv").read_text()
    b = (tmp_path / "b" / "trace.csv").read_text()
    assert a != b
    assert json.loads((tmp_path / "b" / "summary.json").read_text())["config"]["seed"] == 99


def test_rerun_byte_identical(tmp_path):
    cfg = write_config(tmp_path, "s.json", {
        "kernel": NN_KERNEL, "geometry": {"kind": "torus", "extents": [8]},
        "interval": [0.0, 1.0], "seed": 1, "sweeps": 25,
    })
    assert run("sandwich", cfg, tmp_path / "a") == 0
    assert run("sandwich", cfg, tmp_path / "b") == 0
    for name in ("trace.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
