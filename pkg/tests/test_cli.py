import json

import pytest

from pbitsim.cli import ConfigError, config_hash, load_config, main, run

SMALL = {
    "sample": {
        "kind": "sample", "seed": 2,
        "topology": {"rows": 1, "cols": 1, "shore_size": 4, "disabled_cells": []},
        "model": {"generator": "sk", "distribution": "gaussian", "seed": 1},
        "sampler": {"sweeps": 2000, "burn_in": 10, "chains": 3, "designated": [0, 4]},
    },
    "anneal": {
        "kind": "anneal", "seed": 5,
        "topology": {"rows": 1, "cols": 2, "shore_size": 3, "disabled_cells": []},
        "model": {"generator": "sk", "seed": 2},
        "schedule": {"sweeps": 300},
        "anneal": {"restarts": 5, "oracle": True},
    },
    "maxcut": {
        "kind": "maxcut", "seed": 1,
        "topology": {"rows": 1, "cols": 2, "shore_size": 4, "disabled_cells": []},
        "graph": {"generator": "random", "seed": 3},
        "schedule": {"sweeps": 300},
        "anneal": {"restarts": 3, "oracle": True},
    },
    "train": {
        "kind": "train", "seed": 0,
        "model": {"generator": "gate", "gate": "AND", "weight_scale": 2.0, "bias_scale": 2.0},
        "cd": {"steps": 30, "eval_sweeps": 200, "final_eval_sweeps": 2000},
        "hardware": {"rng": "lfsr", "gain_sigma": 0.1, "mismatch_seed": 1},
    },
    "characterize": {
        "kind": "characterize", "seed": 0,
        "topology": {"rows": 2, "cols": 2, "shore_size": 4, "disabled_cells": []},
        "characterize": {"codes": [-127, -40, 0, 40, 127], "sweeps_per_code": 500},
    },
}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc, indent=1))
    return p


def result_files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.json"}


@pytest.mark.parametrize("kind", sorted(SMALL))
def test_threads_do_not_change_results(tmp_path, kind):
    cfg = write(tmp_path, SMALL[kind])
    assert main([kind, "--config", str(cfg), "--out", str(tmp_path / "t1"), "--threads", "1"]) == 0
    assert main([kind, "--config", str(cfg), "--out", str(tmp_path / "t8"), "--threads", "8"]) == 0
    a, b = result_files(tmp_path / "t1"), result_files(tmp_path / "t8")
    assert a and a == b


def test_csv_header_and_hash(tmp_path):
    cfg = write(tmp_path, SMALL["anneal"])
    out = run(cfg, "anneal", tmp_path / "o")
    lines = (out / "energy_trace.csv").read_text().splitlines()
    h = config_hash(load_config(cfg))
    assert lines[0] == f"# config_hash={h}"
    assert "restart,sweep,energy,min_energy" in lines
    assert b"\r\n" not in (out / "energy_trace.csv").read_bytes()
    oracle = json.loads((out / "oracle.json").read_text())
    best = json.loads((out / "best_state.json").read_text())
    assert best["best_energy"] == pytest.approx(oracle["ground_energy"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config_hash"] == h and "wall_time_s" in manifest


def test_seed_override_changes_hash(tmp_path):
    cfg = write(tmp_path, SMALL["anneal"])
    assert config_hash(load_config(cfg)) != config_hash(load_config(cfg, seed=99))


def test_malformed_json(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"kind": "sample",\n "seed": }')
    out = tmp_path / "o"
    assert main(["sample", "--config", str(p), "--out", str(out)]) == 2
    assert not out.exists()
    err = capsys.readouterr().err
    assert "bad.json:2:" in err


def test_unknown_field(tmp_path, capsys):
    doc = dict(SMALL["sample"], sampler={"sweeps": 10, "temperature": 3})
    p = write(tmp_path, doc)
    assert main(["sample", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "sampler.temperature" in err
    assert not (tmp_path / "o").exists()


def test_kind_mismatch(tmp_path):
    p = write(tmp_path, SMALL["sample"])
    with pytest.raises(ConfigError):
        run(p, "anneal", tmp_path / "o")


def test_embedding_error_exit_code(tmp_path):
    (tmp_path / "g.txt").write_text("0 1 1.0\n")
    doc = {"kind": "maxcut", "topology": {"rows": 1, "cols": 1, "disabled_cells": []},
           "graph": {"file": "g.txt"}}
    assert main(["maxcut", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_oracle_budget_exit_code(tmp_path):
    doc = {"kind": "anneal", "topology": {"rows": 2, "cols": 2, "disabled_cells": []},
           "model": {"generator": "sk"}, "schedule": {"sweeps": 5}, "anneal": {"restarts": 1, "oracle": True}}
    assert main(["anneal", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_output_dir_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("PBITSIM_OUT", str(tmp_path / "env"))
    p = write(tmp_path, SMALL["characterize"])
    assert main(["characterize", "--config", str(p)]) == 0
    assert (tmp_path / "env" / "characterization.csv").exists()


def test_characterize_zero_nodes(tmp_path):
    doc = dict(SMALL["characterize"], characterize={"nodes": [], "sweeps_per_code": 10})
    out = run(write(tmp_path, doc), "characterize", tmp_path / "o")
    fit = json.loads((out / "fit.json").read_text())
    assert fit["nodes"] == [] and fit["summary"]["fitted"] == 0
    rows = [ln for ln in (out / "characterization.csv").read_text().splitlines() if not ln.startswith("#")]
    assert rows == ["node,bias_code,mean_spin"]


def test_model_file_round_trip(tmp_path):
    first = run(write(tmp_path, SMALL["train"]), "train", tmp_path / "trained")
    doc = {"kind": "sample", "model": {"file": str(first / "model.json")},
           "sampler": {"sweeps": 500, "designated": [0, 1, 4]}}
    # model.json carries a config_hash key next to the model fields
    out = run(write(tmp_path, doc, "s.json"), "sample", tmp_path / "s")
    stats = json.loads((out / "chain_stats.json").read_text())
    assert sum(stats["histogram"].values()) == 500


def test_missing_config_file(tmp_path):
    assert main(["sample", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) == 2
