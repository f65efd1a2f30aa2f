import json
import subprocess
import sys

import pytest
import yaml

from jointcommit.csvio import read_csv, schema_line, write_csv
from jointcommit.harness import (
    ConfigError,
    ExperimentConfig,
    load_config,
    run_config,
)


def tiny(kind, out, **kw):
    base = dict(kind=kind, out=str(out), turns=300, replicates=2,
                snapshot_stride=100, rounds=200, count=2,
                count_no_redemption=0, min_observers=0)
    base.update(kw)
    return ExperimentConfig(**base)


# -- csv layer -------------------------------------------------------------------

def test_csv_schema_roundtrip(tmp_path):
    p = write_csv(tmp_path / "x.csv", "sweep", ["a", "b"], [[1.5, 2], [0.25, 7]])
    schema, version, cols, rows = read_csv(p)
    assert (schema, version) == ("sweep", 1)
    assert cols == ["a", "b"]
    assert rows == [["1.5", "2"], ["0.25", "7"]]


def test_csv_rejects_bad_headers(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="schema line"):
        read_csv(p)
    p.write_text(schema_line("sweep").replace("v1", "v9") + "\na,b\n")
    with pytest.raises(ValueError, match="not supported"):
        read_csv(p)


def test_csv_floats_are_plain(tmp_path):
    import numpy as np
    p = write_csv(tmp_path / "f.csv", "sweep", ["v"], [[np.float64(0.25)],
                                                       [np.int64(3)], [True]])
    body = p.read_text().splitlines()
    assert body[2] == "0.25"
    assert body[3] == "3"
    assert body[4] == "1"


# -- config ----------------------------------------------------------------------

def test_config_validation_names_field():
    with pytest.raises(ConfigError) as e:
        ExperimentConfig(kind="dance").validate()
    assert e.value.field == "kind"
    with pytest.raises(ConfigError) as e:
        ExperimentConfig(kind="evolve", b=[]).validate()
    assert e.value.field == "b"
    with pytest.raises(ConfigError) as e:
        ExperimentConfig(kind="evolve", regime=["2b"]).validate()
    assert e.value.field == "regime"
    with pytest.raises(ConfigError) as e:
        ExperimentConfig(kind="sweep", epsilon=[0.0, 0.01]).validate()
    assert e.value.field == "epsilon"
    with pytest.raises(ConfigError) as e:
        ExperimentConfig(kind="evolve", rounds=7).validate()
    assert e.value.field == "rounds"


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError) as e:
        ExperimentConfig.from_dict({"kind": "evolve", "bananas": 1})
    assert e.value.field == "bananas"


def test_yaml_config_loading(tmp_path):
    cfg_file = tmp_path / "exp.yaml"
    cfg_file.write_text(yaml.safe_dump(
        {"kind": "evolve", "b": [1.5], "turns": 100, "seed": 5}))
    cfg = load_config(cfg_file)
    assert cfg.kind == "evolve"
    assert cfg.b == [1.5]
    assert cfg.seed == 5


def test_manifest_roundtrip_is_identity(tmp_path):
    cfg = tiny("evolve", tmp_path / "a", seed=3, b=[1.5, 5.5])
    result = run_config(cfg)
    reloaded = load_config(result.manifest)
    assert reloaded == cfg


# -- determinism -----------------------------------------------------------------

@pytest.mark.parametrize("kind", ["evolve", "sweep", "fixation",
                                  "compositions-sample"])
def test_rerun_is_byte_identical(tmp_path, kind):
    cfg1 = tiny(kind, tmp_path / "one")
    cfg2 = tiny(kind, tmp_path / "two")
    r1 = run_config(cfg1)
    r2 = run_config(cfg2)
    for p1, p2 in zip(r1.outputs, r2.outputs):
        assert p1.read_bytes() == p2.read_bytes()


def test_reputation_validate_writes_report(tmp_path):
    cfg = tiny("reputation-validate", tmp_path, turns=30_000, replicates=1,
               b=[5.5], rounds=2000, count=2, min_observers=1)
    result = run_config(cfg)
    schema, _, cols, rows = read_csv(result.outputs[0])
    assert schema == "reputation"
    assert cols[:3] == ["scenario_id", "composition", "strategy"]
    assert len({r[0] for r in rows}) == 2


def test_reputation_validate_fails_clearly_when_traces_too_poor(tmp_path):
    cfg = tiny("reputation-validate", tmp_path, turns=200, replicates=1,
               b=[5.5], rounds=200, count=3, min_observers=3)
    with pytest.raises(RuntimeError, match="could not find"):
        run_config(cfg)


def test_evolve_zero_turns_single_snapshot(tmp_path):
    result = run_config(tiny("evolve", tmp_path, turns=0, replicates=1))
    _, _, cols, rows = read_csv(result.outputs[0])
    assert len(rows) == 1
    assert rows[0][cols.index("turn")] == "0"
    assert rows[0][cols.index("n_0-")] == "100"


def test_reproduce_figures_smoke(tmp_path):
    from jointcommit.harness import reproduce_figures

    results = reproduce_figures(tmp_path, seed=0, workers=1,
                                sweep_replicates=1, runs_3a=10,
                                fig4_count=2, fig4_rounds=2000)
    assert sorted(results) == ["fig2", "fig3a", "fig3b", "fig3c", "fig4"]
    for res in results.values():
        for path in res.outputs:
            assert path.exists()

    # low benefits leave the never-cooperating strategies on top at the end
    _, _, cols, rows = read_csv(tmp_path / "fig3a.csv")
    b_i, t_i = cols.index("b"), cols.index("turn")
    last = max(int(r[t_i]) for r in rows)
    final = {r[b_i]: r for r in rows if int(r[t_i]) == last}
    row15 = final["1.5"]
    mean_block = sum(float(row15[cols.index(f"f_{n}")]) for n in ("0-", "0A", "R-"))
    others = sum(float(row15[cols.index(f"f_{n}")])
                 for n in ("RA", "1A", "1+", "R+", "0+", "1-"))
    assert mean_block > others

    # single-seed trajectories are reproducible byte for byte
    before = (tmp_path / "fig3c.csv").read_bytes()
    run_config(load_config(tmp_path / "fig3c_manifest.json"))
    assert (tmp_path / "fig3c.csv").read_bytes() == before

    # the reputation sample never contains observer-free compositions
    _, _, cols, rows = read_csv(tmp_path / "fig4.csv")
    assert all(int(r[cols.index("num_observers")]) >= 1 for r in rows)


def test_manifest_contents(tmp_path):
    result = run_config(tiny("evolve", tmp_path, seed=9))
    data = json.loads(result.manifest.read_text())
    assert data["manifest_version"] == 1
    assert data["config"]["kind"] == "evolve"
    assert data["seeds"] == [9, 10]
    assert data["outputs"] == ["evolve.csv"]


def test_trajectory_csv_shape(tmp_path):
    result = run_config(tiny("evolve", tmp_path, turns=250))
    schema, _, cols, rows = read_csv(result.outputs[0])
    assert schema == "trajectory"
    assert cols[5] == "turn"
    assert cols[6] == "n_1+"
    assert cols[-1] == "cooperation"
    # two replicates x snapshots at 0,100,200,250
    assert len(rows) == 8
    assert sum(int(v) for v in rows[0][6:15]) == 100


# -- CLI -------------------------------------------------------------------------

def run_cli(*args, env=None):
    import os
    environ = dict(os.environ)
    if env:
        environ.update(env)
    return subprocess.run([sys.executable, "-m", "jointcommit.cli", *args],
                          capture_output=True, text=True, env=environ)


def test_cli_success_and_exit_code(tmp_path):
    r = run_cli("evolve", "--turns", "200", "--replicates", "1",
                "--out", str(tmp_path))
    assert r.returncode == 0
    assert (tmp_path / "evolve.csv").exists()


def test_cli_config_error_is_machine_readable(tmp_path):
    r = run_cli("sweep", "--mu", "5", "--out", str(tmp_path))
    assert r.returncode == 2
    err = json.loads(r.stderr.strip().splitlines()[-1])
    assert err["error"] == "config"
    assert err["field"] == "mu"


def test_cli_honors_output_env(tmp_path):
    r = run_cli("fixation", "--b", "5.5",
                env={"JOINTCOMMIT_OUT": str(tmp_path / "from_env")})
    assert r.returncode == 0
    assert (tmp_path / "from_env" / "fixation.csv").exists()


def test_cli_rerun_from_manifest(tmp_path):
    r = run_cli("evolve", "--turns", "200", "--replicates", "1",
                "--out", str(tmp_path))
    assert r.returncode == 0
    before = (tmp_path / "evolve.csv").read_bytes()
    r = run_cli("evolve", "--config", str(tmp_path / "evolve_manifest.json"))
    assert r.returncode == 0
    assert (tmp_path / "evolve.csv").read_bytes() == before
