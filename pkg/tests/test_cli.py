import json

import pytest
from click.testing import CliRunner

from sotlab.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def write_cfg(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_missing_config_exits_2(runner):
    res = runner.invoke(main, ["w2"])
    assert res.exit_code == 2
    assert "--config" in res.output


def test_nonexistent_config_exits_2(runner, tmp_path):
    res = runner.invoke(main, ["w2", "--config", str(tmp_path / "nope.json")])
    assert res.exit_code == 2


def test_bad_field_type_exits_2(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json",
                    {"A": {"family": "two_point", "h": "oops", "K": 1.0},
                     "B": {"family": "two_point", "h": 2.0, "K": 1.0}})
    res = runner.invoke(main, ["w2", "--config", cfg])
    assert res.exit_code == 2
    assert "A.h" in res.output


def test_missing_seed_exits_2(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json",
                    {"family": "two_point", "K": 2.0,
                     "n_list": [64, 128, 256], "trials": 3})
    res = runner.invoke(main, ["rate-scan", "--config", cfg])
    assert res.exit_code == 2
    assert "seed" in res.output


def test_numeric_failure_exits_3(runner, tmp_path):
    # the adaptive scan requires K > sigma; K = 0.5 fails during computation
    cfg = write_cfg(tmp_path, "c.json",
                    {"family": "bernoulli", "K": 0.5,
                     "n_list": [64, 128, 256], "trials": 3})
    res = runner.invoke(main, ["rate-scan", "--config", cfg, "--seed", "1"])
    assert res.exit_code == 3
    assert "numeric failure" in res.output


def test_construct_json(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json",
                    {"family": "w2_schedule", "K": 2.0, "k_max": 3})
    out = tmp_path / "dist.json"
    res = runner.invoke(main, ["construct", "--config", cfg,
                               "--out", str(out)])
    assert res.exit_code == 0
    obj = json.loads(out.read_text())
    assert obj["command"] == "construct"
    assert len(obj["distribution"]["atoms"]) == 4
    assert obj["schedule"]["n_k"][0] == 16


def test_w2_csv_metadata(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json",
                    {"A": {"family": "two_point", "h": 1.0, "K": 1.0},
                     "B": {"family": "two_point", "h": 2.0, "K": 1.0}})
    res = runner.invoke(main, ["w2", "--config", cfg])
    assert res.exit_code == 0
    lines = res.output.splitlines()
    assert lines[0].startswith("# version:")
    assert lines[1] == "# command: w2"
    assert lines[2] == "# seed: -"
    assert lines[3].startswith("# config_sha256:")
    assert lines[4] == "w2sq,tail_bound,quad_error,n_eval"
    assert float(lines[5].split(",")[0]) > 0


def test_rate_scan_deterministic(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json",
                    {"family": "two_point", "K": 2.0, "h": 2.0,
                     "n_list": [64, 128, 256], "trials": 6, "seed": 5})
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        res = runner.invoke(main, ["rate-scan", "--config", cfg,
                                   "--out", str(out)])
        assert res.exit_code == 0
        outs.append(out.read_bytes())
        fit = json.loads((tmp_path / (name + ".fit.json")).read_text())
        assert fit["slope"] < 0
    assert outs[0] == outs[1]


def test_cli_seed_overrides_config(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json",
                    {"family": "two_point", "K": 2.0, "h": 2.0,
                     "n_list": [64, 128, 256], "trials": 4, "seed": 5})
    r1 = runner.invoke(main, ["rate-scan", "--config", cfg])
    r2 = runner.invoke(main, ["rate-scan", "--config", cfg, "--seed", "6"])
    assert r1.exit_code == 0 and r2.exit_code == 0
    assert "# seed: 5" in r1.output and "# seed: 6" in r2.output
    assert r1.output != r2.output


def test_lsi_probe(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json", {"K": 2.0, "h_list": [5.0, 10.0]})
    res = runner.invoke(main, ["lsi-probe", "--config", cfg])
    assert res.exit_code == 0
    rows = [l for l in res.output.splitlines() if not l.startswith("#")]
    assert rows[0] == "h,q1,q2,q3,q4,q5,bound"
    b5, b10 = (float(r.split(",")[-1]) for r in rows[1:3])
    assert 0 < b5 < b10


def test_concentration_weighted(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json",
                    {"mode": "weighted", "n": 128, "delta": 0.1,
                     "replications": 20})
    res = runner.invoke(main, ["concentration", "--config", cfg,
                               "--seed", "3"])
    assert res.exit_code == 0
    rows = [l for l in res.output.splitlines() if not l.startswith("#")]
    assert rows[0] == "replication,statistic,bound,violated"
    assert len(rows) == 21


def test_tail_probe(runner, tmp_path):
    cfg = write_cfg(tmp_path, "c.json",
                    {"dist": {"family": "two_point", "h": 4.0, "K": 2.0},
                     "K": 2.0, "epsilon": 0.1, "kind": "upper",
                     "r_max": 8.0, "r_points": 17})
    res = runner.invoke(main, ["tail-probe", "--config", cfg])
    assert res.exit_code == 0
    assert "# M_hat:" in res.output


def test_accept_quick(runner):
    res = runner.invoke(main, ["accept", "--quick", "--threads", "4"])
    assert res.exit_code == 0, res.output
    assert "14/14 criteria passed" in res.output
