import csv
import json

import pytest

from fireprop import cli
from fireprop.experiments import ConfigError, ExperimentConfig, alpha_of, run_experiment


def _rows(path):
    with open(path / "rows.csv") as fh:
        return list(csv.reader(fh))


def test_alpha_specs():
    assert alpha_of(7, 100) == 7
    assert alpha_of("sqrt:2", 100) == 20
    assert alpha_of("pow:0.5", 10000) == 100
    assert alpha_of("const:3", 10) == 3
    assert alpha_of("12", 10) == 12
    for bad in ("sqrt:x", "cube:2", -1, True, 1.5):
        with pytest.raises(ConfigError):
            alpha_of(bad, 100)


def test_config_requires_seed():
    with pytest.raises(ConfigError) as e:
        ExperimentConfig.from_dict({"kind": "chain"})
    assert e.value.field == "master_seed"


def test_config_rejects_unknown_field():
    with pytest.raises(ConfigError) as e:
        ExperimentConfig.from_dict({"kind": "chain", "master_seed": 1, "colour": "red"})
    assert e.value.field == "colour"


@pytest.mark.parametrize("patch,fld", [
    ({"n": 7}, "n"),
    ({"reps": 0}, "reps"),
    ({"kind": "nope"}, "kind"),
    ({"kind": "sde", "scheme": "rk4"}, "scheme"),
    ({"kind": "sde", "scheme": "em", "dt": 0.5}, "dt"),
    ({"kind": "karp-sipser", "c": -1.0}, "c"),
    ({"kind": "hitprob", "d_list": [0.7]}, "d_list"),
    ({"workers": 0}, "workers"),
])
def test_config_field_errors(patch, fld):
    with pytest.raises(ConfigError) as e:
        ExperimentConfig.from_dict({"kind": "chain", "master_seed": 1, **patch})
    assert e.value.field == fld


def test_simulate_reproducible_across_workers(tmp_path):
    outs = []
    for w in (1, 2):
        out = tmp_path / f"w{w}"
        assert cli.main(["simulate", "--n", "2000", "--alpha", "sqrt:1", "--reps", "150",
                         "--seed", "5", "--workers", str(w), "--out", str(out)]) == 0
        outs.append((out / "rows.csv").read_bytes())
    assert outs[0] == outs[1]
    rows = _rows(tmp_path / "w1")
    assert rows[0] == ["rep", "n", "alpha", "fires", "clashes", "zeta"]
    assert len(rows) == 151
    cfg = json.loads((tmp_path / "w1" / "config.json").read_text())
    assert cfg["master_seed"] == 5
    assert "build" in json.loads((tmp_path / "w1" / "summary.json").read_text())


def test_config_file_and_override(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"kind": "chain", "n": 100, "alpha": 3, "reps": 4, "master_seed": 1}))
    out = tmp_path / "o"
    assert cli.main(["simulate", "--config", str(conf), "--reps", "6", "--out", str(out)]) == 0
    assert len(_rows(out)) == 7


def test_missing_seed_exit_code(tmp_path, capsys):
    assert cli.main(["simulate", "--n", "100", "--out", str(tmp_path)]) == 2
    assert "master_seed" in capsys.readouterr().err


def test_kind_mismatch(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"kind": "chain", "master_seed": 1}))
    assert cli.main(["sde", "--config", str(conf), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file(tmp_path):
    assert cli.main(["simulate", "--config", str(tmp_path / "none.json"), "--seed", "1"]) == 1


def test_fluid_reference(tmp_path):
    assert cli.main(["fluid", "--seed", "0", "--out", str(tmp_path)]) == 0
    rows = [[float(v) for v in r] for r in _rows(tmp_path)[1:]]
    assert rows[-1] == [1.0, 0.0, 0.0, 0.0, 0.25]
    assert rows[0] == [0.0, 1.0, 1.0, 0.0, 0.0]
    for k in (1, 2):
        assert all(a[k] >= b[k] for a, b in zip(rows, rows[1:]))


def test_sde_and_karp_sipser_and_hitprob(tmp_path):
    assert cli.main(["sde", "--seed", "3", "--a", "1", "--reps", "5", "--out", str(tmp_path / "s")]) == 0
    assert _rows(tmp_path / "s")[0] == ["rep", "X_0.5", "L1", "N1"]
    assert cli.main(["sde", "--seed", "3", "--scheme", "em", "--dt", "1e-3", "--reps", "3",
                     "--out", str(tmp_path / "e")]) == 0
    assert cli.main(["karp-sipser", "--seed", "3", "--c", "4", "--N", "64", "128", "--reps", "4",
                     "--out", str(tmp_path / "k")]) == 0
    summary = json.loads((tmp_path / "k" / "summary.json").read_text())
    assert set(summary["stats"]["by_N"]) == {"64", "128"}
    assert cli.main(["hitprob", "--seed", "3", "--reps", "200", "--out", str(tmp_path / "h")]) == 0
    assert len(_rows(tmp_path / "h")) == 1 + 4 * 3


def test_other_kinds(tmp_path):
    for kind in ("coupled", "oracle-equivalence", "fluid-check", "diffusion-check"):
        out = tmp_path / kind
        cfg = ExperimentConfig(kind=kind, n=200, alpha="sqrt:1", reps=3, master_seed=2, out=str(out))
        assert run_experiment(cfg)["stats"]["rows"] == 3
