import json

import numpy as np
import pytest
import yaml

from starris import cli, validate
from starris.channel import default_config


def write_config(path, scenario=None, experiment=None):
    doc = {"scenario": scenario or {}, "experiment": experiment or {}}
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def strip_time(text):
    doc = json.loads(text)

    def drop(node):
        if isinstance(node, dict):
            return {k: drop(v) for k, v in node.items() if "time" not in k}
        if isinstance(node, list):
            return [drop(v) for v in node]
        return node

    return json.dumps(drop(doc), sort_keys=True)


def test_load_experiment_defaults_and_overrides(tmp_path):
    p = write_config(
        tmp_path / "c.yaml",
        scenario={"n_x": 4, "n_z": 4, "max_iter": 30},
        experiment={"trials": 7, "seed": 3, "sweep_n": [16, [4, 2]]},
    )
    exp = cli.load_experiment(p)
    assert exp.scenario.N == 16
    assert exp.trials == 7 and exp.seed == 3
    assert exp.sweep_n == ((4, 4), (4, 2))
    # CLI overrides win
    exp2 = cli.load_experiment(p, seed=9, trials=2)
    assert exp2.seed == 9 and exp2.trials == 2 and exp2.scenario.seed == 9


def test_load_experiment_rejects_unknown_keys(tmp_path):
    p = write_config(tmp_path / "bad.yaml", scenario={"bogus_key": 1})
    with pytest.raises(cli.ConfigError):
        cli.load_experiment(p)
    p2 = write_config(tmp_path / "bad2.yaml", experiment={"nope": 1})
    with pytest.raises(cli.ConfigError):
        cli.load_experiment(p2)
    p3 = write_config(tmp_path / "bad3.yaml", experiment={"sweep_n": [5]})
    with pytest.raises(cli.ConfigError):
        cli.load_experiment(p3)


def test_cli_exit_codes(tmp_path):
    bad = write_config(tmp_path / "bad.yaml", scenario={"bogus": True})
    assert cli.main(["solve", "--config", bad]) == cli.EXIT_CONFIG

    # BS-side grating null makes the alignment sum degenerate
    degen = write_config(
        tmp_path / "degen.yaml",
        scenario={"phi_br": float(np.pi / 2), "psi_br": float(np.arcsin(0.25))},
    )
    out = tmp_path / "x.json"
    assert cli.main(["solve", "--config", degen, "--out", str(out)]) == cli.EXIT_DEGENERATE

    missing_dir = tmp_path / "nope" / "out.csv"
    small = write_config(tmp_path / "small.yaml", scenario={"n_x": 2, "n_z": 2, "max_iter": 5})
    assert cli.main(["convergence", "--config", small, "--out", str(missing_dir)]) == cli.EXIT_IO


def test_solve_outputs(tmp_path):
    small = write_config(tmp_path / "s.yaml", scenario={"n_x": 3, "n_z": 3, "max_iter": 40})
    out = tmp_path / "sol.json"
    assert cli.main(["solve", "--config", small, "--seed", "4", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["meta"]["seed"] == 4
    assert doc["meta"]["version"]
    assert len(doc["angles"]["tr"]) == 9
    for ang in doc["angles"]["tr"] + doc["angles"]["re"]:
        assert -np.pi < ang <= np.pi


def test_convergence_output(tmp_path):
    small = write_config(tmp_path / "s.yaml", scenario={"n_x": 3, "n_z": 3, "max_iter": 25})
    out = tmp_path / "trace.csv"
    assert cli.main(["convergence", "--config", small, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("iteration,objective,normalized_objective,grad_norm,step")
    assert len(lines) >= 2
    first = lines[1].split(",")
    assert first[0] == "0" and float(first[2]) == 1.0

    chi0 = write_config(tmp_path / "chi0.yaml", scenario={"eps_phase": 0.0})
    out0 = tmp_path / "trace0.csv"
    assert cli.main(["convergence", "--config", chi0, "--out", str(out0)]) == 0
    assert len(out0.read_text().splitlines()) == 2  # header + initial row only


def test_sweep_output(tmp_path):
    conf = write_config(
        tmp_path / "s.yaml",
        scenario={"max_iter": 25},
        experiment={"sweep_n": [[2, 2]], "trials": 6},
    )
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep-n", "--config", conf, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3  # header + proposed + random
    assert lines[1].split(",")[1] == "proposed"
    assert lines[2].split(",")[1] == "random"


def test_validate_subcommand_and_report(tmp_path):
    conf = write_config(tmp_path / "v.yaml", experiment={"trials": 300})
    out = tmp_path / "report.json"
    assert cli.main(["validate", "--config", conf, "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True
    names = {c["name"] for c in report["checks"]}
    assert {"gradient_finite_difference", "deterministic_limits",
            "closed_form_vs_monte_carlo", "sampler_statistics",
            "manifold_invariants"} <= names


def test_validate_detects_wrong_gradient():
    from starris import objective

    def sabotaged(ctx, prof):
        return -objective.phase_gradient(ctx, prof)

    report = validate.run_checks(default_config(), trials=300, gradient_override=sabotaged)
    assert report["passed"] is False
    byname = {c["name"]: c for c in report["checks"]}
    assert byname["gradient_finite_difference"]["passed"] is False


def test_validate_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(
        cli.validate, "run_checks", lambda *a, **k: {"passed": False, "checks": []}
    )
    out = tmp_path / "r.json"
    assert cli.main(["validate", "--out", str(out)]) == cli.EXIT_VALIDATION


@pytest.mark.parametrize("command,args", [
    ("solve", []),
    ("convergence", []),
    ("sweep-n", []),
    ("validate", ["--trials", "300"]),
])
def test_reruns_byte_identical(tmp_path, command, args):
    conf = write_config(
        tmp_path / "c.yaml",
        scenario={"n_x": 3, "n_z": 3, "max_iter": 30},
        experiment={"sweep_n": [[2, 2]], "trials": 5},
    )
    outs = []
    for run in (1, 2):
        out = tmp_path / f"out{run}"
        code = cli.main([command, "--config", conf, "--seed", "7", "--out", str(out)] + args)
        assert code == 0
        outs.append(out.read_bytes())
    if command in ("solve", "validate"):
        assert strip_time(outs[0].decode()) == strip_time(outs[1].decode())
    else:
        assert outs[0] == outs[1]
