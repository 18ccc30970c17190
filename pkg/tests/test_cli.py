import json

from click.testing import CliRunner

from qsa_lab.cli import cli


def _invoke(*args):
    return CliRunner().invoke(cli, list(args))


def _write_config(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def _lines(path):
    return path.read_text(encoding="utf-8").splitlines()


def test_solve_benchmark(tmp_path):
    result = _invoke("solve", "bench:two_by_two", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    assert "s=0 V*=" in result.output
    rows = _lines(tmp_path / "solve" / "solve.csv")
    assert rows[0] == "s,a,q_star,v_star,optimal,gap"
    assert len(rows) == 5
    assert (tmp_path / "solve" / "verdict.txt").is_file()


def test_solve_single_state_file(tmp_path):
    mdp = {"num_states": 1, "num_actions": 1, "gamma": 0.5, "rmax": 1.0, "rewards": [[1.0]], "transitions": [[[1.0]]]}
    path = tmp_path / "one.json"
    path.write_text(json.dumps(mdp), encoding="utf-8")
    result = _invoke("solve", str(path), "--out", str(tmp_path / "out"))
    assert result.exit_code == 0, result.output
    assert "V*=2" in result.output
    assert "gap=inf" in result.output


def test_missing_mdp_exits_3(tmp_path):
    result = _invoke("solve", str(tmp_path / "nope.json"), "--out", str(tmp_path))
    assert result.exit_code == 3
    assert "file_not_found" in result.output
    assert not (tmp_path / "solve").exists()


def test_invalid_config_exits_5(tmp_path):
    cfg = _write_config(tmp_path / "bad.json", {"qlearn": {"steps": 0}})
    result = _invoke("run-boltzmann", "--config", cfg, "--out", str(tmp_path))
    assert result.exit_code == 5
    assert "config_invalid" in result.output


def test_strict_conditions_exit_7(tmp_path):
    cfg = _write_config(tmp_path / "cfg.json", {"qlearn": {"algo": "boltzmann", "beta": 0.5}})
    result = _invoke("run-boltzmann", "--config", cfg, "--out", str(tmp_path), "--strict-conditions", "--steps", "50")
    assert result.exit_code == 7
    assert "condition_violated" in result.output
    assert not (tmp_path / "run-boltzmann").exists()


def test_heatmap(tmp_path):
    result = _invoke("heatmap", "--resolution", "11", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    assert "rows=121" in result.output
    rows = _lines(tmp_path / "heatmap" / "heatmap.csv")
    assert rows[0] == "x,lambda,dP_dx_abs,dP_dlambda_abs"
    assert len(rows) == 122


def test_audit(tmp_path):
    result = _invoke("audit", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    rows = _lines(tmp_path / "audit" / "audit.csv")
    assert rows[0] == "id,satisfied,required,lhs,rhs,witness,tail_holds,note"
    assert len(rows) > 1


def test_run_boltzmann(tmp_path):
    result = _invoke("run-boltzmann", "--steps", "300", "--seed", "1", "--snapshots", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    assert "final_err=" in result.output
    run_dir = tmp_path / "run-boltzmann"
    assert _lines(run_dir / "run.csv")[0] == "n,err_inf,s_n,cumulative_reward"
    trajectory = _lines(run_dir / "trajectory.csv")
    assert trajectory[0] == "n,err_inf,beta_n,epsilon_n,lambda_n,y_n"
    assert len(trajectory) > 1
    assert (run_dir / "snapshots.npz").is_file()
    assert json.loads((run_dir / "config.json").read_text())["qlearn"]["steps"] == 300


def test_concentration_is_reproducible(tmp_path):
    cfg = _write_config(tmp_path / "cfg.json", {"qlearn": {"steps": 2000}})
    outputs = []
    for name in ("a", "b"):
        result = _invoke("concentration", "--config", cfg, "--seeds", "1,2,3", "--quiet", "--out", str(tmp_path / name))
        assert result.exit_code == 0, result.output
        outputs.append((tmp_path / name / "concentration" / "envelope.csv").read_text())
    assert outputs[0] == outputs[1]
    assert outputs[0].splitlines()[0] == "n,q10,q50,q90"
    errors = _lines(tmp_path / "a" / "concentration" / "errors.csv")
    assert errors[0] == "seed,n,err_inf"
    assert (len(errors) - 1) % 3 == 0


def test_regret_frozen(tmp_path):
    cfg = _write_config(tmp_path / "cfg.json", {"qlearn": {"steps": 500}, "regret": {"method": "frozen"}})
    result = _invoke("regret", "--config", cfg, "--seeds", "1,2", "--quiet", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    rows = _lines(tmp_path / "regret" / "regret.csv")
    assert rows[0] == "N,regret_frozen,regret_mc,mc_stderr,theoretical_exponent"
    assert rows[-1].startswith("500,")


def test_decomposition(tmp_path):
    cfg = _write_config(tmp_path / "cfg.json", {"decomposition": {"window": [0, 50]}})
    result = _invoke("decomposition", "--config", cfg, "--seeds", "5", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    assert "window=0..50" in result.output
    assert len(_lines(tmp_path / "decomposition" / "decomposition.csv")) > 1


def test_bad_seeds_is_usage_error(tmp_path):
    result = _invoke("concentration", "--seeds", "x,y", "--quiet", "--out", str(tmp_path))
    assert result.exit_code == 2


def test_run_seg_writes_trajectory(tmp_path):
    result = _invoke("run-seg", "--steps", "200", "--seed", "3", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    rows = _lines(tmp_path / "run-seg" / "trajectory.csv")
    assert rows[0] == "n,err_inf,beta_n,epsilon_n,lambda_n,y_n"
    first = rows[1].split(",")
    assert first[0] == "0"
    assert first[1] != ""
