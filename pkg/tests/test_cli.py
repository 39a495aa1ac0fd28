import csv
import io
import json
import subprocess
import sys

import pytest

from pgl.cli import RunConfig, render, run


def call(capsys, *argv):
    code = run(list(argv) + ["--quiet"])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_poly_text(capsys):
    code, out, _ = call(capsys, "poly", "--j", "2")
    assert code == 0 and out == "2: 1 -4/3 1/4\n"


def test_complex_eval_phi(capsys):
    code, out, _ = call(capsys, "complex-eval", "--fn", "phi", "--s", "2", "--tol", "1e-8", "--deterministic")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(out)))
    assert list(row) == ["tag", "lambda", "c", "re_s", "im_s", "re_val", "im_val", "tail_bound", "cutoff"]
    assert abs(float(row["re_val"]) - 0.49309110936876446) < 1e-8
    assert float(row["tail_bound"]) <= 1e-8


def test_conjecture_exit_codes(capsys):
    code, out, _ = call(capsys, "conjecture", "legendre", "--n-max", "100")
    assert code == 0 and ",0," in out.splitlines()[1]
    code, _, err = call(capsys, "conjecture", "legendre", "--n-max", "10", "--min-primes", "3")
    assert code == 1 and "counterexample legendre" in err


def test_numeric_failure_exit(capsys):
    code, _, _ = call(capsys, "rs-check", "--fn", "log", "--x", "1000", "--max-rel", "0")
    assert code == 3


def test_capacity_exit(capsys):
    code, _, err = call(capsys, "complex-eval", "--fn", "phi", "--s", "2", "--tol", "1e-8", "--limit", "1e5")
    assert code == 2 and "needs primes up to" in err


def test_usage_errors(capsys):
    assert run(["sieve", "--no-such-flag"]) == 2
    assert "usage" in capsys.readouterr().err
    assert run(["no-such-command"]) == 2
    assert run(["weighted-sum", "--x", "100", "--lambda", "1.5"]) == 2
    assert run(["complex-eval", "--fn", "tau", "--s", "-1"]) == 2


def test_help_is_not_empty(capsys):
    assert run(["--help"]) == 0
    assert "interval-scan" in capsys.readouterr().out


def test_json_and_csv_payloads_agree(capsys):
    argv = ["epsilon", "--x", "10", "1000", "123456", "--deterministic"]
    _, out_csv, _ = call(capsys, *argv)
    _, out_json, _ = call(capsys, *argv, "--format", "json")
    rows_csv = list(csv.DictReader(io.StringIO(out_csv)))
    rows_json = json.loads(out_json)["rows"]
    assert len(rows_csv) == len(rows_json) == 3
    for a, b in zip(rows_csv, rows_json):
        assert {k: float(v) for k, v in a.items()} == {k: float(v) for k, v in b.items()}


def test_deterministic_json_has_no_timing(capsys):
    _, out, _ = call(capsys, "epsilon", "--x", "10", "--format", "json", "--deterministic")
    assert set(json.loads(out)) == {"rows"}
    _, out, _ = call(capsys, "epsilon", "--x", "10", "--format", "json")
    assert "elapsed_seconds" in json.loads(out)


@pytest.mark.parametrize(
    "argv",
    [
        ["sieve", "--x", "3000000", "--decades"],
        ["interval-scan", "--from-exp", "3", "--to-exp", "5"],
        ["theta", "--x-max", "1000000"],
        ["weighted-sum", "--x", "1e4", "3e5"],
        ["conjecture", "all"],
        ["erdos-hist", "--p-max", "100000"],
    ],
)
def test_thread_count_does_not_change_output(capsys, argv):
    base = argv + ["--deterministic", "--segment-size", "4096"]
    _, one, _ = call(capsys, *base, "--threads", "1")
    _, four, _ = call(capsys, *base, "--threads", "4")
    assert one == four and one


def test_out_file(tmp_path, capsys):
    path = tmp_path / "e.csv"
    assert run(["epsilon", "--x", "10", "--out", str(path), "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    assert path.read_text().startswith("x,li,epsilon,rh_ratio\n")


def test_sieve_checkpoint_file(tmp_path, capsys):
    from pgl.sieve import read_checkpoints

    path = tmp_path / "cp.bin"
    assert run(["sieve", "--x", "1e5", "--decades", "--checkpoint-file", str(path), "--quiet"]) == 0
    stats, _ = read_checkpoints(path)
    assert [s.pi for s in stats] == [4, 25, 168, 1229, 9592]


def test_lemma_probe_and_expansion(capsys):
    code, out, _ = call(capsys, "lemma-probe", "--lemma", "all")
    assert code == 0
    assert out.splitlines()[0] == "lemma,params,x,value,target,deviation"
    code, out, _ = call(capsys, "expansion-check", "--lambda", "0.9", "--J", "4", "10")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[1]["residual"]) < float(rows[0]["residual"]) <= 1e-5


def test_identity_and_transform_commands(capsys):
    code, _, _ = call(capsys, "identity-check", "--which", "xi-tau", "--s", "1+1i", "0.3+2i")
    assert code == 0
    code, _, _ = call(capsys, "identity-check", "--which", "tau-tpp", "--s", "2")
    assert code == 0
    code, _, _ = call(capsys, "laplace-check", "--s", "1")
    assert code == 0
    code, _, _ = call(capsys, "mellin-check", "--z", "1.5")
    assert code == 0


def test_progress_goes_to_stderr(capsys):
    assert run(["weighted-sum", "--x", "1000"]) == 0
    out = capsys.readouterr()
    assert "[pgl]" not in out.out


def test_render_complex_split():
    text = render([{"s": 1 + 2j, "n": 3}], "csv")
    assert text == "re_s,im_s,n\n1,2,3\n"


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig("x", lam=0.5, c=-1).validate()


def test_console_script_module():
    r = subprocess.run(
        [sys.executable, "-m", "pgl.cli", "poly", "--j", "1"], capture_output=True, text=True
    )
    assert r.returncode == 0 and r.stdout == "1: 1 -1/2\n"
