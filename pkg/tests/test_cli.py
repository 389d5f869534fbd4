import json

import pytest

from quantcs.cli import main
from quantcs.experiments import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_breakdown(capsys):
    code, out, _ = run(capsys, "breakdown", "--bits", "1,2,3,4")
    assert code == 0
    for token in ("1/2", "3/4", "7/8", "15/16", "0.50", "0.42", "0.36", "0.31"):
        assert token in out


def test_tradeoff(capsys):
    code, out, _ = run(capsys, "tradeoff", "--bits", "1,2", "--sigma", "0")
    assert code == 0
    assert "1.1774" in out and "1.4142" in out and "b=1 wins" in out
    # no channel flag means the noiseless additive channel
    assert run(capsys, "tradeoff", "--bits", "1,2")[1] == out
    code, out, _ = run(capsys, "tradeoff", "--bits", "1,2", "--flip-random", "0.45", "--csv")
    assert code == 0 and out.startswith("mechanism,b,b_prime")


def test_lloyd_max(capsys):
    code, out, _ = run(capsys, "lloyd-max", "--bits", "2", "--std", "1", "--seed", "3")
    assert code == 0
    assert "0.981599" in out and "0.452780 1.510418" in out


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "bogus")[0] == 2
    code, _, err = run(capsys, "breakdown", "--bits", "1", "--nope")
    assert code == 2 and "usage" in err
    assert run(capsys, "tradeoff", "--bits", "1,2", "--sigma", "0", "--flip-random", "0.1")[0] == 2
    assert run(capsys, "tradeoff", "--bits", "1,x", "--sigma", "0")[0] == 2
    assert run(capsys, "lloyd-max", "--bits", "0")[0] == 2
    assert run(capsys, "simulate", "--config", "/no/such.json")[0] == 2


def test_runtime_error_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--n", "20", "--s", "2", "--replicates", "1",
                       "--output", str(tmp_path / "nodir" / "x.csv"))
    assert code == 1 and "nodir" in err
    code, _, _ = run(capsys, "lloyd-max", "--bits", "5", "--max-iter", "3")
    assert code == 1


def test_simulate_inline_and_config_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"class": "sparse", "n": 30, "s": [2], "f": [1.0, 2.0],
                               "replicates": 3, "seed": 1}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg), "--replicates", "2")
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 2 * 2 * 2
    summary = tmp_path / "s.csv"
    out_csv = tmp_path / "r.csv"
    code, _, _ = run(capsys, "simulate", "--config", str(cfg), "--seed", "9",
                     "--output", str(out_csv), "--summary", str(summary))
    assert code == 0
    assert len(read_csv(str(out_csv))) == 12
    assert all(r.seed != rows[0].seed for r in read_csv(str(out_csv)))
    assert summary.read_text().startswith("noise,")


def test_simulate_seed_reproducible(capsys):
    argv = ["simulate", "--n", "25", "--s", "2", "--f", "1", "--replicates", "2", "--seed", "4",
            "--noise", "random_flip", "--params", "0.1"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv, "--workers", "2")[1]
    assert a == b and len(read_csv(a)) == 4


def test_scale_sim(capsys):
    code, out, _ = run(capsys, "scale-sim", "--n", "50", "--s", "3", "--f", "2",
                       "--replicates", "1", "--params", "1")
    assert code == 0
    (row,) = read_csv(out)
    assert row.b == 2 and row.psi_hat == pytest.approx(1.0, rel=0.2)
