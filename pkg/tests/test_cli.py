"""Command line interface: outputs, round trips and exit codes."""

import json

import numpy as np
import pytest

from quadenv import q_card_eval, write_matrix, write_vector
from quadenv.cli import main


def test_envelope_csv_matches_closed_form(tmp_path, capsys):
    code = main(["envelope", "--penalty", "card", "--mu", "1.0", "--gamma", "2.0",
                 "--lo", "-2", "--hi", "2", "--n", "41"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "x,f,q,s"
    assert len(lines) == 42
    for line in lines[1:]:
        x, f, q, s = (float(t) for t in line.split(","))
        assert q == pytest.approx(q_card_eval(np.array([x]), 2.0, 1.0), abs=1e-12)
        assert s <= 1e-12
        assert f in (0.0, 1.0)


def test_envelope_out_file(tmp_path):
    out = tmp_path / "env.csv"
    code = main(["envelope", "--penalty", "topk", "--k", "1",
                 "--lo", "-1", "--hi", "1", "--n", "11", "--out", str(out)])
    assert code == 0
    rows = out.read_text().strip().splitlines()
    assert rows[0] == "x,f,q,s"
    # any scalar is 1-sparse, so envelope and penalty both vanish
    assert all(float(r.split(",")[2]) == 0.0 for r in rows[1:])


def test_solve_round_trip(tmp_path, capsys):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((4, 6))
    d = rng.standard_normal(4)
    write_matrix(tmp_path / "A.csv", A)
    write_vector(tmp_path / "d.csv", d)
    prob = {
        "A": str(tmp_path / "A.csv"),
        "d": str(tmp_path / "d.csv"),
        "penalty": {"type": "card", "mu": 0.5},
        "gamma": {"mode": "auto_c", "c": 1.05},
        "solver": {"restarts": 3, "seed": 2},
    }
    pfile = tmp_path / "prob.json"
    pfile.write_text(json.dumps(prob))
    trace = tmp_path / "trace.csv"
    code = main(["solve", str(pfile), "--trace", str(trace)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["x"]) == 6
    assert payload["regime"] == "minima_preserving"
    assert payload["converged"] is True
    tr = trace.read_text().strip().splitlines()
    assert tr[0] == "iteration,objective"
    objs = [float(r.split(",")[1]) for r in tr[1:]]
    assert objs == sorted(objs, reverse=True)
    assert objs[-1] == pytest.approx(payload["objective"])


def test_solve_missing_file_exits_2(capsys):
    assert main(["solve", "no-such-problem.json"]) == 2
    assert "error" in capsys.readouterr().err


def test_solve_bad_config_exits_2(tmp_path, capsys):
    pfile = tmp_path / "prob.json"
    pfile.write_text(json.dumps({"A": "x.csv"}))
    assert main(["solve", str(pfile)]) == 2
    pfile.write_text("{not json")
    assert main(["solve", str(pfile)]) == 2


def test_verify_single_suite(capsys):
    code = main(["verify", "--suite", "monotonicity"])
    out = capsys.readouterr().out
    assert code == 0
    assert "[pass] monotonicity" in out


def test_verify_rejects_unknown_suite():
    with pytest.raises(SystemExit):
        main(["verify", "--suite", "spectral-gap"])


def test_oracle_hull_output(capsys):
    code = main(["oracle", "--penalty", "card", "--transform", "hull",
                 "--lo", "-1", "--hi", "1", "--n", "5"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "x,value"
    vals = [float(r.split(",")[1]) for r in lines[1:]]
    np.testing.assert_allclose(vals, [1.0, 0.5, 0.0, 0.5, 1.0])


def test_oracle_quad_envelope_from_csv(tmp_path, capsys):
    xs = np.linspace(-2.0, 2.0, 401)
    grid = tmp_path / "grid.csv"
    with open(grid, "w") as fh:
        for x in xs:
            fh.write(f"{x:.17g},{min((x - 1) ** 2, (x + 1) ** 2):.17g}\n")
    code = main(["oracle", "--input", str(grid), "--transform", "quad-envelope",
                 "--gamma", "2.0"])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()[1:]
    mid = lines[200].split(",")
    assert float(mid[0]) == pytest.approx(0.0)
    assert float(mid[1]) == pytest.approx(0.5, abs=1e-3)


def test_oracle_rejects_nonuniform_csv(tmp_path, capsys):
    grid = tmp_path / "grid.csv"
    grid.write_text("0,1\n1,1\n3,1\n")
    assert main(["oracle", "--input", str(grid), "--transform", "hull"]) == 2
    assert "uniform" in capsys.readouterr().err


def test_fig4_writes_csv(tmp_path, capsys):
    out = tmp_path / "fig4.csv"
    code = main(["fig4", "--m", "10", "--n", "16", "--card", "2", "--trials", "1",
                 "--noise", "0.0", "--restarts", "2", "--seed", "3",
                 "--methods", "q_topk,l1_sweep", "--out", str(out)])
    assert code == 0
    text = capsys.readouterr().out
    assert "wrote 2 rows" in text
    assert out.exists()
    assert "q_topk" in out.read_text()
