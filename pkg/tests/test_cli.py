import csv
import io
import json

import pytest

from minerdilemma import equilibrium as eqm
from minerdilemma.cli import main
from minerdilemma.game import GameParams


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_extreme(capsys):
    code, out, _ = run(capsys, "solve", "--m1", "1", "--m2", "8", "--t", "0", "--p", "0")
    assert code == 0
    assert out.splitlines() == ["kind: extreme-x1-zero", "x1: 0.0", "x2: 4.0", "y_star: 4.0",
                                "ppoa: 1.8"]


def test_solve_symmetric_json(capsys):
    code, out, _ = run(capsys, "solve", "--m1", "32", "--m2", "32", "--json")
    rec = json.loads(out)
    assert code == 0
    assert rec["kind"] == "symmetric"
    assert rec["ppoa"] == 2.0


def test_solve_json_round_trip(capsys):
    _, out, _ = run(capsys, "solve", "--m1", "1", "--m2", "2", "--t", "1", "--p", "0", "--json")
    rec = json.loads(out)
    assert rec["ppoa"] == pytest.approx(1.3075, abs=1e-4)
    again = eqm.solve(GameParams(rec["m1"], rec["m2"], rec["t"], rec["p"]))
    assert (again.x1, again.x2, again.y_star, again.ppoa) == (
        rec["x1"], rec["x2"], rec["y_star"], rec["ppoa"])


@pytest.mark.parametrize("argv", [
    ("solve", "--m1", "0", "--m2", "1"),
    ("solve", "--m1", "1", "--m2", "1", "--p", "1"),
    ("solve", "--m1", "1", "--m2", "1", "--t", "-2"),
])
def test_solve_bad_input(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.startswith("error:")


def test_solve_unparsable_number(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--m1", "nan", "--m2", "1"])
    assert exc.value.code == 2


def test_simulate_matches_solve(capsys):
    _, out, _ = run(capsys, "simulate", "--pools", "1,2", "--t", "1", "--json")
    rec = json.loads(out)
    e = eqm.solve(GameParams(1, 2, 1, 0))
    assert rec["converged"]
    assert rec["matrix"][0][1] == pytest.approx(e.x1, abs=1e-6)
    assert rec["matrix"][1][0] == pytest.approx(e.x2, abs=1e-6)
    assert rec["ppoa"] == pytest.approx(e.ppoa, abs=1e-6)


def test_simulate_csv_extreme(capsys):
    code, out, _ = run(capsys, "simulate", "--pools", "1,8", "--csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [(r["attacker"], r["victim"]) for r in rows] == [("0", "1"), ("1", "0")]
    assert float(rows[0]["x"]) == pytest.approx(0.0, abs=1e-6)
    assert float(rows[1]["x"]) == pytest.approx(4.0, abs=1e-6)


def test_simulate_text(capsys):
    code, out, _ = run(capsys, "simulate", "--pools", "32,32,32")
    assert code == 0
    assert "converged: true" in out
    assert "ppoa: 1.5000000202963293" in out


def test_simulate_nonconvergence_exit_code(capsys):
    code, _, err = run(capsys, "simulate", "--pools", "32,32,32", "--max-iters", "2")
    assert code == 3
    assert "no convergence" in err
    code, _, _ = run(capsys, "simulate", "--pools", "32,32,32", "--max-iters", "2",
                     "--allow-nonconverged")
    assert code == 0


def test_simulate_bad_input(capsys):
    code, _, _ = run(capsys, "simulate", "--pools", "1")
    assert code == 2


def test_figure_with_axis_overrides(capsys, tmp_path):
    code, out, _ = run(capsys, "figure", "--panel", "f", "--out-dir", str(tmp_path),
                       "--axis1", "0,0.5", "--axis2", "0,64")
    assert code == 0
    assert "4 points, 0 not converged, 0 failed, 0 conjecture violations" in out
    rows = list(csv.DictReader((tmp_path / "figure_f.csv").open()))
    assert [(r["p"], r["t"]) for r in rows] == [("0.0", "0.0"), ("0.0", "64.0"),
                                                ("0.5", "0.0"), ("0.5", "64.0")]
    assert float(rows[0]["ppoa"]) == pytest.approx(1.5, abs=1e-6)


def test_verify_is_deterministic(capsys):
    first = run(capsys, "verify", "--cases", "5", "--seed", "7")
    second = run(capsys, "verify", "--cases", "5", "--seed", "7")
    assert first == second
    code, out, _ = first
    lines = out.splitlines()
    assert code == 0
    assert lines[:2] == ["seed: 7", "cases: 5"]
    assert len(lines) == 8
    assert all(line.startswith("PASS") for line in lines[2:])


def test_verify_catches_flipped_g(capsys, monkeypatch):
    original = eqm.g_polynomial

    def flipped(p, m1, m2):
        g = original(p, m1, m2)
        return eqm.GPolynomial(-g.c3, -g.c2, -g.c1, -g.c0)

    monkeypatch.setattr(eqm, "g_polynomial", flipped)
    code, out, _ = run(capsys, "verify", "--cases", "5", "--seed", "7")
    assert code == 1
    assert "FAIL dispatch-and-bounds" in out
