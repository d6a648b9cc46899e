import json

import numpy as np
import pytest

from esr3d.cli import main
from esr3d.errors import ParseError
from esr3d.generators import SurfaceFamily, generate
from esr3d.grid import Partition
from esr3d.surface_io import format_surface, parse_surface, read_surface, write_surface


def run(argv, capsys=None):
    try:
        code = main(argv)
    except SystemExit as e:
        code = e.code
    return code


def test_generate_line_count(tmp_path):
    out = tmp_path / "s.txt"
    assert run(["generate", "--family", "sine1", "--k", "2", "--m", "101", "--n", "101", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "101 101"
    assert len(lines) == 1 + 10201


def test_unit_gamma_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    run(["generate", "--family", "sine2", "--k", "2", "--m", "7", "--n", "5", "--out", str(a)])
    run(["generate", "--family", "sine2", "--k", "2", "--m", "7", "--n", "5",
         "--gamma-a", "1", "--gamma-b", "1", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_traversal_order(tmp_path):
    out = tmp_path / "s.txt"
    run(["generate", "--family", "sine1", "--m", "3", "--n", "4", "--out", str(out)])
    rows = [list(map(float, l.split())) for l in out.read_text().splitlines()[1:]]
    # r varies fastest: second line is c(r_2, t_1)
    assert rows[1][:2] == [0.5, 0.0]
    assert rows[3][:2] == [0.0, 1.0 / 3.0]


@pytest.mark.parametrize("argv", [
    ["generate", "--family", "sine1", "--m", "2"],
    ["generate", "--family", "torus1"],
    ["generate", "--family", "sine1", "--gamma-a", "0.5"],
    ["register", "only-one.txt"],
    ["reproduce", "sine-k2-gr", "--tol", "-1"],
])
def test_argument_errors(argv):
    assert run(argv) == 2


def test_unknown_case():
    assert run(["reproduce", "no-such-case"]) == 2


def test_round_trip_exact(tmp_path, rng):
    pts = rng.normal(size=(4, 6, 3)) * 10.0 ** rng.integers(-8, 8, size=(4, 6, 3))
    from esr3d.grid import SurfaceGrid
    g = SurfaceGrid(Partition.uniform(4), Partition.uniform(6), pts)
    p = tmp_path / "g.txt"
    write_surface(p, g)
    back = read_surface(p)
    np.testing.assert_array_equal(back.points, g.points)


def test_parse_errors():
    with pytest.raises(ParseError, match="line 1"):
        parse_surface("")
    with pytest.raises(ParseError, match="line 1"):
        parse_surface("3 x\n")
    text = "2 2\n0 0 0\n1 0 0\n0 1 0\n"
    with pytest.raises(ParseError, match="line 5"):
        parse_surface(text)
    with pytest.raises(ParseError, match="line 3"):
        parse_surface("2 2\n0 0 0\n1 0\n0 1 0\n1 1 0\n")
    with pytest.raises(ParseError, match="line 2"):
        parse_surface("2 2\n0 nan 0\n1 0 0\n0 1 0\n1 1 0\n")
    with pytest.raises(ParseError, match="line 6"):
        parse_surface("2 2\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n5 5 5\n")


def test_register_truncated_file_exit_code(tmp_path, capsys):
    good = tmp_path / "good.txt"
    bad = tmp_path / "bad.txt"
    run(["generate", "--family", "cossine1", "--m", "5", "--n", "5", "--out", str(good)])
    bad.write_text("\n".join(good.read_text().splitlines()[:10]) + "\n")
    assert run(["register", str(good), str(bad)]) == 3
    assert "line 11" in capsys.readouterr().err
    assert run(["register", str(good), str(tmp_path / "missing.txt")]) == 3


def test_register_dimension_mismatch(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    run(["generate", "--family", "cossine1", "--m", "5", "--n", "5", "--out", str(a)])
    run(["generate", "--family", "cossine1", "--m", "6", "--n", "5", "--out", str(b)])
    assert run(["register", str(a), str(b)]) == 3


def test_degenerate_surface_exit_code(tmp_path):
    a = tmp_path / "a.txt"
    a.write_text("3 3\n" + "0 0 0\n" * 9)
    assert run(["register", str(a), str(a)]) == 4


def test_register_same_file(tmp_path):
    s = tmp_path / "s.txt"
    rep = tmp_path / "rep.json"
    warp = tmp_path / "warp.txt"
    run(["generate", "--family", "helicoid1", "--k", "2", "--m", "15", "--n", "15", "--out", str(s)])
    code = run(["register", str(s), str(s), "--json", str(rep), "--emit-warp", str(warp),
                "--emit-registered", str(tmp_path / "reg"), "--threads", "2"])
    assert code == 0
    report = json.loads(rep.read_text())
    assert report["distance"] <= 1e-3
    assert abs(report["distance"] ** 2 - report["energy"]) <= 1e-9
    np.testing.assert_allclose(np.reshape(report["rotation"], (3, 3)), np.eye(3), atol=1e-6)
    assert len(report["energy_trace"]) == report["iterations"]
    assert len(report["row_energies"]) == 15
    blocks = warp.read_text().strip().split("# row ")
    assert len([b for b in blocks if b]) == 15
    first = read_surface(report["registered_first"])
    assert first.shape == (15, 15)


def test_corner_search_flag(tmp_path):
    s = tmp_path / "s.txt"
    rep = tmp_path / "rep.json"
    run(["generate", "--family", "sine1", "--k", "3", "--m", "9", "--n", "9", "--out", str(s)])
    assert run(["register", str(s), str(s), "--corner-search", "--json", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["distance"] <= 1e-3
    assert 0 <= report["candidate_index"] < 8


def test_env_threads_override(tmp_path, monkeypatch):
    s = tmp_path / "s.txt"
    run(["generate", "--family", "cossine1", "--m", "7", "--n", "7", "--out", str(s)])
    monkeypatch.setenv("ESR3D_THREADS", "zero")
    assert run(["register", str(s), str(s), "--json", str(tmp_path / "r.json")]) == 2
    monkeypatch.setenv("ESR3D_THREADS", "1")
    assert run(["register", str(s), str(s), "--json", str(tmp_path / "r.json")]) == 0


def test_reproduce_reports_reference(capsys):
    assert run(["reproduce", "sine-k4-gr", "--m", "21", "--n", "11"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["reference_distance"] == 0.3192
    assert report["case_id"] == "sine-k4-gr"
    assert len(report["reference_rotation"]) == 9


def test_generate_stdout(capsys):
    assert run(["generate", "--family", "cossine2", "--m", "3", "--n", "3"]) == 0
    g = generate(SurfaceFamily("cossine2"), Partition.uniform(3), Partition.uniform(3))
    assert capsys.readouterr().out == format_surface(g)
