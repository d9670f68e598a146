import json

import numpy as np
import pytest

from bipolarmaps import io as bio
from bipolarmaps.cli import main
from bipolarmaps.levy import sample_pair
from bipolarmaps.rng import make_rng
from bipolarmaps.sewing import LatticePath, build_map, decode_map
from bipolarmaps.stepdist import EDGE, FaceMove, power_law_distribution

F = FaceMove
NINE_MOVES = [EDGE, F(1, 2), EDGE, EDGE, EDGE, F(1, 0), F(1, 2), EDGE, EDGE]


def test_moves_text_round_trip():
    text = bio.moves_text_encode(NINE_MOVES)
    assert text.splitlines()[:2] == ["E", "F 1 2"]
    assert bio.moves_text_decode(text) == NINE_MOVES
    assert bio.moves_text_decode("\nE\n\nF 0 0\n") == [EDGE, F(0, 0)]


@pytest.mark.parametrize("text,line", [
    ("E\nX\n", 2), ("F 1\n", 1), ("E\nE\nF a 2\n", 3), ("F -1 0\n", 1),
])
def test_moves_text_errors(text, line):
    with pytest.raises(bio.FormatError) as err:
        bio.moves_text_decode(text)
    assert err.value.line == line
    assert f"line {line}" in str(err.value)


@pytest.mark.parametrize("moves", [NINE_MOVES, [], [F(3, 0)], [F(0, 2), EDGE]])
def test_map_json_round_trip(moves):
    m = build_map(moves)
    text = bio.map_json_encode(m)
    m2 = bio.map_json_decode(text)
    assert decode_map(m2) == moves
    assert bio.map_json_encode(m2) == text
    doc = json.loads(text)
    assert doc["completed"] == m.is_completed
    assert len(doc["edges"]) == len(moves) + 1


def _doc(moves=NINE_MOVES):
    return json.loads(bio.map_json_encode(build_map(moves)))


def test_map_json_dangling_edge():
    doc = _doc()
    doc["rotation"][0].append(99)
    with pytest.raises(bio.FormatError, match="dangling edge index 99"):
        bio.map_json_decode(json.dumps(doc))


def test_map_json_inconsistent_fields():
    doc = _doc()
    doc["completed"] = not doc["completed"]
    with pytest.raises(bio.FormatError, match="disagree"):
        bio.map_json_decode(json.dumps(doc))


def test_map_json_structural_errors():
    with pytest.raises(bio.FormatError):
        bio.map_json_decode("{")
    with pytest.raises(bio.FormatError):
        bio.map_json_decode(json.dumps({"format": "other"}))
    doc = _doc()
    del doc["faces"]
    with pytest.raises(bio.FormatError, match="faces"):
        bio.map_json_decode(json.dumps(doc))
    doc = _doc()
    doc["edges"][3] = [doc["edges"][3][1], doc["edges"][3][0]]
    with pytest.raises(bio.FormatError):
        bio.map_json_decode(json.dumps(doc))


def test_path_csv():
    p = LatticePath((0, 1), np.array([[1, -1], [-1, 0]]))
    assert bio.path_csv(p) == "step,dX,dY,X,Y\n0,0,0,0,1\n1,1,-1,1,0\n2,-1,0,0,0\n"


def test_levy_csv():
    d = power_law_distribution(1.5)
    pair = sample_pair(2.0, 0.5, 1.5, d.c1, make_rng(1))
    jt = bio.jumps_csv(pair.jumps).splitlines()
    assert jt[0] == "t,j,U" and len(jt) == len(pair.jumps) + 1
    row = [float(x) for x in jt[1].split(",")] if len(jt) > 1 else None
    if row:
        assert row[0] == pair.jumps.t[0] and row[1] == pair.jumps.j[0]
    grid = bio.grid_csv(pair, np.linspace(0, 2, 5)).splitlines()
    assert grid[0] == "t,W1,W2" and len(grid) == 6
    assert float(grid[-1].split(",")[1]) == float(pair.W1(2.0))


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_build_decode(tmp_path, capsys):
    mv = tmp_path / "nine.moves"
    mv.write_text(bio.moves_text_encode(NINE_MOVES))
    mp = tmp_path / "nine.json"
    assert main(["build-map", str(mv), "--out", str(mp)]) == 0
    code, out, _ = run(["decode-map", str(mp)], capsys)
    assert code == 0 and bio.moves_text_decode(out) == NINE_MOVES


def test_cli_sample_walk(capsys):
    code, out, _ = run(["sample-walk", "--n", "5", "--bridge", "1", "0", "--seed", "3"], capsys)
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "step,dX,dY,X,Y" and len(rows) == 7
    assert rows[1] == "0,0,0,0,1" and rows[-1].endswith(",0,0")


def test_cli_levy_writes_two_files(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["simulate-levy", "--T", "2", "--grid", "10", "--out", str(out)]) == 0
    assert out.read_text().startswith("t,j,U\n")
    grid = tmp_path / "run.grid.csv"
    assert len(grid.read_text().splitlines()) == 12


@pytest.mark.parametrize("argv", [
    ["sample-walk", "--n", "3", "--alpha", "2.5"],
    ["sample-walk", "--n", "-3"],
    ["build-map", "/nonexistent/file"],
    ["sample-walk", "--n", "1", "--bridge", "5", "5", "--max-attempts", "100"],
    ["sample-ball", "--r", "3", "--m0", "1", "--m-max", "2"],
    ["sample-ball", "--m0", "3"],
    ["nonsense"],
])
def test_cli_input_errors(argv, capsys):
    code, out, err = run(argv, capsys)
    assert code == 2
    assert out == "" and err.startswith("bipolarmaps: ")


def test_cli_bad_moves_file(tmp_path, capsys):
    f = tmp_path / "bad.moves"
    f.write_text("E\nQ\n")
    code, _, err = run(["build-map", str(f)], capsys)
    assert code == 2 and "line 2" in err


def test_cli_stat_failure(tmp_path, capsys):
    out = tmp_path / "rep.json"
    code, _, err = run(["experiment", "tails", "--samples", "20000", "--tol", "1e-9",
                        "--out", str(out)], capsys)
    assert code == 3
    assert json.loads(err)["passed"] is False
    assert not out.exists()


def test_cli_experiment_tv(capsys):
    code, out, _ = run(["experiment", "tv", "--ns", "6", "10"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["passed"] and len(rep["rows"]) == 2


def test_cli_seed_changes_output(capsys):
    _, a, _ = run(["sample-walk", "--n", "50", "--seed", "1"], capsys)
    _, b, _ = run(["sample-walk", "--n", "50", "--seed", "2"], capsys)
    _, c, _ = run(["sample-walk", "--n", "50", "--seed", "1"], capsys)
    assert a != b and a == c
