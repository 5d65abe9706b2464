import csv
import io
import json

import pytest

from fzeta.cli import main
from fzeta.drums import cantor


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def drum_file(tmp_path):
    p = tmp_path / "drum.json"
    p.write_text(cantor(0.25, 2.0).to_json())
    return p


def test_zeta_eval_powertail(capsys):
    code, out, _ = run(capsys, "zeta-eval", "--preset", "powertail-2", "--s-grid", "-2.5:0:3,0:0:1")
    assert code == 0
    table = rows(out)
    assert table[0] == ["re_s", "im_s", "re_zeta", "im_zeta", "err"]
    for r in table[1:]:
        s = float(r[0])
        assert float(r[2]) == pytest.approx(1.0 / (s + 3.0), rel=1e-14)


def test_tube_from_file(capsys, drum_file):
    code, out, _ = run(capsys, "tube", "--drum", str(drum_file), "--t-grid", "4:16:2")
    assert code == 0
    vals = [float(r[1]) for r in rows(out)[1:]]
    assert vals == pytest.approx([0.5, 0.3125], rel=1e-13)


def test_profile_export(capsys):
    code, out, _ = run(capsys, "tube", "--preset", "cantor-1/4-2", "--profile", "--samples", "16",
                       "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == "fzeta/1" and len(doc["rows"]) == 16
    assert doc["meta"]["max"] == pytest.approx(1.5)


def test_poles_json(capsys):
    code, out, _ = run(capsys, "poles", "--preset", "cantor-1/4-2", "--T", "4",
                       "--window", "-3.4877:-1.9877,-10:10", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == ["re", "im", "order", "res_re", "res_im", "provenance"]
    assert len(doc["rows"]) == 6


def test_residues_csv(capsys):
    code, out, _ = run(capsys, "residues", "--preset", "cantor-1/4-2", "--kind", "tube",
                       "--window", "-2.7:-2.3,-1:1")
    assert code == 0
    (row,) = rows(out)[1:]
    assert float(row[3]) == pytest.approx(1.4426950408889634, rel=1e-9)
    assert row[5] == "ContourResidue"


def test_construct(capsys):
    code, out, _ = run(capsys, "construct", "--order", "3", "--dimension", "-2.5", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 3
    assert doc["meta"]["report"]["independence_probe"]["passed"] is True


def test_dim(capsys):
    code, out, _ = run(capsys, "dim", "--preset", "powertail-2")
    assert code == 0
    (row,) = rows(out)[1:]
    assert float(row[1]) == pytest.approx(-3.0, abs=1e-9)


def test_bad_json_leaves_no_output(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"family": ')
    target = tmp_path / "out.csv"
    code, out, err = run(capsys, "tube", "--drum", str(bad), "--out", str(target))
    assert code == 2 and out == ""
    assert not target.exists()
    assert json.loads(err)["error"] == "DrumError"


@pytest.mark.parametrize("argv", [
    ["tube", "--preset", "nope"],
    ["zeta-eval", "--preset", "powertail-2"],
    ["tube", "--preset", "powertail-2", "--tol", "1.0"],
    ["construct", "--order", "2", "--dimension", "-1.5"],
    [],
])
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 2


def test_abscissa_error_exit(capsys):
    code, _, err = run(capsys, "zeta-eval", "--preset", "cantor-1/4-2", "--method", "quadrature",
                       "--s-grid", "-2.48:-2.48:1,0:0:1")
    assert code == 2 and json.loads(err)["error"] == "AbscissaError"


def test_pole_on_grid_is_numerical_error(capsys):
    code, _, err = run(capsys, "zeta-eval", "--preset", "powertail-2", "--s-grid", "-3:-3:1,0:0:1")
    assert code == 3 and json.loads(err)["error"] == "PoleProximityError"


def test_written_file_matches_stdout(capsys, tmp_path):
    argv = ["zeta-eval", "--preset", "cantor-1/4-2", "--s-grid", "-2:0:3,-5:5:3", "--format", "json"]
    _, out, _ = run(capsys, *argv)
    target = tmp_path / "z.json"
    assert main(argv + ["--out", str(target)]) == 0
    assert target.read_text() == out


def test_verify_acceptance_deterministic(capsys):
    _, first, _ = run(capsys, "verify", "--acceptance", "--format", "json")
    code, second, err = run(capsys, "verify", "--acceptance", "--format", "json")
    assert code == 0 and first == second
    doc = json.loads(first)
    assert len(doc["rows"]) == 11 and all(r[3] for r in doc["rows"])
    assert " s\n" in err
