import numpy as np
import pytest

from brcaustics.errors import ValidationError
from brcaustics.export import read_csv, write_csv, write_obj


def test_csv_round_trip_is_exact(tmp_path):
    vals = np.random.default_rng(0).normal(size=(5, 3))
    path = tmp_path / "pts.csv"
    write_csv(path, ["a", "b", "c", "sign"], ((*r, "+") for r in vals))
    header, rows = read_csv(path)
    assert header == ["a", "b", "c", "sign"]
    assert np.array_equal(np.array([[float(x) for x in r[:3]] for r in rows]), vals)
    assert {r[3] for r in rows} == {"+"}


def test_csv_to_stdout(capsys):
    write_csv("-", ["x"], [(np.float64(0.1),), (2,)])
    assert capsys.readouterr().out == "x\n0.1\n2\n"


def test_obj(tmp_path):
    path = tmp_path / "pts.obj"
    write_obj(path, [[0.0, 1.0, 2.5]], comment="two\nlines")
    assert path.read_text() == "# two\n# lines\nv 0.0 1.0 2.5\n"
    with pytest.raises(ValidationError):
        write_obj(path, np.zeros((2, 4)))
