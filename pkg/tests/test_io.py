import json

import numpy as np
import pytest

from conftest import panel_from
from lmarch.errors import ParseError
from lmarch.io import (dump_json, matrix_from_json, matrix_to_json, read_matrix_csv,
                       read_residuals, read_spectrum_csv, write_heatmap_csv, write_matrix_csv,
                       write_residuals, write_spectrum_csv)
from lmarch.kernels import long_memory_weights
from lmarch.residuals import compute_residuals


@pytest.fixture
def awkward(rng):
    # values whose shortest repr needs all 17 digits
    return rng.standard_normal((4, 4)) * 10.0 ** rng.integers(-300, 300, (4, 4))


def test_matrix_csv_round_trip(tmp_path, awkward):
    write_matrix_csv(tmp_path / "m.csv", awkward, list("abcd"))
    m, labels = read_matrix_csv(tmp_path / "m.csv")
    assert labels == list("abcd")
    np.testing.assert_array_equal(m, awkward)


def test_matrix_csv_errors(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ParseError):
        read_matrix_csv(tmp_path / "bad.csv")
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(ParseError):
        read_matrix_csv(tmp_path / "empty.csv")


def test_matrix_json_round_trip(awkward):
    m, labels = matrix_from_json(matrix_to_json(awkward, list("wxyz"), measure="r_r"))
    np.testing.assert_array_equal(m, awkward)
    assert labels == list("wxyz")


def test_spectrum_round_trip(tmp_path, rng):
    e = np.sort(rng.exponential(size=30))[::-1] * 1e-7
    write_spectrum_csv(tmp_path / "s.csv", e)
    np.testing.assert_array_equal(read_spectrum_csv(tmp_path / "s.csv"), e)
    assert (tmp_path / "s.csv").read_text().splitlines()[:2][0] == "rank,eigenvalue"


def test_heatmap_layout(tmp_path):
    write_heatmap_csv(tmp_path / "h.csv", [[1.0, 0.5], [0.5, 1.0]], ["x", "y"], ["x", "y"])
    assert (tmp_path / "h.csv").read_text().splitlines() == [",x,y", "x,1,0.5", "y,0.5,1"]


def test_residuals_round_trip(tmp_path, rng):
    panel = panel_from(0.01 * rng.standard_normal((80, 3)))
    res = compute_residuals(panel, long_memory_weights(20), 0.1, 0.01)
    write_residuals(tmp_path / "res.csv", res)
    back = read_residuals(tmp_path / "res.csv")
    np.testing.assert_array_equal(back.residuals, res.residuals)
    assert list(back.dates) == list(res.dates)
    assert back.labels == res.labels
    assert back.config["gamma"] == 0.1 and back.config["i_max"] == 20


def test_dump_json_cleans(tmp_path):
    dump_json(tmp_path / "x.json", {"a": np.float64(0.1), "b": np.int32(3), "c": float("nan"),
                                    "d": np.arange(2), 1: "k"})
    d = json.loads((tmp_path / "x.json").read_text())
    assert d == {"a": 0.1, "b": 3, "c": None, "d": [0, 1], "1": "k"}
