import io
import json

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from qcfactor.serialize import dumps, fmt, write_csv


def test_fmt_uses_seventeen_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(1.0) == "1"
    assert fmt(-0.0) == "0"
    assert (fmt(float("nan")), fmt(float("inf")), fmt(-float("inf"))) == ("nan", "inf", "-inf")


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x


def test_dumps_numbers_and_nonfinite():
    text = dumps({"a": np.float64(0.1), "b": [1, np.int64(2)], "c": float("nan"),
                  "d": np.array([0.5, 2.0]), "e": np.bool_(True), "s": "x"}, indent=None)
    assert text == '{"a": 0.10000000000000001, "b": [1, 2], "c": null, "d": [0.5, 2], ' \
                   '"e": true, "s": "x"}'
    assert json.loads(text)["a"] == 0.1


def test_dumps_leaves_lookalike_strings_alone():
    assert json.loads(dumps({"k": "@@f17@"}))["k"] == "@@f17@"


def test_write_csv_targets(tmp_path):
    cols = ([0.0, 1.5], [2.0, -0.25])
    text = write_csv(None, ("x", "y"), cols)
    assert text == "x,y\n0,2\n1.5,-0.25\n"
    buf = io.StringIO()
    write_csv(buf, ("x", "y"), cols)
    path = tmp_path / "a.csv"
    write_csv(path, ("x", "y"), cols)
    assert buf.getvalue() == path.read_text() == text
