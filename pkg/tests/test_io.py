import json

import numpy as np
from hypothesis import given, strategies as st

from dngedge import io


@given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=5))
def test_csv_float_roundtrip(vals, tmp_path_factory):
    p = tmp_path_factory.mktemp("csv") / "t.csv"
    io.write_csv(p, [f"c{i}" for i in range(len(vals))], [vals])
    cols, data = io.read_csv(p)
    assert np.array_equal(data[0], np.array(vals))


def test_csv_header_and_line_endings(tmp_path):
    p = tmp_path / "x.csv"
    io.write_csv(p, ["a"], [[0.1]], meta={"family": "plane"})
    raw = p.read_bytes()
    assert b"\r" not in raw
    text = raw.decode()
    assert "# signature: mostly-plus" in text and "# family: plane" in text
    assert "0.10000000000000001" in text


def test_json_numpy_and_complex(tmp_path):
    p = tmp_path / "o.json"
    io.write_json(p, {"a": np.arange(3), "b": np.float64(1.5), "c": 1 + 2j})
    assert json.loads(p.read_text()) == {"a": [0, 1, 2], "b": 1.5, "c": [1.0, 2.0]}


def test_atomic_write_leaves_no_temp(tmp_path):
    io.write_jsonl(tmp_path / "r.jsonl", [{"x": 1}, {"x": 2}])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["r.jsonl"]
    assert (tmp_path / "r.jsonl").read_text().splitlines() == ['{"x": 1}', '{"x": 2}']
