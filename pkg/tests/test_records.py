import json
import math

import pytest

from kdvb import __version__
from kdvb.records import RunRecord, load, persist, series_csv_path


def make_record():
    rec = RunRecord("probe", {"K": 8, "grid": (1, 2)}, seed=3)
    rec.add_series("main", x=[0.1, 0.2, 1 / 3], y=[1e-300, -0.0, float("nan")], name=["a", "b", "c"])
    rec.summary = {"max": 1 / 3, "ok": True}
    return rec


def test_round_trip_is_bitwise(tmp_path):
    rec = make_record()
    path = persist(rec, tmp_path / "probe.json")
    back = load(path)
    assert back.series_equal(rec)
    assert back.config == {"K": 8, "grid": [1, 2]}
    assert back.summary["max"] == 1 / 3 and back.seed == 3
    assert math.copysign(1, back.column("main", "y")[1]) == -1


def test_csv_side_files(tmp_path):
    rec = make_record()
    path = persist(rec, tmp_path)
    assert path == tmp_path / "probe.json"
    lines = series_csv_path(path, "main").read_text().splitlines()
    assert lines[0] == "x,y,name"
    assert lines[3].split(",")[0] == repr(1 / 3)
    persist(rec, tmp_path / "nocsv.json", csv_files=False)
    assert not series_csv_path(tmp_path / "nocsv.json", "main").exists()


def test_truncated_or_edited_file_rejected(tmp_path):
    path = persist(make_record(), tmp_path / "r.json")
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ValueError, match="malformed"):
        load(path)
    doc = json.loads(text)
    doc["summary"]["max"] = 0.5
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="checksum"):
        load(path)
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load(path)


def test_version_mismatch_warns(tmp_path):
    rec = make_record()
    rec.version = "0.0.0-old"
    path = persist(rec, tmp_path / "old.json")
    with pytest.warns(UserWarning, match="version"):
        back = load(path)
    assert back.version == "0.0.0-old" != __version__


def test_ragged_series_rejected():
    rec = RunRecord("r", {})
    with pytest.raises(ValueError, match="ragged"):
        rec.add_series("s", a=[1, 2], b=[1])


def test_series_equal_detects_differences():
    a, b = make_record(), make_record()
    assert a.series_equal(b)
    b.series["main"]["x"][0] = 0.1 + 1e-17 if 0.1 + 1e-17 != 0.1 else 0.10000000000000002
    assert not a.series_equal(b)
    c = make_record()
    c.series["main"]["y"][1] = 0.0
    assert not a.series_equal(c)
