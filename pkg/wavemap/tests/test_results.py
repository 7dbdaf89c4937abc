import math
from dataclasses import dataclass, field

import numpy as np
import pytest

from wavemap.spectral.connection import ScanReport, phi1_profile
from wavemap.storage import results
from wavemap.storage.results import ResultEnvelope


@dataclass
class _Sample:
    value: complex
    grid: object = None
    runtime: dict = field(default_factory=dict)


def test_timestamp_honours_source_date_epoch(monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    assert results.envelope_timestamp() == "1970-01-01T00:00:00+00:00"


def test_jsonable_conversions():
    data = results.to_jsonable(
        {
            "complex": 1 + 2j,
            "nan": math.nan,
            "array": np.array([1.0, 2.0]),
            "flag": np.bool_(True),
            "count": np.int64(3),
            "sample": _Sample(0.5 - 0.25j, grid="dropped", runtime={"elapsed_s": 1.0}),
        }
    )
    assert data["complex"] == {"re": 1.0, "im": 2.0}
    assert data["nan"] is None
    assert data["array"] == [1.0, 2.0]
    assert data["flag"] is True
    assert data["count"] == 3 and isinstance(data["count"], int)
    assert data["sample"] == {"value": {"re": 0.5, "im": -0.25}}


def test_envelope_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
    envelope = ResultEnvelope("mode", {"lam": 0.5}, {"miss": 0.1 + 0.2j, "roots": [1.0]}, [{"detail": "nudged"}])
    path = results.write_envelope(tmp_path / "out" / "mode.json", envelope)
    loaded = results.read_envelope(path)
    assert loaded.command == "mode"
    assert loaded.payload["miss"] == 0.1 + 0.2j
    assert loaded.payload["roots"] == [1.0]
    assert loaded.diagnostics == [{"detail": "nudged"}]
    assert loaded.timestamp == envelope.timestamp
    assert loaded.schema_version == results.SCHEMA_VERSION
    assert path.read_text(encoding="utf-8") == loaded.to_json() + "\n"


def test_scan_csv_columns(tmp_path):
    report = ScanReport(
        lo=0.5,
        hi=1.5,
        n=2,
        lambdas=[0.5, 1.5],
        miss=[0.25, -0.5],
        abel_invariant=[0.125, -0.75],
        classifications=["no-eigenvalue", "no-eigenvalue"],
    )
    path = results.write_scan_csv(tmp_path / "scan.csv", report)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "lambda,miss,normalized_miss,classification"
    assert lines[1] == "0.5,0.125,0.25,no-eigenvalue"
    assert len(lines) == 3


def test_profile_files(tmp_path):
    real = phi1_profile(0.5, np.linspace(0.5, 1.0, 11))
    path = results.write_profile_dat(tmp_path / "phi1.dat", real, comment="phi1 lambda=0.5")
    text = path.read_text(encoding="utf-8").splitlines()
    assert text[0] == "# phi1 lambda=0.5"
    assert text[1] == "# rho u du"
    table = results.read_profile_dat(path)
    assert table.shape == (11, 3)
    assert table[-1, 1] == pytest.approx(1.0)

    complex_profile = phi1_profile(0.5 + 0.25j, np.linspace(0.5, 1.0, 5))
    path = results.write_profile_dat(tmp_path / "phi1c.dat", complex_profile)
    assert results.read_profile_dat(path).shape == (5, 5)
