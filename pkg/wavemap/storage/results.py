"""Result envelopes and plot files.

Every command writes one JSON envelope (schema version, timestamp, config
echo, payload, diagnostics) plus flat files for plotting. Complex numbers
are stored as {"re": ..., "im": ...}. Runtime metadata is logged, never
written, so identical configs give identical files.
"""
import csv
import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from wavemap.core.logger import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = "1.0"
EXCLUDED_FIELDS = ("grid", "runtime")
SCAN_COLUMNS = ("lambda", "miss", "normalized_miss", "classification")


def envelope_timestamp() -> str:
    """SOURCE_DATE_EPOCH when set, otherwise the current UTC time."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc) if epoch else datetime.now(timezone.utc)
    return moment.replace(microsecond=0).isoformat()


def to_jsonable(obj):
    """Plain JSON types for dataclasses, numpy values and complex numbers."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
            if f.name not in EXCLUDED_FIELDS
        }
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items() if k not in EXCLUDED_FIELDS}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        value = complex(obj)
        return {"re": _finite_or_none(value.real), "im": _finite_or_none(value.imag)}
    if isinstance(obj, (float, np.floating)):
        return _finite_or_none(float(obj))
    return obj


def _finite_or_none(value: float):
    return value if math.isfinite(value) else None


def _decode(obj):
    if isinstance(obj, dict):
        if set(obj) == {"re", "im"}:
            return complex(obj["re"] or 0.0, obj["im"] or 0.0)
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


@dataclass
class ResultEnvelope:
    command: str
    config: dict
    payload: dict
    diagnostics: list = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION
    timestamp: str = field(default_factory=envelope_timestamp)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "timestamp": self.timestamp,
            "command": self.command,
            "config": to_jsonable(self.config),
            "payload": to_jsonable(self.payload),
            "diagnostics": to_jsonable(self.diagnostics),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ResultEnvelope":
        data = json.loads(text)
        return cls(
            command=data["command"],
            config=_decode(data["config"]),
            payload=_decode(data["payload"]),
            diagnostics=_decode(data["diagnostics"]),
            schema_version=data["schema_version"],
            timestamp=data["timestamp"],
        )


def write_envelope(path, envelope: ResultEnvelope) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(envelope.to_json())
        f.write("\n")
    logger.info(f"Wrote {envelope.command} envelope: {path}")
    return path


def read_envelope(path) -> ResultEnvelope:
    with open(path, "r", encoding="utf-8") as f:
        return ResultEnvelope.from_json(f.read())


def write_scan_csv(path, report) -> Path:
    """One row per grid point: lambda, miss (Abel-invariant connection value), normalized miss, classification."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SCAN_COLUMNS)
        for lam, raw, normalized, label in zip(report.lambdas, report.abel_invariant, report.miss, report.classifications):
            writer.writerow([repr(float(lam)), repr(float(raw)), repr(float(normalized)), label])
    return path


def write_profile_dat(path, profile, comment: str = "") -> Path:
    """gnuplot-ready columns: rho u u' (real parts, plus imaginary parts when complex)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    is_complex = np.iscomplexobj(profile.u) or np.iscomplexobj(profile.du)
    header = "# rho re_u im_u re_du im_du" if is_complex else "# rho u du"
    with open(path, "w", encoding="utf-8") as f:
        if comment:
            f.write(f"# {comment}\n")
        f.write(header + "\n")
        for rho, u, du in zip(profile.rho, profile.u, profile.du):
            if is_complex:
                f.write(f"{rho:.16e} {u.real:.16e} {u.imag:.16e} {du.real:.16e} {du.imag:.16e}\n")
            else:
                f.write(f"{rho:.16e} {float(u):.16e} {float(du):.16e}\n")
    return path


def read_profile_dat(path) -> np.ndarray:
    return np.loadtxt(path, comments="#", ndmin=2)
