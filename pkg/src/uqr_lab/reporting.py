"""Report records and deterministic CSV/JSON serialization.

CSV output is RFC-4180 with '.' decimals and 17-significant-digit floats
(lossless float64 round-trip).  Report files are written atomically and each
carries the SHA-256 digest of its resolved configuration, so a report is
reproducible bit-for-bit from digest plus seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AuditReport",
    "config_digest",
    "fmt_float",
    "write_csv",
    "write_json_atomic",
]


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def config_digest(config: dict) -> str:
    payload = json.dumps(_canonical(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class AuditReport:
    """Pass/fail record for one inequality or identity audit.

    For inequality audits, passed <=> lhs <= rhs + tolerance.
    """

    name: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool
    config_digest: str
    details: dict = field(default_factory=dict)
    artifacts: tuple = ()

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "config_digest": self.config_digest,
            "details": _canonical(self.details),
            "artifacts": list(self.artifacts),
        }


def fmt_float(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header: list[str], rows) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else fmt_float(v) for v in row])
    os.replace(tmp, path)


def write_json_atomic(path, payload: dict) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(_canonical(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
