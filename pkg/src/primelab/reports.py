"""Machine-readable experiment reports.

A report separates a deterministic record (config echo, results, checks,
tool provenance) from a non-hashed footer holding the timestamp and the
record's SHA-256.  Two runs with the same config and seed produce
byte-identical records; only footers differ.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

TOOL_NAME = "primelab"
TOOL_VERSION = "0.1.0"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "threshold": self.threshold,
        }


@dataclass
class Report:
    config: dict[str, Any]
    results: dict[str, Any]
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def record(self) -> dict[str, Any]:
        return {
            "config": self.config,
            "results": self.results,
            "checks": [c.to_dict() for c in self.checks],
            "provenance": {"tool": TOOL_NAME, "version": TOOL_VERSION},
        }

    def record_bytes(self) -> bytes:
        return json.dumps(
            self.record(), sort_keys=True, separators=(",", ":")
        ).encode("utf-8")

    def to_document(self) -> dict[str, Any]:
        rec = self.record()
        return {
            "record": rec,
            "footer": {
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "record_sha256": hashlib.sha256(self.record_bytes()).hexdigest(),
            },
        }

    def write(self, path: "str | Path") -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_document(), sort_keys=True, indent=2))
        return path


def record_bytes_of(document: dict[str, Any]) -> bytes:
    """Canonical bytes of a loaded report's record subtree."""
    return json.dumps(
        document["record"], sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


def load_report(path: "str | Path") -> dict[str, Any]:
    """Load a report and re-validate its integrity hash and config echo."""
    doc = json.loads(Path(path).read_text())
    digest = hashlib.sha256(record_bytes_of(doc)).hexdigest()
    if digest != doc["footer"]["record_sha256"]:
        raise ValueError(f"report {path} failed its integrity hash")
    cfg = doc["record"]["config"]
    for key in ("experiment", "params", "seed"):
        if key not in cfg:
            raise ValueError(f"report {path} config missing key {key!r}")
    return doc


def write_csv(path: "str | Path", header: list[str], rows: list[tuple]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path
