"""Verification outcomes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"

SCHEMA_VERSION = 1


@dataclass
class Report:
    """Result of one check: PASS, or FAIL with witnesses pinpointing the violation.

    ``details`` holds counts and parameters used (radii, bounds); witnesses are
    plain JSON-able dicts.
    """

    check: str
    status: str
    details: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "report",
            "check": self.check,
            "status": self.status,
            "details": self.details,
            "witnesses": self.witnesses,
        }

    @classmethod
    def from_json(cls, data: dict) -> "Report":
        return cls(data["check"], data["status"], data.get("details", {}), data.get("witnesses", []))


def dumps(obj: Any) -> str:
    """Canonical JSON text; sorted keys so identical runs give identical bytes."""
    return json.dumps(obj, sort_keys=True, indent=1)
