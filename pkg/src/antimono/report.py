"""Outcome records shared by the structural predicates and axiom checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

import numpy as np

PASS = "pass"
VIOLATED = "violated"


def jsonable(obj):
    """Convert numpy / Fraction containers into plain JSON values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return float(obj)
    return obj


@dataclass
class PropertyReport:
    """Result of a property check.

    ``verdict`` is ``"pass"`` (no violation within the search budget) or
    ``"violated"``, in which case ``witness`` holds the offending inputs, the
    two compared quantities and the violation magnitude.  ``worst`` is filled
    only by full scans and holds the largest violation seen.
    """

    check: str
    verdict: str
    tolerance: float
    witness: Optional[dict] = None
    samples_checked: int = 0
    samples_skipped: int = 0
    seed: Optional[int] = None
    mode: Optional[str] = None
    worst: Optional[dict] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in (PASS, VIOLATED):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == VIOLATED and self.witness is None:
            raise ValueError("a violated report needs a witness")

    @property
    def passed(self):
        return self.verdict == PASS

    def __bool__(self):
        return self.passed

    def to_dict(self):
        out = {
            "check": self.check,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "samples_checked": self.samples_checked,
            "samples_skipped": self.samples_skipped,
        }
        if self.mode is not None:
            out["mode"] = self.mode
        if self.seed is not None:
            out["seed"] = self.seed
        if self.witness is not None:
            out["witness"] = self.witness
        if self.worst is not None:
            out["worst"] = self.worst
        if self.details:
            out["details"] = self.details
        return jsonable(out)

    def to_json(self, **kw):
        kw.setdefault("indent", 2)
        return json.dumps(self.to_dict(), **kw)
