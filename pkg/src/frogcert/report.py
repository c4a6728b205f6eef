"""Run reports and their canonical JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .interval import Interval

__all__ = ["ReportError", "RunReport", "canonical", "dumps", "emit_report"]


class ReportError(ValueError):
    pass


@dataclass
class RunReport:
    command: str
    config: dict
    results: dict
    verdict: bool
    wall_time: float = field(default=0.0, compare=False)

    def as_dict(self, timing: bool = False) -> dict:
        d = {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "verdict": "pass" if self.verdict else "fail",
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d


def canonical(obj, where: str = "$"):
    """Plain JSON data: rationals become "p/q", intervals [lo, hi]; NaN/inf rejected."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            raise ReportError(f"non-finite number at {where}")
        return v
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Interval):
        return [canonical(obj.lo, where + ".lo"), canonical(obj.hi, where + ".hi")]
    if isinstance(obj, np.ndarray):
        return [canonical(v, f"{where}[{i}]") for i, v in enumerate(obj.tolist())]
    if isinstance(obj, dict):
        return {str(k): canonical(v, f"{where}.{k}") for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v, f"{where}[{i}]") for i, v in enumerate(obj)]
    if hasattr(obj, "as_dict"):
        return canonical(obj.as_dict(), where)
    raise ReportError(f"cannot serialize {type(obj).__name__} at {where}")


def dumps(report: RunReport, timing: bool = False) -> str:
    data = canonical(report.as_dict(timing))
    return json.dumps(data, sort_keys=True, indent=1, allow_nan=False) + "\n"


def emit_report(report: RunReport, path, timing: bool = False) -> None:
    """Write the canonical JSON report; the whole document is built before the file is opened."""
    text = dumps(report, timing)
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
