"""Machine-readable run reports with deterministic rendering.

Every check carries a name, its parameters, the measured value, the
tolerance in force, and a pass flag.  Reports render to canonical JSON
(sorted keys, fixed indentation, no timestamps), so identical configs and
seeds produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional


@dataclass
class Check:
    name: str
    passed: bool
    value: Any = None
    tolerance: Any = None
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": canonical(self.value),
            "tolerance": canonical(self.tolerance),
            "params": canonical(self.params),
        }


@dataclass
class Report:
    command: str
    config: Dict[str, Any]
    graph_summary: Dict[str, Any]
    checks: List[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, value=None, tolerance=None, **params) -> None:
        self.checks.append(Check(name=name, passed=bool(passed), value=value, tolerance=tolerance, params=params))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": canonical(self.config),
            "graph": canonical(self.graph_summary),
            "checks": [c.to_dict() for c in sorted(self.checks, key=lambda c: c.name)],
            "passed": self.passed,
        }

    def render(self) -> str:
        return render_json(self.to_dict())


def canonical(obj):
    """Convert to JSON-encodable data with a stable, lossless-enough form."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = list(obj)
        if isinstance(obj, (set, frozenset)):
            items = sorted(items, key=repr)
        return [canonical(v) for v in items]
    if hasattr(obj, "to_dict"):
        return canonical(obj.to_dict())
    if hasattr(obj, "entries"):  # Degree
        return list(obj.entries)
    return repr(obj)


def render_json(data: dict) -> str:
    return json.dumps(data, sort_keys=True, indent=2, allow_nan=False) + "\n"
