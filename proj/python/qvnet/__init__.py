"""Python front end for the qvnet simulator.

Scenarios may be given as a path or as JSON text. Rationals travel as
strings across the C++ boundary and come back as fractions.Fraction.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Mapping, Optional, Tuple, Union

from . import _qvnet
from ._qvnet import METRICS_CSV_HEADER, QVNetError, ScenarioError

__all__ = [
    "METRICS_CSV_HEADER",
    "QVNetError",
    "ScenarioError",
    "load",
    "run",
    "solve",
    "split_trunk",
    "resolve_contention",
    "rebalance",
]

Scenario = Union[str, os.PathLike, dict]
Number = Union[Fraction, int, str]


def _text(scenario: Scenario) -> str:
    if isinstance(scenario, dict):
        return json.dumps(scenario)
    if isinstance(scenario, os.PathLike) or not str(scenario).lstrip().startswith("{"):
        with open(scenario, encoding="utf-8") as f:
            return f.read()
    return str(scenario)


def _str(x: Number) -> str:
    return str(Fraction(x)) if not isinstance(x, str) else x


def _strs(m: Mapping[str, Number]) -> dict:
    return {k: _str(v) for k, v in m.items()}


def _fracs(m: Mapping[str, str]) -> dict:
    return {k: Fraction(v) for k, v in m.items()}


def load(scenario: Scenario) -> dict:
    """Validate a scenario and return a short summary. Raises ScenarioError
    whose ``problems`` attribute lists every problem found."""
    return _qvnet.load(_text(scenario))


def run(scenario: Scenario, format: str = "csv", seed: Optional[int] = None):
    """Simulate; returns the CSV text, or the parsed JSON report."""
    out = _qvnet.run(_text(scenario), format, seed)
    return json.loads(out) if format == "json" else out


def solve(
    scenario: Scenario,
    qvnet: str,
    behavior: Optional[str] = None,
    hub: Optional[str] = None,
    pair: Optional[Tuple[str, str]] = None,
    max_hops: int = 0,
) -> dict:
    """Optimal allocation for one QVNet, optionally overriding its behavior."""
    doc = json.loads(_qvnet.solve(_text(scenario), qvnet, behavior, hub, pair, max_hops))
    doc["objective"] = Fraction(doc["objective"])
    return doc


def split_trunk(rate: Number, quotas: Mapping[str, Number]) -> Tuple[dict, bool]:
    """Per-sub-connection QVLink rates and whether the quotas oversubscribe."""
    rates, over = _qvnet.split_trunk(_str(rate), _strs(quotas))
    return _fracs(rates), over


def resolve_contention(
    rate: Number, quotas: Mapping[str, Number], demands: Mapping[str, int], available: int
) -> dict:
    """Whole-block shares of ``available`` for competing demands."""
    return _qvnet.resolve_contention(_str(rate), _strs(quotas), dict(demands), available)


def rebalance(
    quotas: Mapping[str, Number],
    demand: Mapping[str, Number],
    bounds: Optional[Mapping[str, Tuple[Number, Number]]] = None,
    snap: bool = False,
) -> dict:
    """Demand-proportional quotas clamped to per-id (floor, ceiling)."""
    b = {k: (_str(lo), _str(hi)) for k, (lo, hi) in (bounds or {}).items()}
    return _fracs(_qvnet.rebalance(_strs(quotas), _strs(demand), b, snap))
