import os
from fractions import Fraction
from pathlib import Path

import pytest

import qvnet

SCENARIOS = Path(os.environ.get("QVNET_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))


def test_load_summary():
    s = qvnet.load(SCENARIOS / "chain.json")
    assert s["nodes"] == 3
    assert s["qvnets"] == ["all"]


def test_load_reports_every_problem():
    bad = {
        "duration": 10,
        "graph": {"nodes": ["A", "B"], "links": [{"a": "A", "b": "Q", "rate": -1}]},
        "trunks": [],
        "qvnets": [],
        "workload": [],
    }
    with pytest.raises(qvnet.ScenarioError) as info:
        qvnet.load(bad)
    assert len(info.value.problems) >= 2
    assert isinstance(info.value, ValueError)


def test_split_trunk():
    rates, over = qvnet.split_trunk(8, {"red": "1/2", "blue": "1/4", "violet": "1/8", "black": "1/8"})
    assert rates == {"red": 4, "blue": 2, "violet": 1, "black": 1}
    assert not over
    assert qvnet.split_trunk(1, {"a": "3/4", "b": "1/2"})[1]


def test_resolve_contention():
    got = qvnet.resolve_contention(8, {"red": "1/2", "blue": "1/4", "violet": "1/8", "black": "1/8"},
                                   {"red": 10, "blue": 10, "violet": 10, "black": 10}, 8)
    assert got == {"red": 4, "blue": 2, "violet": 1, "black": 1}


def test_solve_chain():
    assert qvnet.solve(SCENARIOS / "chain.json", "all")["objective"] == 1
    assert qvnet.solve(SCENARIOS / "chain.json", "all", behavior="broadcast", hub="B")["objective"] == 2
    with pytest.raises(qvnet.QVNetError) as info:
        qvnet.solve(SCENARIOS / "chain.json", "missing")
    assert info.value.code == "QVNetNotFound"


def test_run_is_deterministic():
    a = qvnet.run(SCENARIOS / "four_colour_trunk.json")
    assert a.splitlines()[0] == qvnet.METRICS_CSV_HEADER
    assert a == qvnet.run(SCENARIOS / "four_colour_trunk.json")
    report = qvnet.run(SCENARIOS / "four_colour_trunk.json", format="json", seed=9)
    assert report["seed"] == 9
    totals = {}
    for row in report["rows"]:
        totals[row["qvnet"]] = totals.get(row["qvnet"], 0) + row["granted"]
    assert totals == {"red": 800, "blue": 400, "violet": 200, "black": 200}


def test_rebalance():
    assert qvnet.rebalance({"x": "1/2", "y": "1/2"}, {"x": 3, "y": 1}) == {"x": Fraction(3, 4), "y": Fraction(1, 4)}
    capped = qvnet.rebalance({"x": "1/2", "y": "1/2"}, {"x": 9, "y": 1}, {"x": (0, "1/2")})
    assert capped == {"x": Fraction(1, 2), "y": Fraction(1, 2)}
