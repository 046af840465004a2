import math
import os
import pathlib

import pytest

import pairscore as ps

FIXTURES = pathlib.Path(os.environ.get("PAIRSCORE_FIXTURE_DIR", pathlib.Path(__file__).parent.parent / "fixtures"))


def test_formulas():
    assert ps.normalize_slider(0) == -1.0
    assert ps.normalize_slider(50) == 0.0
    assert ps.normalize_slider(100) == 1.0
    assert ps.comparison_weight(3, 3.0) == 0.5
    assert ps.comparison_weight(0) == 0.0
    assert ps.confidence_factor(0) == 0.0
    assert ps.bbt_loss(0.0, 1.0) == pytest.approx(math.log(2.0))
    with pytest.raises(ps.ValidationError):
        ps.normalize_slider(101)
    assert len(ps.criteria()) == 10
    assert ps.criteria()[0] == (1, "Should be largely recommended")


def test_fit_two_entities():
    out = ps.fit([("ann", "a", "b", 1.0, 1.0)])
    g = out["global_scores"]
    assert out["diagnostics"]["converged"]
    assert g["b"] > 0 > g["a"]  # r = +1 prefers entity_b
    assert g["a"] == pytest.approx(-g["b"], abs=1e-9)
    assert set(out["individual_scores"]["ann"]) == {"a", "b"}
    assert out["comparison_counts"] == {"a": 1, "b": 1}


def test_fit_nonverified_against_frozen_globals():
    theta, diag = ps.fit_nonverified([("a", "b", -1.0, 1.0)], {"a": 0.0, "b": 0.0})
    assert diag["converged"]
    assert theta["a"] > theta["b"]


def test_ranking():
    scores = {"x": [1.0] + [0.0] * 9, "y": [2.0] + [0.0] * 9, "z": [0.0, 5.0] + [0.0] * 8}
    assert [e for e, _ in ps.weighted_rank(scores, "q1:1")] == ["y", "x", "z"]
    assert [e for e, _ in ps.weighted_rank(scores, "q2:1")] == ["z", "x", "y"]
    assert ps.weighted_rank(scores, "q1:1") == ps.weighted_rank(scores, [1.0] + [0.0] * 9)
    assert ps.pareto_rank(scores) == {"x": 1, "y": 0, "z": 0}
    corr = ps.correlations(scores)
    assert corr[0][0] == pytest.approx(1.0)
    assert corr[2][2] is None


def test_trust():
    assert ps.verify_email_domain("a@EPFL.ch", ["epfl.ch"])
    assert not ps.verify_email_domain("a@gmail.com", ["epfl.ch"])
    out = ps.recompute_certifications({"v1": (True, []), "v2": (True, []), "u": (False, ["v1", "v2"]), "w": (False, ["u"])})
    assert out["u"] == (True, 0.5)
    assert out["w"] == (False, 0.0)


def test_csv_round_trip():
    text = (FIXTURES / "comparisons.csv").read_text()
    rows, rejected = ps.read_public_csv(text)
    assert rejected == []
    assert len(rows) == 112
    assert ps.write_public_csv(rows) == text
    assert ps.week_monday(1709208000) == "2024-02-26"
    _, bad = ps.read_public_csv((FIXTURES / "bad_rows.csv").read_text())
    assert [line for line, _ in bad] == [3, 5]


def test_fit_public_csv():
    import json

    snap = json.loads(ps.fit_public_csv((FIXTURES / "comparisons.csv").read_text()))
    assert len(snap["criteria"]) == 10
    assert all(b["diagnostics"]["converged"] for b in snap["criteria"])
