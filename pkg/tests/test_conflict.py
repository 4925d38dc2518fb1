from __future__ import annotations

import pytest
from hypothesis import given

import oracles
from evidence_atlas.canonicalize import canonicalize, reconstruct
from evidence_atlas.conflict import (
    HeterogeneityConfig,
    detect_conflicts,
    detect_directional,
    detect_interval,
    dispersion,
    significant_direction,
)
from generators import claim, difference_buckets


def md(theta, ci, card, n=None):
    return claim(m_type="MD", scale="difference", theta=theta, ci=ci, card_id=card, n=n)


def test_significant_direction():
    assert significant_direction(md(0.2, (0.1, 0.4), "a")) == 1
    assert significant_direction(md(-0.3, (-0.545, -0.083), "a")) == -1
    assert significant_direction(md(0.0, (-0.1, 0.2), "a")) == 0
    assert significant_direction(md(0.0, None, "a")) == 0


def test_directional_examples():
    w = detect_directional([md(0.2, (0.1, 0.4), "a"), md(-0.2, (-0.4, -0.1), "b")])
    assert w.claims == ("a#0", "b#0")
    assert detect_directional([md(0.2, (0.1, 0.4), "a"), md(0.0, (-0.1, 0.2), "b")]) is None
    assert detect_directional([md(0.2, (0.1, 0.4), "a")]) is None


def test_interval_examples():
    w = detect_interval([md(-0.3, (-0.54, -0.08), "a"), md(0.2, (0.10, 0.40), "b")])
    assert w.claims == ("a#0", "b#0")
    assert w.statistic == pytest.approx(0.18)
    assert detect_interval([md(-0.3, (-0.54, -0.08), "a"), md(0.1, (-0.10, 0.30), "b")]) is None
    assert detect_interval([md(0.5, (0.0, 1.0), "a"), md(1.5, (1.0, 2.0), "b")]) is None


def test_dispersion_examples():
    d, w = dispersion([md(-0.5, None, "a"), md(0.5, None, "b")], HeterogeneityConfig())
    assert d == pytest.approx(0.25) and w == [0.5, 0.5]
    d, w = dispersion([md(0.0, None, "a", n=300), md(0.4, None, "b", n=100)], HeterogeneityConfig())
    assert w == [0.75, 0.25]
    assert d == pytest.approx(0.03)
    d, _ = dispersion([md(0.3, None, "a"), md(0.3, None, "b")], HeterogeneityConfig())
    assert d == 0.0


def test_uniform_weights_when_any_n_missing():
    _, w = dispersion([md(0.0, None, "a", n=300), md(0.4, None, "b")], HeterogeneityConfig())
    assert w == [0.5, 0.5]


def test_detect_conflicts_examples():
    ann = detect_conflicts([md(0.1, (0.05, 0.15), "a"), md(0.4, (0.3, 0.5), "b")])
    assert (ann.types, ann.severity) == (("interval",), "medium")
    ann = detect_conflicts([md(-0.5, None, "a"), md(0.5, None, "b")], HeterogeneityConfig(delta_het=0.1))
    assert "heterogeneity" in ann.types and ann.severity == "low"
    ann = detect_conflicts([md(0.1, (0.05, 0.15), "a")])
    assert (ann.types, ann.severity, ann.has_conflict) == ((), "none", False)
    ann = detect_conflicts([md(0.3, (0.1, 0.5), "a"), md(-0.3, (-0.5, -0.1), "b")])
    assert ann.types == ("directional", "interval") and ann.severity == "high"


def test_config_validation():
    with pytest.raises(ValueError):
        HeterogeneityConfig(delta_het=0)
    with pytest.raises(ValueError):
        HeterogeneityConfig(weight_rule="inverse_variance")


@given(difference_buckets())
def test_detector_matches_pairwise_oracle(bucket):
    ann = detect_conflicts(bucket)
    o = oracles.conflict_oracle(
        [c.theta for c in bucket], [c.ci for c in bucket], [c.provenance.n for c in bucket], [c.claim_id for c in bucket]
    )
    assert list(ann.types) == o["types"]
    by_type = {w.conflict_type: w for w in ann.witnesses}
    for kind in ("directional", "interval"):
        if o[kind]:
            assert by_type[kind].claims == o[kind][0]
    if "heterogeneity" in by_type:
        assert by_type["heterogeneity"].statistic == pytest.approx(float(o["D"]), abs=1e-12)


@given(difference_buckets(max_size=5), difference_buckets(max_size=1))
def test_pairwise_types_are_monotone(bucket, extra):
    before = set(detect_conflicts(bucket).types) - {"heterogeneity"}
    after = set(detect_conflicts(bucket + extra).types)
    assert before <= after


@given(difference_buckets())
def test_annotation_survives_round_trip(bucket):
    again = [canonicalize(reconstruct(c)) for c in bucket]
    assert detect_conflicts(again) == detect_conflicts(bucket)
