from __future__ import annotations

import json

import pytest
from hypothesis import given

from evidence_atlas.canonicalize import CanonicalClaim, canonicalize
from evidence_atlas.evidence_model import TTE, Duration, EvidenceObject, Interval, Missing
from evidence_atlas.horizon import CanonicalHorizonClass
from evidence_atlas.serialize import decode_horizon, dumps, from_jsonable, to_jsonable
from generators import evidence_objects


@pytest.mark.parametrize(
    "h",
    [
        Duration(12.0, "month"),
        Interval(2.0, 3.0, "year"),
        TTE("mace", Duration(2.3, "year")),
        TTE("death", None),
        Missing("not reported"),
    ],
)
def test_horizons_carry_kind_tags(h):
    doc = to_jsonable(h)
    assert "kind" in doc
    assert decode_horizon(json.loads(json.dumps(doc))) == h


def test_rejects_untagged_horizon():
    with pytest.raises(ValueError):
        decode_horizon({"value": 1, "unit": "day"})


@given(evidence_objects())
def test_evidence_round_trip(e):
    assert from_jsonable(EvidenceObject, json.loads(dumps(e))) == e


@given(evidence_objects())
def test_canonical_claim_round_trip(e):
    cc = canonicalize(e)
    back = from_jsonable(CanonicalClaim, json.loads(dumps(cc)))
    assert back == cc
    assert isinstance(back.estimand.horizon, CanonicalHorizonClass)
    assert dumps(back) == dumps(cc)


def test_dumps_rejects_nan():
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})
