from __future__ import annotations

from dataclasses import replace

import pytest
from hypothesis import given

from evidence_atlas.bucketing import bucket_key
from evidence_atlas.canonicalize import canonicalize
from evidence_atlas.evidence_model import (
    Duration,
    InterventionContrast,
    Missing,
    measure_vocabulary,
    normalize_token,
    validate_evidence_object,
)
from generators import evidence, evidence_objects


def rules(obj):
    return [v.rule for v in validate_evidence_object(obj)]


def test_valid_hr_claim_has_no_violations():
    assert validate_evidence_object(evidence()) == []


def test_negative_theta_on_ratio_scale():
    obj = evidence(theta=-0.3, ci=None)
    assert rules(obj) == ["theta must be > 0 on ratio scale"]


def test_per_unit_without_unit():
    obj = evidence()
    obj = replace(obj, estimand=replace(obj.estimand, intervention=InterventionContrast("sglt2i", "per_unit", delta=1.0)))
    assert rules(obj) == ["per_unit requires unit"]


@pytest.mark.parametrize(
    "kw, field",
    [
        (dict(ci=(0.9, 0.5)), "claim.ci"),
        (dict(grade="D"), "provenance.grade"),
        (dict(adjustment="heavy"), "provenance.adjustment"),
        (dict(n=0), "provenance.n"),
        (dict(m_type="MD"), "measure.reported_scale"),
        (dict(m_type="XYZ"), "measure.m_type"),
        (dict(horizon=Duration(-1, "day")), "horizon.value"),
        (dict(horizon=Duration(3, "fortnight")), "horizon.unit"),
        (dict(horizon=Missing("")), "horizon.reason"),
        (dict(pop="Type 2"), "population.p_bucket"),
        (dict(se=-1.0), "claim.se"),
        (dict(p=1.5), "claim.p_value"),
    ],
)
def test_each_invariant_is_checked(kw, field):
    assert field in [v.field for v in validate_evidence_object(evidence(**kw))]


def test_binary_contrast_requires_arms():
    obj = evidence()
    iv = InterventionContrast("sglt2i", "binary", x0="placebo")
    obj = replace(obj, estimand=replace(obj.estimand, intervention=iv))
    assert [v.field for v in validate_evidence_object(obj)] == ["intervention.x0/x1"]


def test_binding_must_share_family():
    obj = evidence(m_type="coef_cox", scale="coefficient", theta=-0.3, ci=(-0.5, -0.1), binding="MD")
    assert [v.field for v in validate_evidence_object(obj)] == ["measure.binding"]


def test_normalize_token():
    assert normalize_token("  Type 2   Diabetes ") == "type-2-diabetes"
    assert normalize_token("t2dm") == "t2dm"


def test_measure_vocabulary_extension():
    vocab = measure_vocabulary({"IRR": "ratio"})
    assert vocab["IRR"] == "ratio" and vocab["HR"] == "ratio"
    with pytest.raises(ValueError):
        measure_vocabulary({"X": "other"})


def test_claim_id():
    assert evidence(card_id="c9", effect_index=2).provenance.claim_id == "c9#2"


@given(evidence_objects())
def test_key_ignores_setting_uncertainty_and_meta(e):
    base = bucket_key(canonicalize(e))
    pop = replace(e.estimand.population, p_setting={"country": "nz"})
    claim = replace(e.claim, se=0.5, p_value=0.2)
    prov = replace(e.provenance, meta={"anything": [1, 2]})
    mutated = replace(e, estimand=replace(e.estimand, population=pop), claim=claim, provenance=prov)
    assert bucket_key(canonicalize(mutated)) == base
