from __future__ import annotations

import pytest
from hypothesis import given

from evidence_atlas.horizon import (
    AlignmentConfig,
    CanonicalHorizonClass,
    HorizonError,
    align,
    extended_align,
    extract_duration,
    fuzzy_bin,
    raw_horizon_token,
)
from evidence_atlas.evidence_model import TTE, Duration, Interval, Missing
from generators import raw_horizons

CFG = AlignmentConfig()


def test_extract_duration_examples():
    assert extract_duration(Duration(12, "month"), CFG) == pytest.approx(12 * 30.4375)
    assert extract_duration(Duration(52, "week"), CFG) == 364.0
    assert extract_duration(Missing("short-term"), CFG) is None
    assert extract_duration(TTE("mace"), CFG) is None
    assert extract_duration(Interval(3, "month"), CFG) == pytest.approx(91.3125)


def test_unknown_unit_is_an_error():
    with pytest.raises(HorizonError):
        extract_duration(Duration(1, "decade"), CFG)


def test_fuzzy_bin_examples():
    j, fuzzy, rel = fuzzy_bin(364.0, CFG)
    assert (j, fuzzy) == (6, True)
    assert rel == pytest.approx(abs(364 - 365.25) / 365.25)
    assert round(rel, 4) == 0.0034
    assert fuzzy_bin(365.25, CFG) == (6, True, 0.0)
    j, fuzzy, rel = fuzzy_bin(112.0, CFG)
    assert (j, fuzzy) == (4, False)
    assert rel == pytest.approx(28 / 84)


def test_fuzzy_tie_goes_to_smaller_index():
    cfg = AlignmentConfig(bin_edges=(10.0,), representatives=(5.0, 15.0), rho=0.5)
    # relative distance 0.5 to both representatives
    assert fuzzy_bin(7.5, cfg)[0] == 1


def test_align_examples():
    assert align(Duration(12, "month"), CFG)[0] == CanonicalHorizonClass("fixed", 6)
    cls, rec = align(Duration(6, "hour"), CFG)
    assert cls == CanonicalHorizonClass("acute", 1)
    assert rec.fuzzy_used is False and rec.relative_diff == pytest.approx(0.75)
    cls, rec = align(TTE("mace", Duration(2.3, "year")), CFG)
    assert cls == CanonicalHorizonClass("tte", 7)
    assert rec.extracted_days == pytest.approx(840.075)
    assert align(Missing("x"), CFG)[0] == CanonicalHorizonClass("unknown")
    assert align(TTE("mace"), CFG)[0] == CanonicalHorizonClass("tte")


def test_acute_threshold_is_inclusive():
    assert align(Duration(7, "day"), CFG)[0].h_sem == "acute"
    assert align(Duration(7.01, "day"), CFG)[0].h_sem == "fixed"


def test_equivalent_reports_share_a_class():
    classes = {extended_align(h, CFG) for h in (Duration(12, "month"), Duration(1, "year"), Duration(52, "week"))}
    assert classes == {CanonicalHorizonClass("fixed", 6)}
    assert extended_align(Duration(30, "day"), CFG) != extended_align(Duration(10, "year"), CFG)


def test_extended_align_is_stable_on_classes():
    for c in (CanonicalHorizonClass("fixed", 6), CanonicalHorizonClass("unknown")):
        assert extended_align(c, CFG) is c


def test_class_encoding_round_trip():
    for c in (CanonicalHorizonClass("fixed", 6), CanonicalHorizonClass("unknown"), CanonicalHorizonClass("tte")):
        assert CanonicalHorizonClass.decode(c.encode()) == c
    assert CanonicalHorizonClass("unknown").encode() == "unknown:-"
    with pytest.raises(HorizonError):
        CanonicalHorizonClass.decode("soon:1")


def test_config_validation():
    with pytest.raises(HorizonError):
        AlignmentConfig(representatives=(1.0,))
    with pytest.raises(HorizonError):
        AlignmentConfig(rho=1.0)
    with pytest.raises(HorizonError):
        AlignmentConfig(representatives=(1.0, 7.0, 30.4375, 84.0, 182.625, 365.25, 730.5, 1826.25, 1000.0))
    assert AlignmentConfig.from_dict(CFG.to_dict()) == CFG


def test_raw_tokens():
    assert raw_horizon_token(Duration(12, "month")) == "duration:12month"
    assert raw_horizon_token(TTE("mace", Duration(2.3, "year"))) == "tte:mace/2.3year"
    assert raw_horizon_token(Missing("x")) == "missing"


@given(raw_horizons())
def test_alignment_properties(h):
    once = extended_align(h, CFG)
    assert extended_align(once, CFG) == once
    assert align(h, CFG) == align(h, CFG)
    cls, rec = align(h, CFG)
    if cls.h_sem == "unknown":
        assert cls.h_bin is None
    if cls.h_bin is not None:
        assert 1 <= cls.h_bin <= CFG.n_bins
    if rec.extracted_days is not None:
        assert rec.matched_bin is not None


def test_fuzzy_and_exact_agree_on_representatives():
    for j, rep in enumerate(CFG.representatives, start=1):
        assert fuzzy_bin(rep, CFG)[0] == CFG.exact_bin(rep) == j
