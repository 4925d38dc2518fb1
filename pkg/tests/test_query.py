from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from evidence_atlas.atlas import build_atlas
from evidence_atlas.bucketing import BucketKey, partition
from evidence_atlas.evidence_model import Duration
from evidence_atlas.query import (
    FLAGS,
    MISSINGNESS,
    AnswerObject,
    MediationAnswer,
    QueryConstraints,
    QuerySpec,
    match_key,
    q_cate,
    q_cf,
    q_do,
    q_joint,
    q_med,
    q_traj,
    result_to_jsonable,
    run_query,
)
from generators import claim


def md(x, y, theta, ci, card, **kw):
    return claim(x=x, y=y, m_type="MD", scale="difference", theta=theta, ci=ci, card_id=card, **kw)


def atlas(*claims):
    return build_atlas(partition(claims), build_config={"coverage": 0.95})


KEY = BucketKey("t2dm", "sglt2i", "mace", "fixed:6", "binary", "ratio")


def test_match_key():
    assert match_key(KEY, "sglt2i", "mace")
    assert not match_key(KEY, "sglt2i", "mace", QueryConstraints(tau="fixed:3"))
    assert match_key(KEY, "sglt2i", "mace", QueryConstraints(p_bucket="t2dm"))
    assert not match_key(KEY, "statin", "mace")


def test_do_answers_from_default_kernel():
    a = atlas(claim(x="dapagliflozin", y="hf", theta=0.73, ci=(0.60, 0.88), horizon=Duration(18, "month")))
    ans = q_do(a, QuerySpec("do", "dapagliflozin", "hf"))
    assert ans.flags == ("executable",)
    assert ans.theta_hat == pytest.approx(oracles.ln(0.73), rel=1e-14)
    assert round(ans.theta_hat, 4) == -0.3147
    assert ans.ci == pytest.approx((oracles.ln(0.60), oracles.ln(0.88)), rel=1e-14)
    assert ans.provenance.card_id == "card"
    assert ans.witness_keys == (a.edges[0].key_id,)


def test_do_missing_and_malformed():
    a = atlas(claim())
    assert q_do(a, QuerySpec("do", "x", "y")).flags == ("missing_edge",)
    assert q_do(a, QuerySpec("do", "sglt2i", None)).flags == ("missing_field",)


def test_do_propagates_conflict():
    a = atlas(md("d", "o", 0.1, (0.05, 0.15), "a"), md("d", "o", 0.4, (0.3, 0.5), "b"))
    ans = q_do(a, QuerySpec("do", "d", "o"))
    assert ans.flags == ("executable", "conflict")
    assert ans.conflict.types == ("interval",)


def test_multi_match_prefers_best_default():
    weak = claim(card_id="weak", grade="C", n=10, horizon=Duration(5, "year"))
    strong = claim(card_id="strong", grade="A", n=10_000)
    assert q_do(atlas(weak, strong), QuerySpec("do", "sglt2i", "mace")).provenance.card_id == "strong"


def test_multi_match_tie_goes_to_smaller_key():
    a1 = claim(card_id="same", horizon=Duration(5, "year"))
    a2 = claim(card_id="same", effect_index=0, horizon=Duration(12, "month"), pop="adults")
    ans = q_do(atlas(a1, a2), QuerySpec("do", "sglt2i", "mace"))
    assert ans.witness_keys[0].startswith("adults|")


def test_mediation_product_of_coefficients():
    a = atlas(md("x", "m", 0.4, (0.2, 0.6), "a"), md("m", "y", 0.5, (0.3, 0.7), "b"), md("x", "y", 0.6, (0.3, 0.9), "c"))
    res = q_med(a, QuerySpec("med", "x", "y", m_id="m"))
    z = oracles.z95()
    se = 0.2 / z
    se_nie = math.sqrt(0.5**2 * se**2 + 0.4**2 * se**2)
    assert res.nie.theta_hat == pytest.approx(0.2)
    assert res.nie.ci == pytest.approx((0.2 - z * se_nie, 0.2 + z * se_nie), rel=1e-12)
    assert res.nie.ci == pytest.approx((0.0719, 0.3281), abs=1e-4)
    assert res.nie.flags == ("executable", "assumption_required")
    assert res.te.theta_hat == 0.6
    se_te = 0.3 / z
    assert res.nde.theta_hat == pytest.approx(0.4)
    assert res.nde.ci == pytest.approx((0.4 - z * math.hypot(se_te, se_nie), 0.4 + z * math.hypot(se_te, se_nie)), rel=1e-12)


def test_mediation_missing_path():
    a = atlas(md("x", "m", 0.4, (0.2, 0.6), "a"))
    res = q_med(a, QuerySpec("med", "x", "y", m_id="m"))
    assert res.te.flags == res.nde.flags == res.nie.flags == ("missing_path",)


def test_mediation_without_direct_edge():
    a = atlas(md("x", "m", 0.4, (0.2, 0.6), "a"), md("m", "y", 0.5, (0.3, 0.7), "b"))
    res = q_med(a, QuerySpec("med", "x", "y", m_id="m"))
    assert res.te.flags == ("missing_edge",) and res.nde.flags == ("missing_edge",)
    assert res.nie.executable


def test_mediation_ratio_legs_are_not_numeric():
    a = atlas(claim(x="x", y="m", card_id="a"), claim(x="m", y="y", card_id="b"))
    res = q_med(a, QuerySpec("med", "x", "y", m_id="m"))
    assert res.nie.theta_hat is None
    assert res.nie.flags == ("mixed_mtype", "assumption_required")


def test_joint_quadrature():
    a = atlas(
        claim(x="x1", y="y", scale="log_ratio", theta=-0.3, ci=None, se=0.1, card_id="a"),
        claim(x="x2", y="y", scale="log_ratio", theta=-0.2, ci=None, se=0.1, card_id="b"),
    )
    ans = q_joint(a, QuerySpec("joint", "x1", "y", x2_id="x2"))
    half = oracles.z95() * math.sqrt(0.02)
    assert ans.theta_hat == pytest.approx(-0.5)
    assert ans.ci == pytest.approx((-0.5 - half, -0.5 + half), rel=1e-12)
    assert ans.ci == pytest.approx((-0.7772, -0.2228), abs=1e-4)
    assert ans.flags == ("executable", "assumption_required")
    assert ans.estimand.intervention.intervention_id == "x1+x2"


def test_joint_missing_and_mixed():
    a = atlas(claim(x="x1", y="y", card_id="a"), md("x3", "y", 0.1, (0.0, 0.2), "b"))
    assert q_joint(a, QuerySpec("joint", "x1", "y", x2_id="x2")).flags == ("missing_edge",)
    assert q_joint(a, QuerySpec("joint", "x1", "y", x2_id="x3")).flags == ("mixed_mtype",)
    assert q_joint(a, QuerySpec("joint", "x1", "y")).flags == ("missing_field",)


def test_counterfactual():
    a = atlas(claim())
    ok = q_cf(a, QuerySpec("cf", "sglt2i", "mace", z={"population": "t2dm"}))
    assert ok.flags == ("executable", "assumption_required")
    assert q_cf(a, QuerySpec("cf", "sglt2i", "mace")).flags == ("missing_field",)
    assert q_cf(a, QuerySpec("cf", "sglt2i", "mace", z={"age": "70"})).flags == ("missing_field",)
    assert q_cf(a, QuerySpec("cf", "sglt2i", "mace", z={"population": "ckd"})).flags == ("missing_edge",)


def test_cate():
    a = atlas(claim(pop="elderly", card_id="a"), claim(pop="diabetic", card_id="b"))
    assert q_cate(a, QuerySpec("cate", "sglt2i", "mace", z="elderly")).flags == ("executable",)
    assert q_cate(a, QuerySpec("cate", "sglt2i", "mace", z="young")).flags == ("no_subgroup_evidence",)
    assert q_cate(a, QuerySpec("cate", "sglt2i", "stroke", z="elderly")).flags == ("missing_edge",)
    assert q_cate(a, QuerySpec("cate", "sglt2i", "mace")).flags == ("missing_field",)


def test_trajectory():
    a = atlas(
        md("x", "y", 0.2, (0.1, 0.3), "a", horizon=Duration(12, "week")),
        md("x", "y", 0.25, (0.15, 0.35), "b", horizon=Duration(12, "month")),
    )
    res = q_traj(a, QuerySpec("traj", "x", "y", time_set=("fixed:4", "fixed:6")))
    assert [t for t, _ in res] == ["fixed:4", "fixed:6"]
    assert all(ans.flags == ("executable",) for _, ans in res)
    res = q_traj(a, QuerySpec("traj", "x", "y", time_set=("fixed:4", "fixed:7")))
    assert res[0][1].flags == ("executable", "insufficient_time_coverage")
    assert res[1][1].flags == ("missing_edge", "insufficient_time_coverage")
    assert q_traj(a, QuerySpec("traj", "x", "y"))[0][1].flags == ("missing_field",)


def test_trajectory_cross_time_conflict():
    a = atlas(
        md("x", "y", 0.2, (0.1, 0.3), "a", horizon=Duration(12, "week")),
        md("x", "y", -0.2, (-0.3, -0.1), "b", horizon=Duration(12, "month")),
    )
    res = q_traj(a, QuerySpec("traj", "x", "y", time_set=("fixed:4", "fixed:6")))
    for _, ans in res:
        assert ans.flags == ("executable", "conflict")
        assert len(ans.witness_keys) == 2


def test_unknown_kind():
    with pytest.raises(ValueError):
        run_query(atlas(claim()), QuerySpec("why", "a", "b"))


def test_machine_output_uses_answer_field_names():
    doc = result_to_jsonable(q_do(atlas(claim()), QuerySpec("do", "sglt2i", "mace")))
    assert set(doc) == {"estimand", "theta_hat", "ci", "provenance", "conflict", "flags", "witness_keys"}
    med = result_to_jsonable(MediationAnswer(AnswerObject(), AnswerObject(), AnswerObject()))
    assert set(med) == {"TE", "NDE", "NIE"}


SMALL = atlas(
    claim(card_id="a"),
    claim(card_id="b", pop="elderly"),
    md("x", "m", 0.4, (0.2, 0.6), "c"),
    md("m", "y", 0.5, (0.3, 0.7), "d"),
    md("x", "y", -0.5, (-0.7, -0.3), "e", horizon=Duration(12, "week")),
)
NAMES = st.sampled_from(["sglt2i", "mace", "x", "m", "y", "nope", None])


@given(
    st.sampled_from(["do", "med", "joint", "cf", "cate", "traj"]),
    NAMES,
    NAMES,
    NAMES,
    st.sampled_from([None, "t2dm", "elderly", {"population": "t2dm"}, {}]),
    st.lists(st.sampled_from(["fixed:4", "fixed:6", "unknown:-"]), max_size=3),
)
def test_answer_invariants(kind, x, y, other, z, times):
    spec = QuerySpec(kind, x, y, x2_id=other, m_id=other, z=z, time_set=tuple(times))
    res = run_query(SMALL, spec)
    assert result_to_jsonable(run_query(SMALL, spec)) == result_to_jsonable(res)
    if isinstance(res, AnswerObject):
        answers = [res]
    elif isinstance(res, MediationAnswer):
        answers = [res.te, res.nde, res.nie]
    else:
        answers = [a for _, a in res]
    for ans in answers:
        assert set(ans.flags) <= set(FLAGS)
        assert list(ans.flags) == [f for f in FLAGS if f in ans.flags]
        assert ans.executable or ans.theta_hat is None
        if ans.theta_hat is not None:
            assert ans.estimand is not None
        assert not (ans.executable and set(ans.flags) & set(MISSINGNESS))
        if ans.provenance is not None:
            assert ans.provenance.card_id in {"a", "b", "c", "d", "e"}
