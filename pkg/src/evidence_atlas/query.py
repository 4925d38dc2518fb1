"""Six typed queries over an atlas.

Every query returns answer objects whose `flags` say whether a number could
be produced and, if not, why. Non-executable answers are ordinary data.
Composite answers (mediation, joint) combine leg estimates on the canonical
scale and always carry `assumption_required`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Optional, Sequence, Union

from .atlas import Atlas, AtlasEdge
from .bucketing import BucketKey
from .canonicalize import CanonicalEstimand, CanonicalMeasure, z_for_coverage
from .conflict import ConflictAnnotation
from .evidence_model import Provenance, normalize_token
from .serialize import to_jsonable

FLAGS = (
    "executable",
    "missing_edge",
    "missing_path",
    "missing_field",
    "mixed_mtype",
    "heterogeneity",
    "conflict",
    "assumption_required",
    "no_subgroup_evidence",
    "insufficient_time_coverage",
)
MISSINGNESS = ("missing_edge", "missing_path", "missing_field")
QUERY_KINDS = ("do", "med", "joint", "cf", "cate", "traj")


@dataclass(frozen=True)
class QueryConstraints:
    p_bucket: Optional[str] = None
    c_type: Optional[str] = None
    tau: Optional[str] = None
    m_family: Optional[str] = None


@dataclass(frozen=True)
class QuerySpec:
    kind: str
    x_id: Optional[str] = None
    y_id: Optional[str] = None
    x2_id: Optional[str] = None
    m_id: Optional[str] = None
    constraints: QueryConstraints = field(default_factory=QueryConstraints)
    z: Any = None  # subgroup token (cate) or individual-context map (cf)
    time_set: tuple[str, ...] = ()


@dataclass(frozen=True)
class AnswerObject:
    estimand: Optional[CanonicalEstimand] = None
    theta_hat: Optional[float] = None
    ci: Optional[tuple[float, float]] = None
    provenance: Optional[Provenance] = None
    conflict: Optional[ConflictAnnotation] = None
    flags: tuple[str, ...] = ()
    witness_keys: tuple[str, ...] = ()

    @property
    def executable(self) -> bool:
        return "executable" in self.flags


@dataclass(frozen=True)
class MediationAnswer:
    te: AnswerObject
    nde: AnswerObject
    nie: AnswerObject


TrajectoryAnswer = list[tuple[str, AnswerObject]]
QueryResult = Union[AnswerObject, MediationAnswer, TrajectoryAnswer]


def _flags(*groups: Sequence[str]) -> tuple[str, ...]:
    out = set()
    for g in groups:
        out.update(g)
    return tuple(f for f in FLAGS if f in out)


def _flagged(*flags: str) -> AnswerObject:
    return AnswerObject(flags=_flags(flags))


def match_key(
    key: BucketKey, x_id: str, y_id: str, constraints: Optional[QueryConstraints] = None
) -> bool:
    c = constraints or QueryConstraints()
    if key.x_id != x_id or key.y_id != y_id:
        return False
    for want, have in (
        (c.p_bucket, key.p_bucket),
        (c.c_type, key.c_type),
        (c.tau, key.tau),
        (c.m_family, key.m_family),
    ):
        if want is not None and want != have:
            return False
    return True


def matching_edges(a: Atlas, x_id: str, y_id: str, constraints: Optional[QueryConstraints] = None) -> list[AtlasEdge]:
    return [e for e in a.edges if e.claims and match_key(e.key, x_id, y_id, constraints)]


def resolve_edge(a: Atlas, x_id: str, y_id: str, constraints: Optional[QueryConstraints] = None) -> Optional[AtlasEdge]:
    """Matching edge whose default kernel ranks highest; equal ranks go to the smaller key."""
    edges = sorted(matching_edges(a, x_id, y_id, constraints), key=lambda e: e.key_id)
    if not edges:
        return None
    return max(edges, key=lambda e: e.default_quality.rank())


def answer_from_edge(edge: AtlasEdge, *extra: str) -> AnswerObject:
    k = edge.default
    return AnswerObject(
        estimand=k.estimand,
        theta_hat=k.theta,
        ci=k.ci,
        provenance=k.provenance,
        conflict=edge.conflict,
        flags=_flags(("executable",), edge.flags, extra),
        witness_keys=(edge.key_id,),
    )


def _coverage(a: Atlas) -> float:
    return float(a.build_config.get("coverage", 0.95))


def _se_from_ci(ci: Optional[tuple[float, float]], coverage: float) -> Optional[float]:
    if ci is None:
        return None
    return (ci[1] - ci[0]) / (2 * z_for_coverage(coverage))


def _ci(theta: float, se: Optional[float], coverage: float) -> Optional[tuple[float, float]]:
    if se is None:
        return None
    half = z_for_coverage(coverage) * se
    return (theta - half, theta + half)


def _disagreement(*edges: AtlasEdge) -> tuple[str, ...]:
    return tuple(f for e in edges for f in e.flags if f in ("conflict", "heterogeneity"))


def _endpoints(*names: Optional[str]) -> bool:
    return all(isinstance(n, str) and n for n in names)


def q_do(a: Atlas, q: QuerySpec) -> AnswerObject:
    if not _endpoints(q.x_id, q.y_id):
        return _flagged("missing_field")
    edge = resolve_edge(a, q.x_id, q.y_id, q.constraints)  # type: ignore[arg-type]
    if edge is None:
        return _flagged("missing_edge")
    return answer_from_edge(edge)


def q_med(a: Atlas, q: QuerySpec) -> MediationAnswer:
    if not _endpoints(q.x_id, q.m_id, q.y_id):
        bad = _flagged("missing_field")
        return MediationAnswer(bad, bad, bad)
    leg1 = resolve_edge(a, q.x_id, q.m_id, q.constraints)  # type: ignore[arg-type]
    leg2 = resolve_edge(a, q.m_id, q.y_id, q.constraints)  # type: ignore[arg-type]
    if leg1 is None or leg2 is None:
        bad = _flagged("missing_path")
        return MediationAnswer(bad, bad, bad)

    cov = _coverage(a)
    direct = resolve_edge(a, q.x_id, q.y_id, q.constraints)  # type: ignore[arg-type]
    te = answer_from_edge(direct) if direct is not None else _flagged("missing_edge")

    k1, k2 = leg1.default, leg2.default
    legs_keys = (leg1.key_id, leg2.key_id)
    if k1.estimand.measure.m_family != "difference" or k2.estimand.measure.m_family != "difference":
        nie = AnswerObject(flags=_flags(("assumption_required", "mixed_mtype")), witness_keys=legs_keys)
    else:
        theta = k1.theta * k2.theta
        se1, se2 = _se_from_ci(k1.ci, cov), _se_from_ci(k2.ci, cov)
        se = None if se1 is None or se2 is None else math.sqrt(k2.theta**2 * se1**2 + k1.theta**2 * se2**2)
        m_type = f"{k1.estimand.measure.m_type}*{k2.estimand.measure.m_type}"
        est = CanonicalEstimand(
            k1.estimand.population,
            k1.estimand.intervention,
            k2.estimand.outcome,
            k2.estimand.horizon,
            CanonicalMeasure("difference", m_type, "identity"),
        )
        nie = AnswerObject(
            estimand=est,
            theta_hat=theta,
            ci=_ci(theta, se, cov),
            flags=_flags(("executable", "assumption_required"), _disagreement(leg1, leg2)),
            witness_keys=legs_keys,
        )

    if direct is None:
        nde = _flagged("missing_edge")
    elif not nie.executable or te.estimand is None or te.estimand.measure.m_family != "difference":
        nde = AnswerObject(flags=_flags(("assumption_required", "mixed_mtype")), witness_keys=(direct.key_id,) + legs_keys)
    else:
        assert te.theta_hat is not None and nie.theta_hat is not None
        theta = te.theta_hat - nie.theta_hat
        se_te, se_nie = _se_from_ci(te.ci, cov), _se_from_ci(nie.ci, cov)
        se = None if se_te is None or se_nie is None else math.hypot(se_te, se_nie)
        est = replace(te.estimand, measure=CanonicalMeasure("difference", "TE-NIE", "identity"))
        nde = AnswerObject(
            estimand=est,
            theta_hat=theta,
            ci=_ci(theta, se, cov),
            flags=_flags(("executable", "assumption_required"), _disagreement(direct, leg1, leg2)),
            witness_keys=(direct.key_id,) + legs_keys,
        )
    return MediationAnswer(te, nde, nie)


def q_joint(a: Atlas, q: QuerySpec) -> AnswerObject:
    if not _endpoints(q.x_id, q.x2_id, q.y_id):
        return _flagged("missing_field")
    leg1 = resolve_edge(a, q.x_id, q.y_id, q.constraints)  # type: ignore[arg-type]
    leg2 = resolve_edge(a, q.x2_id, q.y_id, q.constraints)  # type: ignore[arg-type]
    if leg1 is None or leg2 is None:
        return _flagged("missing_edge")
    k1, k2 = leg1.default, leg2.default
    keys = (leg1.key_id, leg2.key_id)
    fam = k1.estimand.measure.m_family
    if fam != k2.estimand.measure.m_family:
        return AnswerObject(flags=("mixed_mtype",), witness_keys=keys)
    cov = _coverage(a)
    theta = k1.theta + k2.theta
    se1, se2 = _se_from_ci(k1.ci, cov), _se_from_ci(k2.ci, cov)
    se = None if se1 is None or se2 is None else math.hypot(se1, se2)
    t1, t2 = k1.estimand.measure.m_type, k2.estimand.measure.m_type
    m_type = t1 if t1 == t2 else f"{t1}+{t2}"
    est = CanonicalEstimand(
        k1.estimand.population,
        replace(k1.estimand.intervention, intervention_id=f"{q.x_id}+{q.x2_id}"),
        k1.estimand.outcome,
        k1.estimand.horizon,
        CanonicalMeasure(fam, m_type, k1.estimand.measure.s_canon),
    )
    mixed = ("mixed_mtype",) if t1 != t2 or "mixed_mtype" in leg1.flags + leg2.flags else ()
    return AnswerObject(
        estimand=est,
        theta_hat=theta,
        ci=_ci(theta, se, cov),
        flags=_flags(("executable", "assumption_required"), _disagreement(leg1, leg2), mixed),
        witness_keys=keys,
    )


def q_cf(a: Atlas, q: QuerySpec) -> AnswerObject:
    z = q.z
    if not _endpoints(q.x_id, q.y_id) or not isinstance(z, Mapping) or not z.get("population"):
        return _flagged("missing_field")
    constraints = replace(q.constraints, p_bucket=normalize_token(z["population"]))
    edge = resolve_edge(a, q.x_id, q.y_id, constraints)  # type: ignore[arg-type]
    if edge is None:
        return _flagged("missing_edge")
    return answer_from_edge(edge, "assumption_required")


def q_cate(a: Atlas, q: QuerySpec) -> AnswerObject:
    if not _endpoints(q.x_id, q.y_id) or not isinstance(q.z, str) or not q.z.strip():
        return _flagged("missing_field")
    constraints = replace(q.constraints, p_bucket=normalize_token(q.z))
    edge = resolve_edge(a, q.x_id, q.y_id, constraints)  # type: ignore[arg-type]
    if edge is not None:
        return answer_from_edge(edge)
    others = replace(q.constraints, p_bucket=None)
    if matching_edges(a, q.x_id, q.y_id, others):  # type: ignore[arg-type]
        return _flagged("no_subgroup_evidence")
    return _flagged("missing_edge")


def q_traj(a: Atlas, q: QuerySpec) -> TrajectoryAnswer:
    """One answer per requested horizon class, in request order."""
    if not _endpoints(q.x_id, q.y_id) or not q.time_set:
        return [("", _flagged("missing_field"))]
    resolved: list[tuple[str, Optional[AtlasEdge]]] = [
        (tau, resolve_edge(a, q.x_id, q.y_id, replace(q.constraints, tau=tau)))  # type: ignore[arg-type]
        for tau in q.time_set
    ]
    partial = any(e is None for _, e in resolved)
    answers: list[tuple[str, AnswerObject]] = []
    for tau, edge in resolved:
        if edge is None:
            answers.append((tau, _flagged("missing_edge", "insufficient_time_coverage")))
        else:
            extra = ("insufficient_time_coverage",) if partial else ()
            answers.append((tau, answer_from_edge(edge, *extra)))

    def sdir(ans: AnswerObject) -> int:
        if ans.ci is None:
            return 0
        return 1 if ans.ci[0] > 0 else (-1 if ans.ci[1] < 0 else 0)

    dirs = [sdir(ans) if ans.executable else 0 for _, ans in answers]
    for i in range(len(answers)):
        for j in range(i + 1, len(answers)):
            if dirs[i] * dirs[j] == -1:
                for me, other in ((i, j), (j, i)):
                    tau, ans = answers[me]
                    other_keys = answers[other][1].witness_keys
                    answers[me] = (
                        tau,
                        replace(
                            ans,
                            flags=_flags(ans.flags, ("conflict",)),
                            witness_keys=tuple(dict.fromkeys(ans.witness_keys + other_keys)),
                        ),
                    )
    return answers


_DISPATCH = {"do": q_do, "med": q_med, "joint": q_joint, "cf": q_cf, "cate": q_cate, "traj": q_traj}


def run_query(a: Atlas, q: QuerySpec) -> QueryResult:
    if q.kind not in _DISPATCH:
        raise ValueError(f"unknown query kind {q.kind!r}")
    return _DISPATCH[q.kind](a, q)


def is_executable(result: QueryResult) -> bool:
    """Overall verdict: every component that the query kind requires produced a number."""
    if isinstance(result, AnswerObject):
        return result.executable
    if isinstance(result, MediationAnswer):
        return "missing_path" not in result.nie.flags and "missing_field" not in result.nie.flags
    return bool(result) and all(ans.executable for _, ans in result)


def result_flags(result: QueryResult) -> tuple[str, ...]:
    if isinstance(result, AnswerObject):
        return result.flags
    if isinstance(result, MediationAnswer):
        return _flags(result.te.flags, result.nde.flags, result.nie.flags)
    return _flags(*(ans.flags for _, ans in result))


def result_to_jsonable(result: QueryResult) -> Any:
    if isinstance(result, AnswerObject):
        return to_jsonable(result)
    if isinstance(result, MediationAnswer):
        return {"TE": to_jsonable(result.te), "NDE": to_jsonable(result.nde), "NIE": to_jsonable(result.nie)}
    return [{"tau": tau, "answer": to_jsonable(ans)} for tau, ans in result]
