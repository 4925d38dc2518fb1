"""Evidence objects: semantic estimand, numeric claim and provenance.

Everything here is an immutable value. Identifiers are normalized at ingest
(`normalize_token`) so that downstream keys are stable across reporting
variants. `validate_evidence_object` returns violations as data; it never
raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Union

CONTRAST_TYPES = ("per_unit", "binary", "arm_vs_control", "categorical")
OUTCOME_TYPES = ("continuous", "binary", "time_to_event")
TIME_UNITS = ("hour", "day", "week", "month", "year")
REPORTED_SCALES = ("ratio", "log_ratio", "difference", "coefficient")
GRADES = ("A", "B", "C")
ADJUSTMENTS = ("none", "basic", "rich")

# measure type -> family; extend with `measure_vocabulary(extra)`
DEFAULT_MEASURE_TYPES: dict[str, str] = {
    "HR": "ratio",
    "RR": "ratio",
    "OR": "ratio",
    "coef_cox": "ratio",
    "coef_logistic": "ratio",
    "MD": "difference",
    "RD": "difference",
    "SMD": "difference",
    "coef_linear": "difference",
}


def measure_vocabulary(extra: Optional[Mapping[str, str]] = None) -> dict[str, str]:
    vocab = dict(DEFAULT_MEASURE_TYPES)
    if extra:
        for m_type, family in extra.items():
            if family not in ("ratio", "difference"):
                raise ValueError(f"unknown measure family {family!r} for {m_type!r}")
            vocab[m_type] = family
    return vocab


def _as_float(obj: Any, *names: str) -> None:
    """Store plain ints as floats so serialized values are type-stable."""
    for name in names:
        v = getattr(obj, name)
        if type(v) is int:
            object.__setattr__(obj, name, float(v))


def normalize_token(text: str) -> str:
    """Lowercase, trim and join internal whitespace runs with a hyphen."""
    return "-".join(str(text).strip().lower().split())


@dataclass(frozen=True)
class PopulationSpec:
    p_bucket: str
    p_setting: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class InterventionContrast:
    intervention_id: str
    c_type: str
    delta: Optional[float] = None
    unit: Optional[str] = None
    x0: Optional[str] = None
    x1: Optional[str] = None


@dataclass(frozen=True)
class OutcomeSpec:
    outcome_id: str
    outcome_type: str
    unit: Optional[str] = None
    notes: Optional[str] = None


@dataclass(frozen=True)
class Duration:
    value: float
    unit: str

    def __post_init__(self) -> None:
        _as_float(self, "value")


@dataclass(frozen=True)
class Interval:
    length_value: float
    length_unit: str
    reference: str = "baseline"

    def __post_init__(self) -> None:
        _as_float(self, "length_value")


@dataclass(frozen=True)
class TTE:
    event: str
    followup: Optional[Duration] = None


@dataclass(frozen=True)
class Missing:
    reason: str


RawHorizon = Union[Duration, Interval, TTE, Missing]


@dataclass(frozen=True)
class MeasureFunctional:
    """How the effect is quantified.

    `binding` is explicit extraction metadata tying the reported parameter to
    a canonical measure type (e.g. a Cox coefficient declared to be log HR).
    """

    m_family: str
    m_type: str
    reported_scale: str
    binding: Optional[str] = None


@dataclass(frozen=True)
class ClaimObject:
    theta: float
    ci: Optional[tuple[float, float]] = None
    se: Optional[float] = None
    p_value: Optional[float] = None

    def __post_init__(self) -> None:
        _as_float(self, "theta", "se", "p_value")
        if self.ci is not None:
            object.__setattr__(self, "ci", tuple(float(x) if type(x) is int else x for x in self.ci))


@dataclass(frozen=True)
class Provenance:
    ref: str
    grade: str
    card_id: str
    n: Optional[int] = None
    adjustment: str = "none"
    effect_index: int = 0
    meta: Mapping[str, Any] = field(default_factory=dict)

    @property
    def claim_id(self) -> str:
        return f"{self.card_id}#{self.effect_index}"


@dataclass(frozen=True)
class Estimand:
    population: PopulationSpec
    intervention: InterventionContrast
    outcome: OutcomeSpec
    # a CanonicalHorizonClass is accepted too (re-injection of canonical forms)
    horizon: Any
    measure: MeasureFunctional


@dataclass(frozen=True)
class EvidenceObject:
    estimand: Estimand
    claim: ClaimObject
    provenance: Provenance


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


def _is_token(value: Optional[str]) -> bool:
    return bool(value) and value == normalize_token(value) and not any(c.isspace() for c in value)


def _finite(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _horizon_violations(h: Any) -> list[Violation]:
    out: list[Violation] = []
    if isinstance(h, Duration):
        if not _finite(h.value) or h.value < 0:
            out.append(Violation("horizon.value", "duration must be a nonnegative number"))
        if h.unit not in TIME_UNITS:
            out.append(Violation("horizon.unit", f"unknown time unit {h.unit!r}"))
    elif isinstance(h, Interval):
        if not _finite(h.length_value) or h.length_value < 0:
            out.append(Violation("horizon.length_value", "interval length must be a nonnegative number"))
        if h.length_unit not in TIME_UNITS:
            out.append(Violation("horizon.length_unit", f"unknown time unit {h.length_unit!r}"))
    elif isinstance(h, TTE):
        if not h.event:
            out.append(Violation("horizon.event", "time-to-event horizon requires an event token"))
        if h.followup is not None:
            out.extend(
                Violation(v.field.replace("horizon.", "horizon.followup."), v.rule)
                for v in _horizon_violations(h.followup)
            )
    elif isinstance(h, Missing):
        if not h.reason:
            out.append(Violation("horizon.reason", "missing horizon must carry a reason"))
    else:
        from .horizon import CanonicalHorizonClass

        if not isinstance(h, CanonicalHorizonClass):
            out.append(Violation("horizon", f"unsupported horizon representation {type(h).__name__}"))
    return out


def validate_evidence_object(
    obj: EvidenceObject, measure_types: Optional[Mapping[str, str]] = None
) -> list[Violation]:
    """Check every type invariant of an evidence object; empty list means valid."""
    vocab = measure_types if measure_types is not None else DEFAULT_MEASURE_TYPES
    est, claim, prov = obj.estimand, obj.claim, obj.provenance
    out: list[Violation] = []

    if not _is_token(est.population.p_bucket):
        out.append(Violation("population.p_bucket", "must be a non-empty normalized token"))

    iv = est.intervention
    if not _is_token(iv.intervention_id):
        out.append(Violation("intervention.intervention_id", "must be a non-empty normalized token"))
    if iv.c_type not in CONTRAST_TYPES:
        out.append(Violation("intervention.c_type", f"unknown contrast type {iv.c_type!r}"))
    elif iv.c_type == "per_unit":
        if iv.delta is None:
            out.append(Violation("intervention.delta", "per_unit requires delta"))
        if not iv.unit:
            out.append(Violation("intervention.unit", "per_unit requires unit"))
    elif iv.x0 is None or iv.x1 is None:
        out.append(Violation("intervention.x0/x1", f"{iv.c_type} requires x0 and x1"))

    oc = est.outcome
    if not _is_token(oc.outcome_id):
        out.append(Violation("outcome.outcome_id", "must be a non-empty normalized token"))
    if oc.outcome_type not in OUTCOME_TYPES:
        out.append(Violation("outcome.outcome_type", f"unknown outcome type {oc.outcome_type!r}"))

    out.extend(_horizon_violations(est.horizon))

    mu = est.measure
    family = vocab.get(mu.m_type)
    if family is None:
        out.append(Violation("measure.m_type", f"unknown measure type {mu.m_type!r}"))
    elif family != mu.m_family:
        out.append(Violation("measure.m_family", f"{mu.m_type} belongs to the {family} family"))
    if mu.reported_scale not in REPORTED_SCALES:
        out.append(Violation("measure.reported_scale", f"unknown reported scale {mu.reported_scale!r}"))
    elif mu.reported_scale == "difference" and mu.m_family != "difference":
        out.append(Violation("measure.reported_scale", "difference scale requires the difference family"))
    elif mu.reported_scale in ("ratio", "log_ratio") and mu.m_family != "ratio":
        out.append(Violation("measure.reported_scale", f"{mu.reported_scale} scale requires the ratio family"))
    if mu.binding is not None and vocab.get(mu.binding) != mu.m_family:
        out.append(Violation("measure.binding", f"binding {mu.binding!r} is not a {mu.m_family} measure type"))

    if not _finite(claim.theta):
        out.append(Violation("claim.theta", "theta must be a finite number"))
    if claim.ci is not None:
        lo, hi = claim.ci
        if not (_finite(lo) and _finite(hi)):
            out.append(Violation("claim.ci", "ci endpoints must be finite numbers"))
        elif lo > hi:
            out.append(Violation("claim.ci", "ci lower must be <= upper"))
    if mu.reported_scale == "ratio":
        if _finite(claim.theta) and claim.theta <= 0:
            out.append(Violation("claim.theta", "theta must be > 0 on ratio scale"))
        if claim.ci is not None and _finite(claim.ci[0]) and min(claim.ci) <= 0:
            out.append(Violation("claim.ci", "ci endpoints must be > 0 on ratio scale"))
    if claim.se is not None and not (_finite(claim.se) and claim.se > 0):
        out.append(Violation("claim.se", "se must be a positive number"))
    if claim.p_value is not None and not (_finite(claim.p_value) and 0 < claim.p_value < 1):
        out.append(Violation("claim.p_value", "p_value must lie in (0, 1)"))

    if not prov.card_id:
        out.append(Violation("provenance.card_id", "card_id is required"))
    if prov.grade not in GRADES:
        out.append(Violation("provenance.grade", f"unknown grade {prov.grade!r}"))
    if prov.adjustment not in ADJUSTMENTS:
        out.append(Violation("provenance.adjustment", f"unknown adjustment {prov.adjustment!r}"))
    if prov.n is not None and (isinstance(prov.n, bool) or not isinstance(prov.n, int) or prov.n <= 0):
        out.append(Violation("provenance.n", "n must be a positive integer"))
    return out
