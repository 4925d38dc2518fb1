"""Canonicalization operator and its reconstruction map.

Ratio-family measures move to the log scale, difference-family measures stay
on their native scale. Exactly one rule fires per claim, chosen by the fixed
priority R2 > R3 > R1 > D1 > D2 within the claim's family; every decision is
written to the conditions record so that `reconstruct` can undo it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional

from .evidence_model import (
    ClaimObject,
    Estimand,
    EvidenceObject,
    InterventionContrast,
    MeasureFunctional,
    OutcomeSpec,
    PopulationSpec,
    Provenance,
)
from .horizon import AlignmentConfig, AlignmentRecord, CanonicalHorizonClass, align

RULE_PRIORITY = ("R2", "R3", "R1", "D1", "D2")
RULES = RULE_PRIORITY + ("identity",)
_FAMILY_RULES = {"ratio": ("R2", "R3", "R1"), "difference": ("D1", "D2")}
_SCALE_BY_FAMILY = {"ratio": "log", "difference": "identity"}


class CanonicalizationError(ValueError):
    """Raised when a claim cannot be put into canonical form."""

    def __init__(self, message: str, flags: tuple[str, ...] = ()):
        super().__init__(message)
        self.flags = flags


class ReconstructionError(ValueError):
    pass


def z_for_coverage(coverage: float) -> float:
    return NormalDist().inv_cdf(1 - (1 - coverage) / 2)


@dataclass(frozen=True)
class MeasureSignature:
    m_family: str
    m_type: str
    s_rep: str
    competing: tuple[str, ...] = ()


@dataclass(frozen=True)
class CanonicalMeasure:
    m_family: str
    m_type: str
    s_canon: str


@dataclass(frozen=True)
class UncertaintyRecord:
    status: str  # reported | derived_from_se | derived_from_p | missing
    coverage: float
    z: float
    se: Optional[float] = None
    p_value: Optional[float] = None
    derived_se: Optional[float] = None


@dataclass(frozen=True)
class ConditionsAlpha:
    signature: MeasureSignature
    rule_applied: str
    original_measure: MeasureFunctional
    uncertainty: UncertaintyRecord
    alignment: AlignmentRecord
    discarded_rules: tuple[str, ...] = ()
    validity_flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class CanonicalEstimand:
    population: PopulationSpec
    intervention: InterventionContrast
    outcome: OutcomeSpec
    horizon: CanonicalHorizonClass
    measure: CanonicalMeasure


@dataclass(frozen=True)
class CanonicalClaim:
    estimand: CanonicalEstimand
    theta: float
    ci: Optional[tuple[float, float]]
    alpha: ConditionsAlpha
    provenance: Provenance

    @property
    def claim_id(self) -> str:
        return self.provenance.claim_id

    @property
    def sort_key(self) -> tuple[str, int]:
        return (self.provenance.card_id, self.provenance.effect_index)


@dataclass(frozen=True)
class CanonicalizeConfig:
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    coverage: float = 0.95
    normalize_scale: bool = True


def infer_signature(m: MeasureFunctional, c: ClaimObject) -> MeasureSignature:
    """Signature from the declared measure; alternatives that a rule could also accept are listed."""
    if m.m_family not in _FAMILY_RULES:
        raise CanonicalizationError(f"unknown measure family {m.m_family!r}", ("signature_error",))
    if m.reported_scale == "difference" and m.m_family != "difference":
        raise CanonicalizationError("difference scale reported for a ratio measure", ("signature_error",))
    if m.reported_scale in ("ratio", "log_ratio") and m.m_family != "ratio":
        raise CanonicalizationError(f"{m.reported_scale} scale reported for a difference measure", ("signature_error",))
    competing: list[str] = []
    if m.binding is not None and m.binding != m.m_type:
        competing.append(f"{m.m_family}/{m.binding}/{_bound_scale(m.m_family)}")
    return MeasureSignature(m.m_family, m.m_type, m.reported_scale, tuple(competing))


def _bound_scale(family: str) -> str:
    return "log_ratio" if family == "ratio" else "difference"


def applicable_rules(sig: MeasureSignature, binding: Optional[str]) -> list[str]:
    admissible = {
        "R2": sig.s_rep == "log_ratio",
        "R3": binding is not None,
        "R1": sig.s_rep == "ratio",
        "D1": sig.s_rep == "difference",
        "D2": binding is not None,
    }
    return [r for r in _FAMILY_RULES[sig.m_family] if admissible[r]]


def derive_ci_from_se(theta: float, se: float, coverage: float = 0.95) -> tuple[float, float]:
    if not se > 0:
        raise ValueError("se must be positive")
    half = z_for_coverage(coverage) * se
    return (theta - half, theta + half)


def derive_se_from_p(theta: float, p: float) -> Optional[float]:
    """SE implied by a two-sided p-value under a normal approximation.

    None when theta is 0, or so close to 0 that the quotient underflows.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    se = abs(theta) / NormalDist().inv_cdf(1 - p / 2)
    return se if se > 0 else None


def canonicalize(e: EvidenceObject, cfg: Optional[CanonicalizeConfig] = None) -> CanonicalClaim:
    cfg = cfg or CanonicalizeConfig()
    est, c = e.estimand, e.claim
    m = est.measure
    sig = infer_signature(m, c)

    if isinstance(est.horizon, CanonicalHorizonClass):
        h_class = est.horizon
        a_rec = AlignmentRecord(raw_horizon=est.horizon, already_aligned=True)
    else:
        h_class, a_rec = align(est.horizon, cfg.alignment)

    rules = applicable_rules(sig, m.binding)
    flags: list[str] = []
    if not rules:
        rule, discarded = "identity", ()
        flags.append("no_applicable_rule")
    else:
        rule, discarded = rules[0], tuple(rules[1:])

    theta, ci = c.theta, c.ci
    if rule == "R1":
        bad = theta <= 0 or (ci is not None and min(ci) <= 0)
        if bad:
            raise CanonicalizationError("R1 requires a positive ratio and positive CI endpoints", ("nonpositive_ratio",))
    if not cfg.normalize_scale:
        flags.append("scale_normalization_skipped")
    elif rule == "R1":
        theta = math.log(theta)
        ci = None if ci is None else (math.log(ci[0]), math.log(ci[1]))

    z = z_for_coverage(cfg.coverage)
    if ci is not None:
        unc = UncertaintyRecord("reported", cfg.coverage, z, se=c.se, p_value=c.p_value)
    elif c.se is not None:
        ci = derive_ci_from_se(theta, c.se, cfg.coverage)
        unc = UncertaintyRecord("derived_from_se", cfg.coverage, z, se=c.se, p_value=c.p_value)
    elif c.p_value is not None:
        se = derive_se_from_p(theta, c.p_value)
        if se is None:
            unc = UncertaintyRecord("missing", cfg.coverage, z, p_value=c.p_value)
            flags.append("uncertainty_underivable")
        else:
            ci = derive_ci_from_se(theta, se, cfg.coverage)
            unc = UncertaintyRecord("derived_from_p", cfg.coverage, z, p_value=c.p_value, derived_se=se)
    else:
        unc = UncertaintyRecord("missing", cfg.coverage, z)
        flags.append("ci_missing")

    # an explicit binding resolves a coefficient to the measure type it encodes
    canon_type = m.binding or m.m_type
    measure = CanonicalMeasure(m.m_family, canon_type, _SCALE_BY_FAMILY[m.m_family])
    alpha = ConditionsAlpha(
        signature=sig,
        rule_applied=rule,
        original_measure=m,
        uncertainty=unc,
        alignment=a_rec,
        discarded_rules=discarded,
        validity_flags=tuple(flags),
    )
    estimand = CanonicalEstimand(est.population, est.intervention, est.outcome, h_class, measure)
    return CanonicalClaim(estimand, theta, ci, alpha, e.provenance)


def as_canonical_input(cc: CanonicalClaim) -> EvidenceObject:
    """Re-express a canonical claim as an input already on the canonical scale."""
    meas = cc.estimand.measure
    scale = "log_ratio" if meas.m_family == "ratio" else "difference"
    est = Estimand(
        cc.estimand.population,
        cc.estimand.intervention,
        cc.estimand.outcome,
        cc.estimand.horizon,
        MeasureFunctional(meas.m_family, meas.m_type, scale),
    )
    return EvidenceObject(est, ClaimObject(cc.theta, cc.ci), cc.provenance)


def reconstruct(cc: CanonicalClaim) -> EvidenceObject:
    alpha = cc.alpha
    rule = alpha.rule_applied
    if rule not in RULES:
        raise ReconstructionError(f"unknown rule {rule!r} in conditions record")
    unscale = rule == "R1" and "scale_normalization_skipped" not in alpha.validity_flags
    inv = math.exp if unscale else (lambda x: x)

    theta = inv(cc.theta)
    unc = alpha.uncertainty
    ci = None
    if unc.status == "reported":
        if cc.ci is None:
            raise ReconstructionError("conditions record a reported CI but none is present")
        ci = (inv(cc.ci[0]), inv(cc.ci[1]))
    claim = ClaimObject(theta, ci, unc.se, unc.p_value)
    est = Estimand(
        cc.estimand.population,
        cc.estimand.intervention,
        cc.estimand.outcome,
        alpha.alignment.raw_horizon,
        alpha.original_measure,
    )
    return EvidenceObject(est, claim, cc.provenance)


def equivalent(a: EvidenceObject, b: EvidenceObject, rel_tol: float = 1e-12) -> bool:
    """Equality up to numeric round-off in the claim values."""

    def close(x: Optional[float], y: Optional[float]) -> bool:
        if x is None or y is None:
            return x is y
        return math.isclose(x, y, rel_tol=rel_tol, abs_tol=0.0)

    ca, cb = a.claim, b.claim
    if (ca.ci is None) != (cb.ci is None):
        return False
    ci_ok = ca.ci is None or (close(ca.ci[0], cb.ci[0]) and close(ca.ci[1], cb.ci[1]))
    return (
        a.estimand == b.estimand
        and a.provenance == b.provenance
        and close(ca.theta, cb.theta)
        and ci_ok
        and ca.se == cb.se
        and ca.p_value == cb.p_value
    )

