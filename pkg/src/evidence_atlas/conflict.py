"""Bucket-level conflict predicates: directional, interval and heterogeneity.

All three operate on canonical-scale values. Pairwise predicates scan pairs
(i, j), i < j, in bucket order and report the first witness pair; every
predicate is always evaluated, so a conflict of any listed type is never
missed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .bucketing import Bucket
from .canonicalize import CanonicalClaim

CONFLICT_TYPES = ("directional", "interval", "heterogeneity")
SEVERITIES = ("none", "low", "medium", "high")
WEIGHT_RULES = ("sample_size", "uniform")


@dataclass(frozen=True)
class HeterogeneityConfig:
    delta_het: float = 0.1
    weight_rule: str = "sample_size"

    def __post_init__(self) -> None:
        if not self.delta_het > 0:
            raise ValueError("delta_het must be positive")
        if self.weight_rule not in WEIGHT_RULES:
            raise ValueError(f"unknown weight rule {self.weight_rule!r}")


@dataclass(frozen=True)
class Witness:
    conflict_type: str
    claims: tuple[str, ...]
    statistic: float


@dataclass(frozen=True)
class ConflictAnnotation:
    types: tuple[str, ...] = ()
    severity: str = "none"
    witnesses: tuple[Witness, ...] = ()

    @property
    def has_conflict(self) -> bool:
        return "directional" in self.types or "interval" in self.types


def significant_direction(cc: CanonicalClaim) -> int:
    if cc.ci is None:
        return 0
    lo, hi = cc.ci
    if lo > 0:
        return 1
    if hi < 0:
        return -1
    return 0


def detect_directional(claims: Sequence[CanonicalClaim]) -> Optional[Witness]:
    dirs = [significant_direction(c) for c in claims]
    for i in range(len(claims)):
        for j in range(i + 1, len(claims)):
            if dirs[i] * dirs[j] == -1:
                return Witness("directional", (claims[i].claim_id, claims[j].claim_id), -1.0)
    return None


def detect_interval(claims: Sequence[CanonicalClaim]) -> Optional[Witness]:
    for i in range(len(claims)):
        a = claims[i].ci
        if a is None:
            continue
        for j in range(i + 1, len(claims)):
            b = claims[j].ci
            if b is None:
                continue
            if a[1] < b[0] or b[1] < a[0]:
                gap = max(b[0] - a[1], a[0] - b[1])
                return Witness("interval", (claims[i].claim_id, claims[j].claim_id), gap)
    return None


def heterogeneity_weights(claims: Sequence[CanonicalClaim], cfg: HeterogeneityConfig) -> list[float]:
    ns = [c.provenance.n for c in claims]
    if cfg.weight_rule == "sample_size" and all(n is not None for n in ns):
        total = float(sum(ns))  # type: ignore[arg-type]
        return [n / total for n in ns]  # type: ignore[operator]
    return [1.0 / len(claims)] * len(claims)


def _exact_dispersion(claims: Sequence[CanonicalClaim], cfg: HeterogeneityConfig) -> Fraction:
    ns = [c.provenance.n for c in claims]
    if cfg.weight_rule == "sample_size" and all(n is not None for n in ns):
        total = sum(ns)  # type: ignore[arg-type]
        w = [Fraction(n, total) for n in ns]  # type: ignore[arg-type]
    else:
        w = [Fraction(1, len(claims))] * len(claims)
    t = [Fraction(c.theta) for c in claims]
    mean = sum(wi * ti for wi, ti in zip(w, t))
    return sum(wi * (ti - mean) ** 2 for wi, ti in zip(w, t))


def dispersion(claims: Sequence[CanonicalClaim], cfg: HeterogeneityConfig) -> tuple[float, list[float]]:
    """Weighted dispersion of canonical point estimates; 0 for fewer than two claims.

    Evaluated in exact rational arithmetic and rounded once, so the value does
    not depend on summation order.
    """
    if len(claims) < 2:
        return 0.0, [1.0] * len(claims)
    return float(_exact_dispersion(claims, cfg)), heterogeneity_weights(claims, cfg)


def detect_heterogeneity(claims: Sequence[CanonicalClaim], cfg: HeterogeneityConfig) -> Optional[Witness]:
    if len(claims) < 2:
        return None
    d = _exact_dispersion(claims, cfg)
    # threshold compared exactly; a rounded D of 0.1 may sit just below delta_het
    if d >= Fraction(cfg.delta_het):
        return Witness("heterogeneity", tuple(c.claim_id for c in claims), float(d))
    return None


def detect_conflicts(b: Bucket | Sequence[CanonicalClaim], cfg: Optional[HeterogeneityConfig] = None) -> ConflictAnnotation:
    cfg = cfg or HeterogeneityConfig()
    claims = b.claims if isinstance(b, Bucket) else tuple(b)
    found = [
        w
        for w in (detect_directional(claims), detect_interval(claims), detect_heterogeneity(claims, cfg))
        if w is not None
    ]
    types = tuple(w.conflict_type for w in found)
    if "directional" in types:
        severity = "high"
    elif "interval" in types:
        severity = "medium"
    elif "heterogeneity" in types:
        severity = "low"
    else:
        severity = "none"
    return ConflictAnnotation(types, severity, tuple(found))
