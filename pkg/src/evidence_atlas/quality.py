"""Quality score and default-kernel selection within a bucket."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from .bucketing import Bucket
from .canonicalize import CanonicalClaim


@dataclass(frozen=True)
class QualityConfig:
    grade_map: dict[str, float] = field(default_factory=lambda: {"A": 1.0, "B": 2 / 3, "C": 1 / 3})
    adjustment_map: dict[str, float] = field(default_factory=lambda: {"none": 0.0, "basic": 0.5, "rich": 1.0})
    n_max: int = 100_000
    w_ref: float = 0.5
    weights: tuple[float, float, float, float] = (0.4, 0.2, 0.2, 0.2)  # grade, n, precision, adjustment

    def __post_init__(self) -> None:
        g = self.grade_map
        if not g["A"] > g["B"] > g["C"] or not all(0 <= v <= 1 for v in g.values()):
            raise ValueError("grade_map must be strictly order-preserving into [0, 1]")
        a = self.adjustment_map
        if not a["rich"] >= a["basic"] >= a["none"] or not all(0 <= v <= 1 for v in a.values()):
            raise ValueError("adjustment_map must be order-preserving into [0, 1]")
        if self.n_max < 1 or not self.w_ref > 0:
            raise ValueError("n_max and w_ref must be positive")
        if any(w <= 0 for w in self.weights) or not math.isclose(sum(self.weights), 1.0, abs_tol=1e-12):
            raise ValueError("weights must be positive and sum to 1")

    def to_dict(self) -> dict[str, Any]:
        return {
            "grade_map": dict(sorted(self.grade_map.items())),
            "adjustment_map": dict(sorted(self.adjustment_map.items())),
            "n_max": self.n_max,
            "w_ref": self.w_ref,
            "weights": list(self.weights),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "QualityConfig":
        base = cls()
        return cls(
            grade_map=dict(d.get("grade_map", base.grade_map)),
            adjustment_map=dict(d.get("adjustment_map", base.adjustment_map)),
            n_max=int(d.get("n_max", base.n_max)),
            w_ref=float(d.get("w_ref", base.w_ref)),
            weights=tuple(float(x) for x in d.get("weights", base.weights)),  # type: ignore[arg-type]
        )


@dataclass(frozen=True)
class QualityBreakdown:
    claim_id: str
    G: float
    N: float
    P: float
    A: float
    Q: float
    tie_tuple: tuple[Any, ...]

    def rank(self) -> tuple[Any, ...]:
        return (self.Q,) + tuple(self.tie_tuple)


@dataclass(frozen=True)
class Selection:
    default: CanonicalClaim
    poolable: tuple[CanonicalClaim, ...]
    breakdowns: tuple[QualityBreakdown, ...]


def component_scores(cc: CanonicalClaim, cfg: QualityConfig) -> tuple[float, float, float, float]:
    prov = cc.provenance
    g = cfg.grade_map[prov.grade]
    n = 0.0 if prov.n is None else min(1.0, math.log1p(prov.n) / math.log1p(cfg.n_max))
    if cc.ci is None:
        p = 0.0
    else:
        width = cc.ci[1] - cc.ci[0]
        p = 1.0 if width <= cfg.w_ref else cfg.w_ref / width
    a = cfg.adjustment_map[prov.adjustment]
    return g, n, p, a


def weighted_sum(components: Sequence[float], weights: Sequence[float]) -> float:
    return sum(w * x for w, x in zip(weights, components))


def quality_score(cc: CanonicalClaim, cfg: Optional[QualityConfig] = None) -> QualityBreakdown:
    cfg = cfg or QualityConfig()
    g, n, p, a = component_scores(cc, cfg)
    q = weighted_sum((g, n, p, a), cfg.weights)
    prov = cc.provenance
    tie = (g, a, p, n, prov.ref, prov.card_id, prov.effect_index)
    return QualityBreakdown(cc.claim_id, g, n, p, a, q, tie)


def select_default(b: Bucket | Sequence[CanonicalClaim], cfg: Optional[QualityConfig] = None) -> Selection:
    """Highest (Q, tie tuple) over the whole bucket; the poolable subset follows the winner's type."""
    cfg = cfg or QualityConfig()
    claims = b.claims if isinstance(b, Bucket) else tuple(b)
    if not claims:
        raise ValueError("cannot select from an empty bucket")
    scored = [(quality_score(c, cfg), c) for c in claims]
    best_q, best = max(scored, key=lambda s: s[0].rank())
    m_type = best.estimand.measure.m_type
    pool = tuple(c for c in claims if c.estimand.measure.m_type == m_type)
    return Selection(best, pool, tuple(s[0] for s in scored))
