"""Bucket keys, comparability, poolability and corpus partitioning."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .canonicalize import CanonicalClaim
from .horizon import CanonicalHorizonClass, HorizonError, raw_horizon_token

ABLATIONS = ("no_canonical", "no_align_tau", "weak_key")
WILDCARD = "*"


@dataclass(frozen=True, order=True)
class BucketKey:
    p_bucket: str
    x_id: str
    y_id: str
    tau: str  # encoded horizon class, e.g. "fixed:6" or "unknown:-"
    c_type: str
    m_family: str
    extra: tuple[str, ...] = ()

    def encode(self) -> str:
        return "|".join((self.p_bucket, self.x_id, self.y_id, self.tau, self.c_type, self.m_family) + self.extra)

    @classmethod
    def decode(cls, text: str) -> "BucketKey":
        parts = text.split("|")
        if len(parts) < 6:
            raise ValueError(f"not a bucket key: {text!r}")
        return cls(*parts[:6], extra=tuple(parts[6:]))

    @property
    def tau_class(self) -> Optional[CanonicalHorizonClass]:
        try:
            return CanonicalHorizonClass.decode(self.tau)
        except (HorizonError, ValueError):
            return None

    def __str__(self) -> str:
        return self.encode()


@dataclass(frozen=True)
class Bucket:
    key: BucketKey
    claims: tuple[CanonicalClaim, ...]


def bucket_key(cc: CanonicalClaim, ablation: Optional[str] = None) -> BucketKey:
    """Key of a canonical claim; reads only semantic fields, never the numbers."""
    if ablation is not None and ablation not in ABLATIONS:
        raise ValueError(f"unknown ablation {ablation!r}")
    est = cc.estimand
    tau = est.horizon.encode()
    c_type = est.intervention.c_type
    extra: tuple[str, ...] = ()
    if ablation == "no_align_tau":
        tau = raw_horizon_token(cc.alpha.alignment.raw_horizon)
    elif ablation == "weak_key":
        c_type = WILDCARD
    elif ablation == "no_canonical":
        sig = cc.alpha.signature
        extra = (sig.m_type, sig.s_rep)
    return BucketKey(
        est.population.p_bucket,
        est.intervention.intervention_id,
        est.outcome.outcome_id,
        tau,
        c_type,
        est.measure.m_family,
        extra,
    )


def comparable(a: CanonicalClaim, b: CanonicalClaim) -> bool:
    return bucket_key(a) == bucket_key(b)


def poolable(a: CanonicalClaim, b: CanonicalClaim) -> bool:
    return comparable(a, b) and a.estimand.measure.m_type == b.estimand.measure.m_type


def partition(claims: Iterable[CanonicalClaim], ablation: Optional[str] = None) -> list[Bucket]:
    groups: dict[BucketKey, list[CanonicalClaim]] = {}
    for cc in claims:
        groups.setdefault(bucket_key(cc, ablation), []).append(cc)
    return merge_partitions([groups])


def merge_partitions(parts: Iterable[dict[BucketKey, list[CanonicalClaim]]]) -> list[Bucket]:
    """Combine partial groupings; the result does not depend on the order of `parts`."""
    merged: dict[BucketKey, list[CanonicalClaim]] = {}
    for part in parts:
        for key, members in part.items():
            merged.setdefault(key, []).extend(members)
    return [
        Bucket(key, tuple(sorted(merged[key], key=lambda c: c.sort_key)))
        for key in sorted(merged, key=BucketKey.encode)
    ]
