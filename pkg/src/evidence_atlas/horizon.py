"""Deterministic time-horizon alignment.

A raw horizon is reduced to a duration in days with a fixed conversion table,
snapped to a bin by relative-tolerance matching against bin representatives
(falling back to plain interval membership), and labelled acute/fixed/tte/
unknown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Union

from .evidence_model import TTE, Duration, Interval, Missing, RawHorizon

DEFAULT_CONVERSION = {"hour": 1 / 24, "day": 1.0, "week": 7.0, "month": 30.4375, "year": 365.25}
# upper edges of bins 1..K-1; bin 1 is [0, 2], bin j is (edge[j-2], edge[j-1]], last bin unbounded
DEFAULT_BIN_EDGES = (2.0, 14.0, 50.0, 130.0, 250.0, 550.0, 1200.0, 2700.0)
DEFAULT_REPRESENTATIVES = (1.0, 7.0, 30.4375, 84.0, 182.625, 365.25, 730.5, 1826.25, 3652.5)

H_SEMS = ("acute", "fixed", "tte", "unknown")


class HorizonError(ValueError):
    pass


@dataclass(frozen=True)
class AlignmentConfig:
    conversion_table: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_CONVERSION))
    bin_edges: tuple[float, ...] = DEFAULT_BIN_EDGES
    representatives: tuple[float, ...] = DEFAULT_REPRESENTATIVES
    rho: float = 0.1
    delta_acute: float = 7.0

    def __post_init__(self) -> None:
        edges, reps = self.bin_edges, self.representatives
        if len(reps) != len(edges) + 1:
            raise HorizonError("need exactly one representative per bin")
        if any(b <= a for a, b in zip(edges, edges[1:])) or (edges and edges[0] <= 0):
            raise HorizonError("bin edges must be positive and strictly increasing")
        if any(b <= a for a, b in zip(reps, reps[1:])) or reps[0] <= 0:
            raise HorizonError("representatives must be positive and strictly increasing")
        for j, rep in enumerate(reps, start=1):
            if self.exact_bin(rep) != j:
                raise HorizonError(f"representative {rep} lies outside bin {j}")
        if not 0 <= self.rho < 1:
            raise HorizonError("rho must lie in [0, 1)")
        if self.delta_acute <= 0:
            raise HorizonError("delta_acute must be positive")
        if any(not (v > 0) for v in self.conversion_table.values()):
            raise HorizonError("conversion factors must be positive")

    @property
    def n_bins(self) -> int:
        return len(self.representatives)

    def exact_bin(self, d: float) -> int:
        for j, edge in enumerate(self.bin_edges, start=1):
            if d <= edge:
                return j
        return len(self.bin_edges) + 1

    def to_dict(self) -> dict[str, Any]:
        return {
            "conversion_table": dict(sorted(self.conversion_table.items())),
            "bin_edges": list(self.bin_edges),
            "representatives": list(self.representatives),
            "rho": self.rho,
            "delta_acute": self.delta_acute,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AlignmentConfig":
        base = cls()
        return cls(
            conversion_table=dict(d.get("conversion_table", base.conversion_table)),
            bin_edges=tuple(float(x) for x in d.get("bin_edges", base.bin_edges)),
            representatives=tuple(float(x) for x in d.get("representatives", base.representatives)),
            rho=float(d.get("rho", base.rho)),
            delta_acute=float(d.get("delta_acute", base.delta_acute)),
        )


@dataclass(frozen=True)
class CanonicalHorizonClass:
    h_sem: str
    h_bin: Optional[int] = None

    def encode(self) -> str:
        return f"{self.h_sem}:{'-' if self.h_bin is None else self.h_bin}"

    @classmethod
    def decode(cls, text: str) -> "CanonicalHorizonClass":
        sem, _, b = text.partition(":")
        if sem not in H_SEMS or not b:
            raise HorizonError(f"not a horizon class: {text!r}")
        return cls(sem, None if b == "-" else int(b))


@dataclass(frozen=True)
class AlignmentRecord:
    raw_horizon: Any
    extracted_days: Optional[float] = None
    fuzzy_used: bool = False
    matched_bin: Optional[int] = None
    relative_diff: Optional[float] = None
    already_aligned: bool = False


def _to_days(value: float, unit: str, cfg: AlignmentConfig) -> float:
    try:
        factor = cfg.conversion_table[unit]
    except KeyError:
        raise HorizonError(f"unit {unit!r} is not in the conversion table") from None
    return value * factor


def extract_duration(h: RawHorizon, cfg: AlignmentConfig) -> Optional[float]:
    if isinstance(h, Duration):
        return _to_days(h.value, h.unit, cfg)
    if isinstance(h, Interval):
        return _to_days(h.length_value, h.length_unit, cfg)
    if isinstance(h, TTE):
        return None if h.followup is None else _to_days(h.followup.value, h.followup.unit, cfg)
    if isinstance(h, Missing):
        return None
    raise HorizonError(f"not a raw horizon: {h!r}")


def fuzzy_bin(d: float, cfg: AlignmentConfig) -> tuple[int, bool, float]:
    """Return (1-based bin, fuzzy_used, smallest relative difference)."""
    if d < 0:
        raise HorizonError("duration must be nonnegative")
    best_j, best_rel = 0, math.inf
    for j, rep in enumerate(cfg.representatives, start=1):
        rel = abs(d - rep) / rep
        if rel < best_rel:  # strict: ties keep the smaller index
            best_j, best_rel = j, rel
    if best_rel <= cfg.rho:
        return best_j, True, best_rel
    return cfg.exact_bin(d), False, best_rel


def align(h: RawHorizon, cfg: AlignmentConfig) -> tuple[CanonicalHorizonClass, AlignmentRecord]:
    d = extract_duration(h, cfg)
    if isinstance(h, Missing):
        return CanonicalHorizonClass("unknown"), AlignmentRecord(raw_horizon=h)
    if d is None:  # TTE without follow-up
        return CanonicalHorizonClass("tte"), AlignmentRecord(raw_horizon=h)
    j, fuzzy, rel = fuzzy_bin(d, cfg)
    if isinstance(h, TTE):
        sem = "tte"
    else:
        sem = "acute" if d <= cfg.delta_acute else "fixed"
    rec = AlignmentRecord(raw_horizon=h, extracted_days=d, fuzzy_used=fuzzy, matched_bin=j, relative_diff=rel)
    return CanonicalHorizonClass(sem, j), rec


def extended_align(x: Union[RawHorizon, CanonicalHorizonClass], cfg: AlignmentConfig) -> CanonicalHorizonClass:
    if isinstance(x, CanonicalHorizonClass):
        return x
    return align(x, cfg)[0]


def raw_horizon_token(h: Any) -> str:
    """Normalized raw rendering, used in place of the aligned class by the no_align_tau ablation."""

    def num(v: float) -> str:
        return f"{v:g}"

    if isinstance(h, Duration):
        return f"duration:{num(h.value)}{h.unit}"
    if isinstance(h, Interval):
        return f"interval:{num(h.length_value)}{h.length_unit}@{h.reference}"
    if isinstance(h, TTE):
        fu = "" if h.followup is None else f"/{num(h.followup.value)}{h.followup.unit}"
        return f"tte:{h.event}{fu}"
    if isinstance(h, Missing):
        return "missing"
    if isinstance(h, CanonicalHorizonClass):
        return h.encode()
    raise HorizonError(f"not a horizon: {h!r}")
