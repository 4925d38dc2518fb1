"""Build configuration: every constant that can change an atlas lives here."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .bucketing import ABLATIONS
from .canonicalize import CanonicalizeConfig
from .conflict import HeterogeneityConfig
from .evidence_model import measure_vocabulary
from .horizon import AlignmentConfig
from .quality import QualityConfig


@dataclass(frozen=True)
class BuildConfig:
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    heterogeneity: HeterogeneityConfig = field(default_factory=HeterogeneityConfig)
    quality: QualityConfig = field(default_factory=QualityConfig)
    coverage: float = 0.95
    ablation: Optional[str] = None
    extra_measure_types: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.ablation is not None and self.ablation not in ABLATIONS:
            raise ValueError(f"unknown ablation {self.ablation!r}; expected one of {ABLATIONS}")
        if not 0 < self.coverage < 1:
            raise ValueError("coverage must lie in (0, 1)")

    @property
    def measure_types(self) -> dict[str, str]:
        return measure_vocabulary(self.extra_measure_types)

    def canonicalize_config(self) -> CanonicalizeConfig:
        return CanonicalizeConfig(
            alignment=self.alignment,
            coverage=self.coverage,
            normalize_scale=self.ablation != "no_canonical",
        )

    def with_ablation(self, ablation: Optional[str]) -> "BuildConfig":
        return BuildConfig(self.alignment, self.heterogeneity, self.quality, self.coverage, ablation, self.extra_measure_types)

    def to_dict(self) -> dict[str, Any]:
        return {
            "alignment": self.alignment.to_dict(),
            "heterogeneity": {"delta_het": self.heterogeneity.delta_het, "weight_rule": self.heterogeneity.weight_rule},
            "quality": self.quality.to_dict(),
            "coverage": self.coverage,
            "ablation": self.ablation,
            "extra_measure_types": dict(sorted(self.extra_measure_types.items())),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BuildConfig":
        known = {"alignment", "heterogeneity", "quality", "coverage", "ablation", "extra_measure_types"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        het = d.get("heterogeneity", {})
        return cls(
            alignment=AlignmentConfig.from_dict(d.get("alignment", {})),
            heterogeneity=HeterogeneityConfig(
                delta_het=float(het.get("delta_het", 0.1)), weight_rule=het.get("weight_rule", "sample_size")
            ),
            quality=QualityConfig.from_dict(d.get("quality", {})),
            coverage=float(d.get("coverage", 0.95)),
            ablation=d.get("ablation"),
            extra_measure_types=dict(d.get("extra_measure_types", {})),
        )


def load_config(path: Optional[str | Path]) -> BuildConfig:
    if path is None:
        return BuildConfig()
    return BuildConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
