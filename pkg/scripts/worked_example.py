"""Walk the three-study hazard-ratio example through canonicalization, bucketing and selection.

Run: python scripts/worked_example.py
"""

from __future__ import annotations

from evidence_atlas import build_atlas, canonicalize, partition
from evidence_atlas.bucketing import comparable, poolable
from evidence_atlas.evidence_model import (
    ClaimObject,
    Duration,
    Estimand,
    EvidenceObject,
    InterventionContrast,
    MeasureFunctional,
    OutcomeSpec,
    PopulationSpec,
    Provenance,
)


def study(card_id: str, m_type: str, scale: str, theta: float, ci: tuple[float, float], grade: str, n: int) -> EvidenceObject:
    estimand = Estimand(
        PopulationSpec("t2dm"),
        InterventionContrast("sglt2i", "arm_vs_control", x0="placebo", x1="sglt2i"),
        OutcomeSpec("mace", "time_to_event"),
        Duration(12, "month"),
        MeasureFunctional("ratio", m_type, scale),
    )
    return EvidenceObject(estimand, ClaimObject(theta, ci), Provenance(f"10.5555/{card_id}", grade, card_id, n, "rich"))


def main() -> None:
    raw = [
        study("study_a", "HR", "ratio", 0.73, (0.58, 0.92), "A", 5000),
        study("study_b", "HR", "log_ratio", -0.315, (-0.545, -0.083), "B", 2000),
        study("study_c", "RR", "ratio", 0.76, (0.61, 0.94), "B", 3000),
    ]
    claims = [canonicalize(e) for e in raw]
    for e, cc in zip(raw, claims):
        lo, hi = cc.ci
        print(
            f"{cc.claim_id}: {e.estimand.measure.m_type} {e.claim.theta} -> "
            f"{cc.theta:+.4f} [{lo:+.4f}, {hi:+.4f}] via {cc.alpha.rule_applied}, horizon {cc.estimand.horizon.encode()}"
        )
    a, b, c = claims
    print(f"A~B comparable={comparable(a, b)} poolable={poolable(a, b)}")
    print(f"A~C comparable={comparable(a, c)} poolable={poolable(a, c)}")

    atlas = build_atlas(partition(claims))
    for edge in atlas.edges:
        print(f"bucket {edge.key_id}: {len(edge.claims)} claims, flags {list(edge.flags)}")
        print(f"  default kernel {edge.default_claim_id} (Q={edge.default_quality.Q:.4f}); poolable {list(edge.poolable_ids)}")


if __name__ == "__main__":
    main()
