"""Seeded fixture corpus with a ground-truth manifest.

Designed groups encode known situations (worked example, clinical rows,
ablation pairs, conflict buckets, query cases). Every expectation in the
manifest is written down by construction next to the cards that realize it;
nothing here calls the compiler. Seeded random extras add graph structure as
singleton buckets so they never disturb the designed expectations.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from .query import QueryConstraints, QuerySpec

ABLATION_MODES = ("full", "no_canonical", "no_align_tau", "weak_key")


def _time(kind: str = "duration", value: float = 12, unit: str = "month") -> dict[str, Any]:
    return {"kind": kind, "value": value, "unit": unit}


def _effect(
    pop: str,
    x: str,
    y: str,
    mtype: str,
    scale: str,
    point: float,
    ci: Optional[tuple[float, float]] = None,
    *,
    se: Optional[float] = None,
    time: Optional[dict[str, Any]] = None,
    c_type: str = "arm_vs_control",
    outcome_type: str = "binary",
    x0: Optional[str] = "placebo",
    x1: Optional[str] = None,
    delta: Optional[float] = None,
    unit: Optional[str] = None,
    index: int = 0,
) -> dict[str, Any]:
    if c_type == "per_unit":
        x0 = x1 = None
    return {
        "effect_index": index,
        "population": {"bucket": pop},
        "intervention": {"id": x, "contrast_type": c_type, "delta": delta, "unit": unit, "x0": x0, "x1": x1 or (x if x0 else None)},
        "outcome": {"id": y, "type": outcome_type},
        "time": time or _time(),
        "measure": {"type": mtype, "reported_scale": scale},
        "estimate": {"point": point, "ci": None if ci is None else list(ci), "se": se},
    }


def _card(card_id: str, grade: str, n: Optional[int], adjustment: str, *effects: dict[str, Any]) -> dict[str, Any]:
    return {
        "card_id": card_id,
        "paper": {"doi": f"10.5555/fixture.{card_id}", "title": f"Fixture study {card_id}", "year": 2024},
        "grade": grade,
        "design": {"n": n, "adjustment": adjustment},
        "effects": list(effects),
    }


@dataclass
class _Group:
    name: str
    cards: list[dict[str, Any]]
    # bucket key encoding -> expectation; keys written by hand from the construction
    buckets: dict[str, dict[str, Any]]
    counts: dict[str, int] = field(default_factory=dict)

    def count(self, mode: str) -> int:
        return self.counts.get(mode, len(self.buckets))


def _bucket(claims: list[str], default: str, conflicts: tuple[str, ...] = (), flags: tuple[str, ...] = ()) -> dict[str, Any]:
    return {"claims": claims, "default": default, "conflict_types": list(conflicts), "flags": list(flags)}


def _designed_groups() -> list[_Group]:
    g: list[_Group] = []

    # worked example: three 12-month SGLT2i -> MACE studies; HR, log HR and RR reports
    g.append(
        _Group(
            "worked_example",
            [
                _card("study_a", "A", 5000, "rich", _effect("t2dm", "sglt2i", "mace", "HR", "ratio", 0.73, (0.58, 0.92))),
                _card("study_b", "B", 3000, "basic", _effect("t2dm", "sglt2i", "mace", "HR", "log_ratio", -0.315, (-0.545, -0.083))),
                _card("study_c", "B", 2000, "basic", _effect("t2dm", "sglt2i", "mace", "RR", "ratio", 0.76, (0.61, 0.94))),
            ],
            {
                "t2dm|sglt2i|mace|fixed:6|arm_vs_control|ratio": _bucket(
                    ["study_a#0", "study_b#0", "study_c#0"], "study_a#0", flags=("mixed_mtype",)
                )
            },
            counts={"no_canonical": 3},  # (HR, ratio), (HR, log_ratio), (RR, ratio)
        )
    )

    # clinical decision-support rows; one singleton bucket each
    rows = [
        ("hfref", "dapagliflozin", "hf_worsening_or_cv_death", "HR", 0.73, (0.60, 0.88), _time(value=18), "fixed:6", "ratio"),
        ("hfref", "dapagliflozin", "kidney_composite", "HR", 0.61, (0.51, 0.72), _time(value=2.3, unit="year"), "fixed:7", "ratio"),
        ("hfpef", "dapagliflozin", "kccq_score", "MD", 5.8, (2.3, 9.2), _time(value=12, unit="week"), "fixed:4", "difference"),
        ("ckd", "empagliflozin", "kidney_progression_or_cv_death", "HR", 0.72, (0.64, 0.82), _time(value=2, unit="year"), "fixed:7", "ratio"),
        ("hfpef", "empagliflozin", "hf_hospitalization", "HR", 0.71, (0.60, 0.83), _time(value=26), "fixed:7", "ratio"),
    ]
    cards, buckets = [], {}
    for i, (pop, x, y, mt, pt, ci, tm, tau, fam) in enumerate(rows):
        cid = f"clinical_{i}"
        otype = "continuous" if mt == "MD" else "time_to_event"
        cards.append(_card(cid, "A", 4000 + i, "rich", _effect(pop, x, y, mt, "difference" if mt == "MD" else "ratio", pt, ci, time=tm, outcome_type=otype)))
        buckets[f"{pop}|{x}|{y}|{tau}|arm_vs_control|{fam}"] = _bucket([f"{cid}#0"], f"{cid}#0")
    g.append(_Group("clinical_rows", cards, buckets))

    # HR vs log HR of the same effect: one bucket, split by no_canonical
    g.append(
        _Group(
            "ablation_hr_loghr",
            [
                _card("abl_hr", "A", 1500, "rich", _effect("adults", "statin", "stroke", "HR", "ratio", 0.80, (0.70, 0.91))),
                _card("abl_loghr", "B", 1200, "basic", _effect("adults", "statin", "stroke", "HR", "log_ratio", -0.2231, (-0.3567, -0.0943))),
            ],
            {"adults|statin|stroke|fixed:6|arm_vs_control|ratio": _bucket(["abl_hr#0", "abl_loghr#0"], "abl_hr#0")},
            counts={"no_canonical": 2},
        )
    )

    # 12 months vs 1 year: one aligned bucket, split by no_align_tau
    g.append(
        _Group(
            "ablation_12m_1y",
            [
                _card("abl_12m", "A", 800, "rich", _effect("t2dm", "metformin", "hba1c", "MD", "difference", -0.50, (-0.70, -0.30), outcome_type="continuous")),
                _card(
                    "abl_1y", "C", 600, "none",
                    _effect("t2dm", "metformin", "hba1c", "MD", "difference", -0.45, (-0.65, -0.25), time=_time(value=1, unit="year"), outcome_type="continuous"),
                ),
            ],
            {"t2dm|metformin|hba1c|fixed:6|arm_vs_control|difference": _bucket(["abl_12m#0", "abl_1y#0"], "abl_12m#0")},
            counts={"no_align_tau": 2},
        )
    )

    # per-unit vs binary contrasts: two buckets, merged by weak_key
    g.append(
        _Group(
            "ablation_contrast",
            [
                _card("abl_unit", "A", 900, "rich", _effect("adults", "bmi", "t2d_incidence", "OR", "ratio", 1.10, (1.05, 1.15), c_type="per_unit", delta=1, unit="kg/m2")),
                _card("abl_bin", "B", 700, "basic", _effect("adults", "bmi", "t2d_incidence", "OR", "ratio", 2.5, (2.0, 3.1), c_type="binary", x0="normal", x1="obese")),
            ],
            {
                "adults|bmi|t2d_incidence|fixed:6|per_unit|ratio": _bucket(["abl_unit#0"], "abl_unit#0"),
                "adults|bmi|t2d_incidence|fixed:6|binary|ratio": _bucket(["abl_bin#0"], "abl_bin#0"),
            },
            counts={"weak_key": 1},
        )
    )

    # conflict buckets (difference scale, equal n so weights are uniform)
    def pair(tag: str, y: str, a: tuple[float, tuple[float, float]], b: tuple[float, tuple[float, float]]) -> list[dict[str, Any]]:
        return [
            _card(f"{tag}_1", "A", 500, "rich", _effect("adults", f"drug_{tag}", y, "MD", "difference", a[0], a[1], outcome_type="continuous")),
            _card(f"{tag}_2", "B", 500, "basic", _effect("adults", f"drug_{tag}", y, "MD", "difference", b[0], b[1], outcome_type="continuous")),
        ]

    # opposite significant signs imply disjoint intervals; D = 0.09 < 0.1
    g.append(
        _Group(
            "conflict_directional",
            pair("dir", "sbp", (0.3, (0.1, 0.5)), (-0.3, (-0.5, -0.1))),
            {"adults|drug_dir|sbp|fixed:6|arm_vs_control|difference": _bucket(
                ["dir_1#0", "dir_2#0"], "dir_1#0", ("directional", "interval"), ("conflict",))},
        )
    )
    # same sign, disjoint; D = 0.0225
    g.append(
        _Group(
            "conflict_interval",
            pair("int", "ldl", (0.10, (0.05, 0.15)), (0.40, (0.30, 0.50))),
            {"adults|drug_int|ldl|fixed:6|arm_vs_control|difference": _bucket(
                ["int_1#0", "int_2#0"], "int_1#0", ("interval",), ("conflict",))},
        )
    )
    # overlapping, neither pair decisive in opposite directions; D = 0.35^2 = 0.1225
    g.append(
        _Group(
            "conflict_heterogeneity",
            pair("het", "egfr", (0.0, (-0.8, 0.8)), (0.7, (-0.1, 1.5))),
            {"adults|drug_het|egfr|fixed:6|arm_vs_control|difference": _bucket(
                ["het_1#0", "het_2#0"], "het_1#0", ("heterogeneity",), ("heterogeneity",))},
        )
    )

    # mediation chain exercise -> bmi_change -> sbp_change with a direct edge
    med = lambda x, y, pt, ci: _effect("adults", x, y, "MD", "difference", pt, ci, outcome_type="continuous")  # noqa: E731
    g.append(
        _Group(
            "mediation_chain",
            [
                _card("med_a", "A", 1000, "rich", med("exercise", "bmi_change", 0.4, (0.2, 0.6))),
                _card("med_b", "A", 1000, "rich", med("bmi_change", "sbp_change", 0.5, (0.3, 0.7))),
                _card("med_te", "A", 1000, "rich", med("exercise", "sbp_change", 0.6, (0.3, 0.9))),
            ],
            {
                "adults|exercise|bmi_change|fixed:6|arm_vs_control|difference": _bucket(["med_a#0"], "med_a#0"),
                "adults|bmi_change|sbp_change|fixed:6|arm_vs_control|difference": _bucket(["med_b#0"], "med_b#0"),
                "adults|exercise|sbp_change|fixed:6|arm_vs_control|difference": _bucket(["med_te#0"], "med_te#0"),
            },
        )
    )
    # first leg only: smoking -> inflammation, no inflammation -> cvd
    g.append(
        _Group(
            "mediation_missing_path",
            [_card("med_miss", "B", 2000, "basic", med("smoking", "inflammation", 0.8, (0.5, 1.1)))],
            {"adults|smoking|inflammation|fixed:6|arm_vs_control|difference": _bucket(["med_miss#0"], "med_miss#0")},
        )
    )

    # joint intervention legs reported as log HR with SE only
    g.append(
        _Group(
            "joint",
            [
                _card("joint_1", "A", 3000, "rich", _effect("adults", "drug_j1", "mortality", "HR", "log_ratio", -0.3, se=0.1)),
                _card("joint_2", "A", 3000, "rich", _effect("adults", "drug_j2", "mortality", "HR", "log_ratio", -0.2, se=0.1)),
                _card("joint_md", "B", 3000, "basic", _effect("adults", "drug_j4", "mortality", "RD", "difference", -0.02, (-0.04, -0.005))),
            ],
            {
                "adults|drug_j1|mortality|fixed:6|arm_vs_control|ratio": _bucket(["joint_1#0"], "joint_1#0"),
                "adults|drug_j2|mortality|fixed:6|arm_vs_control|ratio": _bucket(["joint_2#0"], "joint_2#0"),
                "adults|drug_j4|mortality|fixed:6|arm_vs_control|difference": _bucket(["joint_md#0"], "joint_md#0"),
            },
        )
    )

    # subgroup evidence for the CATE query
    g.append(
        _Group(
            "cate_subgroups",
            [
                _card("cate_old", "A", 2500, "rich", _effect("elderly", "statin_c", "mi", "HR", "ratio", 0.75, (0.65, 0.86))),
                _card("cate_dm", "B", 1800, "basic", _effect("diabetic", "statin_c", "mi", "HR", "ratio", 0.80, (0.68, 0.94))),
            ],
            {
                "elderly|statin_c|mi|fixed:6|arm_vs_control|ratio": _bucket(["cate_old#0"], "cate_old#0"),
                "diabetic|statin_c|mi|fixed:6|arm_vs_control|ratio": _bucket(["cate_dm#0"], "cate_dm#0"),
            },
        )
    )

    # trajectory: significant benefit at 12 weeks, significant harm at 12 months
    g.append(
        _Group(
            "trajectory",
            [
                _card("traj_12w", "A", 900, "rich",
                      _effect("adults", "insulin_t", "weight_gain", "MD", "difference", 0.2, (0.1, 0.3), time=_time(value=12, unit="week"), outcome_type="continuous")),
                _card("traj_12m", "A", 900, "rich",
                      _effect("adults", "insulin_t", "weight_gain", "MD", "difference", -0.2, (-0.3, -0.1), outcome_type="continuous")),
            ],
            {
                "adults|insulin_t|weight_gain|fixed:4|arm_vs_control|difference": _bucket(["traj_12w#0"], "traj_12w#0"),
                "adults|insulin_t|weight_gain|fixed:6|arm_vs_control|difference": _bucket(["traj_12m#0"], "traj_12m#0"),
            },
        )
    )
    return g


def _queries() -> list[dict[str, Any]]:
    def q(qid: str, kind: str, executable: bool, flags: list[str], **spec: Any) -> dict[str, Any]:
        return {"id": qid, "kind": kind, "spec": spec, "executable": executable, "flags": sorted(flags)}

    return [
        q("do_clinical", "do", True, ["executable"], x_id="dapagliflozin", y_id="hf_worsening_or_cv_death"),
        q("do_absent", "do", False, ["missing_edge"], x_id="dapagliflozin", y_id="stroke"),
        q("do_directional", "do", True, ["executable", "conflict"], x_id="drug_dir", y_id="sbp"),
        q("do_interval", "do", True, ["executable", "conflict"], x_id="drug_int", y_id="ldl"),
        q("do_heterogeneity", "do", True, ["executable", "heterogeneity"], x_id="drug_het", y_id="egfr"),
        q("do_worked", "do", True, ["executable", "mixed_mtype"], x_id="sglt2i", y_id="mace"),
        q("do_malformed", "do", False, ["missing_field"], x_id="sglt2i"),
        q("med_chain", "med", True, ["executable", "assumption_required"], x_id="exercise", m_id="bmi_change", y_id="sbp_change"),
        q("med_missing_path", "med", False, ["missing_path"], x_id="smoking", m_id="inflammation", y_id="cvd"),
        q("joint_ok", "joint", True, ["executable", "assumption_required"], x_id="drug_j1", x2_id="drug_j2", y_id="mortality"),
        q("joint_missing_leg", "joint", False, ["missing_edge"], x_id="drug_j1", x2_id="drug_j3", y_id="mortality"),
        q("joint_mixed", "joint", False, ["mixed_mtype"], x_id="drug_j1", x2_id="drug_j4", y_id="mortality"),
        q("cf_t2dm", "cf", True, ["executable", "assumption_required", "mixed_mtype"], x_id="sglt2i", y_id="mace", z={"population": "t2dm"}),
        q("cf_ckd", "cf", False, ["missing_edge"], x_id="sglt2i", y_id="mace", z={"population": "ckd"}),
        q("cf_no_context", "cf", False, ["missing_field"], x_id="sglt2i", y_id="mace"),
        q("cate_elderly", "cate", True, ["executable"], x_id="statin_c", y_id="mi", z="elderly"),
        q("cate_young", "cate", False, ["no_subgroup_evidence"], x_id="statin_c", y_id="mi", z="young"),
        q("cate_absent", "cate", False, ["missing_edge"], x_id="statin_c", y_id="stroke", z="elderly"),
        q("traj_conflict", "traj", True, ["executable", "conflict"], x_id="insulin_t", y_id="weight_gain", time_set=["fixed:4", "fixed:6"]),
        q("traj_partial", "traj", False, ["executable", "conflict", "insufficient_time_coverage", "missing_edge"],
          x_id="insulin_t", y_id="weight_gain", time_set=["fixed:4", "fixed:6", "fixed:7"]),
        q("traj_empty", "traj", False, ["missing_field"], x_id="insulin_t", y_id="weight_gain"),
    ]


def _random_extras(rng: random.Random, count: int) -> _Group:
    """Singleton buckets on distinct (x, y) pairs drawn from shared node pools."""
    xs = [f"rx{i:02d}" for i in range(12)]
    ys = [f"ry{i:02d}" for i in range(12)]
    pairs = rng.sample([(x, y) for x in xs for y in ys], count)
    # a few outcome->outcome links give the graph mediators and longer paths
    pairs += rng.sample([(a, b) for a in ys for b in ys if a != b], count // 4)
    cards, buckets = [], {}
    for i, (x, y) in enumerate(pairs):
        cid = f"rand_{i:03d}"
        if rng.random() < 0.5:
            hr = round(rng.uniform(0.5, 1.5), 3)
            half = round(rng.uniform(0.05, 0.3), 3)
            eff = _effect("general", x, y, "HR", "ratio", hr, (round(hr * (1 - half), 4), round(hr * (1 + half), 4)))
            fam = "ratio"
        else:
            md = round(rng.uniform(-1, 1), 3)
            half = round(rng.uniform(0.05, 0.6), 3)
            eff = _effect("general", x, y, "MD", "difference", md, (round(md - half, 4), round(md + half, 4)), outcome_type="continuous")
            fam = "difference"
        grade = rng.choice("ABC")
        cards.append(_card(cid, grade, rng.randint(50, 50_000), rng.choice(["none", "basic", "rich"]), eff))
        buckets[f"general|{x}|{y}|fixed:6|arm_vs_control|{fam}"] = _bucket([f"{cid}#0"], f"{cid}#0")
    return _Group("random_extras", cards, buckets)


def build_fixtures(seed: int = 0, n_random: int = 40) -> tuple[list[dict[str, Any]], dict[str, Any]]:
    groups = _designed_groups() + [_random_extras(random.Random(seed), n_random)]
    cards = [c for grp in groups for c in grp.cards]
    buckets = {k: v for grp in groups for k, v in grp.buckets.items()}
    manifest = {
        "seed": seed,
        "card_count": len(cards),
        "bucket_counts": {mode: sum(grp.count(mode) for grp in groups) for mode in ABLATION_MODES},
        "buckets": dict(sorted(buckets.items())),
        "groups": {grp.name: sorted(c["card_id"] for c in grp.cards) for grp in groups},
        "queries": _queries(),
    }
    return cards, manifest


def _write_json(path: Path, obj: Any) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n", encoding="utf-8")


def emit_fixtures(seed: int, out: Union[str, Path], n_random: int = 40) -> dict[str, Any]:
    """Write one JSON file per card plus manifest.json; returns the manifest."""
    root = Path(out)
    root.mkdir(parents=True, exist_ok=True)
    cards, manifest = build_fixtures(seed, n_random)
    for card in cards:
        _write_json(root / f"{card['card_id']}.json", card)
    _write_json(root / "manifest.json", manifest)
    return manifest


def query_from_manifest(entry: dict[str, Any]) -> QuerySpec:
    spec = dict(entry["spec"])
    constraints = QueryConstraints(**spec.pop("constraints", {}))
    spec["time_set"] = tuple(spec.get("time_set", ()))
    return QuerySpec(kind=entry["kind"], constraints=constraints, **spec)
