"""Evidence-card files: parsing, schema validation and lowering.

A card is a JSON document describing one study with one or more effects.
Each effect lowers to exactly one `EvidenceObject`. Top-level keys that
compilation does not consume are kept verbatim in `Provenance.meta`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

import jsonschema

from .evidence_model import (
    TTE,
    ClaimObject,
    Duration,
    Estimand,
    EvidenceObject,
    InterventionContrast,
    Interval,
    MeasureFunctional,
    Missing,
    OutcomeSpec,
    PopulationSpec,
    Provenance,
    Violation,
    measure_vocabulary,
    normalize_token,
)

KNOWN_KEYS = ("card_id", "paper", "grade", "design", "effects")

_NUM = {"type": "number"}
_OPT_NUM = {"type": ["number", "null"]}
_OPT_STR = {"type": ["string", "null"]}
_DURATION = {
    "type": "object",
    "required": ["value", "unit"],
    "properties": {"value": _NUM, "unit": {"type": "string", "minLength": 1}},
}

CARD_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": list(KNOWN_KEYS),
    "properties": {
        "card_id": {"type": "string", "minLength": 1},
        "paper": {
            "type": "object",
            "properties": {"doi": _OPT_STR, "title": _OPT_STR, "year": {"type": ["integer", "null"]}},
        },
        "grade": {"enum": ["A", "B", "C", "Tier A", "Tier B", "Tier C"]},
        "design": {
            "type": "object",
            "properties": {
                "n": {"type": ["integer", "null"], "minimum": 1},
                "adjustment": {"enum": ["none", "basic", "rich"]},
            },
        },
        "effects": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["population", "intervention", "outcome", "time", "measure", "estimate"],
                "properties": {
                    "effect_index": {"type": "integer", "minimum": 0},
                    "population": {
                        "type": "object",
                        "required": ["bucket"],
                        "properties": {
                            "bucket": {"type": "string", "minLength": 1},
                            "setting": {"type": "object", "additionalProperties": {"type": "string"}},
                        },
                    },
                    "intervention": {
                        "type": "object",
                        "required": ["id", "contrast_type"],
                        "properties": {
                            "id": {"type": "string", "minLength": 1},
                            "contrast_type": {"type": "string"},
                            "delta": _OPT_NUM,
                            "unit": _OPT_STR,
                            "x0": _OPT_STR,
                            "x1": _OPT_STR,
                        },
                    },
                    "outcome": {
                        "type": "object",
                        "required": ["id", "type"],
                        "properties": {
                            "id": {"type": "string", "minLength": 1},
                            "type": {"type": "string"},
                            "unit": _OPT_STR,
                            "notes": _OPT_STR,
                        },
                    },
                    "time": {
                        "type": "object",
                        "required": ["kind"],
                        "properties": {
                            "kind": {"enum": ["duration", "interval", "tte", "missing"]},
                            "value": _NUM,
                            "unit": {"type": "string"},
                            "reference": {"type": "string"},
                            "event": {"type": "string"},
                            "followup": {"oneOf": [_DURATION, {"type": "null"}]},
                            "reason": {"type": "string"},
                        },
                        "allOf": [
                            {
                                "if": {"properties": {"kind": {"enum": ["duration", "interval"]}}},
                                "then": {"required": ["value", "unit"]},
                            },
                            {"if": {"properties": {"kind": {"const": "tte"}}}, "then": {"required": ["event"]}},
                        ],
                    },
                    "measure": {
                        "type": "object",
                        "required": ["type", "reported_scale"],
                        "properties": {
                            "type": {"type": "string"},
                            "reported_scale": {"type": "string"},
                            "binding": _OPT_STR,
                        },
                    },
                    "estimate": {
                        "type": "object",
                        "required": ["point"],
                        "properties": {
                            "point": _NUM,
                            "ci": {"oneOf": [{"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}, {"type": "null"}]},
                            "se": _OPT_NUM,
                            "p": _OPT_NUM,
                        },
                    },
                },
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(CARD_SCHEMA)


class CardParseError(ValueError):
    """The document is not well-formed JSON; the message carries line and column."""


class CardSchemaError(ValueError):
    def __init__(self, source: str, violations: list[Violation]):
        self.source = source
        self.violations = violations
        super().__init__(f"{source}: " + "; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class EvidenceCardFile:
    card_id: str
    paper: Mapping[str, Any]
    grade: str
    design: Mapping[str, Any]
    effects: tuple[Mapping[str, Any], ...]
    extra: Mapping[str, Any] = field(default_factory=dict)


def schema_violations(data: Any) -> list[Violation]:
    out = []
    for err in sorted(_VALIDATOR.iter_errors(data), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        path = "/".join(str(p) for p in err.absolute_path) or "$"
        out.append(Violation(path, err.message))
    if isinstance(data, dict) and isinstance(data.get("effects"), list):
        seen: set[int] = set()
        for pos, eff in enumerate(data["effects"]):
            idx = eff.get("effect_index", pos) if isinstance(eff, dict) else pos
            if idx in seen:
                out.append(Violation(f"effects/{pos}/effect_index", f"duplicate effect_index {idx}"))
            seen.add(idx)
    return out


def load_document(source: Union[str, Path, bytes, Mapping[str, Any]], name: Optional[str] = None) -> tuple[str, Any]:
    """Return (display name, decoded JSON) for a path, raw bytes/text, or an already-decoded mapping."""
    if isinstance(source, Mapping):
        return name or "<card>", dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        label, text = name or str(path), path.read_text(encoding="utf-8")
    else:
        label = name or "<card>"
        text = source.decode("utf-8") if isinstance(source, bytes) else source
    try:
        return label, json.loads(text)
    except json.JSONDecodeError as exc:
        raise CardParseError(f"{label}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _grade(raw: str) -> str:
    return raw.removeprefix("Tier ").strip()


def _unit(raw: Optional[str]) -> str:
    u = (raw or "").strip().lower()
    return u[:-1] if u.endswith("s") else u


def _horizon(t: Mapping[str, Any]) -> Any:
    kind = t["kind"]
    if kind == "duration":
        return Duration(float(t["value"]), _unit(t["unit"]))
    if kind == "interval":
        return Interval(float(t["value"]), _unit(t["unit"]), t.get("reference", "baseline"))
    if kind == "tte":
        fu = t.get("followup")
        return TTE(normalize_token(t["event"]), None if fu is None else Duration(float(fu["value"]), _unit(fu["unit"])))
    return Missing(t.get("reason") or "unreported")


def _opt_float(v: Any) -> Optional[float]:
    return None if v is None else float(v)


def lower(card: EvidenceCardFile, measure_types: Optional[Mapping[str, str]] = None) -> list[EvidenceObject]:
    vocab = measure_types if measure_types is not None else measure_vocabulary()
    paper = card.paper
    ref = paper.get("doi") or paper.get("title") or card.card_id
    meta = {"paper": dict(paper), **card.extra}
    out = []
    for pos, eff in enumerate(card.effects):
        pop, iv, oc, ms, est = eff["population"], eff["intervention"], eff["outcome"], eff["measure"], eff["estimate"]
        estimand = Estimand(
            population=PopulationSpec(normalize_token(pop["bucket"]), dict(pop.get("setting") or {})),
            intervention=InterventionContrast(
                normalize_token(iv["id"]),
                iv["contrast_type"],
                _opt_float(iv.get("delta")),
                iv.get("unit"),
                iv.get("x0"),
                iv.get("x1"),
            ),
            outcome=OutcomeSpec(normalize_token(oc["id"]), oc["type"], oc.get("unit"), oc.get("notes")),
            horizon=_horizon(eff["time"]),
            measure=MeasureFunctional(vocab.get(ms["type"], "unknown"), ms["type"], ms["reported_scale"], ms.get("binding")),
        )
        ci = est.get("ci")
        claim = ClaimObject(
            float(est["point"]),
            None if ci is None else (float(ci[0]), float(ci[1])),
            _opt_float(est.get("se")),
            _opt_float(est.get("p")),
        )
        prov = Provenance(
            ref=ref,
            grade=card.grade,
            card_id=card.card_id,
            n=card.design.get("n"),
            adjustment=card.design.get("adjustment", "none"),
            effect_index=int(eff.get("effect_index", pos)),
            meta=meta,
        )
        out.append(EvidenceObject(estimand, claim, prov))
    return out


def card_from_data(data: Mapping[str, Any], source: str = "<card>") -> EvidenceCardFile:
    violations = schema_violations(data)
    if violations:
        raise CardSchemaError(source, violations)
    return EvidenceCardFile(
        card_id=data["card_id"],
        paper=dict(data["paper"]),
        grade=_grade(data["grade"]),
        design=dict(data["design"]),
        effects=tuple(data["effects"]),
        extra={k: v for k, v in data.items() if k not in KNOWN_KEYS},
    )


def parse_card(
    source: Union[str, Path, bytes, Mapping[str, Any]],
    measure_types: Optional[Mapping[str, str]] = None,
    name: Optional[str] = None,
) -> tuple[EvidenceCardFile, list[EvidenceObject]]:
    label, data = load_document(source, name)
    card = card_from_data(data, label)
    return card, lower(card, measure_types)


def _horizon_to_card(h: Any) -> dict[str, Any]:
    if isinstance(h, Duration):
        return {"kind": "duration", "value": h.value, "unit": h.unit}
    if isinstance(h, Interval):
        return {"kind": "interval", "value": h.length_value, "unit": h.length_unit, "reference": h.reference}
    if isinstance(h, TTE):
        fu = None if h.followup is None else {"value": h.followup.value, "unit": h.followup.unit}
        return {"kind": "tte", "event": h.event, "followup": fu}
    if isinstance(h, Missing):
        return {"kind": "missing", "reason": h.reason}
    raise ValueError(f"horizon {h!r} has no card representation")


def effect_to_card(e: EvidenceObject) -> dict[str, Any]:
    est, c = e.estimand, e.claim
    iv, oc, ms = est.intervention, est.outcome, est.measure
    return {
        "effect_index": e.provenance.effect_index,
        "population": {"bucket": est.population.p_bucket, "setting": dict(est.population.p_setting)},
        "intervention": {"id": iv.intervention_id, "contrast_type": iv.c_type, "delta": iv.delta, "unit": iv.unit, "x0": iv.x0, "x1": iv.x1},
        "outcome": {"id": oc.outcome_id, "type": oc.outcome_type, "unit": oc.unit, "notes": oc.notes},
        "time": _horizon_to_card(est.horizon),
        "measure": {"type": ms.m_type, "reported_scale": ms.reported_scale, "binding": ms.binding},
        "estimate": {"point": c.theta, "ci": None if c.ci is None else list(c.ci), "se": c.se, "p": c.p_value},
    }


def evidence_to_card(objs: list[EvidenceObject]) -> dict[str, Any]:
    """Inverse of lowering for objects that share one card's provenance."""
    if not objs:
        raise ValueError("need at least one evidence object")
    prov = objs[0].provenance
    if any(o.provenance.card_id != prov.card_id for o in objs):
        raise ValueError("evidence objects come from different cards")
    meta = dict(prov.meta)
    paper = meta.pop("paper", {"doi": prov.ref})
    return {
        "card_id": prov.card_id,
        "paper": paper,
        "grade": prov.grade,
        "design": {"n": prov.n, "adjustment": prov.adjustment},
        "effects": [effect_to_card(o) for o in sorted(objs, key=lambda o: o.provenance.effect_index)],
        **meta,
    }
