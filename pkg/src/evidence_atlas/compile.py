"""Corpus compilation: cards in, atlas out.

validate -> canonicalize -> bucket -> detect -> select -> build. Per-card work
is independent, so it may run in a process pool; the result never depends on
the worker count because claims are re-sorted before partitioning.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Union

from .atlas import Atlas, RejectedClaim, build_atlas
from .bucketing import partition
from .canonicalize import CanonicalClaim, CanonicalizationError, canonicalize
from .cards import CardParseError, CardSchemaError, card_from_data, load_document, lower
from .config import BuildConfig
from .evidence_model import validate_evidence_object


class CompileError(ValueError):
    pass


@dataclass(frozen=True)
class CardOutcome:
    claims: tuple[CanonicalClaim, ...]
    rejected: tuple[RejectedClaim, ...]


CardInput = Union[str, Path, Mapping[str, Any]]


def load_card_dir(directory: Union[str, Path]) -> list[tuple[str, Any]]:
    """Decode every *.json file in a directory (sorted by name); the manifest file is skipped."""
    root = Path(directory)
    if not root.is_dir():
        raise CompileError(f"{root} is not a directory")
    out = []
    for path in sorted(root.glob("*.json")):
        if path.name == "manifest.json":
            continue
        try:
            out.append(load_document(path))
        except CardParseError as exc:
            out.append((str(path), exc))
    return out


def _process_card(label: str, data: Any, cfg: BuildConfig) -> CardOutcome:
    if isinstance(data, Exception):
        return CardOutcome((), (RejectedClaim(f"{label}#*", (str(data),)),))
    try:
        card = card_from_data(data, label)
    except CardSchemaError as exc:
        cid = data.get("card_id") if isinstance(data, dict) and isinstance(data.get("card_id"), str) else label
        return CardOutcome((), (RejectedClaim(f"{cid}#*", tuple(str(v) for v in exc.violations)),))
    vocab = cfg.measure_types
    ccfg = cfg.canonicalize_config()
    claims, rejected = [], []
    for e in lower(card, vocab):
        violations = validate_evidence_object(e, vocab)
        if violations:
            rejected.append(RejectedClaim(e.provenance.claim_id, tuple(str(v) for v in violations)))
            continue
        try:
            claims.append(canonicalize(e, ccfg))
        except CanonicalizationError as exc:
            rejected.append(RejectedClaim(e.provenance.claim_id, (str(exc),) + tuple(exc.flags)))
    return CardOutcome(tuple(claims), tuple(rejected))


def _process_star(args: tuple[str, Any, BuildConfig]) -> CardOutcome:
    return _process_card(*args)


def build_digest(docs: Iterable[tuple[str, Any]], cfg: BuildConfig) -> str:
    """sha256 over the decoded cards (sorted by card id, then label) and the full config."""

    def sort_key(item: tuple[str, Any]) -> tuple[str, str]:
        label, data = item
        cid = data.get("card_id") if isinstance(data, dict) else None
        return (str(cid or ""), label if cid is None else "")

    payload = [
        data if not isinstance(data, Exception) else {"unparsed": label, "error": str(data)}
        for label, data in sorted(docs, key=sort_key)
    ]
    blob = json.dumps({"cards": payload, "config": cfg.to_dict()}, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def compile_corpus(
    cards: Union[str, Path, Iterable[CardInput]],
    cfg: Optional[BuildConfig] = None,
    workers: int = 1,
) -> Atlas:
    cfg = cfg or BuildConfig()
    if isinstance(cards, (str, Path)):
        docs = load_card_dir(cards)
    else:
        docs = []
        for i, item in enumerate(cards):
            if isinstance(item, Mapping):
                docs.append((f"<card {i}>", dict(item)))
            else:
                try:
                    docs.append(load_document(item))
                except CardParseError as exc:
                    docs.append((str(item), exc))

    seen: dict[str, str] = {}
    for label, data in docs:
        cid = data.get("card_id") if isinstance(data, dict) else None
        if isinstance(cid, str):
            if cid in seen:
                raise CompileError(f"duplicate card_id {cid!r} in {seen[cid]} and {label}")
            seen[cid] = label

    jobs = [(label, data, cfg) for label, data in docs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_process_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        outcomes = [_process_star(j) for j in jobs]

    claims = sorted((c for o in outcomes for c in o.claims), key=lambda c: c.sort_key)
    rejected = [r for o in outcomes for r in o.rejected]
    return build_atlas(
        partition(claims, cfg.ablation),
        cfg.heterogeneity,
        cfg.quality,
        build_config=cfg.to_dict(),
        build_digest=build_digest(docs, cfg),
        rejected=rejected,
    )
