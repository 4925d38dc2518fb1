"""Multi-edge estimand atlas and its structural statistics.

One edge per non-empty bucket; parallel edges between the same (X, Y) pair
differ in their key. Graph statistics are taken on the simple directed graph
of distinct (X, Y) pairs.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Optional

from .bucketing import Bucket, BucketKey
from .canonicalize import CanonicalClaim
from .conflict import ConflictAnnotation, HeterogeneityConfig, detect_conflicts
from .quality import QualityBreakdown, QualityConfig, select_default
from .serialize import dumps, from_jsonable


@dataclass(frozen=True)
class AtlasEdge:
    x_id: str
    y_id: str
    key_id: str
    key: BucketKey
    claims: tuple[CanonicalClaim, ...]
    conflict: ConflictAnnotation
    default_claim_id: str
    poolable_ids: tuple[str, ...]
    quality: tuple[QualityBreakdown, ...]

    @property
    def default(self) -> CanonicalClaim:
        for c in self.claims:
            if c.claim_id == self.default_claim_id:
                return c
        raise KeyError(self.default_claim_id)

    @property
    def default_quality(self) -> QualityBreakdown:
        for q in self.quality:
            if q.claim_id == self.default_claim_id:
                return q
        raise KeyError(self.default_claim_id)

    @property
    def m_types(self) -> tuple[str, ...]:
        return tuple(sorted({c.estimand.measure.m_type for c in self.claims}))

    @property
    def flags(self) -> tuple[str, ...]:
        out = set()
        if len(self.m_types) > 1:
            out.add("mixed_mtype")
        if self.conflict.has_conflict:
            out.add("conflict")
        if "heterogeneity" in self.conflict.types:
            out.add("heterogeneity")
        return tuple(sorted(out))


@dataclass(frozen=True)
class RejectedClaim:
    claim_id: str
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class Atlas:
    edges: tuple[AtlasEdge, ...] = ()
    build_config: dict[str, Any] = field(default_factory=dict)
    build_digest: str = ""
    rejected: tuple[RejectedClaim, ...] = ()

    def to_json(self) -> str:
        return dumps(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_json(cls, text: str) -> "Atlas":
        return from_jsonable(cls, json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "Atlas":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    unique_edge_count: int
    pure_intervention_count: int
    pure_outcome_count: int
    mediator_count: int
    wcc_count: int
    largest_wcc_size: int
    reachable_pair_count: int
    avg_path_length: float
    diameter: int
    density: float


def build_edge(b: Bucket, het: HeterogeneityConfig, qual: QualityConfig) -> AtlasEdge:
    sel = select_default(b, qual)
    return AtlasEdge(
        x_id=b.key.x_id,
        y_id=b.key.y_id,
        key_id=b.key.encode(),
        key=b.key,
        claims=b.claims,
        conflict=detect_conflicts(b, het),
        default_claim_id=sel.default.claim_id,
        poolable_ids=tuple(c.claim_id for c in sel.poolable),
        quality=sel.breakdowns,
    )


def build_atlas(
    buckets: Iterable[Bucket],
    het: Optional[HeterogeneityConfig] = None,
    qual: Optional[QualityConfig] = None,
    build_config: Optional[dict[str, Any]] = None,
    build_digest: str = "",
    rejected: Iterable[RejectedClaim] = (),
) -> Atlas:
    het = het or HeterogeneityConfig()
    qual = qual or QualityConfig()
    edges = sorted((build_edge(b, het, qual) for b in buckets if b.claims), key=lambda e: e.key_id)
    return Atlas(
        edges=tuple(edges),
        build_config=dict(build_config or {}),
        build_digest=build_digest,
        rejected=tuple(sorted(rejected, key=lambda r: r.claim_id)),
    )


def _pairs(a: Atlas | Iterable[tuple[str, str]]) -> list[tuple[str, str]]:
    if isinstance(a, Atlas):
        return sorted({(e.x_id, e.y_id) for e in a.edges})
    return sorted(set(a))


def node_roles(a: Atlas | Iterable[tuple[str, str]]) -> dict[str, str]:
    pairs = _pairs(a)
    outs = {x for x, _ in pairs}
    ins = {y for _, y in pairs}
    roles = {}
    for node in sorted(outs | ins):
        if node in outs and node in ins:
            roles[node] = "mediator"
        elif node in outs:
            roles[node] = "pure_intervention"
        else:
            roles[node] = "pure_outcome"
    return roles


def hub_ranking(a: Atlas | Iterable[tuple[str, str]], k: int = 5) -> tuple[list[tuple[str, int]], list[tuple[str, int]]]:
    """Top-k interventions by distinct outcomes and top-k outcomes by distinct interventions."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out_deg: dict[str, int] = {}
    in_deg: dict[str, int] = {}
    for x, y in _pairs(a):
        out_deg[x] = out_deg.get(x, 0) + 1
        in_deg[y] = in_deg.get(y, 0) + 1
    order = lambda kv: (-kv[1], kv[0])  # noqa: E731
    return sorted(out_deg.items(), key=order)[:k], sorted(in_deg.items(), key=order)[:k]


def graph_stats(a: Atlas | Iterable[tuple[str, str]]) -> GraphStats:
    """Structure of the simple directed graph; self-loops add nodes but no edges or paths."""
    all_pairs = _pairs(a)
    nodes = sorted({x for x, _ in all_pairs} | {y for _, y in all_pairs})
    pairs = [(x, y) for x, y in all_pairs if x != y]
    succ: dict[str, list[str]] = {n: [] for n in nodes}
    undirected: dict[str, set[str]] = {n: set() for n in nodes}
    for x, y in pairs:
        succ[x].append(y)
        undirected[x].add(y)
        undirected[y].add(x)

    seen: set[str] = set()
    sizes = []
    for n in nodes:
        if n in seen:
            continue
        comp, stack = 0, [n]
        seen.add(n)
        while stack:
            u = stack.pop()
            comp += 1
            for v in undirected[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        sizes.append(comp)

    reachable, total_len, diameter = 0, 0, 0
    for s in nodes:
        dist = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for v in succ[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    q.append(v)
        for v, d in dist.items():
            if v != s:
                reachable += 1
                total_len += d
                diameter = max(diameter, d)

    roles = node_roles(all_pairs)
    n = len(nodes)
    return GraphStats(
        node_count=n,
        unique_edge_count=len(pairs),
        pure_intervention_count=sum(r == "pure_intervention" for r in roles.values()),
        pure_outcome_count=sum(r == "pure_outcome" for r in roles.values()),
        mediator_count=sum(r == "mediator" for r in roles.values()),
        wcc_count=len(sizes),
        largest_wcc_size=max(sizes, default=0),
        reachable_pair_count=reachable,
        avg_path_length=total_len / reachable if reachable else 0.0,
        diameter=diameter,
        density=len(pairs) / (n * (n - 1)) if n > 1 else 0.0,
    )
