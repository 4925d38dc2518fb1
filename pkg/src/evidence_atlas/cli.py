"""Command-line surface: compile, query, stats, conflicts, validate, fixtures.

Exit codes: 0 when the command ran (non-executable answers are data), 2 on
input errors such as unreadable files, schema violations or bad flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from .atlas import Atlas, graph_stats, hub_ranking
from .bucketing import ABLATIONS
from .cards import CardParseError, CardSchemaError, parse_card
from .compile import CompileError, compile_corpus
from .config import load_config
from .evidence_model import normalize_token, validate_evidence_object
from .fixtures import emit_fixtures
from .horizon import HorizonError
from .query import QUERY_KINDS, AnswerObject, MediationAnswer, QueryConstraints, QueryResult, QuerySpec, result_to_jsonable, run_query
from .serialize import to_jsonable


class InputError(Exception):
    pass


def _emit(obj: Any) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=1, ensure_ascii=False) + "\n")


def _load_atlas(path: str) -> Atlas:
    try:
        return Atlas.load(path)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read atlas {path}: {exc}") from None


def _parse_z(kind: str, raw: Optional[str]) -> Any:
    if raw is None:
        return None
    text = raw.strip()
    if kind == "cate":
        return text
    if text.startswith("{"):
        try:
            z = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"--z is not valid JSON: {exc}") from None
        if not isinstance(z, dict):
            raise InputError("--z must be a JSON object")
        return z
    if "=" in text:
        return dict(part.split("=", 1) for part in text.split(",") if part)
    return {"population": text}


def _fmt(x: Optional[float]) -> str:
    return "-" if x is None else f"{x:.4f}"


def _answer_text(ans: AnswerObject, indent: str = "") -> list[str]:
    lines = [f"{indent}flags: {', '.join(ans.flags)}"]
    if ans.estimand is not None:
        e = ans.estimand
        lines.append(
            f"{indent}estimand: {e.population.p_bucket} | {e.intervention.intervention_id} -> {e.outcome.outcome_id}"
            f" | {e.horizon.encode()} | {e.intervention.c_type} | {e.measure.m_type} ({e.measure.s_canon} scale)"
        )
    if ans.theta_hat is not None:
        ci = "none" if ans.ci is None else f"[{_fmt(ans.ci[0])}, {_fmt(ans.ci[1])}]"
        lines.append(f"{indent}theta_hat: {_fmt(ans.theta_hat)}  CI {ci}")
    if ans.provenance is not None:
        p = ans.provenance
        lines.append(f"{indent}provenance: {p.ref} (claim {p.claim_id}, grade {p.grade})")
    if ans.conflict is not None:
        c = ans.conflict
        lines.append(f"{indent}conflict: {', '.join(c.types) or 'none'} (severity {c.severity})")
    for key in ans.witness_keys:
        lines.append(f"{indent}witness: {key}")
    return lines


def _result_text(result: QueryResult) -> str:
    if isinstance(result, AnswerObject):
        lines = _answer_text(result)
    elif isinstance(result, MediationAnswer):
        lines = []
        for name, ans in (("TE", result.te), ("NDE", result.nde), ("NIE", result.nie)):
            lines.append(f"{name}:")
            lines += _answer_text(ans, "  ")
    else:
        lines = []
        for tau, ans in result:
            lines.append(f"{tau or '(no horizon)'}:")
            lines += _answer_text(ans, "  ")
    return "\n".join(lines) + "\n"


def cmd_compile(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, HorizonError) as exc:
        raise InputError(f"bad config: {exc}") from None
    if args.ablation:
        cfg = cfg.with_ablation(args.ablation)
    try:
        atlas = compile_corpus(args.cards, cfg, workers=args.workers)
    except CompileError as exc:
        raise InputError(str(exc)) from None
    atlas.save(args.out)
    claims = sum(len(e.claims) for e in atlas.edges)
    print(f"compiled {claims} claims into {len(atlas.edges)} buckets; {len(atlas.rejected)} rejected -> {args.out}")
    for r in atlas.rejected:
        print(f"  rejected {r.claim_id}: {'; '.join(r.reasons)}")
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    atlas = _load_atlas(args.atlas)
    constraints = QueryConstraints(
        p_bucket=None if args.population is None else normalize_token(args.population),
        c_type=args.contrast,
        tau=args.tau,
        m_family=args.mfamily,
    )
    norm = lambda v: None if v is None else normalize_token(v)  # noqa: E731
    spec = QuerySpec(
        kind=args.kind,
        x_id=norm(args.x),
        y_id=norm(args.y),
        x2_id=norm(args.x2),
        m_id=norm(args.m),
        constraints=constraints,
        z=_parse_z(args.kind, args.z),
        time_set=tuple(t.strip() for t in (args.times or "").split(",") if t.strip()),
    )
    result = run_query(atlas, spec)
    if args.format == "machine":
        _emit(result_to_jsonable(result))
    else:
        sys.stdout.write(_result_text(result))
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    atlas = _load_atlas(args.atlas)
    stats = graph_stats(atlas)
    top_x, top_y = hub_ranking(atlas, args.top)
    if args.format == "machine":
        _emit({"stats": to_jsonable(stats), "top_interventions": top_x, "top_outcomes": top_y, "bucket_count": len(atlas.edges)})
        return 0
    print(f"buckets (multi-edges): {len(atlas.edges)}")
    for name, value in to_jsonable(stats).items():
        print(f"{name}: {value:.6g}" if isinstance(value, float) else f"{name}: {value}")
    print("top interventions: " + ", ".join(f"{n} ({d})" for n, d in top_x))
    print("top outcomes: " + ", ".join(f"{n} ({d})" for n, d in top_y))
    return 0


def cmd_conflicts(args: argparse.Namespace) -> int:
    atlas = _load_atlas(args.atlas)
    rows = [
        {"key": e.key_id, "types": list(e.conflict.types), "severity": e.conflict.severity, "witnesses": to_jsonable(e.conflict.witnesses)}
        for e in atlas.edges
        if e.conflict.types
    ]
    if args.format == "machine":
        _emit(rows)
        return 0
    print(f"{len(rows)} of {len(atlas.edges)} buckets carry conflict annotations")
    for r in rows:
        print(f"{r['key']}: {', '.join(r['types'])} ({r['severity']})")
        for w in r["witnesses"]:
            print(f"  {w['conflict_type']}: {', '.join(w['claims'])} statistic={w['statistic']:.6g}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    paths: list[Path] = []
    for p in map(Path, args.paths):
        if p.is_dir():
            paths += sorted(q for q in p.glob("*.json") if q.name != "manifest.json")
        elif p.exists():
            paths.append(p)
        else:
            raise InputError(f"no such file: {p}")
    bad = 0
    for path in paths:
        problems: list[str] = []
        try:
            _, objs = parse_card(path)
            for o in objs:
                problems += [f"{o.provenance.claim_id}: {v}" for v in validate_evidence_object(o)]
        except CardParseError as exc:
            problems.append(str(exc))
        except CardSchemaError as exc:
            problems += [str(v) for v in exc.violations]
        if problems:
            bad += 1
            print(f"{path}: INVALID")
            for msg in problems:
                print(f"  {msg}")
        else:
            print(f"{path}: ok")
    return 2 if bad else 0


def cmd_fixtures(args: argparse.Namespace) -> int:
    manifest = emit_fixtures(args.seed, args.out, n_random=args.n_random)
    print(f"wrote {manifest['card_count']} cards and manifest.json to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="evidence-atlas", description="Compile evidence cards into a queryable estimand atlas.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a directory of cards into an atlas file")
    c.add_argument("--cards", required=True, help="directory of *.json cards")
    c.add_argument("--config", help="build config JSON (defaults if omitted)")
    c.add_argument("--out", required=True, help="atlas output path")
    c.add_argument("--ablation", choices=ABLATIONS)
    c.add_argument("--workers", type=int, default=1)
    c.set_defaults(func=cmd_compile)

    q = sub.add_parser("query", help="run a typed query against an atlas")
    q.add_argument("kind", choices=QUERY_KINDS)
    q.add_argument("--atlas", required=True)
    for flag in ("--x", "--x2", "--m", "--y", "--population", "--tau", "--z", "--times"):
        q.add_argument(flag)
    q.add_argument("--contrast", choices=("per_unit", "binary", "arm_vs_control", "categorical"))
    q.add_argument("--mfamily", choices=("ratio", "difference"))
    q.add_argument("--format", choices=("text", "machine"), default="text")
    q.set_defaults(func=cmd_query)

    s = sub.add_parser("stats", help="graph statistics of an atlas")
    s.add_argument("--atlas", required=True)
    s.add_argument("--top", type=int, default=5)
    s.add_argument("--format", choices=("text", "machine"), default="text")
    s.set_defaults(func=cmd_stats)

    k = sub.add_parser("conflicts", help="list conflict annotations")
    k.add_argument("--atlas", required=True)
    k.add_argument("--format", choices=("text", "machine"), default="text")
    k.set_defaults(func=cmd_conflicts)

    v = sub.add_parser("validate", help="validate card files or directories")
    v.add_argument("paths", nargs="+")
    v.set_defaults(func=cmd_validate)

    f = sub.add_parser("fixtures", help="write the seeded fixture corpus and manifest")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", required=True)
    f.add_argument("--n-random", type=int, default=40)
    f.set_defaults(func=cmd_fixtures)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


run_cli = main


if __name__ == "__main__":
    raise SystemExit(main())
