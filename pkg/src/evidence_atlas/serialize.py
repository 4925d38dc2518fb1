"""JSON codec for the package's frozen dataclasses.

Encoding is plain `dataclasses` field order; decoding is driven by type hints.
Horizon values sit in `Any`-typed fields and carry a `kind` tag.
"""

from __future__ import annotations

import collections.abc
import dataclasses
import json
import types
import typing
from functools import lru_cache
from typing import Any, Union

from .evidence_model import TTE, Duration, Interval, Missing
from .horizon import CanonicalHorizonClass

_HORIZON_KINDS: dict[str, type] = {
    "duration": Duration,
    "interval": Interval,
    "tte": TTE,
    "missing": Missing,
    "class": CanonicalHorizonClass,
}
_KIND_OF = {v: k for k, v in _HORIZON_KINDS.items()}


def to_jsonable(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        kind = _KIND_OF.get(type(obj))
        if kind is not None:
            out = {"kind": kind, **out}
        return out
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, typing.Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    return obj


def dumps(obj: Any) -> str:
    """Canonical text form: sorted keys, fixed separators, trailing newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=1, ensure_ascii=False, allow_nan=False) + "\n"


@lru_cache(maxsize=None)
def _hints(cls: type) -> dict[str, Any]:
    return typing.get_type_hints(cls)


def decode_horizon(data: Any) -> Any:
    if not isinstance(data, dict) or data.get("kind") not in _HORIZON_KINDS:
        raise ValueError(f"not an encoded horizon: {data!r}")
    body = {k: v for k, v in data.items() if k != "kind"}
    return from_jsonable(_HORIZON_KINDS[data["kind"]], body)


def from_jsonable(tp: Any, data: Any) -> Any:
    if tp is Any:
        if isinstance(data, dict) and data.get("kind") in _HORIZON_KINDS:
            return decode_horizon(data)
        return data
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is Union or (hasattr(types, "UnionType") and isinstance(tp, types.UnionType)):
        if data is None and type(None) in args:
            return None
        members = [a for a in args if a is not type(None)]
        if len(members) == 1:
            return from_jsonable(members[0], data)
        return from_jsonable(Any, data)
    if dataclasses.is_dataclass(tp):
        hints = _hints(tp)
        kwargs = {}
        for f in dataclasses.fields(tp):
            if f.name in data:
                kwargs[f.name] = from_jsonable(hints[f.name], data[f.name])
        return tp(**kwargs)
    if origin is tuple:
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(from_jsonable(args[0], x) for x in data)
        if args:
            return tuple(from_jsonable(a, x) for a, x in zip(args, data))
        return tuple(data)
    if origin is list:
        return [from_jsonable(args[0] if args else Any, x) for x in data]
    if origin in (dict, collections.abc.Mapping):
        vt = args[1] if len(args) == 2 else Any
        if vt is Any:  # opaque metadata, never horizon-decoded
            return dict(data)
        return {k: from_jsonable(vt, v) for k, v in data.items()}
    if tp is float and isinstance(data, int) and not isinstance(data, bool):
        return float(data)
    return data
