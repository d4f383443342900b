import json
import math
import zlib
from typing import Any, Iterable

import numpy as np
from pydantic import BaseModel


def derive_seed(master_seed: int, *keys: int | str) -> int:
    """Mix a master seed with a counter path into an independent 64-bit subseed"""
    spawn_key = tuple(zlib.crc32(k.encode()) if isinstance(k, str) else int(k) for k in keys)
    state = np.random.SeedSequence(entropy=master_seed, spawn_key=spawn_key).generate_state(1, np.uint64)
    return int(state[0])


def _finite_or_none(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _finite_or_none(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite_or_none(v) for v in value]
    return value


def render_json(payload: BaseModel | dict) -> str:
    """Canonical JSON: sorted keys, two-space indent, inf/nan as null"""
    data = payload.model_dump(mode="python") if isinstance(payload, BaseModel) else payload
    return json.dumps(_finite_or_none(_plain(data)), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _plain(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return _plain(value.model_dump(mode="python"))
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, "__fspath__"):
        return str(value)
    return value


def format_residual(value: float | None) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return "inf"
    return f"{value:.2e}"


def text_table(headers: list[str], rows: Iterable[Iterable[Any]]) -> str:
    """Left-aligned plain text table"""
    cells = [[str(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    out = [line, "  ".join("-" * w for w in widths)]
    out.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells)
    return "\n".join(out) + "\n"
