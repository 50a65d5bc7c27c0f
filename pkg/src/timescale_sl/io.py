"""Deterministic JSON/CSV output and spec-file loading."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .domain import ProblemSpec, spec_from_dict
from .errors import StructuralError
from .forward import SolutionTrace, SpectralData


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = f"{x:.17g}"
    if all(ch not in text for ch in ".eEn"):
        text += ".0"
    return text


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with 17-significant-digit floats and insertion-ordered keys.

    Non-finite floats become null.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if hasattr(obj, "tolist"):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(obj, path: str | Path | None) -> str:
    text = dumps(obj) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_json(path: str | Path):
    """Parse a JSON file; parse failures are reported as StructuralError."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StructuralError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructuralError(f"parse error in {path}: {exc.msg} at line {exc.lineno}") from None


def validate_spec_file(path: str | Path, *, require_q: bool = True) -> ProblemSpec:
    data = read_json(path)
    try:
        return spec_from_dict(data, require_q=require_q)
    except StructuralError as exc:
        raise StructuralError(f"invalid problem spec {path}: {exc}") from None


def read_spectral_data(path: str | Path) -> SpectralData:
    return SpectralData.from_dict(read_json(path))


def csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([_fmt_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def trace_rows(trace: SolutionTrace):
    """Header plus one (t, phi, dphi) row per node; values include the trace's scale."""
    scale = math.exp(trace.log_scale)
    rows = [("t", "phi", "dphi")]
    for t, y, p in zip(trace.t.tolist(), (trace.y * scale).tolist(), (trace.dy * scale).tolist()):
        rows.append((t, y, p))
    return rows
