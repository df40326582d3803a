"""Deterministic JSON/CSV serialization and the CLI file formats.

All floating-point numbers are printed with 17 significant digits, so equal
inputs produce byte-identical output files (and 17 digits round-trip float64
exactly).  Exact rationals are serialized as {"num": ..., "den": ...},
complex numbers as {"re": ..., "im": ...}.

File formats:
  * point configuration: JSON array; entries are numbers (floats), strings
    (parsed exactly as decimals or fractions, e.g. "0.25" or "1/3"), or
    {"num", "den"} objects;
  * runner system: {"starts": [...], "speeds": [...]} with the same entry
    encodings;
  * bivariate polynomial: {"terms": [{"i", "j", "re", "im"}, ...]};
  * dense polynomial: JSON array of coefficients, each a number or an
    [re, im] pair, constant term first.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from . import __version__
from .circle import BiasReport
from .newton import SparseBivariatePoly
from .runners import RunnerSystem
from .unipoly import DensePoly, RootSet

__all__ = [
    "dumps",
    "csv_text",
    "build_manifest",
    "load_points",
    "points_jsonable",
    "load_runner_system",
    "runner_system_jsonable",
    "load_bivariate",
    "bivariate_jsonable",
    "load_dense_poly",
    "dense_poly_jsonable",
    "bias_report_jsonable",
    "root_set_jsonable",
]


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(x, ".17g")


def _jsonable(obj):
    """Normalize package objects into plain JSON-ready structures."""
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return obj


def _write(obj, parts):
    obj = _jsonable(obj)
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(_fmt_float(obj))
    elif isinstance(obj, str):
        import json as _json

        parts.append(_json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for idx, (k, v) in enumerate(obj.items()):
            if idx:
                parts.append(",")
            _write(str(k), parts)
            parts.append(":")
            _write(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for idx, v in enumerate(obj):
            if idx:
                parts.append(",")
            _write(v, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON text (fixed float formatting, insertion order)."""
    parts = []
    _write(obj, parts)
    parts.append("\n")
    return "".join(parts)


def csv_text(header, rows) -> str:
    """CSV with a header row and 17-significant-digit floats."""

    def cell(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (float, np.floating)):
            return _fmt_float(float(v))
        return str(v)

    lines = [",".join(header)]
    lines += [",".join(cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def build_manifest(command: str, inputs=(), params=None, outputs=()) -> dict:
    return {
        "command": command,
        "inputs": list(inputs),
        "params": params or {},
        "version": __version__,
        "outputs": list(outputs),
    }


# ------------------------------------------------------------------ loaders ----


def _num_in(entry, what):
    if isinstance(entry, bool):
        raise ValueError(f"bad {what} entry {entry!r}")
    if isinstance(entry, int):
        return entry
    if isinstance(entry, float):
        return entry
    if isinstance(entry, str):
        return Fraction(entry)
    if isinstance(entry, dict) and set(entry) == {"num", "den"}:
        return Fraction(entry["num"], entry["den"])
    raise ValueError(f"bad {what} entry {entry!r}")


def _num_out(v):
    if isinstance(v, Fraction):
        return {"num": v.numerator, "den": v.denominator}
    return v


def load_points(data) -> list:
    if not isinstance(data, list):
        raise ValueError("point configuration must be a JSON array")
    return [_num_in(e, "position") for e in data]


def points_jsonable(points) -> list:
    return [_num_out(p) for p in points]


def load_runner_system(data) -> RunnerSystem:
    if not isinstance(data, dict) or "starts" not in data or "speeds" not in data:
        raise ValueError('runner system must be {"starts": [...], "speeds": [...]}')
    starts = [_num_in(e, "start") for e in data["starts"]]
    speeds = [_num_in(e, "speed") for e in data["speeds"]]
    return RunnerSystem(tuple(starts), tuple(speeds))


def runner_system_jsonable(sys: RunnerSystem) -> dict:
    return {
        "starts": [_num_out(s) for s in sys.starts],
        "speeds": [_num_out(v) for v in sys.speeds],
    }


def load_bivariate(data) -> SparseBivariatePoly:
    if not isinstance(data, dict) or "terms" not in data:
        raise ValueError('bivariate polynomial must be {"terms": [{"i","j","re","im"}]}')
    terms = {}
    for t in data["terms"]:
        i, j = int(t["i"]), int(t["j"])
        c = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
        terms[(i, j)] = terms.get((i, j), 0) + c
    return SparseBivariatePoly(terms)


def bivariate_jsonable(f: SparseBivariatePoly) -> dict:
    rows = [
        {"i": i, "j": j, "re": c.real, "im": c.imag}
        for (i, j), c in sorted(f.terms.items())
    ]
    return {"terms": rows}


def load_dense_poly(data) -> DensePoly:
    if not isinstance(data, list):
        raise ValueError("dense polynomial must be a JSON array of coefficients")
    coeffs = []
    for e in data:
        if isinstance(e, (int, float)) and not isinstance(e, bool):
            coeffs.append(complex(e))
        elif isinstance(e, list) and len(e) == 2:
            coeffs.append(complex(float(e[0]), float(e[1])))
        else:
            raise ValueError(f"bad coefficient {e!r}")
    return DensePoly(coeffs)


def dense_poly_jsonable(p: DensePoly) -> list:
    return [[c.real, c.imag] for c in p.coeffs]


def bias_report_jsonable(rep: BiasReport) -> dict:
    return {
        "bias": float(rep.bias),
        "alpha": float(rep.witness_sector.alpha),
        "gamma": float(rep.witness_sector.gamma),
        "count": rep.witness_count,
        "side": rep.side,
        "n": rep.n,
    }


def root_set_jsonable(rs: RootSet) -> dict:
    return {
        "roots": [[z.real, z.imag] for z in rs.roots],
        "zero_multiplicity": rs.zero_multiplicity,
        "residuals": [float(r) for r in rs.residuals],
    }
