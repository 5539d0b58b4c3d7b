"""Report documents and their json / csv / text serializations.

A report is a small header (tool version, case id, seed, tolerances), a free
``payload`` mapping and an optional table.  Output is deterministic: keys keep
insertion order and every float is written with 17 significant digits, so
``parse(emit(r)) == r`` exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import UsageError

FORMATS = ("json", "csv", "text")
ZERO_COLUMNS = ("location", "multiplicity", "residual")


@dataclass
class Report:
    kind: str
    case: str = ""
    seed: int | None = None
    tolerances: dict = field(default_factory=dict)
    payload: dict = field(default_factory=dict)
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    passed: bool | None = None
    version: str = __version__

    def header(self) -> dict:
        return {"kind": self.kind, "version": self.version, "case": self.case,
                "seed": self.seed, "tolerances": self.tolerances, "passed": self.passed}

    def to_dict(self) -> dict:
        d = self.header()
        d["payload"] = self.payload
        d["columns"] = list(self.columns)
        d["rows"] = [list(r) for r in self.rows]
        return plain(d)

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        return cls(d["kind"], d.get("case", ""), d.get("seed"), dict(d.get("tolerances") or {}),
                   dict(d.get("payload") or {}), list(d.get("columns") or []),
                   [list(r) for r in d.get("rows") or []], d.get("passed"),
                   d.get("version", __version__))

    def __eq__(self, other):
        if not isinstance(other, Report):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def plain(x):
    """Numpy scalars and arrays, tuples and dataclass dicts reduced to json types."""
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return plain(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    return x


# -- json ---------------------------------------------------------------------------

def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if not any(ch in s for ch in ".eEn"):
        s += ".0"
    return s


def _json(x, indent: int, level: int) -> str:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        return fmt_float(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_json(v, indent, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, list):
        if not x:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in x):
            return "[" + ", ".join(_json(v, indent, level + 1) for v in x) + "]"
        return "[\n" + ",\n".join(inner + _json(v, indent, level + 1) for v in x) + "\n" + pad + "]"
    raise UsageError(f"cannot serialize {type(x).__name__}")


def dumps_json(obj, indent: int = 2) -> str:
    return _json(plain(obj), indent, 0) + "\n"


def _inline(x) -> str:
    return dumps_json(x, indent=0).replace("\n", "")


# -- csv -----------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    if v is None:
        return ""
    return str(v)


def _uncell(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def _csv(report: Report) -> str:
    buf = io.StringIO()
    for k, v in report.header().items():
        buf.write(f"# {k}: {_inline(v)}\n")
    if report.payload:
        buf.write(f"# payload: {_inline(report.payload)}\n")
    w = csv.writer(buf, lineterminator="\n")
    if report.columns:
        w.writerow(report.columns)
        for r in report.rows:
            w.writerow([_cell(plain(v)) for v in r])
    return buf.getvalue()


def _parse_csv(text: str) -> Report:
    meta, body = {}, []
    for line in text.split("\n"):
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = json.loads(v)
        elif line:
            body.append(line)
    rows = list(csv.reader(body))
    cols = rows[0] if rows else []
    d = dict(meta, columns=cols, rows=[[_uncell(c) for c in r] for r in rows[1:]])
    return Report.from_dict(d)


# -- text ------------------------------------------------------------------------------

def _text(report: Report) -> str:
    lines = [f"{k}: {_inline(v)}" for k, v in report.header().items()]
    for k, v in report.payload.items():
        lines.append(f"payload.{k}: {_inline(v)}")
    if report.columns:
        lines.append("")
        lines.append("\t".join(report.columns))
        lines += ["\t".join(_cell(plain(v)) for v in r) for r in report.rows]
    return "\n".join(lines) + "\n"


def _parse_text(text: str) -> Report:
    head, _, table = text.partition("\n\n")
    d = {"payload": {}}
    for line in head.split("\n"):
        if not line:
            continue
        k, _, v = line.partition(": ")
        if k.startswith("payload."):
            d["payload"][k[len("payload."):]] = json.loads(v)
        else:
            d[k] = json.loads(v)
    rows = [ln.split("\t") for ln in table.split("\n") if ln]
    if rows:
        d["columns"] = rows[0]
        d["rows"] = [[_uncell(c) for c in r] for r in rows[1:]]
    return Report.from_dict(d)


# -- entry points ------------------------------------------------------------------------

def emit(report: Report, fmt: str = "json") -> str:
    """Serialize a report; the result parses back to an equal report."""
    if fmt == "json":
        return dumps_json(report.to_dict())
    if fmt == "csv":
        return _csv(report)
    if fmt == "text":
        return _text(report)
    raise UsageError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")


def parse(text: str, fmt: str = "json") -> Report:
    if fmt == "json":
        return Report.from_dict(json.loads(text))
    if fmt == "csv":
        return _parse_csv(text)
    if fmt == "text":
        return _parse_text(text)
    raise UsageError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")


def write_report(report: Report, path: str | None, fmt: str = "json") -> str:
    out = emit(report, fmt)
    if path in (None, "", "-"):
        return out
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(out)
    return out


# -- builders for common results ----------------------------------------------------------------

def zero_report(zr, case: str = "", seed=None, tolerances=None) -> Report:
    """Table ``location,multiplicity,residual``; the full ZeroReport sits in the payload."""
    rows = [[z.location, z.multiplicity, z.residual] for z in zr.zeros]
    payload = zr.to_dict()
    payload.pop("zeros")
    return Report("zeros", case, seed, dict(tolerances or {}), payload, list(ZERO_COLUMNS), rows)


def sweep_report(data: dict, case: str = "", seed=None, tolerances=None) -> Report:
    cols = ["rho", "M1"] + (["dM1"] if "dM1" in data else [])
    rows = [list(r) for r in zip(*(np.asarray(data[c], float).tolist() for c in cols))]
    return Report("sweep", case, seed, dict(tolerances or {}), {}, cols, rows)


def certificate_report(cert, case: str = "", seed=None, tolerances=None) -> Report:
    """Certificate in the payload; one table row per leaf check."""
    from .verify import SignCertificate
    leaves = _leaves(cert)
    rows = [[c.label, c.verdict, c.min_abs, c.threshold, len(c.witnesses)] for c in leaves]
    return Report("certificate", case, seed if seed is not None else cert.seed,
                  dict(tolerances or {"threshold_rel": cert.threshold_rel}),
                  {"certificate": cert.to_dict()},
                  ["label", "verdict", "min_abs", "threshold", "witnesses"], rows,
                  passed=isinstance(cert, SignCertificate) and cert.passed)


def _leaves(cert) -> list:
    if not cert.parts:
        return [cert]
    return [leaf for p in cert.parts for leaf in _leaves(p)]


def certificate_from_report(report: Report):
    from .verify import SignCertificate
    return SignCertificate.from_dict(report.payload["certificate"])


def suite_report(result, tolerances=None) -> Report:
    rows = [[c.label, c.residual, c.threshold, c.passed] for c in result.checks]
    return Report("identities", result.suite, result.seed, dict(tolerances or {}),
                  {"checks": len(result.checks), "failures": len(result.failures())},
                  ["label", "residual", "threshold", "passed"], rows, passed=result.passed)


def empty_report(kind: str = "empty", case: str = "") -> Report:
    return Report(kind, case)
