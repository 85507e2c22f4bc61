"""Reading component files and rendering estimates, summaries and tables.

Component files are CSV with header ``s2,df`` or a JSON array of
``{"s2": ..., "df": ...}`` objects. CSV input may use LF or CRLF line
endings; output always uses LF.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict
from typing import Mapping, Sequence

from .core import (
    ComponentSet,
    DfEstimate,
    EdfError,
    EmptyInput,
    EstimatorKind,
    InvalidComponent,
    VarianceComponent,
)
from .harness import SimSummary, TableRow

__all__ = [
    "ParseError",
    "OutputFormat",
    "parse_components",
    "emit_components",
    "format_estimates",
    "format_table",
    "format_summary",
    "sig6",
]


class ParseError(EdfError):
    code = "ParseError"

    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"line {line}, column {column}: {reason}", line=line)
        self.column = column
        self.reason = reason


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"
    PRETTY = "pretty"


def _decode(data: bytes | str) -> str:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ParseError(1, 1, f"input is not valid UTF-8 ({exc.reason})") from None
    return data.lstrip("\ufeff")


def _sniff(text: str) -> OutputFormat:
    return OutputFormat.JSON if text.lstrip().startswith("[") else OutputFormat.CSV


def parse_components(data: bytes | str, fmt: OutputFormat | str | None = None) -> ComponentSet:
    """Parse a component file, keeping file order.

    ``fmt`` is ``"csv"`` or ``"json"``; ``None`` picks JSON when the first
    non-blank character is ``[``.
    """
    text = _decode(data)
    fmt = _sniff(text) if fmt is None else OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        return _parse_json(text)
    if fmt is OutputFormat.CSV:
        return _parse_csv(text)
    raise ValueError(f"cannot parse components from {fmt.value!r} input")


def _number(text: str, line: int, column: int, name: str) -> float:
    try:
        return float(text.strip())
    except ValueError:
        raise ParseError(line, column, f"{name} is not a number: {text!r}") from None


def _component(s2: float, df: float, line: int) -> VarianceComponent:
    try:
        return VarianceComponent(s2, df)
    except InvalidComponent as exc:
        raise InvalidComponent(f"line {line}: {exc}", line=line) from None


def _parse_csv(text: str) -> ComponentSet:
    rows = list(csv.reader(io.StringIO(text, newline="")))
    # blank lines carry no data; keep physical line numbers for diagnostics
    numbered = [(i + 1, row) for i, row in enumerate(rows) if any(c.strip() for c in row)]
    if not numbered:
        raise EmptyInput("input is empty")
    header_line, header = numbered[0]
    names = [h.strip().lower() for h in header]
    if sorted(names) != ["df", "s2"]:
        raise ParseError(header_line, 1, f"expected header 's2,df', got {','.join(header)!r}")
    s2_col, df_col = names.index("s2"), names.index("df")

    comps = []
    for line, row in numbered[1:]:
        if len(row) != 2:
            raise ParseError(line, min(len(row), 2) + 1, f"expected 2 fields, got {len(row)}")
        s2 = _number(row[s2_col], line, s2_col + 1, "s2")
        df = _number(row[df_col], line, df_col + 1, "df")
        comps.append(_component(s2, df, line))
    if not comps:
        raise EmptyInput("input has a header but no components")
    return ComponentSet(tuple(comps))


def _parse_json(text: str) -> ComponentSet:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.colno, exc.msg) from None
    if not isinstance(doc, list):
        raise ParseError(1, 1, "expected a JSON array of {s2, df} objects")
    if not doc:
        raise EmptyInput("input is an empty array")

    comps = []
    for i, item in enumerate(doc, start=1):
        if not isinstance(item, dict) or "s2" not in item or "df" not in item:
            raise ParseError(i, 1, f"item {i}: expected an object with keys s2 and df")
        values = []
        for name in ("s2", "df"):
            v = item[name]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(i, 1, f"item {i}: {name} is not a number: {v!r}")
            values.append(float(v))
        comps.append(_component(values[0], values[1], i))
    return ComponentSet(tuple(comps))


def emit_components(components: ComponentSet, fmt: OutputFormat | str = OutputFormat.CSV) -> str:
    """Serialize components at full precision (``repr`` round-trips floats)."""
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        return json.dumps([{"s2": c.s2, "df": c.df} for c in components]) + "\n"
    if fmt is OutputFormat.CSV:
        return "s2,df\n" + "".join(f"{c.s2!r},{c.df!r}\n" for c in components)
    raise ValueError("components can only be written as csv or json")


def sig6(x: float) -> str:
    return f"{x:.6g}"


def _fixed3(x: float) -> str:
    return f"{x:.3f}"


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _pretty(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows)
    return "\n".join(lines) + "\n"


def _json_float(x: float):
    return x if math.isfinite(x) else None


def format_estimates(
    estimates: Mapping[EstimatorKind, DfEstimate],
    fmt: OutputFormat | str = OutputFormat.CSV,
) -> str:
    """Render one or more estimates for the same component set."""
    fmt = OutputFormat(fmt)
    items = list(estimates.values())
    if fmt is OutputFormat.JSON:
        first = items[0]
        doc = {
            "k": first.k,
            "total_df": first.total_df,
            "estimates": {str(e.estimator): _json_float(e.value) for e in items},
        }
        return json.dumps(doc, indent=2) + "\n"
    header = ["estimator", "value", "k", "total_df"]
    rows = [[str(e.estimator), sig6(e.value), str(e.k), sig6(e.total_df)] for e in items]
    if fmt is OutputFormat.CSV:
        return _csv_text(header, rows)
    return _pretty(header, rows)


TABLE_HEADER = ["K", "nu", "true_df", "mean_ratio", "median_ratio", "upper_q",
                "lower_q", "proposed_ratio", "improved_ratio", "naep_ratio"]


def format_table(rows: Sequence[TableRow], fmt: OutputFormat | str = OutputFormat.CSV) -> str:
    fmt = OutputFormat(fmt)
    if fmt is OutputFormat.JSON:
        doc = [dict(zip(TABLE_HEADER, asdict(r).values())) for r in rows]
        return json.dumps(doc, indent=2) + "\n"
    text_rows = [
        [str(r.k), str(r.nu), str(r.true_df)]
        + [_fixed3(v) for v in (r.mean_ratio, r.median_ratio, r.upper_q, r.lower_q,
                                r.proposed_ratio, r.improved_ratio, r.naep_ratio)]
        for r in rows
    ]
    if fmt is OutputFormat.CSV:
        return _csv_text(TABLE_HEADER, text_rows)
    return _pretty(TABLE_HEADER, text_rows)


SUMMARY_HEADER = ["estimator", "mean", "median", "q1", "q3", "se"]


def format_summary(summary: SimSummary, fmt: OutputFormat | str = OutputFormat.CSV) -> str:
    fmt = OutputFormat(fmt)
    cell = summary.cell
    if fmt is OutputFormat.JSON:
        doc = {
            "k": cell.k,
            "nu": cell.nu,
            "true_df": cell.true_df,
            "reps": cell.reps,
            "sigma2": cell.sigma2,
            "seed": cell.seed,
            "estimators": {str(kind): asdict(s) for kind, s in summary.per_estimator.items()},
        }
        return json.dumps(doc, indent=2) + "\n"
    rows = [
        [str(kind)] + [sig6(v) for v in (s.mean, s.median, s.q1, s.q3, s.se)]
        for kind, s in summary.per_estimator.items()
    ]
    if fmt is OutputFormat.CSV:
        return _csv_text(SUMMARY_HEADER, rows)
    title = f"K={cell.k} nu={cell.nu} true_df={cell.true_df} reps={cell.reps} seed={cell.seed}\n"
    return title + _pretty(SUMMARY_HEADER, rows)
