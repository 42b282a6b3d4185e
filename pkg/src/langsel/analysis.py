"""Quartile code-length binning of test sets and tabular report emission.

Code length is measured in normalized plaintext tokens; every emitted
report records that unit in its metadata so the choice is auditable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .corpus import Corpus, CorpusError
from .tokens import TOKENIZER_VERSION, length_of

REPORT_FORMATS = ("json", "csv", "table")

LENGTH_UNIT = "normalized plaintext tokens"


class ReportError(Exception):
    """Inconsistent rows or an unknown report format."""


@dataclass(frozen=True)
class LengthBins:
    """Token-length quartile boundaries and the four document-id bins.

    Membership: bin 1 holds lengths below q1, bins 2 and 3 are half-open
    [q1, q2) and [q2, q3), and bin 4 is closed on the left at q3.
    """

    q1: float
    q2: float
    q3: float
    bins: tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...], tuple[str, ...]]

    @property
    def boundaries(self) -> tuple[float, float, float]:
        return (self.q1, self.q2, self.q3)

    @property
    def sizes(self) -> tuple[int, int, int, int]:
        return tuple(len(b) for b in self.bins)  # type: ignore[return-value]


def percentile(values: Sequence[float], q: float) -> float:
    """Percentile with linear interpolation between closest ranks."""
    if not values:
        raise ReportError("percentile of an empty sequence")
    ordered = sorted(values)
    if len(ordered) == 1:
        return float(ordered[0])
    pos = (len(ordered) - 1) * q / 100.0
    lo = int(pos)
    hi = min(lo + 1, len(ordered) - 1)
    frac = pos - lo
    return ordered[lo] * (1.0 - frac) + ordered[hi] * frac


def bin_lengths(ids_and_lengths: Sequence[tuple[str, int]]) -> LengthBins:
    """Assign ids to the four quartile bins of their length distribution."""
    if not ids_and_lengths:
        raise ReportError("cannot bin an empty set")
    lengths = [length for _, length in ids_and_lengths]
    q1 = percentile(lengths, 25)
    q2 = percentile(lengths, 50)
    q3 = percentile(lengths, 75)
    bins: tuple[list[str], list[str], list[str], list[str]] = ([], [], [], [])
    for doc_id, length in ids_and_lengths:
        if length < q1:
            bins[0].append(doc_id)
        elif length < q2:
            bins[1].append(doc_id)
        elif length < q3:
            bins[2].append(doc_id)
        else:
            bins[3].append(doc_id)
    return LengthBins(
        q1=q1, q2=q2, q3=q3,
        bins=tuple(tuple(b) for b in bins),  # type: ignore[arg-type]
    )


def quartile_bins(test: Corpus) -> LengthBins:
    """Quartile-bin a test corpus by normalized token length."""
    if not test.documents:
        raise CorpusError("cannot bin an empty corpus")
    return bin_lengths([(doc.id, length_of(doc)) for doc in test.documents])


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------


def improvement_pct(value: float, baseline: float) -> float:
    """Relative improvement over a baseline, in percent."""
    if baseline == 0:
        raise ReportError("baseline must be non-zero")
    return 100.0 * (value - baseline) / baseline


def _check_columns(rows: Sequence[Mapping[str, object]]) -> list[str]:
    if not rows:
        return []
    columns = list(rows[0].keys())
    for i, row in enumerate(rows):
        if list(row.keys()) != columns:
            raise ReportError(f"row {i} columns differ from row 0")
    return columns


def _format_cell(value: object) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def emit_report(
    rows: Sequence[Mapping[str, object]],
    format: str = "table",
    baseline: float | None = None,
    value_column: str | None = None,
    metadata: Mapping[str, object] | None = None,
) -> str:
    """Serialize tabular rows as JSON, RFC-4180 CSV, or an aligned table.

    When a baseline value and a value column are designated, an
    improvement column of 100*(x - baseline)/baseline is appended. The
    JSON form embeds metadata (always including the code-length unit);
    the text table prints it as header comment lines.
    """
    if format not in REPORT_FORMATS:
        raise ReportError(f"unknown format {format!r}")
    meta = {"length_unit": LENGTH_UNIT, "tokenizer": TOKENIZER_VERSION}
    if metadata:
        meta.update(metadata)

    out_rows: list[dict[str, object]] = [dict(row) for row in rows]
    if baseline is not None:
        if value_column is None:
            raise ReportError("baseline requires a value_column")
        for row in out_rows:
            value = row.get(value_column)
            if not isinstance(value, (int, float)):
                raise ReportError(f"column {value_column!r} is not numeric")
            row[f"{value_column}_improvement_pct"] = improvement_pct(
                float(value), baseline
            )
        meta["baseline"] = baseline
        meta["baseline_column"] = value_column

    columns = _check_columns(out_rows)

    if format == "json":
        return json.dumps(
            {"metadata": meta, "rows": out_rows},
            sort_keys=True,
            separators=(",", ":"),
        ) + "\n"

    if format == "csv":
        if not out_rows:
            return ""
        buf = io.StringIO()
        writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(columns)
        for row in out_rows:
            writer.writerow([_format_cell(row[c]) for c in columns])
        return buf.getvalue()

    # Aligned text table.
    lines = [f"# {key}: {meta[key]}" for key in sorted(meta)]
    if columns:
        cells = [[_format_cell(row[c]) for c in columns] for row in out_rows]
        widths = [
            max(len(columns[i]), max((len(r[i]) for r in cells), default=0))
            for i in range(len(columns))
        ]
        lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
        lines.append("  ".join("-" * w for w in widths))
        for r in cells:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
    return "\n".join(lines) + "\n"
