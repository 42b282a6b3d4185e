"""Combining normalized similarities into per-language suitability scores.

A candidate language's suitability is the arithmetic mean of its
normalized semantic and textual similarity to the target language; it is
selected when the mean reaches the threshold (boundary value included).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .analysis import emit_report
from .corpus import Corpus, CorpusError, combine

DEFAULT_THETA = 0.5

TASKS = ("summarization", "search")


class SelectError(Exception):
    """Mismatched score maps, bad threshold, or an unknown task tag."""


@dataclass(frozen=True)
class SuitabilityRow:
    language: str
    sim_sem_raw: float | None
    sim_sem_norm: float
    sim_text_raw: float | None
    sim_text_norm: float
    suitability: float
    selected: bool


@dataclass(frozen=True)
class SuitabilityReport:
    target: str
    theta: float
    rows: tuple[SuitabilityRow, ...]
    fingerprint: dict = field(default_factory=dict)

    @property
    def selected(self) -> tuple[str, ...]:
        return tuple(row.language for row in self.rows if row.selected)


def suitability(
    sem_norm: Mapping[str, float],
    text_norm: Mapping[str, float],
    theta: float = DEFAULT_THETA,
    sem_raw: Mapping[str, float] | None = None,
    text_raw: Mapping[str, float] | None = None,
    target: str = "",
    fingerprint: Mapping | None = None,
) -> SuitabilityReport:
    """Score and select candidate languages from normalized similarity maps.

    Rows are ordered by language tag, so the report is independent of the
    order the maps were built in.
    """
    if set(sem_norm) != set(text_norm):
        raise SelectError(
            f"score maps disagree on languages: {sorted(sem_norm)} vs {sorted(text_norm)}"
        )
    if not 0.0 <= theta <= 1.0:
        raise SelectError(f"theta must be in [0, 1], got {theta}")
    for name, scores in (("semantic", sem_norm), ("textual", text_norm)):
        for language, value in scores.items():
            if not 0.0 <= value <= 1.0:
                raise SelectError(
                    f"normalized {name} score of {language!r} outside [0, 1]: {value}"
                )
    rows = []
    for language in sorted(sem_norm):
        score = (sem_norm[language] + text_norm[language]) / 2.0
        rows.append(
            SuitabilityRow(
                language=language,
                sim_sem_raw=sem_raw.get(language) if sem_raw else None,
                sim_sem_norm=sem_norm[language],
                sim_text_raw=text_raw.get(language) if text_raw else None,
                sim_text_norm=text_norm[language],
                suitability=score,
                selected=score >= theta,
            )
        )
    return SuitabilityReport(
        target=target,
        theta=theta,
        rows=tuple(rows),
        fingerprint=dict(fingerprint) if fingerprint else {},
    )


def build_finetune_set(target: Corpus, selected: Sequence[Corpus]) -> Corpus:
    """Combined fine-tuning corpus: the selected languages plus the target."""
    languages = [c.language for c in selected]
    if len(set(languages)) != len(languages):
        raise SelectError(f"duplicate language among selected corpora: {languages}")
    if target.language in languages:
        raise SelectError(f"target {target.language!r} already in the selected list")
    try:
        return combine(list(selected) + [target])
    except CorpusError as exc:
        raise SelectError(str(exc)) from exc


@dataclass(frozen=True)
class TaskStrategy:
    task: str
    strategy: str
    description: str


def recommend_for_task(task: str) -> TaskStrategy:
    """Which fine-tuning corpus strategy to use for a downstream task."""
    if task == "summarization":
        return TaskStrategy(
            task="summarization",
            strategy="similarity-selection",
            description=(
                "embed + clone-match each candidate corpus against the target, "
                "combine the normalized scores, keep languages at or above theta"
            ),
        )
    if task == "search":
        return TaskStrategy(
            task="search",
            strategy="combined-multilingual",
            description=(
                "fine-tune on the full combined multilingual corpus; "
                "no similarity computation needed"
            ),
        )
    raise SelectError(f"unknown task {task!r}; expected one of {TASKS}")


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def report_rows(report: SuitabilityReport) -> list[dict]:
    return [
        {
            "language": row.language,
            "sim_sem_raw": row.sim_sem_raw,
            "sim_sem_norm": row.sim_sem_norm,
            "sim_text_raw": row.sim_text_raw,
            "sim_text_norm": row.sim_text_norm,
            "suitability": row.suitability,
            "selected": row.selected,
        }
        for row in report.rows
    ]


def report_to_json(report: SuitabilityReport) -> str:
    payload = {
        "target": report.target,
        "theta": report.theta,
        "rows": report_rows(report),
        "selected": list(report.selected),
        "fingerprint": report.fingerprint,
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def report_to_table(report: SuitabilityReport) -> str:
    metadata = {"target": report.target, "theta": report.theta}
    return emit_report(report_rows(report), format="table", metadata=metadata)
