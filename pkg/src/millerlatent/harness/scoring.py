"""Aggregate evaluation results into metrics and a regime confusion table."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import EmptyResults, IoFailure
from ..miller import parse_family
from ..regime import Mode
from .parsing import Confidence
from .prompts import Task

__all__ = ["Metric", "ScoreReport", "score", "dedupe", "write_report", "CSV_COLUMNS"]

CSV_COLUMNS = ("task", "metric", "value", "numerator", "denominator")
REGIMES = tuple(str(m) for m in Mode)
OUTCOMES = ("applicable", "not_applicable")


@dataclass(frozen=True)
class Metric:
    task: str
    name: str
    numerator: int
    denominator: int

    @property
    def value(self):
        # an empty denominator reports 0 so every rate stays in [0, 1]
        return self.numerator / self.denominator if self.denominator else 0.0


@dataclass
class ScoreReport:
    metrics: list
    confusion: dict = field(default_factory=dict)
    n_results: int = 0

    def get(self, task, name):
        for m in self.metrics:
            if m.task == str(task) and m.name == name:
                return m.value
        raise KeyError((str(task), name))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for m in self.metrics:
            w.writerow([m.task, m.name, f"{m.value:.6f}", m.numerator, m.denominator])
        for regime in REGIMES:
            row = self.confusion[regime]
            total = sum(row.values())
            for outcome in OUTCOMES:
                n = row[outcome]
                w.writerow(["Confusion", f"{regime}/{outcome}", f"{(n / total if total else 0.0):.6f}", n, total])
        return buf.getvalue()

    def to_markdown(self):
        lines = [
            "# Evaluation report",
            "",
            "All metrics below are quantitative definitions introduced by this harness.",
            "Lenient accuracy counts fuzzy parses; strict accuracy counts only exact parses.",
            "",
            f"Scored results (after de-duplication by sample and task): {self.n_results}",
            "",
            "| task | metric | value | numerator | denominator |",
            "|---|---|---|---|---|",
        ]
        lines += [f"| {m.task} | {m.name} | {m.value:.4f} | {m.numerator} | {m.denominator} |" for m in self.metrics]
        lines += [
            "",
            "## Truth regime vs. parsed applicability",
            "",
            "| regime | applicable | not_applicable | total |",
            "|---|---|---|---|",
        ]
        for regime in REGIMES:
            row = self.confusion[regime]
            lines.append(f"| {regime} | {row['applicable']} | {row['not_applicable']} | {sum(row.values())} |")
        return "\n".join(lines) + "\n"


def _preference(r):
    body = r.to_dict()
    body.pop("latency_ms")
    return (r.error is not None, json.dumps(body, sort_keys=True))


def dedupe(results):
    """One result per (sample id, task); the pick does not depend on input order."""
    best = {}
    for r in results:
        key = (r.sample_id, str(r.task))
        if key not in best or _preference(r) < _preference(best[key]):
            best[key] = r
    return [best[k] for k in sorted(best)]


def score(results) -> ScoreReport:
    """Aggregate results into a :class:`ScoreReport`.

    Failed parses count as wrong answers for inference and consistency,
    and as "not applicable" for applicability.
    """
    results = dedupe(results)
    if not results:
        raise EmptyResults("no evaluation results to score")
    by_task = {t: [r for r in results if r.task is t] for t in Task}
    metrics = []

    inf = by_task[Task.INFERENCE]
    if inf:
        truth = [parse_family(r.truth["family"]) for r in inf]
        hit = [r.parsed.family is not None and r.parsed.family == t for r, t in zip(inf, truth)]
        strict = sum(h and r.parsed.confidence is Confidence.EXACT for h, r in zip(hit, inf))
        fuzzy = sum(r.parsed.confidence is Confidence.FUZZY for r in inf)
        metrics += [
            Metric("Inference", "accuracy", sum(hit), len(inf)),
            Metric("Inference", "accuracy_strict", strict, len(inf)),
            Metric("Inference", "fuzzy_parse_rate", fuzzy, len(inf)),
        ]

    app = by_task[Task.APPLICABILITY]
    confusion = {regime: dict.fromkeys(OUTCOMES, 0) for regime in REGIMES}
    if app:
        tp = fp = fn = tn = 0
        for r in app:
            actual = bool(r.truth["applicable"])
            said = r.parsed.applicable is True
            tp += actual and said
            fp += said and not actual
            fn += actual and not said
            tn += not actual and not said
            confusion[r.truth["regime"]]["applicable" if said else "not_applicable"] += 1
        metrics += [
            Metric("Applicability", "precision", tp, tp + fp),
            Metric("Applicability", "recall", tp, tp + fn),
            Metric("Applicability", "f1", 2 * tp, 2 * tp + fp + fn),
            Metric("Applicability", "accuracy", tp + tn, len(app)),
        ]

    con = by_task[Task.CONSISTENCY]
    if con:
        ok = sum(r.parsed.consistent is not None and r.parsed.consistent == bool(r.truth["consistent"]) for r in con)
        metrics.append(Metric("Consistency", "accuracy", ok, len(con)))

    for t in Task:
        if by_task[t]:
            failed = sum(r.parsed.confidence is Confidence.FAILED for r in by_task[t])
            metrics.append(Metric(str(t), "parse_failure_rate", failed, len(by_task[t])))
    metrics += [
        Metric("All", "parse_failure_rate", sum(r.parsed.confidence is Confidence.FAILED for r in results), len(results)),
        Metric("All", "call_error_rate", sum(r.error is not None for r in results), len(results)),
    ]
    return ScoreReport(metrics, confusion, len(results))


def write_report(report: ScoreReport, out_dir):
    """Write ``report.csv`` and ``report.md``; return their paths."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(report.to_csv())
        (out / "report.md").write_text(report.to_markdown())
    except OSError as exc:
        raise IoFailure(f"cannot write report to {out}: {exc}") from exc
    return out / "report.csv", out / "report.md"
