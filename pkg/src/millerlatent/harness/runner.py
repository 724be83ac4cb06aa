"""Drive a manifest through an endpoint and keep every exchange."""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..errors import IoFailure
from ..miller import parse_family
from .client import CallError, EndpointClient, ModelEndpointConfig, unreachable
from .parsing import Confidence, ParsedAnswer, parse_answer
from .prompts import Task, build_prompt, tasks_for_kind

__all__ = ["EvalResult", "run_eval", "write_transcripts", "read_transcripts"]


@dataclass(frozen=True)
class EvalResult:
    sample_id: str
    kind: str
    task: Task
    truth: dict
    prompt: str
    raw: str | None
    parsed: ParsedAnswer
    latency_ms: float
    error: str | None = None
    attempts: int = 1

    def to_dict(self):
        return {
            "sample_id": self.sample_id,
            "kind": self.kind,
            "task": str(self.task),
            "prompt": self.prompt,
            "raw": self.raw,
            "parsed": self.parsed.to_dict(),
            "latency_ms": round(self.latency_ms, 3),
            "error": self.error,
            "attempts": self.attempts,
            "truth": self.truth,
        }

    @classmethod
    def from_dict(cls, d):
        task = Task(d["task"])
        p = d.get("parsed") or {}
        fam = p.get("family")
        parsed = ParsedAnswer(
            task,
            d.get("raw") or "",
            Confidence(p.get("confidence", "failed")),
            family=parse_family(fam) if fam else None,
            applicable=p.get("applicable"),
            consistent=p.get("consistent"),
        )
        return cls(
            d["sample_id"], d["kind"], task, d.get("truth") or {}, d.get("prompt", ""), d.get("raw"),
            parsed, float(d.get("latency_ms", 0.0)), d.get("error"), int(d.get("attempts", 1)),
        )


def _jobs(manifest, tasks):
    wanted = None if tasks is None else {Task(t) for t in tasks}
    for rec in manifest:
        for task in tasks_for_kind(rec["kind"]):
            if wanted is None or task in wanted:
                yield rec, task


def _one(client, rec, task, dataset_dir, fewshot):
    prompt = build_prompt(rec, task, fewshot=fewshot)
    start = time.perf_counter()
    raw, error, attempts, connect = None, None, 0, False
    try:
        assets = [(a, (Path(dataset_dir) / a).read_bytes()) for a in prompt.assets] if dataset_dir else []
        raw, attempts = client.complete(prompt.text, assets, {"sample_id": rec["id"], "task": str(task)})
    except OSError as exc:
        error = f"asset unreadable: {exc}"
    except CallError as exc:
        error, attempts, connect = str(exc), exc.attempts, exc.connect
    latency = 1000.0 * (time.perf_counter() - start)
    parsed = parse_answer(raw, task)
    res = EvalResult(rec["id"], rec["kind"], task, rec.get("truth", {}), prompt.text, raw, parsed,
                     latency, error, attempts)
    return res, connect


def run_eval(manifest, endpoint: ModelEndpointConfig, tasks=None, dataset_dir=None, transport=None,
             fewshot=2, sleep=time.sleep):
    """Query the endpoint once per (sample, applicable task).

    Requests run with at most ``endpoint.max_concurrent`` in flight.
    Failed calls come back as results with ``error`` set and a failed
    parse, so they count against the score instead of vanishing.

    Returns
    -------
    list of EvalResult
        In manifest order, tasks in their canonical order per sample.

    Raises
    ------
    CredentialMissing
        The configured credential variable is unset.
    EndpointUnreachable
        Every call failed at the transport level after retries. The
        exception's ``results`` attribute holds the recorded failures.
    """
    jobs = list(_jobs(manifest, tasks))
    with EndpointClient(endpoint, transport=transport, sleep=sleep) as client:
        with ThreadPoolExecutor(max_workers=endpoint.max_concurrent) as pool:
            out = list(pool.map(lambda j: _one(client, j[0], j[1], dataset_dir, fewshot), jobs))
    results = [r for r, _ in out]
    if out and all(connect for _, connect in out):
        raise unreachable(f"no response from {endpoint.base_url} after {endpoint.retry.max_attempts} attempts", results)
    return results


def write_transcripts(results, path):
    try:
        with open(path, "w") as fh:
            for r in results:
                fh.write(json.dumps(r.to_dict(), sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write transcripts to {path}: {exc}") from exc


def read_transcripts(path):
    try:
        with open(path) as fh:
            return [EvalResult.from_dict(json.loads(line)) for line in fh if line.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read transcripts {path}: {exc}") from exc
