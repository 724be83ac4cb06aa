"""Model-in-the-loop evaluation: prompts, endpoint calls, answer parsing, scoring."""

from .parsing import Confidence, ParsedAnswer, parse_answer
from .prompts import PromptSpec, Task, build_prompt, tasks_for_kind
from .client import ModelEndpointConfig, RetryPolicy
from .runner import EvalResult, run_eval, read_transcripts, write_transcripts
from .scoring import ScoreReport, score, write_report
from .mock import MockResponder, MockServer

__all__ = [
    "Confidence",
    "ParsedAnswer",
    "parse_answer",
    "PromptSpec",
    "Task",
    "build_prompt",
    "tasks_for_kind",
    "ModelEndpointConfig",
    "RetryPolicy",
    "EvalResult",
    "run_eval",
    "read_transcripts",
    "write_transcripts",
    "ScoreReport",
    "score",
    "write_report",
    "MockResponder",
    "MockServer",
]
