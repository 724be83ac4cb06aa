"""Free-text answer parsing.

Parsing is total: any text yields a :class:`ParsedAnswer`. Explicit
index notation or explicit cue phrases give ``exact`` confidence;
indirect shape or texture words give ``fuzzy``; nothing usable gives
``failed``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from ..miller import PlaneFamily, canonicalize, family_of, format_family
from .prompts import Task

__all__ = ["Confidence", "ParsedAnswer", "parse_answer", "extract_family"]


class Confidence(str, enum.Enum):
    EXACT = "exact"
    FUZZY = "fuzzy"
    FAILED = "failed"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ParsedAnswer:
    task: Task
    raw: str
    confidence: Confidence
    family: PlaneFamily | None = None
    applicable: bool | None = None
    consistent: bool | None = None

    def to_dict(self):
        return {
            "task": str(self.task),
            "confidence": str(self.confidence),
            "family": format_family(self.family) if self.family else None,
            "applicable": self.applicable,
            "consistent": self.consistent,
        }


_INDEX = re.compile(
    r"[\(\{\[]\s*(-?\d)\s*[,\s]?\s*(-?\d)\s*[,\s]?\s*(-?\d)\s*[\)\}\]]"
)
# "1\u0304" / "1\u0305" (combining macron or overline) and LaTeX "\bar{1}" read as -1
_OVERBAR = re.compile(r"(\d)[\u0304\u0305]")
_LATEX_BAR = re.compile(r"\\(?:bar|overline)\{?(\d)\}?")
_NEGATED = re.compile(r"(\bnot|\brather than|\binstead of|\bunlike)\s*(the\s*)?$", re.I)

_FUZZY_FAMILY = [
    (re.compile(r"\b(triangular|triangle|equilateral|hexagon(al)?|diagonal)\b", re.I), (1, 1, 1)),
    (re.compile(r"\b(skew(ed)?|rectangular|rectangle|parallelogram|tilted)\b", re.I), (1, 1, 0)),
    (re.compile(r"\b(square|face[- ]aligned|cube face|axis[- ]aligned)\b", re.I), (1, 0, 0)),
]

_APPLICABLE_NEG = re.compile(
    r"not\s+(?:\w+\s+)?applicable|inapplicable|not\s+(?:physically\s+)?(?:meaningful|valid|appropriate)"
    r"|\binvalid\b|(?:do|does|can)\s*(?:not|n't)\s+apply|cannot\s+be\s+(?:applied|described|used)"
    r"|\breject(?:s|ed|ing)?\b|no\s+valid|no\s+miller",
    re.I,
)
_APPLICABLE_POS = re.compile(
    r"\bapplicable\b|\bapplies\b|\bcan\s+be\s+(?:applied|described|used)|\b(?:is|are)\s+(?:physically\s+)?(?:valid|meaningful|appropriate)",
    re.I,
)
_APPLICABLE_FUZZY_NEG = re.compile(
    r"\b(conchoidal|curved|amorphous|non-?planar|irregular|ductile|heterogeneous|necking|fibrous)\b", re.I
)
_APPLICABLE_FUZZY_POS = re.compile(r"\b(planar|flat|cleavage|facet(s|ed)?)\b", re.I)

_CONSISTENT_NEG = re.compile(
    r"\binconsistent\b|not\s+consistent|incompatible|not\s+compatible|mismatch"
    r"|(?:does|do)\s*(?:not|n't)\s+match|cannot\s+(?:come|be\s+produced)|could\s+not\s+have",
    re.I,
)
_CONSISTENT_POS = re.compile(r"\bconsistent\b|\bcompatible\b|\bmatch(?:es|ed)?\b", re.I)

_YES = re.compile(r"^\W*yes\b", re.I)
_NO = re.compile(r"^\W*no\b", re.I)


def extract_family(text):
    """``(family, confidence)`` from index notation, else from shape words."""
    text = _LATEX_BAR.sub(r"-\1", _OVERBAR.sub(r"-\1", text))
    hits = []
    for m in _INDEX.finditer(text):
        try:
            idx = canonicalize([int(g) for g in m.groups()])
        except ValueError:
            continue
        negated = bool(_NEGATED.search(text[max(0, m.start() - 16):m.start()]))
        hits.append((negated, idx))
    if hits:
        chosen = next((idx for neg, idx in hits if not neg), hits[0][1])
        return family_of(chosen), Confidence.EXACT
    for pattern, idx in _FUZZY_FAMILY:
        if pattern.search(text):
            return family_of(idx), Confidence.FUZZY
    return None, Confidence.FAILED


def _binary(text, neg, pos, fuzzy_neg=None, fuzzy_pos=None):
    if neg.search(text):
        return False, Confidence.EXACT
    if pos.search(text):
        return True, Confidence.EXACT
    if _NO.search(text):
        return False, Confidence.EXACT
    if _YES.search(text):
        return True, Confidence.EXACT
    if fuzzy_neg is not None and fuzzy_neg.search(text):
        return False, Confidence.FUZZY
    if fuzzy_pos is not None and fuzzy_pos.search(text):
        return True, Confidence.FUZZY
    return None, Confidence.FAILED


def parse_answer(text, task) -> ParsedAnswer:
    text = "" if text is None else str(text)
    task = Task(task)
    if task is Task.INFERENCE:
        fam, conf = extract_family(text)
        return ParsedAnswer(task, text, conf, family=fam)
    if task is Task.APPLICABILITY:
        val, conf = _binary(text, _APPLICABLE_NEG, _APPLICABLE_POS, _APPLICABLE_FUZZY_NEG, _APPLICABLE_FUZZY_POS)
        return ParsedAnswer(task, text, conf, applicable=val)
    val, conf = _binary(text, _CONSISTENT_NEG, _CONSISTENT_POS)
    return ParsedAnswer(task, text, conf, consistent=val)
