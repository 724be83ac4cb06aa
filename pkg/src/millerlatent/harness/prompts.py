"""Prompt templates for the three evaluation tasks."""
from __future__ import annotations

import enum
import string
from dataclasses import dataclass, field

from ..datagen import NO_AUGMENTATION, derive_seed, gen_fragment
from ..errors import IncompatibleSampleTask
from ..miller import enumerate_families, format_family

__all__ = ["Task", "PromptSpec", "TEMPLATES", "REQUIRED_SLOTS", "build_prompt", "tasks_for_kind", "fewshot_block"]


class Task(str, enum.Enum):
    INFERENCE = "Inference"
    APPLICABILITY = "Applicability"
    CONSISTENCY = "Consistency"

    def __str__(self):
        return self.value


TASKS_BY_KIND = {
    "Fragment2D": (Task.INFERENCE, Task.APPLICABILITY),
    "Pair2D3D": (Task.CONSISTENCY,),
    "PolycrystalMesh": (Task.APPLICABILITY,),
    "NonplanarMesh": (Task.APPLICABILITY,),
}

TEMPLATES = {
    Task.INFERENCE: (
        "The attached image shows a flat polygonal fragment: the cross-section left when a "
        "single plane cuts through a cubic unit cell.\n"
        "{fewshot}"
        "State which crystallographic plane produced it, either as Miller indices (hkl) or as a "
        "plane family chosen from: {families}.\n"
        "Justify the answer from the fragment geometry (number of edges, angles, side ratios).\n"
        "Fragment: {fragment}\n"
    ),
    Task.APPLICABILITY: (
        "The attached file shows a fracture surface.\n"
        "{fewshot}"
        "Decide whether a description by Miller indices (one or more crystallographic cleavage "
        "planes) is physically applicable to this surface. Answer yes or no, then explain what "
        "in the geometry (planarity, facet orientation, curvature) supports the decision.\n"
        "Surface: {asset}\n"
    ),
    Task.CONSISTENCY: (
        "Two images are attached: a 2D fragment and a 3D cube with one highlighted plane.\n"
        "{fewshot}"
        "Could the fragment be the cross-section produced by the highlighted plane? Answer "
        "consistent or inconsistent, then explain using edge count and shape.\n"
        "Fragment: {fragment}\n"
        "Cube: {cube}\n"
    ),
}

REQUIRED_SLOTS = {
    Task.INFERENCE: {"fragment", "families", "fewshot"},
    Task.APPLICABILITY: {"asset", "fewshot"},
    Task.CONSISTENCY: {"fragment", "cube", "fewshot"},
}


@dataclass(frozen=True)
class PromptSpec:
    task: Task
    template: str
    text: str
    assets: tuple = field(default_factory=tuple)

    def __post_init__(self):
        slots = {f for _, f, _, _ in string.Formatter().parse(self.template) if f}
        missing = REQUIRED_SLOTS[self.task] - slots
        if missing:
            raise ValueError(f"template for {self.task} lacks slots {sorted(missing)}")


def tasks_for_kind(kind):
    return TASKS_BY_KIND.get(kind, ())


def _record(sample):
    return sample.record() if hasattr(sample, "record") else sample


def _pick(assets, suffix):
    for a in assets:
        if a.endswith(suffix):
            return a
    return assets[0] if assets else "(none)"


def fewshot_block(task, count=2, seed=0, families=None):
    """Worked examples drawn from a held-out split (fixed seeds, never from the evaluated manifest)."""
    if count <= 0:
        return ""
    lines = []
    task = Task(task)
    for i in range(count):
        if task is Task.INFERENCE:
            fams = families or ("{100}", "{110}", "{111}")
            s = gen_fragment(fams, aug=NO_AUGMENTATION, seed=derive_seed(seed, f"fewshot-{task}-{i}"))
            t = s.truth
            lines.append(
                f"Example {i + 1}: a {t['shape_class'].lower()} fragment with {t['n_vertices']} edges. "
                f"Answer: the plane family is {t['family']}."
            )
        elif task is Task.APPLICABILITY:
            if i % 2 == 0:
                lines.append(f"Example {i + 1}: one flat facet spans the whole surface. Answer: yes, Miller indices are applicable.")
            else:
                lines.append(f"Example {i + 1}: a smooth curved conchoidal surface. Answer: no, Miller indices are not applicable.")
        else:
            if i % 2 == 0:
                lines.append(f"Example {i + 1}: a triangular fragment next to a (111) plane. Answer: consistent.")
            else:
                lines.append(f"Example {i + 1}: a triangular fragment next to a (100) plane. Answer: inconsistent.")
    return "\n".join(lines) + "\n"


def build_prompt(sample, task, fewshot=2, fewshot_seed=0, max_index=1):
    """Deterministic prompt for one sample and task.

    Parameters
    ----------
    sample : Sample or dict
        A generated sample or its manifest record.
    task : Task or str
    fewshot : int
        Number of worked examples prepended.
    max_index : int
        Inference prompts list every family up to this index as answer options.
    """
    rec = _record(sample)
    task = Task(task)
    if task not in tasks_for_kind(rec["kind"]):
        raise IncompatibleSampleTask(f"{rec['kind']} samples do not support the {task} task")
    assets = list(rec.get("assets", []))
    shots = fewshot_block(task, fewshot, fewshot_seed)
    template = TEMPLATES[task]
    if task is Task.INFERENCE:
        fams = ", ".join(format_family(f) for f in enumerate_families(max_index))
        if max_index == 1:
            fams = "{100}, {110}, {111}"
        frag = _pick(assets, ".svg")
        text = template.format(fewshot=shots, families=fams, fragment=frag)
        used = (frag,)
    elif task is Task.APPLICABILITY:
        asset = _pick(assets, ".obj" if rec["kind"].endswith("Mesh") else ".svg")
        text = template.format(fewshot=shots, asset=asset)
        used = (asset,)
    else:
        frag = _pick(assets, "-fragment.svg")
        cube = _pick(assets, "-cube.svg")
        text = template.format(fewshot=shots, fragment=frag, cube=cube)
        used = (frag, cube)
    return PromptSpec(task, template, text, tuple(a for a in used if a != "(none)"))
