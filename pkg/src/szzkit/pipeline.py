"""LLM-assisted identification of bug-inducing commits.

A run over one fix commit goes through three stages:

1. *prepare*: summarise the patch, then ask several times (each time with the
   changed files in a new order) for the root cause and the files involved.
2. *assess*: build expanded contexts of the involved files, ask for the buggy
   and fixing statements, and check that the model can tell a refined slice
   of the buggy version from the fixed one.
3. *identify*: if the check passed, walk the commits that last touched the
   buggy statements from newest to oldest and return the first one judged
   buggy whose parent is judged clean.  Otherwise, or if that walk finds
   nothing, rank statements picked from the raw patch, trace the best ones
   and return the most recent origin.

Every model answer is a single fenced JSON block.  An unreadable answer gets
one reformat request before the step gives up on it.
"""
from __future__ import annotations

import functools
import json
import logging
import random
import re
from dataclasses import dataclass, field
from importlib import resources
from string import Template
from typing import Iterable, Optional

from .config import LlmConfig, PipelineConfig
from .context import ExpandedContext, Region, expand_versions, refine_context, resolve_statement
from .diff import CONTEXT, DELETED, FilePatch, parse_unified, patch_for, render_patch, render_unified
from .errors import LlmOutputError, LlmUnavailable, ProviderError, SZZError
from .functions import language_for
from .llm import ChatRequest, Gateway, UsageLedger
from .prediction import CONTEXT_ENHANCED, EMPTY, RANK_BASED, Prediction
from .repo import FileVersion, LineOrigin, Repository

logger = logging.getLogger(__name__)

ALGORITHM = "llm4szz"

BUGGY = "buggy"
CLEAN = "clean"
UNPARSEABLE = "unparseable"


# --------------------------------------------------------------------------
# prompts and answers

@functools.lru_cache(maxsize=None)
def _template(name: str) -> tuple[Template, Template]:
    text = resources.files("szzkit").joinpath("prompts", f"{name}.txt").read_text(encoding="utf-8")
    if name == "reformat":
        return Template(""), Template(text)
    system, sep, user = text.partition("[user]\n")
    if not sep or not system.startswith("[system]\n"):
        raise ValueError(f"prompt template {name!r} lacks [system]/[user] sections")
    return Template(system[len("[system]\n"):].strip()), Template(user.rstrip("\n"))


def render_prompt(tag: str, **values) -> tuple[str, str]:
    system, user = _template(tag)
    return system.substitute(values), user.substitute(values)


_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.S)


def parse_block(text: str) -> dict:
    """The JSON object inside the single fenced block of ``text``."""
    blocks = _FENCE.findall(text)
    if len(blocks) != 1:
        raise LlmOutputError(f"expected one fenced block, found {len(blocks)}")
    try:
        data = json.loads(blocks[0])
    except json.JSONDecodeError as exc:
        raise LlmOutputError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise LlmOutputError("the block must hold a JSON object")
    return data


def _text(data: dict, key: str, required: bool = True) -> str:
    value = data.get(key)
    if value is None and not required:
        return ""
    if not isinstance(value, str):
        raise LlmOutputError(f"field {key!r} must be text")
    return value.strip()


def _label(data: dict, key: str, allowed) -> str:
    value = data.get(key)
    if isinstance(value, bool) and set(allowed) == {"yes", "no"}:
        return "yes" if value else "no"
    value = _text(data, key).lower()
    if value not in allowed:
        raise LlmOutputError(f"field {key!r} must be one of {sorted(allowed)}, got {value!r}")
    return value


def _strings(data: dict, key: str) -> list[str]:
    value = data.get(key)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise LlmOutputError(f"field {key!r} must be a list of text")
    return [v.strip() for v in value if v.strip()]


def _statement_items(data: dict, key: str, required: bool = True) -> list[dict]:
    value = data.get(key)
    if value is None and not required:
        return []
    if not isinstance(value, list):
        raise LlmOutputError(f"field {key!r} must be a list")
    items = []
    for v in value:
        if isinstance(v, str):
            v = {"text": v}
        if not isinstance(v, dict) or not isinstance(v.get("text"), str):
            raise LlmOutputError(f"entries of {key!r} need a 'text' field")
        reason = v.get("reason")
        items.append({"text": v["text"], "reason": reason if isinstance(reason, str) else ""})
    return items


def _ranking(data: dict) -> list[int]:
    value = data.get("ranking")
    if not isinstance(value, list):
        raise LlmOutputError("field 'ranking' must be a list")
    out = []
    for v in value:
        if isinstance(v, str) and v.strip().lstrip("[").rstrip("]").isdigit():
            v = int(v.strip().lstrip("[").rstrip("]"))
        if not isinstance(v, int) or isinstance(v, bool):
            raise LlmOutputError("ranking entries must be statement ids")
        out.append(v)
    return out


_VERDICTS = {BUGGY, CLEAN}

_READERS = {
    "summarize": lambda d: {"summary": _text(d, "summary")},
    "root_cause": lambda d: {"root_cause": _text(d, "root_cause"),
                             "relevant_files": _strings(d, "relevant_files")},
    "hint": lambda d: {"buggy_statements": _statement_items(d, "buggy_statements"),
                       "fixing_statements": _statement_items(d, "fixing_statements", required=False)},
    "ability": lambda d: {"version_1": _label(d, "version_1", _VERDICTS),
                          "version_2": _label(d, "version_2", _VERDICTS),
                          "rationale": _text(d, "rationale", required=False)},
    "containment": lambda d: {"contains": _label(d, "contains", {"yes", "no"}),
                              "rationale": _text(d, "rationale", required=False)},
    "verdict": lambda d: {"verdict": _label(d, "verdict", _VERDICTS),
                          "rationale": _text(d, "rationale", required=False)},
    "statements": lambda d: {"statements": _statement_items(d, "statements")},
    "rank": lambda d: {"ranking": _ranking(d)},
}


def read_answer(tag: str, text: str) -> dict:
    return _READERS[tag](parse_block(text))


# --------------------------------------------------------------------------
# structured results

@dataclass(frozen=True)
class RootCauseAnalysis:
    modification_summary: str
    root_cause: str
    relevant_files: tuple[str, ...]


@dataclass(frozen=True)
class Statement:
    path: str  # path in the version the statement resolved against
    text: str
    reason: str = ""
    lines: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {"path": self.path, "text": self.text, "reason": self.reason, "lines": list(self.lines)}


@dataclass(frozen=True)
class Hint:
    buggy_statements: tuple[Statement, ...] = ()
    fixing_statements: tuple[Statement, ...] = ()

    def render(self) -> str:
        out = ["Buggy statements:"]
        out += [f"- {s.path}: {s.text.strip()}" + (f"  ({s.reason})" if s.reason else "")
                for s in self.buggy_statements] or ["- none"]
        out.append("Fixing statements:")
        out += [f"- {s.path}: {s.text.strip()}" + (f"  ({s.reason})" if s.reason else "")
                for s in self.fixing_statements] or ["- none"]
        return "\n".join(out)


@dataclass(frozen=True)
class Verdict:
    value: str  # buggy, clean or unparseable
    rationale: str = ""


@dataclass(frozen=True)
class Candidate:
    commit: str
    committer_time: int
    origins: tuple[LineOrigin, ...] = ()


# --------------------------------------------------------------------------
# per-fix state

class FixTask:
    """Everything one fix needs: repository, model access, settings and a trace log."""

    def __init__(self, repo: Repository, fix: str, gateway: Gateway,
                 config: Optional[PipelineConfig] = None, llm: Optional[LlmConfig] = None,
                 ledger: Optional[UsageLedger] = None, key: Optional[str] = None):
        self.repo = repo
        self.meta = repo.resolve(fix)
        self.parent = self.meta.first_parent
        self.gateway = gateway
        self.config = config or PipelineConfig()
        self.llm = llm or LlmConfig()
        self.ledger = ledger if ledger is not None else UsageLedger()
        self.key = key or self.meta.id
        self.rng = random.Random(f"{self.config.seed}:{self.meta.id}")
        self.diagnostics: list[str] = []
        self.patches = [p for p in parse_unified(repo.diff(self.meta.id)) if not p.is_binary]

    @property
    def fix(self) -> str:
        return self.meta.id

    def note(self, message: str):
        logger.debug("%s: %s", self.fix[:12], message)
        self.diagnostics.append(message)

    def ask(self, tag: str, **values) -> dict:
        """One model call (plus at most one reformat call); raises LlmOutputError if both fail."""
        system, user = render_prompt(tag, **values)
        first = self._complete(system, user, tag)
        try:
            return read_answer(tag, first)
        except LlmOutputError as exc:
            self.note(f"{tag}: unreadable answer ({exc}); asked to reformat")
            _, appendix = render_prompt("reformat", error=str(exc), previous=first)
            return read_answer(tag, self._complete(system, user + appendix, tag))

    def _complete(self, system: str, user: str, tag: str) -> str:
        req = ChatRequest(system, user, tag, self.llm.temperature, self.llm.max_output_tokens)
        return self.gateway.complete(req, self.ledger, self.key).text

    def old_version(self, patch: FilePatch) -> Optional[FileVersion]:
        if self.parent is None or patch.old_path is None:
            return None
        return self.repo.file_at(self.parent, patch.old_path)

    def new_version(self, patch: FilePatch) -> Optional[FileVersion]:
        if patch.new_path is None:
            return None
        return self.repo.file_at(self.fix, patch.new_path)


def _normalise_path(name: str) -> str:
    name = name.strip().strip("`'\"")
    for prefix in ("a/", "b/", "./", "/"):
        if name.startswith(prefix):
            name = name[len(prefix):]
    return name


def match_paths(names: Iterable[str], changed: Iterable[str]) -> set[str]:
    """Changed paths named in ``names``; either side may be a path suffix of the other."""
    changed = list(changed)
    hits = set()
    for name in map(_normalise_path, names):
        if not name:
            continue
        for path in changed:
            if path == name or path.endswith("/" + name) or name.endswith("/" + path):
                hits.add(path)
    return hits


# --------------------------------------------------------------------------
# stage 1

def prepare(task: FixTask) -> RootCauseAnalysis:
    changed = [p.path for p in task.patches]
    message = task.meta.message.strip()
    try:
        summary = task.ask("summarize", message=message, patch=render_unified(task.patches))["summary"]
    except LlmOutputError as exc:
        task.note(f"summarize: giving up ({exc})")
        summary = ""

    root_cause = None
    named: set[str] = set()
    for run in range(1, task.config.prepare_runs + 1):
        order = list(task.patches)
        task.rng.shuffle(order)
        try:
            answer = task.ask("root_cause", message=message, summary=summary, patch=render_unified(order))
        except LlmOutputError as exc:
            task.note(f"root cause run {run}: giving up ({exc})")
            continue
        if root_cause is None:
            root_cause = answer["root_cause"]
        hits = match_paths(answer["relevant_files"], changed)
        task.note(f"root cause run {run}: files {sorted(hits)}")
        named |= hits

    if len(changed) == 1:
        relevant = changed
    elif named:
        relevant = [p for p in changed if p in named]
    else:
        task.note("no changed file named by the model; using all changed files")
        relevant = changed
    return RootCauseAnalysis(summary, root_cause or "", tuple(relevant))


# --------------------------------------------------------------------------
# stage 2

def _resolve(task: FixTask, version: Optional[FileVersion], item: dict, scope: set[int],
             kind: str) -> Optional[Statement]:
    """Statement resolved against ``version``; matches inside ``scope`` win over the rest."""
    text = item["text"]
    if version is None:
        task.note(f"dropped {kind} statement {text.strip()!r}: no such file version")
        return None
    lines = resolve_statement(version, text)
    inside = [n for n in lines if n in scope]
    lines = inside or lines
    if not lines:
        task.note(f"dropped {kind} statement {text.strip()!r}: not found in {version.path}")
        return None
    return Statement(version.path, text, item.get("reason", ""), tuple(lines))


def _chunks(task: FixTask, path: str, regions: list[Region]) -> list[list[Region]]:
    whole = ExpandedContext(task.fix, path, tuple(regions)).render()
    if len(whole) <= task.config.context_char_limit or len(regions) == 1:
        return [regions]
    task.note(f"hint: context of {path} split into {len(regions)} parts")
    return [[r] for r in regions]


def _dedupe(statements: list[Statement]) -> tuple[Statement, ...]:
    seen, out = set(), []
    for s in statements:
        if (s.path, s.lines) not in seen:
            seen.add((s.path, s.lines))
            out.append(s)
    return tuple(out)


def generate_hint(task: FixTask, analysis: RootCauseAnalysis) -> Hint:
    """Buggy statements (resolved before the fix) and fixing statements (after it)."""
    buggy: list[Statement] = []
    fixing: list[Statement] = []
    message = task.meta.message.strip()
    for path in analysis.relevant_files:
        patch = patch_for(task.patches, path)
        old, new = task.old_version(patch), task.new_version(patch)
        regions = expand_versions(old, new, language_for(path), task.config.window_lines)
        if not regions:
            task.note(f"hint: nothing changed in {path}")
            continue
        for part in _chunks(task, path, regions):
            context = ExpandedContext(task.fix, path, tuple(part)).render()
            try:
                answer = task.ask("hint", message=message, root_cause=analysis.root_cause,
                                  path=path, context=context)
            except LlmOutputError as exc:
                task.note(f"hint for {path}: giving up ({exc})")
                continue
            old_scope = {no for r in part for no, _ in r.old_lines}
            new_scope = {no for r in part for no, _ in r.new_lines}
            for item in answer["buggy_statements"]:
                st = _resolve(task, old, item, old_scope, "buggy")
                if st is not None:
                    buggy.append(st)
            for item in answer["fixing_statements"]:
                st = _resolve(task, new, item, new_scope, "fixing")
                if st is not None:
                    fixing.append(st)
    hint = Hint(_dedupe(buggy), _dedupe(fixing))
    for s in hint.buggy_statements:
        task.note(f"hint: buggy {s.path}:{','.join(map(str, s.lines))}")
    return hint


def _by_path(statements: Iterable[Statement]) -> dict[str, list[int]]:
    lines: dict[str, set[int]] = {}
    for s in statements:
        lines.setdefault(s.path, set()).update(s.lines)
    return {path: sorted(v) for path, v in lines.items()}


def _fixed_path(task: FixTask, old_path: str) -> Optional[str]:
    for p in task.patches:
        if p.old_path == old_path:
            return p.new_path
    return old_path


def _render_slices(parts: list[tuple[str, Optional[str]]]) -> str:
    return "\n\n".join(f"File: {path}\n{text if text is not None else '(empty)'}" for path, text in parts)


def ability_check(task: FixTask, analysis: RootCauseAnalysis, hint: Hint,
                  buggy_first: Optional[bool] = None) -> bool:
    """Whether the model tells the refined buggy slice from the fixed one.

    The two slices are shown as Version-1 and Version-2 in a seeded random
    order unless ``buggy_first`` pins it.
    """
    if not hint.buggy_statements or task.parent is None:
        return False
    buggy_parts, fixed_parts = [], []
    for path, lines in _by_path(hint.buggy_statements).items():
        fixed_path = _fixed_path(task, path)
        ref = refine_context(task.repo, task.parent, task.fix if fixed_path else None, path, lines,
                             fixed_path=fixed_path, initial_margin=task.config.initial_margin)
        buggy_parts.append((path, ref.buggy.text))
        fixed_parts.append((fixed_path or path, ref.fixed.text if ref.fixed is not None else None))
        task.note(f"ability: refined {path} lines {ref.buggy.first_line}-{ref.buggy.last_line} (N={ref.margin}"
                  + (", whole file" if ref.whole_file else "") + ")")
    if buggy_first is None:
        buggy_first = task.rng.random() < 0.5
    buggy_text, fixed_text = _render_slices(buggy_parts), _render_slices(fixed_parts)
    v1, v2 = (buggy_text, fixed_text) if buggy_first else (fixed_text, buggy_text)
    try:
        answer = task.ask("ability", root_cause=analysis.root_cause, hint=hint.render(),
                          version_1=v1, version_2=v2)
    except LlmOutputError as exc:
        task.note(f"ability: unreadable answer ({exc}); treated as failed")
        return False
    except LlmUnavailable as exc:
        task.note(f"ability: provider unavailable ({exc}); treated as failed")
        return False
    buggy_label = answer["version_1"] if buggy_first else answer["version_2"]
    fixed_label = answer["version_2"] if buggy_first else answer["version_1"]
    passed = buggy_label == BUGGY and fixed_label == CLEAN
    task.note(f"ability: buggy version labelled {buggy_label}, fixed version labelled {fixed_label}"
              f" -> {'passed' if passed else 'failed'}")
    return passed


# --------------------------------------------------------------------------
# stage 3

def trace_statements(task: FixTask, statements: Iterable[Statement]) -> list[Candidate]:
    """Origins of the statements' lines before the fix, newest commit first."""
    if task.parent is None:
        return []
    origins: dict[str, dict[LineOrigin, None]] = {}
    for path, lines in _by_path(statements).items():
        blame = task.repo.blame(task.parent, path)
        for no in lines:
            o = blame[no - 1]
            origins.setdefault(o.commit, {})[o] = None
    cands = [Candidate(c, task.repo.resolve(c).committer_time, tuple(o)) for c, o in origins.items()]
    cands.sort(key=lambda c: (c.committer_time, c.commit), reverse=True)
    return cands


def _candidate_contexts(task: FixTask, cand: Candidate) -> tuple[str, Optional[str], Optional[str]]:
    """Refined text of the candidate, of its parent (``None`` when empty), and the parent id."""
    meta = task.repo.resolve(cand.commit)
    parent = meta.first_parent
    renames = {cf.new_path: cf.old_path for cf in task.repo.changed_files(cand.commit)} if parent else {}
    lines: dict[str, list[int]] = {}
    for o in cand.origins:
        lines.setdefault(o.path, []).append(o.line_no)
    own, before = [], []
    for path, nos in lines.items():
        parent_path = renames.get(path, path) if parent else None
        ref = refine_context(task.repo, cand.commit, parent if parent_path else None, path, nos,
                             fixed_path=parent_path, initial_margin=task.config.initial_margin)
        own.append((path, ref.buggy.text))
        if ref.fixed is not None:
            before.append((parent_path, ref.fixed.text))
    return _render_slices(own), (_render_slices(before) if before else None), parent


def _assess(task: FixTask, analysis: RootCauseAnalysis, hint: Hint, commit: str, context: str) -> Verdict:
    statements = "\n".join(f"- {s.text.strip()}" for s in hint.buggy_statements)
    try:
        found = task.ask("containment", statements=statements, commit=commit, context=context)
    except LlmOutputError as exc:
        return Verdict(UNPARSEABLE, str(exc))
    if found["contains"] == "no":
        return Verdict(CLEAN, "buggy statements absent")
    try:
        answer = task.ask("verdict", root_cause=analysis.root_cause, hint=hint.render(),
                          commit=commit, context=context)
    except LlmOutputError as exc:
        return Verdict(UNPARSEABLE, str(exc))
    return Verdict(answer["verdict"], answer["rationale"])


def context_enhanced_identify(task: FixTask, analysis: RootCauseAnalysis, hint: Hint,
                              candidates: Optional[list[Candidate]] = None) -> Optional[str]:
    """First candidate (newest first) judged buggy whose parent is judged clean."""
    cands = candidates if candidates is not None else trace_statements(task, hint.buggy_statements)
    cap = task.config.candidate_cap
    for j, cand in enumerate(cands[:cap], 1):
        own, before, parent = _candidate_contexts(task, cand)
        verdict = _assess(task, analysis, hint, cand.commit, own)
        task.note(f"candidate {j} {cand.commit[:12]}: {verdict.value}")
        if verdict.value != BUGGY:
            continue
        if before is None:
            task.note(f"candidate {j} parent: empty context, clean")
            return cand.commit
        parent_verdict = _assess(task, analysis, hint, parent, before)
        task.note(f"candidate {j} parent {parent[:12]}: {parent_verdict.value}")
        if parent_verdict.value == CLEAN:
            return cand.commit
    if len(cands) > cap:
        task.note(f"candidate scan stopped at the cap of {cap}; {len(cands) - cap} left unexamined")
    return None


def _patch_scope(patch: FilePatch) -> set[int]:
    return {ln.old_no for h in patch.hunks for ln in h.lines if ln.kind in (DELETED, CONTEXT)}


def _apply_ranking(ranking: list[int], size: int) -> list[int]:
    order = []
    for i in ranking:
        if 1 <= i <= size and i - 1 not in order:
            order.append(i - 1)
    return order + [i for i in range(size) if i not in order]


def rank_based_identify(task: FixTask, analysis: RootCauseAnalysis,
                        top_n: Optional[int] = None) -> tuple[frozenset, list[Candidate]]:
    """Most recent origin of the top-ranked statements picked from the raw patch."""
    try:
        return _rank_based(task, analysis, top_n or task.config.top_n)
    except LlmUnavailable as exc:
        task.note(f"rank: provider unavailable ({exc}); no prediction")
        return frozenset(), []


def _rank_based(task: FixTask, analysis: RootCauseAnalysis, top_n: int) -> tuple[frozenset, list[Candidate]]:
    message = task.meta.message.strip()
    pool: list[Statement] = []
    for path in analysis.relevant_files:
        patch = patch_for(task.patches, path)
        if patch.old_path is None or task.parent is None:
            task.note(f"rank: {path} did not exist before the fix")
            continue
        old = task.old_version(patch)
        try:
            answer = task.ask("statements", message=message, root_cause=analysis.root_cause,
                              path=path, patch=render_patch(patch))
        except LlmOutputError as exc:
            task.note(f"rank: statements for {path}: giving up ({exc})")
            continue
        for item in answer["statements"]:
            st = _resolve(task, old, item, _patch_scope(patch), "ranked")
            if st is not None:
                pool.append(st)
    if not pool:
        task.note("rank: no resolvable statement")
        return frozenset(), []

    order = list(range(len(pool)))
    if len(pool) > 1:
        listing = "\n".join(f"[{i}] {s.path}: {s.text.strip()}" for i, s in enumerate(pool, 1))
        try:
            ranking = task.ask("rank", root_cause=analysis.root_cause, statements=listing)["ranking"]
            order = _apply_ranking(ranking, len(pool))
        except LlmOutputError as exc:
            task.note(f"rank: unreadable ranking ({exc}); keeping model order")

    taken: dict[str, int] = {}
    picked = []
    for i in order:
        s = pool[i]
        if taken.get(s.path, 0) < top_n:
            taken[s.path] = taken.get(s.path, 0) + 1
            picked.append(s)
    for s in picked:
        task.note(f"rank: picked {s.path}:{','.join(map(str, s.lines))}")
    cands = trace_statements(task, picked)
    if not cands:
        return frozenset(), []
    return frozenset([cands[0].commit]), cands


# --------------------------------------------------------------------------
# driver

def run(repo: Repository, fix: str, gateway: Gateway, config: Optional[PipelineConfig] = None,
        llm: Optional[LlmConfig] = None, ledger: Optional[UsageLedger] = None,
        key: Optional[str] = None) -> Prediction:
    """Full pipeline for one fix.

    Repository trouble after the fix resolves ends in an empty prediction
    with the error in the diagnostics.  Provider errors propagate.
    """
    task = FixTask(repo, fix, gateway, config, llm, ledger, key)
    analysis = None
    route, predicted, cands = EMPTY, frozenset(), None
    try:
        analysis = prepare(task)
        hint = generate_hint(task, analysis)
        if not hint.buggy_statements:
            task.note("no resolvable buggy statement; using rank-based identification")
        elif ability_check(task, analysis, hint):
            cands = trace_statements(task, hint.buggy_statements)
            found = context_enhanced_identify(task, analysis, hint, cands)
            if found is not None:
                route, predicted = CONTEXT_ENHANCED, frozenset([found])
            else:
                task.note("no candidate qualified; falling back to rank-based identification")
        else:
            task.note("ability check failed; using rank-based identification")
        if route == EMPTY:
            predicted, cands = rank_based_identify(task, analysis)
            route = RANK_BASED if predicted else EMPTY
    except ProviderError:
        raise
    except SZZError as exc:
        task.note(f"error: {exc}")
        route, predicted = EMPTY, frozenset()
    usage = task.ledger.snapshot(task.key)
    return Prediction(
        fix=task.fix,
        predicted=predicted,
        route=route,
        root_cause=analysis.root_cause if analysis else None,
        candidates=None if cands is None else [(c.commit, c.committer_time) for c in cands],
        llm_calls=usage.llm_calls,
        tokens_total=usage.tokens_total,
        wall_ms=usage.wall_ms,
        diagnostics=task.diagnostics,
        algorithm=ALGORITHM,
    )
