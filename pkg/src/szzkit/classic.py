"""Blame-based SZZ variants.

``b_szz`` traces every deleted line of a fix back to the commit that last
touched it.  ``ag_szz`` skips blank, comment and whitespace-only deletions,
``ma_szz`` additionally looks through merge commits and commits that did not
change the traced file.  ``select_single`` reduces a candidate set to the
most recent commit or to the one owning the most traced lines.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

from .diff import BLANK, COMMENT, FilePatch, classify_noise, cosmetic_deletions, parse_unified
from .errors import BinaryFile, FileAbsent, SZZError
from .functions import language_for
from .prediction import CLASSIC, EMPTY, Prediction
from .repo import LineOrigin, Repository

logger = logging.getLogger(__name__)

LATEST = "latest"
LARGEST = "largest"


@dataclass(frozen=True)
class Attribution:
    traced_lines: int
    committer_time: int


@dataclass
class CandidateSet:
    fix: str
    candidates: dict[str, Attribution] = field(default_factory=dict)
    traces: list[tuple[str, int, LineOrigin]] = field(default_factory=list)

    def __contains__(self, commit):
        return commit in self.candidates

    def __len__(self):
        return len(self.candidates)

    def ids(self) -> frozenset:
        return frozenset(self.candidates)

    def add(self, path: str, line_no: int, origin: LineOrigin, committer_time: int):
        self.traces.append((path, line_no, origin))
        prev = self.candidates.get(origin.commit)
        count = prev.traced_lines + 1 if prev else 1
        self.candidates[origin.commit] = Attribution(count, committer_time)


LineFilter = Callable[[FilePatch], set[int]]


def _all_deleted(patch: FilePatch) -> set[int]:
    return {ln.old_no for ln in patch.deleted_lines()}


def _meaningful_deleted(patch: FilePatch) -> set[int]:
    language = language_for(patch.old_path) or "c"
    keep = set()
    for hunk in patch.hunks:
        cosmetic = cosmetic_deletions(hunk)
        for ln in hunk.deleted:
            if ln.old_no in cosmetic:
                continue
            if classify_noise(ln.text, language) in (BLANK, COMMENT):
                continue
            keep.add(ln.old_no)
    return keep


def _trace(repo: Repository, fix: str, select: LineFilter,
           follow: Optional[Callable[[LineOrigin], LineOrigin]] = None) -> CandidateSet:
    meta = repo.resolve(fix)
    result = CandidateSet(meta.id)
    parent = meta.first_parent
    if parent is None:
        return result
    for patch in parse_unified(repo.diff(meta.id)):
        if patch.is_binary or patch.old_path is None:
            continue
        lines = sorted(select(patch))
        if not lines:
            continue
        try:
            origins = repo.blame(parent, patch.old_path)
        except (BinaryFile, FileAbsent):
            logger.debug("skip %s at %s", patch.old_path, parent[:12])
            continue
        for line_no in lines:
            origin = origins[line_no - 1]
            if follow is not None:
                origin = follow(origin)
            if origin.commit == meta.id:
                continue
            result.add(patch.old_path, line_no, origin, repo.resolve(origin.commit).committer_time)
    return result


def b_szz(repo: Repository, fix: str) -> CandidateSet:
    """Trace every deleted line of every text file changed by ``fix``."""
    return _trace(repo, fix, _all_deleted)


def ag_szz(repo: Repository, fix: str) -> CandidateSet:
    """Like :func:`b_szz` but ignores blank, comment and whitespace-only deletions."""
    return _trace(repo, fix, _meaningful_deleted)


def is_meta_change(repo: Repository, origin: LineOrigin) -> bool:
    meta = repo.resolve(origin.commit)
    if meta.is_merge:
        return True
    if meta.first_parent is None:
        return False
    before = _path_before(repo, origin.commit, origin.path)
    old = repo.file_at(meta.first_parent, before) if before else None
    new = repo.file_at(origin.commit, origin.path)
    return old is not None and new is not None and old.lines == new.lines


def _path_before(repo: Repository, commit: str, path: str) -> Optional[str]:
    for cf in repo.changed_files(commit):
        if cf.new_path == path:
            return cf.old_path
    return path


def follow_meta_changes(repo: Repository, origin: LineOrigin) -> LineOrigin:
    """Walk past merges and content-free commits to the commit that really wrote the line."""
    seen = set()
    while is_meta_change(repo, origin) and origin.commit not in seen:
        seen.add(origin.commit)
        meta = repo.resolve(origin.commit)
        if meta.is_merge:
            nxt = repo.blame_all_parents(origin.commit, origin.path)[origin.line_no - 1]
            if nxt.commit == origin.commit:
                break  # the merge itself wrote this line (conflict resolution)
        else:
            before = _path_before(repo, origin.commit, origin.path)
            nxt = repo.trace_line(meta.first_parent, before, origin.line_no)
        origin = nxt
    return origin


def ma_szz(repo: Repository, fix: str) -> CandidateSet:
    """Like :func:`ag_szz` but never blames meta-changes."""
    return _trace(repo, fix, _meaningful_deleted, lambda o: follow_meta_changes(repo, o))


def select_single(cands: CandidateSet, strategy: str = LATEST) -> Optional[str]:
    """Pick one commit: most recent (``latest``) or most traced lines (``largest``).

    Ties on time go to the smallest commit id.  ``largest`` breaks ties on
    line count by recency, then by id.
    """
    if not cands.candidates:
        return None
    items = cands.candidates.items()
    if strategy == LATEST:
        return min(items, key=lambda kv: (-kv[1].committer_time, kv[0]))[0]
    if strategy == LARGEST:
        return min(items, key=lambda kv: (-kv[1].traced_lines, -kv[1].committer_time, kv[0]))[0]
    raise ValueError(f"unknown strategy {strategy!r}")


ALGORITHMS = {
    "b": b_szz,
    "ag": ag_szz,
    "ma": ma_szz,
    "l": ag_szz,
    "r": ag_szz,
}


def run_classic(repo: Repository, fix: str, algorithm: str) -> Prediction:
    """Run one classic variant and wrap the outcome as a :class:`Prediction`."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown classic algorithm {algorithm!r}")
    fix = repo.resolve_id(fix)
    try:
        cands = ALGORITHMS[algorithm](repo, fix)
    except SZZError as exc:
        return Prediction(fix=fix, route=EMPTY, diagnostics=[f"error: {exc}"], algorithm=algorithm)
    if algorithm in ("l", "r"):
        pick = select_single(cands, LARGEST if algorithm == "l" else LATEST)
        predicted = frozenset([pick]) if pick else frozenset()
    else:
        predicted = cands.ids()
    ordered = sorted(cands.candidates.items(), key=lambda kv: (-kv[1].committer_time, kv[0]))
    diagnostics = [f"traced {path}:{line} -> {o.commit[:12]} {o.path}:{o.line_no}"
                   for path, line, o in cands.traces]
    return Prediction(
        fix=cands.fix,
        predicted=predicted,
        route=CLASSIC if predicted else EMPTY,
        candidates=[(c, a.committer_time) for c, a in ordered],
        diagnostics=diagnostics,
        algorithm=algorithm,
    )
