"""Expanded and refined code contexts around a change.

An *expanded* context shows, for one changed file, the full old and new body
of every function the change touches, plus small windows of unchanged lines
around changes that fall outside any function.  A *refined* context is a
short slice around a set of suspicious lines whose boundaries exist, with the
same text, in a second version of the file.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .diff import AlignedLine, align, build_line_map
from .errors import FileAbsent
from .functions import FunctionSpan, extract_function_spans, language_for
from .repo import FileVersion, Repository

DEFAULT_MARGIN = 3


def number_lines(pairs: Iterable[tuple[int, str]]) -> str:
    return "\n".join(f"{no}: {text}" for no, text in pairs)


@dataclass(frozen=True)
class Region:
    kind: str  # "function" or "window"
    rows: tuple[AlignedLine, ...]
    names: tuple[str, ...] = ()

    @property
    def old_lines(self) -> list[tuple[int, str]]:
        return [(r.old_no, r.text) for r in self.rows if r.old_no is not None]

    @property
    def new_lines(self) -> list[tuple[int, str]]:
        return [(r.new_no, r.text) for r in self.rows if r.new_no is not None]

    @property
    def old_text(self) -> str:
        return number_lines(self.old_lines)

    @property
    def new_text(self) -> str:
        return number_lines(self.new_lines)

    @property
    def changed(self) -> list[AlignedLine]:
        return [r for r in self.rows if r.op != "="]

    @property
    def rendered_diff(self) -> str:
        out = []
        for r in self.rows:
            mark = {"=": " ", "-": "-", "+": "+"}[r.op]
            no = r.old_no if r.op == "-" else r.new_no
            out.append(f"{mark}{no:>5}: {r.text}")
        return "\n".join(out)

    def header(self) -> str:
        def span(lines):
            return f"{lines[0][0]}-{lines[-1][0]}" if lines else "none"
        label = f"function {', '.join(self.names)}" if self.kind == "function" else "code outside functions"
        return f"[{label}; old lines {span(self.old_lines)}; new lines {span(self.new_lines)}]"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "names": list(self.names),
            "old_text": self.old_text,
            "new_text": self.new_text,
            "rendered_diff": self.rendered_diff,
        }


@dataclass(frozen=True)
class ExpandedContext:
    fix: Optional[str]
    path: str
    regions: tuple[Region, ...]

    def render(self) -> str:
        blocks = [f"{r.header()}\n{r.rendered_diff}" for r in self.regions]
        return f"File: {self.path}\n" + "\n\n".join(blocks)

    def changed_rows(self) -> list[AlignedLine]:
        return [row for r in self.regions for row in r.changed]


class _UnionFind:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _owners(spans: Sequence[FunctionSpan]) -> dict[int, int]:
    return {ln: i for i, s in enumerate(spans) for ln in range(s.start_line, s.end_line + 1)}


def expand_versions(old: Optional[FileVersion], new: Optional[FileVersion],
                    language: Optional[str] = None, margin: int = DEFAULT_MARGIN) -> list[Region]:
    """Regions covering every changed line between ``old`` and ``new`` exactly once."""
    path = (new or old).path if (new or old) is not None else ""
    language = language or language_for(path)
    old_lines = old.lines if old is not None else ()
    new_lines = new.lines if new is not None else ()
    rows = align(old_lines, new_lines)

    old_spans = extract_function_spans(old, language) if old is not None else []
    new_spans = extract_function_spans(new, language) if new is not None else []
    old_owner, new_owner = _owners(old_spans), _owners(new_spans)

    uf = _UnionFind()
    touched = set()
    for r in rows:
        o = ("o", old_owner[r.old_no]) if r.old_no in old_owner else None
        n = ("n", new_owner[r.new_no]) if r.new_no in new_owner else None
        for node in (o, n):
            if node is not None:
                uf.find(node)
        if r.op == "=" and o and n:
            uf.union(o, n)
        elif r.op == "-" and o:
            touched.add(o)
        elif r.op == "+" and n:
            touched.add(n)

    groups: dict = {}
    for node in sorted(uf.parent):
        root = uf.find(node)
        groups.setdefault(root, []).append(node)
    live_roots = {uf.find(t) for t in touched}

    regions: list[tuple[int, Region]] = []
    covered: set[int] = set()
    for root in live_roots:
        members = groups[root]
        old_idx = {i for side, i in members if side == "o"}
        new_idx = {i for side, i in members if side == "n"}
        picked = []
        for pos, r in enumerate(rows):
            in_old = r.old_no is not None and old_owner.get(r.old_no) in old_idx
            in_new = r.new_no is not None and new_owner.get(r.new_no) in new_idx
            if in_old or in_new:
                picked.append(pos)
                if r.op != "=":
                    covered.add(pos)
        names = tuple(dict.fromkeys(
            [old_spans[i].name for i in sorted(old_idx)] + [new_spans[i].name for i in sorted(new_idx)]))
        regions.append((picked[0], Region("function", tuple(rows[p] for p in picked), names)))

    for first, last in _window_clusters(rows, covered, margin):
        regions.append((first, Region("window", tuple(rows[first:last + 1]))))
    regions.sort(key=lambda item: item[0])
    return [r for _, r in regions]


def _window_clusters(rows: Sequence[AlignedLine], covered: set[int], margin: int):
    """Row ranges for changes outside functions, padded by up to ``margin`` unchanged rows."""
    loose = [i for i, r in enumerate(rows) if r.op != "=" and i not in covered]
    if not loose:
        return []
    clusters = [[loose[0], loose[0]]]
    for i in loose[1:]:
        prev = clusters[-1][1]
        between = rows[prev + 1:i]
        if all(r.op == "=" for r in between) and len(between) <= 2 * margin:
            clusters[-1][1] = i
        else:
            clusters.append([i, i])
    out = []
    for first, last in clusters:
        lo = first
        while lo > 0 and first - lo < margin and rows[lo - 1].op == "=":
            lo -= 1
        hi = last
        while hi + 1 < len(rows) and hi - last < margin and rows[hi + 1].op == "=":
            hi += 1
        out.append((lo, hi))
    return out


def expand_context(repo: Repository, fix: str, path: str, margin: int = DEFAULT_MARGIN) -> ExpandedContext:
    """Expanded context of ``path`` (new path, or old path if deleted) as changed by ``fix``."""
    meta = repo.resolve(fix)
    old_path = new_path = path
    for cf in repo.changed_files(meta.id):
        if path in (cf.new_path, cf.old_path):
            old_path, new_path = cf.old_path, cf.new_path
            break
    parent = meta.first_parent
    old = repo.file_at(parent, old_path) if parent and old_path else None
    new = repo.file_at(meta.id, new_path) if new_path else None
    if old is None and new is None:
        raise FileAbsent(f"{path} exists neither at {meta.id[:12]} nor its parent")
    regions = expand_versions(old, new, language_for(path), margin)
    return ExpandedContext(meta.id, path, tuple(regions))


# --------------------------------------------------------------------------
# refinement

@dataclass(frozen=True)
class RefinedContext:
    rev: Optional[str]
    path: str
    first_line: int
    last_line: int
    lines: tuple[str, ...] = field(repr=False, default=())

    @property
    def text(self) -> str:
        return number_lines(zip(range(self.first_line, self.last_line + 1), self.lines))


@dataclass(frozen=True)
class Refinement:
    buggy: RefinedContext
    fixed: Optional[RefinedContext]  # None: empty context
    margin: int
    whole_file: bool = False


def _slice(version: FileVersion, first: int, last: int) -> Optional[RefinedContext]:
    if len(version) == 0:
        return None
    return RefinedContext(version.rev, version.path, first, last, tuple(version.lines[first - 1:last]))


def refine_versions(buggy: FileVersion, fixed: Optional[FileVersion], buggy_lines: Iterable[int],
                    initial_margin: int = DEFAULT_MARGIN) -> Refinement:
    """Grow a margin around ``buggy_lines`` until both slice boundaries map into ``fixed``.

    The margin starts at ``initial_margin`` and only grows.  If the slice
    reaches both ends of the file without a mappable pair of boundaries, both
    versions are returned whole.  A missing or empty ``fixed`` version yields an
    empty fixed slice.
    """
    lines = sorted(set(buggy_lines))
    size = len(buggy)
    if not lines:
        raise ValueError("buggy_lines must not be empty")
    if lines[0] < 1 or lines[-1] > size:
        raise ValueError(f"buggy lines {lines} outside 1..{size}")

    n = initial_margin
    if fixed is None or len(fixed) == 0:
        lo, hi = max(1, lines[0] - n), min(size, lines[-1] + n)
        return Refinement(_slice(buggy, lo, hi), None, n)

    line_map = build_line_map(buggy, fixed)
    while True:
        lo, hi = max(1, lines[0] - n), min(size, lines[-1] + n)
        lo_fixed, hi_fixed = line_map.map_old(lo), line_map.map_old(hi)
        if lo_fixed is not None and hi_fixed is not None:
            return Refinement(_slice(buggy, lo, hi), _slice(fixed, lo_fixed, hi_fixed), n)
        if lo == 1 and hi == size:
            return Refinement(_slice(buggy, 1, size), _slice(fixed, 1, len(fixed)), n, whole_file=True)
        n += 1


def refine_context(repo: Repository, rev_buggy: str, rev_fixed: Optional[str], path: str,
                   buggy_lines: Iterable[int], fixed_path: Optional[str] = None,
                   initial_margin: int = DEFAULT_MARGIN) -> Refinement:
    """Refined slices of ``path`` at ``rev_buggy`` and the mapped slice at ``rev_fixed``."""
    buggy = repo.file_at(rev_buggy, path)
    if buggy is None:
        raise FileAbsent(f"{path} does not exist at {rev_buggy[:12]}")
    fixed = None
    if rev_fixed is not None:
        fixed = repo.file_at(rev_fixed, fixed_path or path)
    return refine_versions(buggy, fixed, buggy_lines, initial_margin)


# --------------------------------------------------------------------------
# statement resolution

_LINE_PREFIX = re.compile(r"^\s*[+-]?\s*\d+\s*:\s?")


def _norm(text: str) -> str:
    return " ".join(text.split())


def resolve_statement(file: FileVersion, statement: str) -> list[int]:
    """Line numbers of ``file`` whose whitespace-normalised text equals ``statement``.

    Multi-line statements resolve line by line.  A ``12: `` style line
    number prefix or a single leading diff marker copied from a prompt is
    tolerated.  Returns every match; an empty list means the statement was
    not found.
    """
    index: dict[str, list[int]] = {}
    for no, text in enumerate(file.lines, 1):
        key = _norm(text)
        if key:
            index.setdefault(key, []).append(no)

    found: list[int] = []
    for part in statement.split("\n"):
        if not part.strip():
            continue
        candidates = [part, _LINE_PREFIX.sub("", part, count=1)]
        if part.lstrip()[:1] in ("+", "-"):
            candidates.append(part.lstrip()[1:])
        for candidate in candidates:
            hits = index.get(_norm(candidate))
            if hits:
                found.extend(hits)
                break
    return sorted(set(found))
