"""Unified-diff model, line alignment, and noise classification."""
from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import MalformedDiff
from .repo import FileVersion

ADDED = "added"
DELETED = "deleted"
CONTEXT = "context"

_HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@ ?(.*)$")
_DIFF_GIT = re.compile(r"^diff --git (\"?a/.*?\"?) (\"?b/.*\"?)$")


@dataclass(frozen=True)
class ChangedLine:
    """One body line of a hunk.

    ``kind`` is ``added``, ``deleted`` or ``context``; added lines carry only
    ``new_no`` and deleted lines only ``old_no``.
    """

    kind: str
    old_no: Optional[int]
    new_no: Optional[int]
    text: str
    no_newline: bool = False

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "old_no": self.old_no, "new_no": self.new_no, "text": self.text}
        if self.no_newline:
            d["no_newline"] = True
        return d


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: tuple[ChangedLine, ...]
    section: str = ""

    @property
    def added(self) -> list[ChangedLine]:
        return [ln for ln in self.lines if ln.kind == ADDED]

    @property
    def deleted(self) -> list[ChangedLine]:
        return [ln for ln in self.lines if ln.kind == DELETED]

    def to_dict(self) -> dict:
        return {
            "old_start": self.old_start, "old_len": self.old_len,
            "new_start": self.new_start, "new_len": self.new_len,
            "section": self.section,
            "lines": [ln.to_dict() for ln in self.lines],
        }


@dataclass(frozen=True)
class FilePatch:
    old_path: Optional[str]
    new_path: Optional[str]
    hunks: tuple[Hunk, ...] = ()
    is_binary: bool = False

    @property
    def path(self) -> str:
        return self.new_path if self.new_path is not None else self.old_path

    @property
    def added_count(self) -> int:
        return sum(len(h.added) for h in self.hunks)

    @property
    def deleted_count(self) -> int:
        return sum(len(h.deleted) for h in self.hunks)

    def deleted_lines(self) -> list[ChangedLine]:
        return [ln for h in self.hunks for ln in h.deleted]

    def added_lines(self) -> list[ChangedLine]:
        return [ln for h in self.hunks for ln in h.added]

    def to_dict(self) -> dict:
        return {
            "old_path": self.old_path,
            "new_path": self.new_path,
            "is_binary": self.is_binary,
            "hunks": [h.to_dict() for h in self.hunks],
        }


# --------------------------------------------------------------------------
# parsing

def _unquote(path: str) -> str:
    if len(path) >= 2 and path[0] == '"' and path[-1] == '"':
        body = path[1:-1]
        raw = body.encode("latin-1", "backslashreplace").decode("unicode_escape")
        return raw.encode("latin-1").decode("utf-8", errors="surrogateescape")
    return path


def _strip_prefix(path: str) -> Optional[str]:
    path = _unquote(path.split("\t", 1)[0].rstrip())
    if path == "/dev/null":
        return None
    if path[:2] in ("a/", "b/"):
        return path[2:]
    return path


class _Lines:
    """Line cursor that remembers byte offsets for error reporting."""

    def __init__(self, text: str):
        self.items = []
        offset = 0
        # split on LF only; str.splitlines would also break on \f and friends
        raws = text.split("\n")
        if raws and raws[-1] == "":
            raws.pop()
        for raw in raws:
            self.items.append((offset, raw[:-1] if raw.endswith("\r") else raw))
            offset += len(raw.encode("utf-8", errors="surrogateescape")) + 1
        self.end = offset
        self.i = 0

    def peek(self) -> Optional[str]:
        return self.items[self.i][1] if self.i < len(self.items) else None

    def offset(self) -> int:
        return self.items[self.i][0] if self.i < len(self.items) else self.end

    def next(self) -> str:
        line = self.items[self.i][1]
        self.i += 1
        return line


class _Builder:
    def __init__(self):
        self.old_path = self.new_path = None
        self.hunks = []
        self.binary = False
        self.seen_header = False

    def build(self) -> FilePatch:
        return FilePatch(self.old_path, self.new_path, tuple(self.hunks), self.binary)


def parse_unified(diff_text: str) -> list[FilePatch]:
    """Parse (possibly multi-file) unified diff text, git extended headers included.

    Text before the first file header (for example a commit message) is skipped.
    """
    cur = _Lines(diff_text)
    patches: list[FilePatch] = []
    b: Optional[_Builder] = None

    while cur.peek() is not None:
        line = cur.peek()
        if line.startswith("diff --git "):
            if b is not None:
                patches.append(b.build())
            b = _Builder()
            m = _DIFF_GIT.match(line)
            if m:
                b.old_path = _strip_prefix(m.group(1))
                b.new_path = _strip_prefix(m.group(2))
            cur.next()
        elif line.startswith("--- ") and _next_is_plus(cur):
            if b is None or b.hunks or b.seen_header:
                if b is not None:
                    patches.append(b.build())
                b = _Builder()
            b.old_path = _strip_prefix(cur.next()[4:])
            b.new_path = _strip_prefix(cur.next()[4:])
            b.seen_header = True
        elif line.startswith("@@ "):
            if b is None:
                raise MalformedDiff("hunk without file header", cur.offset())
            hunk = _parse_hunk(cur)
            if b.hunks and hunk.old_start < b.hunks[-1].old_start:
                raise MalformedDiff("hunks out of order", cur.offset())
            b.hunks.append(hunk)
        elif b is not None and not b.hunks and not b.seen_header:
            _parse_extended_header(b, cur.next())
        elif b is None or not line.strip():
            cur.next()
        else:
            raise MalformedDiff(f"unexpected line {line[:40]!r}", cur.offset())
    if b is not None:
        patches.append(b.build())
    return patches


def _next_is_plus(cur: _Lines) -> bool:
    j = cur.i + 1
    return j < len(cur.items) and cur.items[j][1].startswith("+++ ")


def _parse_extended_header(b: _Builder, line: str):
    if line.startswith("new file mode"):
        b.old_path = None
    elif line.startswith("deleted file mode"):
        b.new_path = None
    elif line.startswith("rename from "):
        b.old_path = _unquote(line[len("rename from "):])
    elif line.startswith("rename to "):
        b.new_path = _unquote(line[len("rename to "):])
    elif line.startswith("Binary files ") or line.startswith("GIT binary patch"):
        b.binary = True
    # index, mode, similarity and literal binary payload lines carry nothing we model


def _parse_hunk(cur: _Lines) -> Hunk:
    start = cur.offset()
    header = cur.next()
    m = _HUNK_HEADER.match(header)
    if not m:
        raise MalformedDiff(f"bad hunk header {header!r}", start)
    old_start, new_start = int(m.group(1)), int(m.group(3))
    old_len = int(m.group(2)) if m.group(2) is not None else 1
    new_len = int(m.group(4)) if m.group(4) is not None else 1
    old_no, new_no = old_start, new_start
    lines: list[ChangedLine] = []
    old_seen = new_seen = 0
    while old_seen < old_len or new_seen < new_len:
        line = cur.peek()
        if line is None:
            raise MalformedDiff("hunk body shorter than its header", cur.offset())
        if line.startswith("\\"):
            _mark_no_newline(lines)
            cur.next()
            continue
        tag, text = (line[:1], line[1:]) if line else (" ", "")
        if tag == " ":
            lines.append(ChangedLine(CONTEXT, old_no, new_no, text))
            old_no += 1
            new_no += 1
            old_seen += 1
            new_seen += 1
        elif tag == "-":
            lines.append(ChangedLine(DELETED, old_no, None, text))
            old_no += 1
            old_seen += 1
        elif tag == "+":
            lines.append(ChangedLine(ADDED, None, new_no, text))
            new_no += 1
            new_seen += 1
        else:
            raise MalformedDiff(f"bad hunk line {line[:40]!r}", cur.offset())
        cur.next()
        if old_seen > old_len or new_seen > new_len:
            raise MalformedDiff("hunk body longer than its header", cur.offset())
    while cur.peek() is not None and cur.peek().startswith("\\"):
        _mark_no_newline(lines)
        cur.next()
    return Hunk(old_start, old_len, new_start, new_len, tuple(lines), m.group(5))


def _mark_no_newline(lines: list[ChangedLine]):
    if lines:
        last = lines[-1]
        lines[-1] = ChangedLine(last.kind, last.old_no, last.new_no, last.text, True)


# --------------------------------------------------------------------------
# rendering

def _fmt_span(start: int, length: int) -> str:
    return f"{start}" if length == 1 else f"{start},{length}"


def render_hunk(h: Hunk) -> list[str]:
    out = [f"@@ -{_fmt_span(h.old_start, h.old_len)} +{_fmt_span(h.new_start, h.new_len)} @@"
           + (f" {h.section}" if h.section else "")]
    marks = {ADDED: "+", DELETED: "-", CONTEXT: " "}
    for ln in h.lines:
        out.append(marks[ln.kind] + ln.text)
        if ln.no_newline:
            out.append("\\ No newline at end of file")
    return out


def render_patch(p: FilePatch) -> str:
    old = p.old_path if p.old_path is not None else p.new_path
    new = p.new_path if p.new_path is not None else p.old_path
    out = [f"diff --git a/{old} b/{new}"]
    if p.old_path is None:
        out.append("new file mode 100644")
    elif p.new_path is None:
        out.append("deleted file mode 100644")
    elif p.old_path != p.new_path:
        out += [f"rename from {p.old_path}", f"rename to {p.new_path}"]
    if p.is_binary:
        out.append(f"Binary files {'a/' + p.old_path if p.old_path else '/dev/null'} and "
                   f"{'b/' + p.new_path if p.new_path else '/dev/null'} differ")
    elif p.hunks:
        out.append(f"--- {'a/' + p.old_path if p.old_path is not None else '/dev/null'}")
        out.append(f"+++ {'b/' + p.new_path if p.new_path is not None else '/dev/null'}")
        for h in p.hunks:
            out += render_hunk(h)
    return "\n".join(out) + "\n"


def render_unified(patches: Iterable[FilePatch]) -> str:
    return "".join(render_patch(p) for p in patches)


def count_changed_lines(patches: Iterable[FilePatch]) -> int:
    return sum(p.added_count + p.deleted_count for p in patches if not p.is_binary)


# --------------------------------------------------------------------------
# noise classification

BLANK = "blank"
COMMENT = "comment"
CODE = "code"


def classify_noise(text: str, language: str = "c") -> str:
    """Classify a single source line as ``blank``, ``comment`` or ``code``.

    Stateless: block-comment interiors are only recognised when the line
    starts with ``*``.  C and Java share the same comment syntax.
    """
    stripped = text.strip()
    if not stripped:
        return BLANK
    if stripped == "*" or stripped.startswith(("* ", "*\t", "*/")):
        rest = stripped.split("*/", 1)
        if len(rest) == 1 or classify_noise(rest[1], language) != CODE:
            return COMMENT
        return CODE
    has_code = has_comment = False
    i, n = 0, len(stripped)
    while i < n:
        c = stripped[i]
        if stripped.startswith("//", i):
            has_comment = True
            break
        if stripped.startswith("/*", i):
            has_comment = True
            end = stripped.find("*/", i + 2)
            if end < 0:
                break
            i = end + 2
            continue
        if c in "\"'":
            has_code = True
            j = i + 1
            while j < n and stripped[j] != c:
                j += 2 if stripped[j] == "\\" else 1
            i = j + 1
            continue
        if not c.isspace():
            has_code = True
        i += 1
    if has_comment and not has_code:
        return COMMENT
    return CODE


def _squash(text: str) -> str:
    return "".join(text.split())


def cosmetic_deletions(hunk: Hunk) -> set[int]:
    """Old line numbers of deleted lines that reappear, modulo whitespace, as added lines of the same hunk."""
    pool = Counter(_squash(ln.text) for ln in hunk.added)
    out = set()
    for ln in hunk.deleted:
        key = _squash(ln.text)
        if key and pool[key] > 0:
            pool[key] -= 1
            out.add(ln.old_no)
    return out


# --------------------------------------------------------------------------
# line alignment

@dataclass(frozen=True)
class LineMap:
    """Correspondence between unchanged lines of two file versions."""

    pairs: tuple[tuple[int, int], ...]
    old_to_new: dict = field(default_factory=dict, compare=False, repr=False)
    new_to_old: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.old_to_new.update(self.pairs)
        self.new_to_old.update((n, o) for o, n in self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __contains__(self, pair):
        return self.old_to_new.get(pair[0]) == pair[1]

    def map_old(self, old_no: int) -> Optional[int]:
        return self.old_to_new.get(old_no)

    def map_new(self, new_no: int) -> Optional[int]:
        return self.new_to_old.get(new_no)


def _myers_matches(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    """0-based index pairs of a longest common subsequence (Myers' greedy algorithm)."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    max_d = n + m
    offset = max_d + 1
    v = [0] * (2 * max_d + 3)
    trace = []  # trace[d] holds v[k] for k in [-d-1, d+1] before round d
    for d in range(max_d + 1):
        trace.append(v[offset - d - 1:offset + d + 2])
        for k in range(-d, d + 1, 2):
            if k == -d or (k != d and v[offset + k - 1] < v[offset + k + 1]):
                x = v[offset + k + 1]
            else:
                x = v[offset + k - 1] + 1
            y = x - k
            while x < n and y < m and a[x] == b[y]:
                x += 1
                y += 1
            v[offset + k] = x
            if x >= n and y >= m:
                return _backtrack(trace, d, n, m)
    raise AssertionError("unreachable")


def _backtrack(trace, d_final, n, m):
    matches = []
    x, y = n, m
    for d in range(d_final, -1, -1):
        row = trace[d]

        def at(k):
            return row[k + d + 1]

        k = x - y
        if d == 0:
            prev_k, prev_x, start_x = 0, 0, 0
        else:
            if k == -d or (k != d and at(k - 1) < at(k + 1)):
                prev_k = k + 1
                prev_x = at(prev_k)
                start_x = prev_x
            else:
                prev_k = k - 1
                prev_x = at(prev_k)
                start_x = prev_x + 1
        start_y = start_x - k
        while x > start_x and y > start_y:
            x -= 1
            y -= 1
            matches.append((x, y))
        x, y = prev_x, prev_x - prev_k
    matches.reverse()
    return matches


def lcs_pairs(a: Sequence[str], b: Sequence[str]) -> list[tuple[int, int]]:
    """1-based (old, new) pairs of unchanged lines in a minimal line diff."""
    n, m = len(a), len(b)
    lo = 0
    while lo < n and lo < m and a[lo] == b[lo]:
        lo += 1
    hi = 0
    while hi < n - lo and hi < m - lo and a[n - 1 - hi] == b[m - 1 - hi]:
        hi += 1
    pairs = [(i + 1, i + 1) for i in range(lo)]
    for i, j in _myers_matches(a[lo:n - hi], b[lo:m - hi]):
        pairs.append((lo + i + 1, lo + j + 1))
    pairs += [(n - hi + i + 1, m - hi + i + 1) for i in range(hi)]
    return pairs


def build_line_map(old: Optional[FileVersion], new: Optional[FileVersion]) -> LineMap:
    old_lines = old.lines if old is not None else ()
    new_lines = new.lines if new is not None else ()
    return LineMap(tuple(lcs_pairs(old_lines, new_lines)))


@dataclass(frozen=True)
class AlignedLine:
    """One row of a full-file alignment: '=' unchanged, '-' deleted, '+' added."""

    op: str
    old_no: Optional[int]
    new_no: Optional[int]
    text: str


def align(old: Sequence[str], new: Sequence[str]) -> list[AlignedLine]:
    """Full-file alignment rows; deletions precede additions within each gap."""
    rows = []
    i = j = 1
    for o, n in [*lcs_pairs(old, new), (len(old) + 1, len(new) + 1)]:
        while i < o:
            rows.append(AlignedLine("-", i, None, old[i - 1]))
            i += 1
        while j < n:
            rows.append(AlignedLine("+", None, j, new[j - 1]))
            j += 1
        if o <= len(old):
            rows.append(AlignedLine("=", o, n, old[o - 1]))
        i, j = o + 1, n + 1
    return rows


def patch_for(patches: Iterable[FilePatch], path: str) -> Optional[FilePatch]:
    for p in patches:
        if p.new_path == path or p.old_path == path:
            return p
    return None
