"""Read-only access to a git repository through the ``git`` command line.

Every query runs ``git`` in a subprocess, so a :class:`Repository` handle is
cheap and each worker thread or process can open its own.  Blame results and
commit metadata are cached per handle; the metadata cache is lock protected so
a handle may be shared by reader threads.
"""
from __future__ import annotations

import functools
import logging
import os
import re
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import (
    AmbiguousPrefix,
    BinaryFile,
    FileAbsent,
    LineOutOfRange,
    NotARepository,
    RepoError,
    UnknownRef,
)

logger = logging.getLogger(__name__)

EMPTY_TREE = "4b825dc642cb6eb9a060e54bf8d69288fbee4904"
RENAME_THRESHOLD = "50%"

_FULL_ID = re.compile(r"^[0-9a-f]{40}$")
_GIT_OPTS = ["-c", "core.quotepath=off", "-c", "diff.noprefix=false",
             "-c", "blame.ignoreRevsFile=", "-c", "color.ui=never"]


def is_full_id(text: str) -> bool:
    return bool(_FULL_ID.match(text))


@dataclass(frozen=True)
class CommitMeta:
    id: str
    parents: tuple[str, ...]
    committer_time: int
    author_time: int
    message: str

    @property
    def is_merge(self) -> bool:
        return len(self.parents) >= 2

    @property
    def first_parent(self) -> Optional[str]:
        return self.parents[0] if self.parents else None

    @property
    def subject(self) -> str:
        return self.message.split("\n", 1)[0]


@dataclass(frozen=True)
class FileVersion:
    path: str
    rev: Optional[str]
    lines: tuple[str, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.lines)

    def line(self, line_no: int) -> str:
        """Return the 1-indexed line ``line_no``."""
        return self.lines[line_no - 1]

    @classmethod
    def from_text(cls, text: str, path: str = "", rev: Optional[str] = None) -> "FileVersion":
        return cls(path, rev, tuple(split_lines(text)))


@dataclass(frozen=True)
class LineOrigin:
    commit: str
    path: str
    line_no: int

    def to_dict(self) -> dict:
        return {"commit": self.commit, "path": self.path, "line_no": self.line_no}


@dataclass(frozen=True)
class ChangedFile:
    old_path: Optional[str]
    new_path: Optional[str]
    status: str  # added | deleted | modified | renamed

    @property
    def path(self) -> str:
        return self.new_path if self.new_path is not None else self.old_path


def split_lines(text: str) -> list[str]:
    """Split on LF after normalising CRLF; a trailing newline adds no line."""
    text = text.replace("\r\n", "\n")
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


def decode(data: bytes) -> str:
    return data.decode("utf-8", errors="surrogateescape")


def looks_binary(data: bytes) -> bool:
    # same heuristic git uses: a NUL byte in the first 8000 bytes
    return b"\0" in data[:8000]


class Repository:
    """Handle on an on-disk git repository."""

    def __init__(self, path):
        self.path = Path(path)
        if not self.path.exists():
            raise NotARepository(f"{self.path} does not exist")
        proc = self._run(["rev-parse", "--git-dir"], check=False)
        if proc.returncode != 0:
            raise NotARepository(f"{self.path} is not a git repository")
        self._meta: dict[str, CommitMeta] = {}
        self._meta_lock = threading.Lock()

    def __repr__(self):
        return f"Repository({str(self.path)!r})"

    # -- plumbing -----------------------------------------------------------

    def _run(self, args, check=True, input=None) -> subprocess.CompletedProcess:
        env = dict(os.environ, LC_ALL="C", GIT_PAGER="cat")
        proc = subprocess.run(
            ["git", *_GIT_OPTS, *args],
            cwd=self.path,
            input=input,
            capture_output=True,
            env=env,
        )
        if check and proc.returncode != 0:
            raise RepoError(f"git {' '.join(args)} failed: {decode(proc.stderr).strip()}")
        return proc

    # -- commits ------------------------------------------------------------

    def resolve(self, ref: str) -> CommitMeta:
        """Resolve a full id, an id prefix, or a symbolic ref to its metadata."""
        ref = ref.strip()
        if is_full_id(ref.lower()):
            cached = self._meta.get(ref.lower())
            if cached is not None:
                return cached
        proc = self._run(["rev-parse", "--verify", "--end-of-options", f"{ref}^{{commit}}"], check=False)
        if proc.returncode != 0:
            err = decode(proc.stderr)
            if "is ambiguous" in err:
                raise AmbiguousPrefix(f"prefix {ref!r} matches more than one commit")
            raise UnknownRef(f"cannot resolve {ref!r}")
        return self._load_meta(decode(proc.stdout).strip())

    def resolve_id(self, ref: str) -> str:
        return self.resolve(ref).id

    def _load_meta(self, commit_id: str) -> CommitMeta:
        with self._meta_lock:
            cached = self._meta.get(commit_id)
        if cached is not None:
            return cached
        fmt = "%H%x00%P%x00%ct%x00%at%x00%B"
        proc = self._run(["show", "-s", f"--format={fmt}", commit_id, "--"])
        meta = _parse_meta(decode(proc.stdout))
        with self._meta_lock:
            self._meta[meta.id] = meta
        return meta

    def parent(self, rev: str) -> Optional[str]:
        return self.resolve(rev).first_parent

    def is_ancestor(self, ancestor: str, rev: str) -> bool:
        proc = self._run(["merge-base", "--is-ancestor", ancestor, rev], check=False)
        return proc.returncode == 0

    def iter_commits(self, rev: str = "HEAD") -> list[CommitMeta]:
        """All commits reachable from ``rev``, newest first."""
        fmt = "%H%x00%P%x00%ct%x00%at%x00%B%x1e"
        proc = self._run(["log", f"--format={fmt}", rev, "--"])
        metas = []
        for record in decode(proc.stdout).split("\x1e"):
            record = record.lstrip("\n")
            if not record:
                continue
            meta = _parse_meta(record)
            with self._meta_lock:
                self._meta.setdefault(meta.id, meta)
            metas.append(meta)
        return metas

    # -- files --------------------------------------------------------------

    def file_at(self, rev: str, path: str) -> Optional[FileVersion]:
        """Snapshot of ``path`` at ``rev``; ``None`` when the path does not exist there."""
        commit = self.resolve(rev).id
        return self._file_at(commit, path)

    @functools.lru_cache(maxsize=512)
    def _file_at(self, commit: str, path: str) -> Optional[FileVersion]:
        proc = self._run(["cat-file", "blob", f"{commit}:{path}"], check=False)
        if proc.returncode != 0:
            return None
        if looks_binary(proc.stdout):
            raise BinaryFile(f"{path} at {commit[:12]} is binary")
        return FileVersion(path, commit, tuple(split_lines(decode(proc.stdout))))

    def changed_files(self, rev: str) -> list[ChangedFile]:
        """Files touched by ``rev`` relative to its first parent (empty tree for roots)."""
        meta = self.resolve(rev)
        base = meta.first_parent or EMPTY_TREE
        proc = self._run(["diff-tree", "-r", "-z", f"-M{RENAME_THRESHOLD}",
                          "--name-status", base, meta.id])
        fields = decode(proc.stdout).split("\0")
        out = []
        i = 0
        while i < len(fields) and fields[i]:
            status = fields[i]
            kind = status[0]
            if kind in "RC":
                old, new = fields[i + 1], fields[i + 2]
                i += 3
                out.append(ChangedFile(old, new, "renamed" if kind == "R" else "added"))
                continue
            p = fields[i + 1]
            i += 2
            if kind == "A":
                out.append(ChangedFile(None, p, "added"))
            elif kind == "D":
                out.append(ChangedFile(p, None, "deleted"))
            else:
                out.append(ChangedFile(p, p, "modified"))
        return out

    def diff(self, rev: str, context: int = 3) -> str:
        """Unified diff of ``rev`` against its first parent."""
        meta = self.resolve(rev)
        base = meta.first_parent or EMPTY_TREE
        proc = self._run(["diff", f"-M{RENAME_THRESHOLD}", "--no-color", "--no-ext-diff",
                          "--src-prefix=a/", "--dst-prefix=b/", f"-U{context}",
                          base, meta.id, "--"])
        return decode(proc.stdout)

    # -- line tracing -------------------------------------------------------

    def blame(self, rev: str, path: str) -> tuple[LineOrigin, ...]:
        """Origin of every line of ``path`` at ``rev`` (first-parent walk, renames followed)."""
        commit = self.resolve(rev).id
        return self._blame(commit, path, True)

    def blame_all_parents(self, rev: str, path: str) -> tuple[LineOrigin, ...]:
        """Like :meth:`blame` but lets merges pass lines through any parent."""
        commit = self.resolve(rev).id
        return self._blame(commit, path, False)

    @functools.lru_cache(maxsize=256)
    def _blame(self, commit: str, path: str, first_parent: bool) -> tuple[LineOrigin, ...]:
        if self._file_at(commit, path) is None:
            raise FileAbsent(f"{path} does not exist at {commit[:12]}")
        args = ["blame", "--line-porcelain"]
        if first_parent:
            args.append("--first-parent")
        proc = self._run([*args, commit, "--", path])
        return tuple(_parse_line_porcelain(decode(proc.stdout)))

    def trace_line(self, rev: str, path: str, line_no: int) -> LineOrigin:
        """Commit that last added or modified ``line_no`` of ``path`` at ``rev``."""
        origins = self.blame(rev, path)
        if not 1 <= line_no <= len(origins):
            raise LineOutOfRange(f"{path}:{line_no} outside 1..{len(origins)}")
        return origins[line_no - 1]


def _parse_meta(record: str) -> CommitMeta:
    commit_id, parents, ctime, atime, message = record.split("\0", 4)
    return CommitMeta(
        id=commit_id.strip(),
        parents=tuple(parents.split()),
        committer_time=int(ctime),
        author_time=int(atime),
        message=message.rstrip("\n"),
    )


def _parse_line_porcelain(text: str) -> list[LineOrigin]:
    origins = []
    commit = orig_line = filename = None
    for raw in text.split("\n"):
        if raw.startswith("\t"):
            origins.append(LineOrigin(commit, filename, orig_line))
            commit = None
            continue
        if commit is None:
            if not raw:
                continue
            parts = raw.split(" ")
            commit, orig_line = parts[0], int(parts[1])
        elif raw.startswith("filename "):
            filename = raw[len("filename "):]
    return origins
