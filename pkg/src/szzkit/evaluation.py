"""Datasets, metrics, commit-size classes, fix mining and the repeated evaluation run."""
from __future__ import annotations

import json
import logging
import re
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .classic import ALGORITHMS as CLASSIC_ALGORITHMS
from .classic import run_classic
from .config import Config
from .diff import count_changed_lines, parse_unified
from .errors import DataError, MisalignedDataset, MissingRepository, ProviderError, RepoError, SZZError
from .llm import Gateway, UsageLedger, usage_summary
from .pipeline import ALGORITHM as LLM_ALGORITHM
from .pipeline import run as run_pipeline
from .prediction import EMPTY, Prediction
from .repo import Repository

logger = logging.getLogger(__name__)

ALGORITHMS = (*CLASSIC_ALGORITHMS, LLM_ALGORITHM)
LANGUAGES = ("c", "java")
SMALL = "small"
LARGE = "large"
LARGE_ABOVE = 5  # changed lines; strictly more is large


@dataclass(frozen=True)
class DatasetEntry:
    repo: str
    fix: str
    inducing: frozenset
    language: str = "c"

    def __post_init__(self):
        object.__setattr__(self, "fix", self.fix.lower())
        object.__setattr__(self, "inducing", frozenset(c.lower() for c in self.inducing))
        if not self.inducing:
            raise DataError(f"entry {self.repo}:{self.fix} has no inducing commit")
        if self.fix in self.inducing:
            raise DataError(f"entry {self.repo}:{self.fix} lists the fix as its own inducing commit")
        if self.language not in LANGUAGES:
            raise DataError(f"entry {self.repo}:{self.fix} has unsupported language {self.language!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetEntry":
        try:
            return cls(d["repo"], d["fix"], frozenset(d["inducing"]), d.get("language", "c"))
        except (KeyError, TypeError) as exc:
            raise DataError(f"bad dataset entry {d!r}: {exc}") from exc

    def to_dict(self) -> dict:
        return {"repo": self.repo, "fix": self.fix, "inducing": sorted(self.inducing), "language": self.language}


def load_dataset(path) -> list[DatasetEntry]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc}") from exc
    entries = []
    for no, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{no}: invalid JSON ({exc.msg})") from exc
        entries.append(DatasetEntry.from_dict(data))
    return entries


# --------------------------------------------------------------------------
# metrics

def f1_score(precision: float, recall: float) -> float:
    return 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0


@dataclass(frozen=True)
class Metrics:
    precision: float
    recall: float
    f1: float
    tp: float
    fp: float
    fn: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Metrics":
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        return cls(p, r, f1_score(p, r), tp, fp, fn)

    @classmethod
    def mean(cls, items: Sequence["Metrics"]) -> "Metrics":
        if not items:
            return cls.from_counts(0, 0, 0)
        avg = lambda attr: statistics.fmean(getattr(m, attr) for m in items)  # noqa: E731
        return cls(avg("precision"), avg("recall"), avg("f1"), avg("tp"), avg("fp"), avg("fn"))

    def to_dict(self) -> dict:
        return asdict(self)


def _canonical(commit: str, truth: frozenset) -> str:
    """Map a full predicted id onto the (possibly abbreviated) truth id it extends."""
    for t in truth:
        if commit.startswith(t) or t.startswith(commit):
            return t
    return commit


def confusion(predicted: Iterable[str], inducing: frozenset) -> tuple[int, int, int]:
    hits = {_canonical(c.lower(), inducing) for c in predicted}
    tp = len(hits & inducing)
    return tp, len(hits) - tp, len(inducing - hits)


def _key(repo: Optional[str], fix: str) -> tuple:
    return (repo or "", fix.lower())


def compute_metrics(predictions: Sequence[Prediction], truth: Sequence[DatasetEntry]) -> Metrics:
    """Micro-averaged precision, recall and F1 over fix commits.

    Predictions and truth entries are paired by ``(repo, fix)``; a fix id may
    be abbreviated on either side.
    """
    index: dict[tuple, DatasetEntry] = {}
    for e in truth:
        if _key(e.repo, e.fix) in index:
            raise MisalignedDataset(f"duplicate truth entry {e.repo}:{e.fix}")
        index[_key(e.repo, e.fix)] = e
    if len(predictions) != len(index):
        raise MisalignedDataset(f"{len(predictions)} predictions for {len(index)} truth entries")
    tp = fp = fn = 0
    used = set()
    for p in predictions:
        entry = index.get(_key(p.repo, p.fix))
        if entry is None:
            entry = next((e for k, e in index.items()
                          if k[0] == (p.repo or "") and (p.fix.startswith(k[1]) or k[1].startswith(p.fix))), None)
        if entry is None or id(entry) in used:
            raise MisalignedDataset(f"prediction for {p.repo}:{p.fix} has no matching truth entry")
        used.add(id(entry))
        t, f, n = confusion(p.predicted, entry.inducing)
        tp, fp, fn = tp + t, fp + f, fn + n
    return Metrics.from_counts(tp, fp, fn)


# --------------------------------------------------------------------------
# commit size

def size_class(changed_lines: int) -> str:
    return LARGE if changed_lines > LARGE_ABOVE else SMALL


def classify_size(repo: Repository, fix: str) -> str:
    return size_class(count_changed_lines(parse_unified(repo.diff(repo.resolve_id(fix)))))


# --------------------------------------------------------------------------
# mining

FIXES_TAG = "fixes_tag"
KEYWORD = "keyword"

_FIXES_LINE = re.compile(r"^\s*Fixes:\s*([0-9a-fA-F]{7,40})\b", re.M)
_KEYWORDS = re.compile(r"\b(?:fix|fixes|fixed|fixing|bug|bugs|introduce|introduces|introduced|introducing)\b",
                       re.I)


def mine_fixes(repo: Repository, mode: str, since: Optional[int] = None, rev: str = "HEAD",
               diagnostics: Optional[list] = None) -> list[dict]:
    """Candidate fix commits, newest first.

    ``fixes_tag`` pairs each commit with the ids named on its ``Fixes:`` lines;
    ids that do not resolve are skipped (and noted in ``diagnostics``).
    ``keyword`` returns every commit whose message mentions fixing, bugs or
    introducing something, with ``inducing`` left as ``None``.
    """
    if mode not in (FIXES_TAG, KEYWORD):
        raise ValueError(f"unknown mining mode {mode!r}")
    notes = diagnostics if diagnostics is not None else []
    out = []
    for meta in repo.iter_commits(rev):
        if since is not None and meta.committer_time < since:
            continue
        if mode == KEYWORD:
            if _KEYWORDS.search(meta.message):
                out.append({"fix": meta.id, "inducing": None})
            continue
        inducing = []
        for ref in _FIXES_LINE.findall(meta.message):
            try:
                commit = repo.resolve_id(ref.lower())
            except RepoError as exc:
                notes.append(f"{meta.id[:12]}: cannot resolve Fixes: {ref} ({exc})")
                continue
            if commit != meta.id and commit not in inducing:
                inducing.append(commit)
        if inducing:
            out.append({"fix": meta.id, "inducing": sorted(inducing)})
    for n in notes:
        logger.info(n)
    return out


# --------------------------------------------------------------------------
# running algorithms

def predict(repo: Repository, fix: str, algorithm: str, gateway: Optional[Gateway] = None,
            config: Optional[Config] = None, ledger: Optional[UsageLedger] = None,
            key: Optional[str] = None) -> Prediction:
    """Run ``algorithm`` (a classic variant or ``llm4szz``) on one fix."""
    config = config or Config()
    if algorithm in CLASSIC_ALGORITHMS:
        return run_classic(repo, fix, algorithm)
    if algorithm != LLM_ALGORITHM:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if gateway is None:
        gateway = Gateway.from_config(asdict(config.llm))
    return run_pipeline(repo, fix, gateway, config.pipeline, config.llm, ledger, key)


def _empty(entry: DatasetEntry, algorithm: str, message: str) -> Prediction:
    return Prediction(fix=entry.fix, route=EMPTY, diagnostics=[message], repo=entry.repo, algorithm=algorithm)


def run_eval(dataset: Sequence[DatasetEntry], algorithm: str, repos_dir, repeats: int = 3,
             gateway: Optional[Gateway] = None, config: Optional[Config] = None,
             workers: Optional[int] = None) -> dict:
    """Evaluate ``algorithm`` over ``dataset`` ``repeats`` times and build the report.

    Entries whose repository is missing are skipped and listed under
    ``diagnostics``.  A keyboard interrupt stops scheduling new entries; the
    report then covers the finished ones and carries ``"interrupted": true``.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    repos_dir = Path(repos_dir)
    if not repos_dir.is_dir():
        raise MissingRepository(f"repositories directory {repos_dir} does not exist")
    config = config or Config()
    if algorithm == LLM_ALGORITHM and gateway is None:
        gateway = Gateway.from_config(asdict(config.llm))
    workers = workers or config.pipeline.workers

    diagnostics: list[str] = []
    usable: list[tuple[int, DatasetEntry]] = []
    sizes: dict[int, str] = {}
    for i, entry in enumerate(dataset):
        try:
            repo = Repository(repos_dir / entry.repo)
        except RepoError as exc:
            diagnostics.append(f"skipped {entry.repo}:{entry.fix}: {exc}")
            continue
        usable.append((i, entry))
        try:
            sizes[i] = classify_size(repo, entry.fix)
        except SZZError as exc:
            diagnostics.append(f"size of {entry.repo}:{entry.fix} unknown: {exc}")

    def one(i: int, entry: DatasetEntry, ledger: UsageLedger) -> Prediction:
        repo = Repository(repos_dir / entry.repo)  # one handle per task
        try:
            pred = predict(repo, entry.fix, algorithm, gateway, config, ledger, f"{i}:{entry.repo}:{entry.fix}")
        except ProviderError as exc:
            return _empty(entry, algorithm, f"provider error: {exc}")
        except SZZError as exc:
            return _empty(entry, algorithm, f"error: {exc}")
        pred.repo = entry.repo
        return pred

    interrupted = False
    runs: list[list[tuple[int, Prediction]]] = []
    ledgers: list[UsageLedger] = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for _ in range(repeats):
            ledger = UsageLedger()
            futures = [(i, e, pool.submit(one, i, e, ledger)) for i, e in usable]
            done = []
            try:
                for i, e, fut in futures:
                    done.append((i, fut.result()))
            except KeyboardInterrupt:
                interrupted = True
                for _, _, fut in futures:
                    fut.cancel()
                # let tasks already running finish; cancelled ones never started
                done = []
                for i, _, fut in futures:
                    if fut.cancelled():
                        continue
                    try:
                        done.append((i, fut.result()))
                    except KeyboardInterrupt:
                        pass
            runs.append(done)
            ledgers.append(ledger)
            if interrupted:
                break

    entries = dict(usable)
    per_repeat, by_size = [], {SMALL: [], LARGE: []}
    for done in runs:
        preds = [p for _, p in done]
        truth = [entries[i] for i, _ in done]
        per_repeat.append(compute_metrics(preds, truth))
        for cls in (SMALL, LARGE):
            picked = [(p, entries[i]) for i, p in done if sizes.get(i) == cls]
            by_size[cls].append(compute_metrics([p for p, _ in picked], [e for _, e in picked]))

    return {
        "algorithm": algorithm,
        "repeats": len(runs),
        "entries": len(dataset),
        "evaluated": len(usable),
        "interrupted": interrupted,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "per_repeat": [m.to_dict() for m in per_repeat],
        "averaged": Metrics.mean(per_repeat).to_dict(),
        "by_size": {
            cls: {
                "entries": sum(1 for i, _ in usable if sizes.get(i) == cls),
                "per_repeat": [m.to_dict() for m in ms],
                "averaged": Metrics.mean(ms).to_dict(),
            }
            for cls, ms in by_size.items()
        },
        "usage": [usage_summary(ledger) for ledger in ledgers],
        "predictions": [[p.to_dict() for _, p in sorted(done, key=lambda x: x[0])] for done in runs],
        "diagnostics": diagnostics,
    }


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"
