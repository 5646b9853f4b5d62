"""scikit-learn style wrapper around the identification algorithms.

Samples are ``(repo_name, fix)`` pairs (or :class:`DatasetEntry` objects);
targets are sets of inducing commit ids.  Nothing is learned: ``fit`` only
validates its input and the repositories directory, so the estimator can sit
in sklearn tooling such as ``cross_val_score`` or parameter grids.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .config import Config
from .errors import MissingRepository
from .evaluation import ALGORITHMS, DatasetEntry, Metrics, confusion, predict
from .repo import Repository


def check_fix_pairs(X) -> list[tuple[str, str]]:
    """Normalise samples to ``(repo_name, fix)`` tuples."""
    out = []
    for i, sample in enumerate(X):
        if isinstance(sample, DatasetEntry):
            sample = (sample.repo, sample.fix)
        if isinstance(sample, dict):
            sample = (sample.get("repo"), sample.get("fix"))
        if (not isinstance(sample, (tuple, list)) or len(sample) != 2
                or not all(isinstance(v, str) and v for v in sample)):
            raise ValueError(f"sample {i} must be a (repo_name, fix) pair, got {sample!r}")
        out.append((sample[0], sample[1]))
    if not out:
        raise ValueError("no samples given")
    return out


def check_inducing(y, n_samples: int) -> list[frozenset]:
    """Normalise targets to frozensets of lowercase commit ids."""
    y = [frozenset([t]) if isinstance(t, str) else frozenset(t) for t in y]
    if len(y) != n_samples:
        raise ValueError(f"{len(y)} targets for {n_samples} samples")
    return [frozenset(c.lower() for c in t) for t in y]


class SZZEstimator(BaseEstimator):
    def __init__(self, algorithm: str = "ag", repos_dir: Optional[str] = None,
                 config: Optional[Config] = None, gateway=None):
        self.algorithm = algorithm
        self.repos_dir = repos_dir
        self.config = config
        self.gateway = gateway

    def fit(self, X, y=None):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        pairs = check_fix_pairs(X)
        if y is not None:
            check_inducing(y, len(pairs))
        if self.repos_dir is None or not Path(self.repos_dir).is_dir():
            raise MissingRepository(f"repositories directory {self.repos_dir!r} does not exist")
        self.repos_dir_ = Path(self.repos_dir)
        self.n_samples_seen_ = len(pairs)
        return self

    def predict_full(self, X):
        """Full :class:`Prediction` records, one per sample."""
        check_is_fitted(self, "repos_dir_")
        out = []
        for repo_name, fix in check_fix_pairs(X):
            pred = predict(Repository(self.repos_dir_ / repo_name), fix, self.algorithm,
                           self.gateway, self.config)
            pred.repo = repo_name
            out.append(pred)
        return out

    def predict(self, X) -> list[frozenset]:
        return [p.predicted for p in self.predict_full(X)]

    def score(self, X, y) -> float:
        """Micro-averaged F1 of the predictions against ``y``."""
        predicted = self.predict(X)
        tp = fp = fn = 0
        for got, want in zip(predicted, check_inducing(y, len(predicted))):
            t, f, n = confusion(got, want)
            tp, fp, fn = tp + t, fp + f, fn + n
        return Metrics.from_counts(tp, fp, fn).f1
