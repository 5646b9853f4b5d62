"""Per-fix output record shared by every algorithm."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

CONTEXT_ENHANCED = "context_enhanced"
RANK_BASED = "rank_based"
EMPTY = "empty"
CLASSIC = "classic"


@dataclass
class Prediction:
    fix: str
    predicted: frozenset = frozenset()
    route: str = EMPTY
    root_cause: Optional[str] = None
    candidates: Optional[list[tuple[str, int]]] = None  # (commit, committer_time), newest first
    llm_calls: int = 0
    tokens_total: int = 0
    wall_ms: int = 0
    diagnostics: list[str] = field(default_factory=list)
    repo: Optional[str] = None
    algorithm: Optional[str] = None

    def __post_init__(self):
        self.predicted = frozenset(self.predicted)
        if self.route == EMPTY and self.predicted:
            raise ValueError("route 'empty' requires an empty prediction")
        if self.route == CONTEXT_ENHANCED and len(self.predicted) != 1:
            raise ValueError("context-enhanced predictions hold exactly one commit")

    def to_dict(self) -> dict:
        d = {
            "fix": self.fix,
            "predicted": sorted(self.predicted),
            "route": self.route,
            "root_cause": self.root_cause,
            "candidates": None if self.candidates is None else [
                {"commit": c, "committer_time": t} for c, t in self.candidates],
            "llm_calls": self.llm_calls,
            "tokens_total": self.tokens_total,
            "wall_ms": self.wall_ms,
            "diagnostics": list(self.diagnostics),
        }
        if self.repo is not None:
            d["repo"] = self.repo
        if self.algorithm is not None:
            d["algorithm"] = self.algorithm
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "Prediction":
        cands = d.get("candidates")
        return cls(
            fix=d["fix"],
            predicted=frozenset(d.get("predicted", ())),
            route=d.get("route", EMPTY),
            root_cause=d.get("root_cause"),
            candidates=None if cands is None else [(c["commit"], c["committer_time"]) for c in cands],
            llm_calls=d.get("llm_calls", 0),
            tokens_total=d.get("tokens_total", 0),
            wall_ms=d.get("wall_ms", 0),
            diagnostics=list(d.get("diagnostics", ())),
            repo=d.get("repo"),
            algorithm=d.get("algorithm"),
        )
