"""Build the fixture repositories and (re)record the shipped replay cassettes.

Run ``python3 tests/support/cassettes.py`` from the package root after
changing a prompt template or the fixtures; cassette keys hash the prompt
text, so stale cassettes show up as replay misses.
"""
from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

if __package__ in (None, ""):
    sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
    __package__ = "support"

from szzkit.config import Config
from szzkit.evaluation import DatasetEntry
from szzkit.llm import Gateway, scripted_transport
from szzkit.pipeline import run
from szzkit.repo import Repository

from .histories import build_instance_history, build_lock_history
from .responders import fixtures

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"
CASSETTES = FIXTURES / "cassettes"
REPLAY_CONFIG = FIXTURES / "replay.json"


def build_fixture_repos(repos_dir) -> list[DatasetEntry]:
    """Create the fixture repositories under ``repos_dir`` and return the dataset."""
    repos_dir = Path(repos_dir)
    lock = build_lock_history(repos_dir / "acme")
    java = build_instance_history(repos_dir / "accumulo")
    return [
        DatasetEntry("acme", lock.fix, frozenset([lock.create]), "c"),
        DatasetEntry("accumulo", java.fix, frozenset([java.create]), "java"),
    ]


def write_dataset(entries, path):
    Path(path).write_text("".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in entries))


def record(cassette_dir=CASSETTES):
    cassette_dir = Path(cassette_dir)
    if cassette_dir.exists():
        shutil.rmtree(cassette_dir)
    config = Config()
    gateway = Gateway("record", transport=scripted_transport(fixtures), cassette_dir=cassette_dir)
    with tempfile.TemporaryDirectory() as tmp:
        for entry in build_fixture_repos(tmp):
            pred = run(Repository(Path(tmp) / entry.repo), entry.fix, gateway, config.pipeline, config.llm)
            print(f"{entry.repo}: {pred.route} {sorted(pred.predicted)} ({pred.llm_calls} calls)")
    # replayed latencies come from the recording; pin them for stable reports
    for f in sorted(cassette_dir.glob("*.json")):
        data = json.loads(f.read_text())
        data["response"]["latency_ms"] = 1200 + len(data["response"]["text"])
        f.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(f"{len(list(cassette_dir.glob('*.json')))} cassettes in {cassette_dir}")


if __name__ == "__main__":
    record()
