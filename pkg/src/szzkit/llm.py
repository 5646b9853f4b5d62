"""Chat-completion gateway with live, record, replay and scripted modes.

Cassettes live one JSON file per request under a directory; the filename is
the SHA-256 of ``(system, user, tag)``, so a cassette only depends on prompt
content.  Replayed and scripted responses report deterministic token counts
and latencies, which keeps run reports reproducible.
"""
from __future__ import annotations

import hashlib
import importlib
import json
import logging
import math
import os
import tempfile
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .errors import CassetteMiss, DataError, LlmUnavailable, ProviderError, ResponderUnset

logger = logging.getLogger(__name__)

TAGS = frozenset({"summarize", "root_cause", "hint", "ability", "containment",
                  "verdict", "rank", "statements"})
MODES = ("live", "record", "replay", "scripted")


@dataclass(frozen=True)
class ChatRequest:
    system: str
    user: str
    tag: str
    temperature: float = 0.0
    max_output_tokens: int = 2048

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown step tag {self.tag!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")

    def key(self) -> str:
        material = json.dumps([self.system, self.user, self.tag], ensure_ascii=True)
        return hashlib.sha256(material.encode("ascii")).hexdigest()


@dataclass(frozen=True)
class ChatResponse:
    text: str
    tokens_in: int = 0
    tokens_out: int = 0
    latency_ms: int = 0
    from_cache: bool = False


def estimate_tokens(text: str) -> int:
    """Rough token count (four characters per token) for offline modes."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class Usage:
    llm_calls: int = 0
    tokens_total: int = 0
    wall_ms: int = 0

    def to_dict(self) -> dict:
        return {"llm_calls": self.llm_calls, "tokens_total": self.tokens_total, "wall_ms": self.wall_ms}


class UsageLedger:
    """Thread-safe per-fix counters of LLM calls, tokens and LLM wall time."""

    def __init__(self):
        self._lock = threading.Lock()
        self._per_fix: dict[str, Usage] = {}

    def record(self, fix: str, response: ChatResponse):
        with self._lock:
            u = self._per_fix.get(fix, Usage())
            self._per_fix[fix] = Usage(u.llm_calls + 1,
                                       u.tokens_total + response.tokens_in + response.tokens_out,
                                       u.wall_ms + response.latency_ms)

    def snapshot(self, fix: str) -> Usage:
        with self._lock:
            return self._per_fix.get(fix, Usage())

    def fixes(self) -> list[str]:
        with self._lock:
            return sorted(self._per_fix)


def usage_summary(ledger: UsageLedger) -> dict:
    fixes = ledger.fixes()
    totals = [ledger.snapshot(f) for f in fixes]
    calls = sum(u.llm_calls for u in totals)
    tokens = sum(u.tokens_total for u in totals)
    wall = sum(u.wall_ms for u in totals)
    n = len(fixes)
    return {
        "llm_calls": calls,
        "tokens_total": tokens,
        "wall_ms": wall,
        "fixes": n,
        "avg_llm_calls": calls / n if n else 0.0,
        "avg_tokens": tokens / n if n else 0.0,
        "avg_wall_ms": wall / n if n else 0.0,
    }


# --------------------------------------------------------------------------
# transports

class TransportError(Exception):
    def __init__(self, message, retryable=True):
        super().__init__(message)
        self.retryable = retryable


Transport = Callable[[dict], dict]


class HttpTransport:
    """POSTs OpenAI-style chat-completion payloads to ``endpoint``."""

    def __init__(self, endpoint: str, api_key: Optional[str] = None, timeout: float = 120.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.timeout = timeout

    def __call__(self, payload: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(self.endpoint, data=json.dumps(payload).encode("utf-8"),
                                     headers=headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as exc:
            raise TransportError(f"HTTP {exc.code}", retryable=exc.code >= 500 or exc.code == 429) from exc
        except (urllib.error.URLError, TimeoutError, ConnectionError) as exc:
            raise TransportError(str(exc)) from exc


def scripted_transport(responder: Callable[[ChatRequest], str]) -> Transport:
    """Wrap a responder as a chat-completion transport (used to record fixtures offline)."""

    def call(payload: dict) -> dict:
        msgs = {m["role"]: m["content"] for m in payload["messages"]}
        req = ChatRequest(msgs.get("system", ""), msgs["user"], payload["metadata"]["tag"],
                          payload.get("temperature", 0.0), payload.get("max_tokens", 2048))
        text = responder(req)
        return {
            "choices": [{"message": {"role": "assistant", "content": text}}],
            "usage": {"prompt_tokens": estimate_tokens(req.system + req.user),
                      "completion_tokens": estimate_tokens(text)},
        }

    return call


def load_responder(target: str) -> Callable[[ChatRequest], str]:
    """Import ``package.module:function``."""
    module, _, attr = target.partition(":")
    if not attr:
        raise DataError(f"responder must look like 'module:function', got {target!r}")
    try:
        return getattr(importlib.import_module(module), attr)
    except (ImportError, AttributeError) as exc:
        raise DataError(f"cannot load responder {target!r}: {exc}") from exc


# --------------------------------------------------------------------------
# gateway

class Gateway:
    """Single entry point for every LLM call made by the pipeline."""

    def __init__(self, mode: str = "scripted", *, transport: Optional[Transport] = None,
                 cassette_dir=None, responder: Optional[Callable[[ChatRequest], str]] = None,
                 model: str = "", max_attempts: int = 3, backoff=(1.0, 2.0, 4.0),
                 sleep: Callable[[float], None] = time.sleep):
        if mode not in MODES:
            raise DataError(f"unknown llm mode {mode!r}")
        if mode in ("record", "replay") and cassette_dir is None:
            raise DataError(f"{mode} mode needs a cassette directory")
        self.mode = mode
        self.transport = transport
        self.cassette_dir = Path(cassette_dir) if cassette_dir is not None else None
        self.responder = responder
        self.model = model
        self.max_attempts = max_attempts
        self.backoff = tuple(backoff)
        self.sleep = sleep

    @classmethod
    def from_config(cls, llm: dict, responder=None, transport=None) -> "Gateway":
        mode = llm.get("mode", "replay")
        if responder is None and llm.get("responder"):
            responder = load_responder(llm["responder"])
        if transport is None and mode in ("live", "record"):
            key_env = llm.get("api_key_env")
            key = os.environ.get(key_env) if key_env else None
            if llm.get("endpoint"):
                transport = HttpTransport(llm["endpoint"], key)
            elif responder is not None:
                transport = scripted_transport(responder)
        return cls(mode, transport=transport, cassette_dir=llm.get("cassette_dir"),
                   responder=responder, model=llm.get("model", ""))

    def complete(self, req: ChatRequest, ledger: Optional[UsageLedger] = None,
                 fix: Optional[str] = None) -> ChatResponse:
        if self.mode == "replay":
            resp = self._replay(req)
        elif self.mode == "scripted":
            if self.responder is None:
                raise ResponderUnset("scripted mode without a responder")
            text = self.responder(req)
            resp = ChatResponse(text, estimate_tokens(req.system + req.user), estimate_tokens(text), 0)
        else:
            resp = self._live(req)
            if self.mode == "record":
                self._store(req, resp)
        if ledger is not None:
            ledger.record(fix or "", resp)
        return resp

    def _live(self, req: ChatRequest) -> ChatResponse:
        if self.transport is None:
            raise ProviderError("no transport configured for live calls")
        payload = {
            "model": self.model,
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
            "messages": [{"role": "system", "content": req.system},
                         {"role": "user", "content": req.user}],
            "metadata": {"tag": req.tag},
        }
        last = None
        for attempt in range(self.max_attempts):
            start = time.monotonic()
            try:
                body = self.transport(payload)
            except TransportError as exc:
                last = exc
                if not exc.retryable:
                    break
                logger.warning("llm transport failure (attempt %d): %s", attempt + 1, exc)
                if attempt + 1 < self.max_attempts:
                    self.sleep(self.backoff[min(attempt, len(self.backoff) - 1)])
                continue
            latency = int((time.monotonic() - start) * 1000)
            try:
                text = body["choices"][0]["message"]["content"] or ""
            except (KeyError, IndexError, TypeError) as exc:
                raise ProviderError(f"malformed provider response: {exc}") from exc
            usage = body.get("usage") or {}
            return ChatResponse(text, int(usage.get("prompt_tokens", 0)),
                                int(usage.get("completion_tokens", 0)), latency)
        raise LlmUnavailable(f"provider failed after {self.max_attempts} attempts: {last}")

    def _path(self, req: ChatRequest) -> Path:
        return self.cassette_dir / f"{req.key()}.json"

    def _replay(self, req: ChatRequest) -> ChatResponse:
        path = self._path(req)
        if not path.exists():
            raise CassetteMiss(f"no cassette for {req.tag} request {req.key()[:12]}")
        data = json.loads(path.read_text(encoding="utf-8"))["response"]
        return ChatResponse(data["text"], data["tokens_in"], data["tokens_out"],
                            data["latency_ms"], from_cache=True)

    def _store(self, req: ChatRequest, resp: ChatResponse):
        self.cassette_dir.mkdir(parents=True, exist_ok=True)
        record = {
            "tag": req.tag,
            "system": req.system,
            "user": req.user,
            "response": {"text": resp.text, "tokens_in": resp.tokens_in,
                         "tokens_out": resp.tokens_out, "latency_ms": resp.latency_ms},
        }
        atomic_write(self._path(req), json.dumps(record, indent=2, sort_keys=True) + "\n")


def atomic_write(path, text: str):
    """Write via a temporary sibling file and rename, so readers never see partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
