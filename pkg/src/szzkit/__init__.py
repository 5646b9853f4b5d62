"""Bug-inducing commit identification: classic SZZ variants and an LLM-assisted pipeline."""

__version__ = "0.1.0"

from .classic import ag_szz, b_szz, ma_szz, run_classic, select_single  # noqa: E402
from .config import Config, LlmConfig, PipelineConfig, load_config  # noqa: E402
from .context import expand_context, refine_context, resolve_statement  # noqa: E402
from .diff import build_line_map, classify_noise, count_changed_lines, parse_unified  # noqa: E402
from .evaluation import (  # noqa: E402
    DatasetEntry, Metrics, classify_size, compute_metrics, mine_fixes, predict, run_eval,
)
from .llm import ChatRequest, ChatResponse, Gateway, UsageLedger, usage_summary  # noqa: E402
from .pipeline import run  # noqa: E402
from .prediction import Prediction  # noqa: E402
from .repo import Repository  # noqa: E402

__all__ = [
    "ChatRequest", "ChatResponse", "Config", "DatasetEntry", "Gateway", "LlmConfig", "Metrics",
    "PipelineConfig", "Prediction", "Repository", "UsageLedger", "ag_szz", "b_szz", "build_line_map",
    "classify_noise", "classify_size", "compute_metrics", "count_changed_lines", "expand_context",
    "load_config", "ma_szz", "mine_fixes", "parse_unified", "predict", "refine_context",
    "resolve_statement", "run", "run_classic", "run_eval", "select_single", "usage_summary",
]
