"""Function and method spans from a tree-sitter parse."""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass
from typing import Optional

from tree_sitter import Language, Parser

from .repo import FileVersion

logger = logging.getLogger(__name__)

_FUNCTION_NODES = {
    "c": {"function_definition"},
    "java": {"method_declaration", "constructor_declaration", "compact_constructor_declaration"},
}

_EXTENSIONS = {
    ".c": "c", ".h": "c",
    ".java": "java",
}


@dataclass(frozen=True)
class FunctionSpan:
    name: str
    start_line: int
    end_line: int
    rev: Optional[str] = None
    path: str = ""

    def __contains__(self, line_no: int) -> bool:
        return self.start_line <= line_no <= self.end_line


def language_for(path: str) -> Optional[str]:
    """Guess the source language from the file extension (``None`` if unsupported)."""
    dot = path.rfind(".")
    return _EXTENSIONS.get(path[dot:].lower()) if dot >= 0 else None


@functools.lru_cache(maxsize=None)
def _language(name: str) -> Language:
    if name == "c":
        import tree_sitter_c as grammar
    elif name == "java":
        import tree_sitter_java as grammar
    else:
        raise ValueError(f"unsupported language {name!r}")
    return Language(grammar.language())


def _name_of(node, language: str) -> str:
    if language == "java":
        name = node.child_by_field_name("name")
        return name.text.decode("utf-8", "replace") if name is not None else "<anonymous>"
    decl = node.child_by_field_name("declarator")
    while decl is not None and decl.type not in ("identifier", "field_identifier"):
        inner = decl.child_by_field_name("declarator")
        if inner is None:
            ident = next((c for c in decl.children if c.type in ("identifier", "field_identifier")), None)
            return ident.text.decode("utf-8", "replace") if ident is not None else "<anonymous>"
        decl = inner
    return decl.text.decode("utf-8", "replace") if decl is not None else "<anonymous>"


def extract_function_spans(file: FileVersion, language: Optional[str] = None) -> list[FunctionSpan]:
    """Outermost function definitions of ``file`` in source order.

    Lambdas, local and anonymous classes stay inside their enclosing
    definition.  Definitions that tree-sitter could only parse with errors are
    skipped, and a parser failure yields an empty list.
    """
    language = language or language_for(file.path)
    if language not in _FUNCTION_NODES:
        return []
    source = "\n".join(file.lines).encode("utf-8", errors="surrogateescape")
    try:
        tree = Parser(_language(language)).parse(source)
    except Exception:  # pragma: no cover - tree-sitter rarely raises
        logger.warning("parse failure for %s", file.path)
        return []

    kinds = _FUNCTION_NODES[language]
    spans: list[FunctionSpan] = []
    stack = [tree.root_node]
    found = []
    while stack:
        node = stack.pop()
        if node.type in kinds:
            if not node.has_error:
                found.append(node)
            continue
        stack.extend(reversed(node.children))
    for node in sorted(found, key=lambda n: n.start_byte):
        start, end = node.start_point[0] + 1, node.end_point[0] + 1
        if spans and start <= spans[-1].end_line:
            continue  # several definitions on one line: keep the first
        spans.append(FunctionSpan(_name_of(node, language), start, end, file.rev, file.path))
    return spans
