"""Prompt templates (plain-text files with ``$name`` placeholders) and builders."""

from __future__ import annotations

import string
from collections.abc import Sequence
from importlib import resources
from pathlib import Path

from retreval.errors import InvalidArgument, NotFound
from retreval.llm.providers import DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE, PromptRequest
from retreval.model import Problem

NONE_PLACEHOLDER = "(none)"


def numbered(items: Sequence[str], prefix: str = "") -> str:
    if not items:
        return NONE_PLACEHOLDER
    return "\n".join(f"{i}. {prefix}{item}" for i, item in enumerate(items, 1))


class PromptLibrary:
    """Looks templates up in ``template_dir`` first, then in the bundled set.

    A partial override directory is fine: missing names fall back to the
    packaged defaults.
    """

    def __init__(self, template_dir: str | Path | None = None) -> None:
        self.template_dir = Path(template_dir) if template_dir else None
        if self.template_dir is not None and not self.template_dir.is_dir():
            raise InvalidArgument(f"template directory not found: {self.template_dir}")
        self._cache: dict[str, string.Template] = {}

    def template(self, name: str) -> string.Template:
        if name not in self._cache:
            text = None
            if self.template_dir is not None:
                candidate = self.template_dir / f"{name}.txt"
                if candidate.is_file():
                    text = candidate.read_text(encoding="utf-8")
            if text is None:
                bundled = resources.files("retreval") / "templates" / f"{name}.txt"
                if not bundled.is_file():
                    raise NotFound(f"no prompt template named {name!r}")
                text = bundled.read_text(encoding="utf-8")
            self._cache[name] = string.Template(text)
        return self._cache[name]

    def render(self, name: str, **values: object) -> str:
        try:
            return self.template(name).substitute({k: str(v) for k, v in values.items()}).strip() + "\n"
        except KeyError as exc:
            raise InvalidArgument(f"template {name!r} needs placeholder {exc.args[0]!r}") from None

    def request(
        self,
        role_tag: str,
        name: str,
        temperature: float = DEFAULT_TEMPERATURE,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        **values: object,
    ) -> PromptRequest:
        return PromptRequest(role_tag, self.render(name, **values), temperature, max_tokens)


DEFAULT_LIBRARY = PromptLibrary()


def build_generation_prompt(
    parent_chain: str,
    memory_ctx,
    problem: Problem,
    n_children: int,
    suggestions: Sequence[str] = (),
    library: PromptLibrary | None = None,
) -> PromptRequest:
    """Expansion prompt: problem, chain, insights, failure constraints, then the ask.

    ``memory_ctx`` is a :class:`retreval.memory.MemoryContext`.
    """
    if n_children < 1:
        raise InvalidArgument("n_children must be >= 1")
    library = library or DEFAULT_LIBRARY
    return library.request(
        "generate",
        "generate",
        problem=problem.statement,
        chain=parent_chain,
        insights=numbered(memory_ctx.insight_list),
        failures=numbered(memory_ctx.failure_constraints, prefix="Avoid: "),
        strategies=numbered(memory_ctx.strategy_references),
        suggestions=numbered(list(suggestions)),
        n=n_children,
    )
