"""Chat-completion backends: an OpenAI-compatible HTTP client and a scripted double."""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal
from urllib.parse import urlparse

import httpx
import yaml

from retreval.errors import InvalidArgument, ProviderError, ProviderTimeout, TransportFailure

RoleTag = Literal[
    "generate",
    "self_critique",
    "refine",
    "cross_score",
    "complexity",
    "insight_extract",
    "final_answer",
    "judge",
    # baseline steps
    "react_thought",
    "react_action",
    "react_observation",
    "reflect",
]
ROLE_TAGS: tuple[str, ...] = RoleTag.__args__  # type: ignore[attr-defined]

DEFAULT_TEMPERATURE = 0.7
DEFAULT_MAX_TOKENS = 2048


@dataclass(frozen=True)
class PromptRequest:
    role_tag: str
    prompt: str
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if self.role_tag not in ROLE_TAGS:
            raise InvalidArgument(f"unknown role tag {self.role_tag!r}")
        if not self.prompt.strip():
            raise InvalidArgument("prompt must be non-empty")
        if self.temperature < 0:
            raise InvalidArgument("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise InvalidArgument("max_tokens must be > 0")


@dataclass(frozen=True)
class Completion:
    text: str
    latency: float = 0.0
    prompt_tokens: int | None = None
    completion_tokens: int | None = None


class ChatProvider:
    """Base class. Subclasses implement :meth:`_generate`.

    ``calls`` counts successful completions only, so it can be checked
    against the number of ``call`` events in a trace.
    """

    name = "provider"
    max_retries = 0

    def __init__(self) -> None:
        self.calls = 0
        self._count_lock = threading.Lock()

    def generate(self, request: PromptRequest) -> Completion:
        completion = self._generate(request)
        with self._count_lock:
            self.calls += 1
        return completion

    def _generate(self, request: PromptRequest) -> Completion:
        raise NotImplementedError


@dataclass
class ProviderConfig:
    endpoint_url: str
    model_name: str
    api_key: str | None = field(default=None, repr=False)
    request_timeout: float = 120.0
    max_retries: int = 2
    seed: int | None = None

    def __post_init__(self) -> None:
        parsed = urlparse(self.endpoint_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise InvalidArgument(f"endpoint_url is not an http(s) URL: {self.endpoint_url!r}")
        if not 0 <= self.max_retries <= 10:
            raise InvalidArgument("max_retries must be in 0..10")

    @classmethod
    def from_env(cls, endpoint_url: str, model_name: str, api_key_env: str = "OPENAI_API_KEY", **kw: Any) -> ProviderConfig:
        return cls(endpoint_url, model_name, api_key=os.environ.get(api_key_env), **kw)


class OpenAIChatProvider(ChatProvider):
    """POSTs to ``<endpoint_url>/chat/completions`` (Ollama, vLLM, OpenAI...)."""

    name = "openai-chat"

    def __init__(self, config: ProviderConfig, transport: httpx.BaseTransport | None = None) -> None:
        super().__init__()
        self.config = config
        self.max_retries = config.max_retries
        headers = {"Content-Type": "application/json"}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self._client = httpx.Client(
            base_url=config.endpoint_url.rstrip("/"),
            headers=headers,
            timeout=config.request_timeout,
            transport=transport,
        )

    def _generate(self, request: PromptRequest) -> Completion:
        payload: dict[str, Any] = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if self.config.seed is not None:
            payload["seed"] = self.config.seed
        start = time.perf_counter()
        try:
            response = self._client.post("/chat/completions", json=payload)
        except httpx.TimeoutException as exc:
            raise ProviderTimeout(f"request timed out after {self.config.request_timeout}s") from exc
        except httpx.TransportError as exc:
            raise TransportFailure(f"{type(exc).__name__}: {exc}") from exc
        latency = time.perf_counter() - start
        if response.status_code >= 500 or response.status_code == 429:
            raise TransportFailure(f"HTTP {response.status_code} from {self.config.endpoint_url}")
        if response.status_code >= 400:
            raise ProviderError(f"HTTP {response.status_code}: {response.text[:200]}")
        try:
            body = response.json()
            text = body["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed chat-completion response: {response.text[:200]}") from exc
        usage = body.get("usage") or {}
        return Completion(
            text=text,
            latency=latency,
            prompt_tokens=usage.get("prompt_tokens"),
            completion_tokens=usage.get("completion_tokens"),
        )

    def close(self) -> None:
        self._client.close()


@dataclass
class ScriptedRule:
    """``role`` of ``"*"`` matches every role tag; ``pattern`` is a plain substring."""

    role: str
    response: str
    pattern: str | None = None
    consume_once: bool = False

    def __post_init__(self) -> None:
        if self.role != "*" and self.role not in ROLE_TAGS:
            raise InvalidArgument(f"unknown role tag in script rule: {self.role!r}")

    @property
    def is_fallback(self) -> bool:
        return self.role == "*" and self.pattern is None and not self.consume_once

    def matches(self, request: PromptRequest) -> bool:
        if self.role != "*" and self.role != request.role_tag:
            return False
        return self.pattern is None or self.pattern in request.prompt


class ScriptedProvider(ChatProvider):
    """Deterministic rule-based stand-in for an LLM.

    Rules are tried in declaration order; the first live match answers.
    ``consume_once`` rules retire after answering. A catch-all fallback rule
    is mandatory so every request gets some response.
    """

    name = "scripted"

    def __init__(self, rules: list[ScriptedRule]) -> None:
        super().__init__()
        if not any(rule.is_fallback for rule in rules):
            raise InvalidArgument("script needs a fallback rule (role '*', no pattern, not consume_once)")
        self._rules = list(rules)
        self._used: set[int] = set()
        self._lock = threading.Lock()

    def _generate(self, request: PromptRequest) -> Completion:
        with self._lock:
            for index, rule in enumerate(self._rules):
                if index in self._used or not rule.matches(request):
                    continue
                if rule.consume_once:
                    self._used.add(index)
                return Completion(text=rule.response)
        raise AssertionError("unreachable: fallback rule always matches")

    @classmethod
    def from_dicts(cls, items: list[dict[str, Any]]) -> ScriptedProvider:
        rules = []
        for item in items:
            rules.append(
                ScriptedRule(
                    role=item.get("role", "*"),
                    response=str(item["response"]),
                    pattern=item.get("pattern"),
                    consume_once=bool(item.get("once", item.get("consume_once", False))),
                )
            )
        return cls(rules)

    @classmethod
    def from_file(cls, path: str | Path) -> ScriptedProvider:
        """Load a YAML script: either a list of rules or ``{rules: [...]}``."""
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        if isinstance(data, dict):
            data = data.get("rules")
        if not isinstance(data, list):
            raise InvalidArgument(f"{path}: expected a list of rules")
        return cls.from_dicts(data)
