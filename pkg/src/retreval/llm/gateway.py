"""Single entry point for model calls: retries, trace records, role routing."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from retreval.errors import ProviderTimeout, ProviderUnavailable, TransportFailure
from retreval.llm.parsing import parse_complexity
from retreval.llm.prompts import DEFAULT_LIBRARY, PromptLibrary
from retreval.llm.providers import DEFAULT_MAX_TOKENS, DEFAULT_TEMPERATURE, ChatProvider, PromptRequest
from retreval.model import ComplexityEstimate, Problem
from retreval.trace import RunTrace

# roles answered by the critic backend when one is configured
CRITIC_ROLES = frozenset({"cross_score"})


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


def complete(provider: ChatProvider, request: PromptRequest, trace: RunTrace) -> str:
    """Send ``request``, retrying transport failures up to ``provider.max_retries``.

    Every success appends exactly one ``call`` event. Failed attempts are
    logged as warnings; the final failure is recorded before raising.
    """
    attempts = provider.max_retries + 1
    for attempt in range(1, attempts + 1):
        try:
            completion = provider.generate(request)
        except TransportFailure as exc:
            trace.warn(f"transport failure on attempt {attempt}/{attempts}: {exc}", role=request.role_tag)
            continue
        except ProviderTimeout as exc:
            trace.event("provider_error", role=request.role_tag, error="timeout", detail=str(exc))
            raise
        trace.event(
            "call",
            role=request.role_tag,
            provider=provider.name,
            prompt_hash=prompt_hash(request.prompt),
            prompt=request.prompt,
            response=completion.text,
            latency=round(completion.latency, 6),
            attempts=attempt,
        )
        return completion.text
    trace.event("provider_error", role=request.role_tag, error="unavailable", attempts=attempts)
    raise ProviderUnavailable(f"{provider.name}: gave up after {attempts} attempts")


@dataclass
class Gateway:
    """Provider(s), prompt library and trace bundled for one episode."""

    provider: ChatProvider
    trace: RunTrace = field(default_factory=RunTrace)
    prompts: PromptLibrary = field(default_factory=lambda: DEFAULT_LIBRARY)
    critic: ChatProvider | None = None
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def for_trace(self, trace: RunTrace) -> Gateway:
        return Gateway(self.provider, trace, self.prompts, self.critic, self.temperature, self.max_tokens)

    def send(self, request: PromptRequest) -> str:
        provider = self.critic if (self.critic is not None and request.role_tag in CRITIC_ROLES) else self.provider
        return complete(provider, request, self.trace)

    def ask(self, role_tag: str, template: str, **values: object) -> str:
        request = self.prompts.request(role_tag, template, self.temperature, self.max_tokens, **values)
        return self.send(request)

    def warn(self, message: str) -> None:
        self.trace.warn(message)


def estimate_complexity(gateway: Gateway, problem: Problem) -> ComplexityEstimate:
    text = gateway.ask("complexity", "complexity", problem=problem.statement)
    level = parse_complexity(text, gateway.warn)
    gateway.trace.event("complexity", level=level)
    return ComplexityEstimate(level=level, rationale=text.strip())
