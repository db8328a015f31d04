from __future__ import annotations

import json

import httpx
import pytest

from retreval.errors import InvalidArgument, ProviderError, ProviderTimeout, ProviderUnavailable
from retreval.llm.gateway import Gateway, complete, estimate_complexity
from retreval.llm.providers import (
    OpenAIChatProvider,
    PromptRequest,
    ProviderConfig,
    ScriptedProvider,
)
from retreval.trace import RunTrace

from helpers import PROBLEM, fallback, rule


def _http_provider(handler, max_retries=2):
    config = ProviderConfig("http://model.test/v1", "tiny", api_key="k", max_retries=max_retries, seed=7)
    return OpenAIChatProvider(config, transport=httpx.MockTransport(handler))


def _ok(text="hello"):
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}], "usage": {"prompt_tokens": 3}})


def test_prompt_request_defaults_and_validation():
    request = PromptRequest("generate", "hi")
    assert (request.temperature, request.max_tokens) == (0.7, 2048)
    with pytest.raises(InvalidArgument):
        PromptRequest("generate", "")
    with pytest.raises(InvalidArgument):
        PromptRequest("dance", "hi")
    with pytest.raises(InvalidArgument):
        PromptRequest("generate", "hi", temperature=-1)
    with pytest.raises(InvalidArgument):
        PromptRequest("generate", "hi", max_tokens=0)


def test_provider_config_validation(monkeypatch):
    with pytest.raises(InvalidArgument):
        ProviderConfig("not a url", "m")
    with pytest.raises(InvalidArgument):
        ProviderConfig("http://x", "m", max_retries=-1)
    monkeypatch.setenv("MY_KEY", "secret")
    assert ProviderConfig.from_env("http://x/v1", "m", api_key_env="MY_KEY").api_key == "secret"


def test_scripted_rule_verbatim_and_call_record():
    provider = ScriptedProvider([rule("complexity", "complexity: 4"), fallback()])
    trace = RunTrace()
    assert complete(provider, PromptRequest("complexity", "rate this"), trace) == "complexity: 4"
    (call,) = trace.calls
    assert call["role"] == "complexity" and len(call["prompt_hash"]) == 16 and call["attempts"] == 1
    assert provider.calls == 1


def test_consume_once_rules_answer_in_order():
    provider = ScriptedProvider([rule("generate", "first", once=True), rule("generate", "second", once=True), fallback("rest")])
    request = PromptRequest("generate", "same prompt")
    outputs = [provider.generate(request).text for _ in range(3)]
    assert outputs == ["first", "second", "rest"]


def test_scripted_pattern_and_wildcard():
    provider = ScriptedProvider([rule("refine", "A", pattern="alpha"), rule("*", "B", pattern="beta"), fallback("C")])
    assert provider.generate(PromptRequest("refine", "x alpha")).text == "A"
    assert provider.generate(PromptRequest("judge", "x beta")).text == "B"
    assert provider.generate(PromptRequest("refine", "gamma")).text == "C"


def test_scripted_requires_fallback():
    with pytest.raises(InvalidArgument):
        ScriptedProvider([rule("generate", "x")])
    with pytest.raises(InvalidArgument):
        ScriptedProvider([rule("*", "x", once=True)])


def test_scripted_is_deterministic():
    def run():
        provider = ScriptedProvider([rule("generate", "a", once=True), rule("generate", "b", pattern="q"), fallback()])
        return [provider.generate(PromptRequest("generate", p)).text for p in ("q", "q", "z", "q")]

    assert run() == run()


def test_script_file_loading(tmp_path):
    path = tmp_path / "script.yaml"
    path.write_text(
        "rules:\n"
        "  - role: complexity\n    response: 'complexity: 2'\n"
        "  - role: generate\n    response: 'Thought 1: x'\n    once: true\n"
        "  - role: '*'\n    response: 'score: 0.5'\n",
        encoding="utf-8",
    )
    provider = ScriptedProvider.from_file(path)
    assert provider.generate(PromptRequest("complexity", "p")).text == "complexity: 2"
    assert provider.generate(PromptRequest("generate", "p")).text == "Thought 1: x"
    assert provider.generate(PromptRequest("generate", "p")).text == "score: 0.5"
    bad = tmp_path / "bad.yaml"
    bad.write_text("just: a mapping\n", encoding="utf-8")
    with pytest.raises(InvalidArgument):
        ScriptedProvider.from_file(bad)


def test_http_provider_payload_and_response():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["url"] = str(request.url)
        seen["auth"] = request.headers.get("authorization")
        seen["body"] = json.loads(request.content)
        return _ok("answer text")

    provider = _http_provider(handler)
    trace = RunTrace()
    assert complete(provider, PromptRequest("generate", "hi", temperature=0.2, max_tokens=50), trace) == "answer text"
    assert seen["url"] == "http://model.test/v1/chat/completions"
    assert seen["auth"] == "Bearer k"
    assert seen["body"] == {
        "model": "tiny",
        "messages": [{"role": "user", "content": "hi"}],
        "temperature": 0.2,
        "max_tokens": 50,
        "seed": 7,
    }


def test_unreachable_endpoint_gives_up_after_three_attempts():
    attempts = []

    def handler(request: httpx.Request) -> httpx.Response:
        attempts.append(1)
        raise httpx.ConnectError("connection refused", request=request)

    provider = _http_provider(handler, max_retries=2)
    trace = RunTrace()
    with pytest.raises(ProviderUnavailable):
        complete(provider, PromptRequest("generate", "hi"), trace)
    assert len(attempts) == 3
    assert len(trace.warnings) == 3
    assert trace.of_type("provider_error")[-1]["error"] == "unavailable"
    assert trace.calls == [] and provider.calls == 0


def test_retry_then_success_logs_one_call():
    responses = iter([httpx.Response(503), _ok("late")])
    provider = _http_provider(lambda request: next(responses))
    trace = RunTrace()
    assert complete(provider, PromptRequest("generate", "hi"), trace) == "late"
    assert len(trace.calls) == 1 and trace.calls[0]["attempts"] == 2


def test_timeout_is_not_retried():
    attempts = []

    def handler(request: httpx.Request) -> httpx.Response:
        attempts.append(1)
        raise httpx.ReadTimeout("slow", request=request)

    trace = RunTrace()
    with pytest.raises(ProviderTimeout):
        complete(_http_provider(handler), PromptRequest("generate", "hi"), trace)
    assert len(attempts) == 1
    assert trace.of_type("provider_error")[0]["error"] == "timeout"


@pytest.mark.parametrize(
    "response",
    [httpx.Response(401, text="no"), httpx.Response(200, json={"nope": 1}), httpx.Response(200, text="not json")],
)
def test_client_errors_and_malformed_bodies(response):
    with pytest.raises(ProviderError):
        complete(_http_provider(lambda request: response), PromptRequest("generate", "hi"), RunTrace())


def test_critic_routing():
    main = ScriptedProvider([fallback("from main")])
    critic = ScriptedProvider([fallback("from critic")])
    gateway = Gateway(main, RunTrace(), critic=critic)
    assert gateway.send(PromptRequest("cross_score", "x")) == "from critic"
    assert gateway.send(PromptRequest("self_critique", "x")) == "from main"


@pytest.mark.parametrize("response, level, warned", [("complexity: 4", 4, False), ("7", 5, False), ("???", 3, True)])
def test_estimate_complexity(response, level, warned):
    gateway = Gateway(ScriptedProvider([rule("complexity", response), fallback()]), RunTrace())
    estimate = estimate_complexity(gateway, PROBLEM)
    assert estimate.level == level
    assert bool(gateway.trace.warnings) is warned
    assert PROBLEM.statement in gateway.trace.calls[0]["prompt"]
