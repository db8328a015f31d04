from retreval.llm.gateway import Gateway, complete, estimate_complexity
from retreval.llm.parsing import format_score, parse_candidates, parse_critique, parse_score
from retreval.llm.prompts import PromptLibrary, build_generation_prompt
from retreval.llm.providers import (
    ChatProvider,
    Completion,
    OpenAIChatProvider,
    PromptRequest,
    ProviderConfig,
    ScriptedProvider,
    ScriptedRule,
)

__all__ = [
    "ChatProvider",
    "Completion",
    "Gateway",
    "OpenAIChatProvider",
    "PromptLibrary",
    "PromptRequest",
    "ProviderConfig",
    "ScriptedProvider",
    "ScriptedRule",
    "build_generation_prompt",
    "complete",
    "estimate_complexity",
    "format_score",
    "parse_candidates",
    "parse_critique",
    "parse_score",
]
