"""Provider settings, wire codecs and model aliases."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, SecretStr, field_validator

from netscale.core.config import (
    ANTHROPIC_DEFAULT_MAX_TOKENS,
    MAX_IN_FLIGHT,
    REQUEST_TIMEOUT,
    RETRY_BACKOFF_BASE,
    RETRY_BACKOFF_MAX,
    RETRY_MAX_ATTEMPTS,
)
from netscale.core.errors import ConfigurationError, ProtocolError


class ProviderId(str, Enum):
    OPENAI = "openai"
    ANTHROPIC = "anthropic"
    GROQ = "groq"
    JINA = "jina"
    HUGGINGFACE = "huggingface"


DEFAULT_BASE_URLS: Dict[ProviderId, str] = {
    ProviderId.OPENAI: "https://api.openai.com/v1",
    ProviderId.ANTHROPIC: "https://api.anthropic.com/v1",
    ProviderId.GROQ: "https://api.groq.com/openai/v1",
    ProviderId.JINA: "https://api.jina.ai/v1",
    ProviderId.HUGGINGFACE: "https://router.huggingface.co/v1",
}

API_KEY_ENV: Dict[ProviderId, str] = {
    ProviderId.OPENAI: "OPENAI_API_KEY",
    ProviderId.ANTHROPIC: "ANTHROPIC_API_KEY",
    ProviderId.GROQ: "GROQ_API_KEY",
    ProviderId.JINA: "JINA_API_KEY",
    ProviderId.HUGGINGFACE: "HF_TOKEN",
}

ANTHROPIC_VERSION = "2023-06-01"

# Jina has no listing endpoint
JINA_CATALOG: Tuple[str, ...] = (
    "jina-embeddings-v4",
    "jina-embeddings-v3",
    "jina-embeddings-v2-base-en",
)

MODEL_ALIASES: Dict[str, Tuple[str, ProviderId]] = {
    "gpt4o": ("gpt-4o", ProviderId.OPENAI),
    "chatgpt": ("gpt-4o", ProviderId.OPENAI),
    "sonnet": ("claude-sonnet-4-5", ProviderId.ANTHROPIC),
    "opus": ("claude-opus-4-1", ProviderId.ANTHROPIC),
    "haiku": ("claude-haiku-4-5", ProviderId.ANTHROPIC),
    "claude": ("claude-sonnet-4-5", ProviderId.ANTHROPIC),
    "llama3": ("llama-3.3-70b-versatile", ProviderId.GROQ),
    "mixtral": ("mixtral-8x7b-32768", ProviderId.GROQ),
    "gemma": ("gemma2-9b-it", ProviderId.GROQ),
    "qwen": ("qwen/qwen3-32b", ProviderId.GROQ),
}


class RetryPolicy(BaseModel):
    """Exponential backoff with jitter for 429 and 5xx responses."""
    model_config = ConfigDict(frozen=True)

    max_attempts: int = Field(default=RETRY_MAX_ATTEMPTS, ge=1)
    backoff_base: float = Field(default=RETRY_BACKOFF_BASE, ge=0.0)
    backoff_max: float = Field(default=RETRY_BACKOFF_MAX, ge=0.0)


class ProviderConfig(BaseModel):
    """Connection settings for one provider. The key is read from the
    provider's environment variable when not given."""
    model_config = ConfigDict(frozen=True)

    provider: ProviderId
    api_key: Optional[SecretStr] = None
    base_url: Optional[str] = None
    max_in_flight: int = Field(default=MAX_IN_FLIGHT, ge=1)
    retry: RetryPolicy = Field(default_factory=RetryPolicy)
    timeout: float = Field(default=REQUEST_TIMEOUT, gt=0.0)

    @field_validator("base_url")
    @classmethod
    def _strip_slash(cls, v: Optional[str]) -> Optional[str]:
        return v.rstrip("/") if v else v

    @property
    def url(self) -> str:
        return self.base_url or DEFAULT_BASE_URLS[self.provider]

    def resolved_key(self) -> str:
        """API key from config or environment.

        Raises:
            ConfigurationError: neither is set
        """
        if self.api_key is not None and self.api_key.get_secret_value():
            return self.api_key.get_secret_value()
        env = API_KEY_ENV[self.provider]
        value = os.environ.get(env, "")
        if not value:
            raise ConfigurationError(
                f"no API key for {self.provider.value}: set {env} or api_key in the config",
                provider=self.provider.value,
            )
        return value

    def has_key(self) -> bool:
        try:
            self.resolved_key()
        except ConfigurationError:
            return False
        return True


class ChatParams(BaseModel):
    """Sampling parameters for chat calls."""
    model_config = ConfigDict(frozen=True)

    model: str
    temperature: float = Field(default=1.0, ge=0.0)
    top_p: float = Field(default=1.0, gt=0.0, le=1.0)
    system_role: Optional[str] = None
    reps: int = Field(default=1, ge=1)
    max_tokens: Optional[int] = Field(default=None, ge=1)


@dataclass(frozen=True)
class ModelEntry:
    provider: str
    model_id: str
    type: str  # chat | embedding


def resolve_model(name: str, provider: Optional[ProviderId | str] = None) -> Tuple[str, ProviderId]:
    """Resolve an alias or model id to (model id, provider).

    A pinned provider wins over inference; aliases resolve only their model id then.
    """
    key = name.strip()
    alias = MODEL_ALIASES.get(key.lower())
    if alias is not None:
        model_id, inferred = alias
    else:
        model_id, inferred = key, infer_provider(key)
    return model_id, ProviderId(provider) if provider is not None else inferred


def infer_provider(model_id: str) -> ProviderId:
    m = model_id.lower()
    if m.startswith("claude"):
        return ProviderId.ANTHROPIC
    if m.startswith("jina"):
        return ProviderId.JINA
    if m.startswith(("gpt", "o1", "o3", "o4", "text-embedding", "chatgpt")):
        return ProviderId.OPENAI
    if m.startswith(("llama", "mixtral", "gemma", "qwen", "deepseek", "openai/gpt-oss")):
        return ProviderId.GROQ
    if "/" in m:
        return ProviderId.HUGGINGFACE
    return ProviderId.OPENAI


_EMBEDDING_PATTERN = re.compile(r"embed|bge|gte|minilm|e5-|mpnet|nomic", re.IGNORECASE)


def model_type(model_id: str) -> str:
    """'embedding' or 'chat', inferred from the model id."""
    return "embedding" if _EMBEDDING_PATTERN.search(model_id) else "chat"


class OpenAICodec:
    """OpenAI-compatible JSON (openai, groq, jina, huggingface)."""

    @staticmethod
    def headers(key: str) -> Dict[str, str]:
        return {"Authorization": f"Bearer {key}", "Content-Type": "application/json"}

    @staticmethod
    def chat_request(prompt: str, params: ChatParams) -> Tuple[str, Dict[str, Any]]:
        messages = []
        if params.system_role:
            messages.append({"role": "system", "content": params.system_role})
        messages.append({"role": "user", "content": prompt})
        body: Dict[str, Any] = {
            "model": params.model,
            "messages": messages,
            "temperature": params.temperature,
            "top_p": params.top_p,
        }
        if params.max_tokens is not None:
            body["max_tokens"] = params.max_tokens
        return "/chat/completions", body

    @staticmethod
    def chat_response(payload: Any) -> Tuple[str, Dict[str, int]]:
        text = payload["choices"][0]["message"]["content"]
        if not isinstance(text, str):
            raise TypeError("message content is not a string")
        usage = payload.get("usage") or {}
        return text, {
            "input_tokens": int(usage.get("prompt_tokens", 0)),
            "output_tokens": int(usage.get("completion_tokens", 0)),
        }

    @staticmethod
    def embed_request(texts: List[str], model: str) -> Tuple[str, Dict[str, Any]]:
        return "/embeddings", {"model": model, "input": texts}

    @staticmethod
    def embed_response(payload: Any) -> List[List[float]]:
        rows = sorted(payload["data"], key=lambda row: row["index"])
        return [[float(x) for x in row["embedding"]] for row in rows]

    @staticmethod
    def models_response(payload: Any) -> List[str]:
        data = payload["data"] if isinstance(payload, dict) else payload
        return [str(row["id"]) for row in data]


class AnthropicCodec:
    """Anthropic messages API."""

    @staticmethod
    def headers(key: str) -> Dict[str, str]:
        return {
            "x-api-key": key,
            "anthropic-version": ANTHROPIC_VERSION,
            "Content-Type": "application/json",
        }

    @staticmethod
    def chat_request(prompt: str, params: ChatParams) -> Tuple[str, Dict[str, Any]]:
        body: Dict[str, Any] = {
            "model": params.model,
            "max_tokens": params.max_tokens or ANTHROPIC_DEFAULT_MAX_TOKENS,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.temperature,
        }
        if params.system_role:
            body["system"] = params.system_role
        if params.top_p != 1.0:
            body["top_p"] = params.top_p
        return "/messages", body

    @staticmethod
    def chat_response(payload: Any) -> Tuple[str, Dict[str, int]]:
        blocks = [b["text"] for b in payload["content"] if b.get("type") == "text"]
        if not blocks:
            raise KeyError("no text content block")
        usage = payload.get("usage") or {}
        return "".join(blocks), {
            "input_tokens": int(usage.get("input_tokens", 0)),
            "output_tokens": int(usage.get("output_tokens", 0)),
        }

    @staticmethod
    def embed_request(texts: List[str], model: str) -> Tuple[str, Dict[str, Any]]:
        raise ConfigurationError("anthropic does not offer an embeddings endpoint", provider="anthropic")

    @staticmethod
    def embed_response(payload: Any) -> List[List[float]]:
        raise ProtocolError("anthropic does not return embeddings", provider="anthropic")

    @staticmethod
    def models_response(payload: Any) -> List[str]:
        return [str(row["id"]) for row in payload["data"]]


def codec_for(provider: ProviderId):
    return AnthropicCodec if provider is ProviderId.ANTHROPIC else OpenAICodec
