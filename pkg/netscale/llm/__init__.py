"""HTTP clients for chat, embedding and model-listing endpoints."""

from netscale.llm.client import LLMClient, chat, embed_texts, list_available_models
from netscale.llm.providers import ChatParams, ProviderConfig, ProviderId, RetryPolicy, resolve_model

__all__ = [
    "LLMClient",
    "chat",
    "embed_texts",
    "list_available_models",
    "ChatParams",
    "ProviderConfig",
    "ProviderId",
    "RetryPolicy",
    "resolve_model",
]
