"""Tests for the provider client against recorded payloads."""

import json
import logging
from pathlib import Path

import httpx
import numpy as np
import pytest

from netscale.core.errors import (
    ConfigurationError,
    InputError,
    ProtocolError,
    ProviderError,
    RateLimitError,
)
from netscale.llm.client import LLMClient, chat, embed_texts, list_available_models
from netscale.llm.providers import (
    ChatParams,
    ProviderConfig,
    ProviderId,
    RetryPolicy,
    model_type,
    resolve_model,
)
from netscale.utils.logging import redact

FIXTURES = Path(__file__).parent / "fixtures"
KEY = "sk-test-secret-0123456789"


def fixture(name):
    return json.loads((FIXTURES / name).read_text(encoding="utf-8"))


def config(provider, **kwargs):
    kwargs.setdefault("retry", RetryPolicy(max_attempts=3, backoff_base=0.0, backoff_max=0.0))
    return ProviderConfig(provider=provider, api_key=KEY, **kwargs)


class Recorder:
    """MockTransport handler that records requests and replays responses."""

    def __init__(self, *responses):
        self.responses = list(responses)
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        status, body = self.responses.pop(0) if len(self.responses) > 1 else self.responses[0]
        if isinstance(body, (dict, list)):
            return httpx.Response(status, json=body)
        return httpx.Response(status, text=body)

    @property
    def transport(self):
        return httpx.MockTransport(self)

    def body(self, k=0):
        return json.loads(self.requests[k].content)


class TestChat:
    """Test chat requests and decoding per provider."""

    def test_openai_request_and_response(self):
        rec = Recorder((200, fixture("openai_chat.json")))
        params = ChatParams(model="gpt4o", temperature=0.7, system_role="Be precise.")
        result = chat(["Write items."], params, config(ProviderId.OPENAI), rec.transport)

        request = rec.requests[0]
        assert request.url == "https://api.openai.com/v1/chat/completions"
        assert request.headers["authorization"] == f"Bearer {KEY}"
        body = rec.body()
        assert body["model"] == "gpt-4o"
        assert body["messages"][0] == {"role": "system", "content": "Be precise."}
        assert body["temperature"] == 0.7
        assert "max_tokens" not in body
        assert result.texts[0].startswith("curious | I ask")
        assert result.usage == {"input_tokens": 42, "output_tokens": 17}

    def test_anthropic_request_and_response(self):
        rec = Recorder((200, fixture("anthropic_chat.json")))
        params = ChatParams(model="sonnet", system_role="Be precise.")
        result = chat(["Write items."], params, config(ProviderId.ANTHROPIC), rec.transport)

        request = rec.requests[0]
        assert request.url == "https://api.anthropic.com/v1/messages"
        assert request.headers["x-api-key"] == KEY
        assert request.headers["anthropic-version"] == "2023-06-01"
        body = rec.body()
        assert body["model"] == "claude-sonnet-4-5"
        assert body["max_tokens"] == 4096
        assert body["system"] == "Be precise."
        assert "top_p" not in body
        assert result.texts == [
            "organized | I keep a detailed calendar\ndisciplined | I stick to my routines"
        ]

    def test_groq_uses_openai_wire_format(self):
        rec = Recorder((200, fixture("openai_chat.json")))
        chat(["x"], ChatParams(model="llama3"), config(ProviderId.GROQ), rec.transport)
        assert rec.requests[0].url == "https://api.groq.com/openai/v1/chat/completions"
        assert rec.body()["model"] == "llama-3.3-70b-versatile"

    def test_results_ordered_by_prompt_and_rep(self):
        def handler(request):
            prompt = json.loads(request.content)["messages"][-1]["content"]
            return httpx.Response(200, json={"choices": [{"message": {"content": prompt}}]})

        cfg = config(ProviderId.OPENAI, max_in_flight=4)
        with LLMClient(cfg, httpx.MockTransport(handler)) as client:
            result = client.chat(["a", "b", "c"], ChatParams(model="gpt-4o", reps=2))
        assert result.texts == ["a", "a", "b", "b", "c", "c"]
        assert [(r.prompt_index, r.rep) for r in result.responses][:3] == [(0, 0), (0, 1), (1, 0)]
        assert result.for_prompt(2) == ["c", "c"]

    def test_max_tokens_forwarded(self):
        rec = Recorder((200, fixture("openai_chat.json")))
        chat(["x"], ChatParams(model="gpt-4o", max_tokens=256), config(ProviderId.OPENAI), rec.transport)
        assert rec.body()["max_tokens"] == 256

    def test_needs_a_prompt(self):
        with LLMClient(config(ProviderId.OPENAI), Recorder((200, {})).transport) as client:
            with pytest.raises(InputError):
                client.chat([], ChatParams(model="gpt-4o"))


class TestEmbed:
    """Test embedding requests and matrix assembly."""

    def test_columns_follow_input_order(self):
        rec = Recorder((200, fixture("openai_embeddings.json")))
        emb = embed_texts(["first", "second"], "text-embedding-3-small",
                          config(ProviderId.OPENAI), ["a", "b"], rec.transport)
        assert emb.item_ids == ("a", "b")
        assert emb.values.shape == (3, 2)
        np.testing.assert_array_equal(emb.values[:, 0], [1.0, 0.0, -0.5])
        assert rec.body() == {"model": "text-embedding-3-small", "input": ["first", "second"]}

    def test_batches_concatenate(self):
        def handler(request):
            texts = json.loads(request.content)["input"]
            data = [{"index": k, "embedding": [float(len(t)), 1.0]} for k, t in enumerate(texts)]
            return httpx.Response(200, json={"data": data})

        cfg = config(ProviderId.OPENAI)
        with LLMClient(cfg, httpx.MockTransport(handler)) as client:
            emb = client.embed(["a", "bb", "ccc"], "text-embedding-3-small", batch_size=2)
            assert client.request_count == 2
        np.testing.assert_array_equal(emb.values[0], [1.0, 2.0, 3.0])
        assert emb.item_ids == ("1", "2", "3")

    def test_jina(self):
        rec = Recorder((200, fixture("jina_embeddings.json")))
        emb = embed_texts(["x", "y"], "jina-embeddings-v3", config(ProviderId.JINA), None, rec.transport)
        assert rec.requests[0].url == "https://api.jina.ai/v1/embeddings"
        assert emb.values.shape == (2, 2)

    def test_count_mismatch_is_protocol_error(self):
        rec = Recorder((200, fixture("openai_embeddings.json")))
        with pytest.raises(ProtocolError):
            embed_texts(["only one"], "text-embedding-3-small", config(ProviderId.OPENAI),
                        None, rec.transport)

    def test_anthropic_has_no_embeddings(self):
        rec = Recorder((200, {}))
        with pytest.raises(ConfigurationError):
            embed_texts(["x"], "claude-sonnet-4-5", config(ProviderId.ANTHROPIC), None, rec.transport)
        assert rec.requests == []

    def test_empty_text_rejected(self):
        with pytest.raises(InputError):
            embed_texts(["ok", "  "], "text-embedding-3-small", config(ProviderId.OPENAI),
                        None, Recorder((200, {})).transport)


class TestFailures:
    """Test retry, credential and payload failures."""

    def test_rate_limit_exhausts_retry_budget(self):
        rec = Recorder((429, fixture("rate_limited.json")))
        with LLMClient(config(ProviderId.OPENAI), rec.transport) as client:
            with pytest.raises(RateLimitError) as err:
                client.chat(["x"], ChatParams(model="gpt-4o"))
            assert client.request_count == 3
        assert err.value.status == 429
        assert len(rec.requests) == 3

    def test_transient_error_then_success(self):
        rec = Recorder((503, "upstream busy"), (200, fixture("openai_chat.json")))
        with LLMClient(config(ProviderId.OPENAI), rec.transport) as client:
            result = client.chat(["x"], ChatParams(model="gpt-4o"))
            assert client.request_count == 2
        assert result.texts[0].startswith("curious")

    def test_server_error_after_budget(self):
        rec = Recorder((500, "boom"))
        with pytest.raises(ProviderError) as err:
            chat(["x"], ChatParams(model="gpt-4o"), config(ProviderId.OPENAI), rec.transport)
        assert err.value.status == 500
        assert not isinstance(err.value, RateLimitError)

    def test_unauthorized_is_not_retried(self):
        rec = Recorder((401, fixture("unauthorized.json")))
        with pytest.raises(ConfigurationError):
            chat(["x"], ChatParams(model="gpt-4o"), config(ProviderId.OPENAI), rec.transport)
        assert len(rec.requests) == 1

    def test_non_json_body(self):
        rec = Recorder((200, "<html>maintenance</html>"))
        with pytest.raises(ProtocolError) as err:
            chat(["x"], ChatParams(model="gpt-4o"), config(ProviderId.OPENAI), rec.transport)
        assert "maintenance" in err.value.raw_body

    def test_unexpected_payload_shape(self):
        rec = Recorder((200, {"choices": []}))
        with pytest.raises(ProtocolError):
            chat(["x"], ChatParams(model="gpt-4o"), config(ProviderId.OPENAI), rec.transport)

    def test_missing_key(self, monkeypatch):
        monkeypatch.delenv("GROQ_API_KEY", raising=False)
        cfg = ProviderConfig(provider=ProviderId.GROQ)
        with pytest.raises(ConfigurationError):
            chat(["x"], ChatParams(model="llama3"), cfg, Recorder((200, {})).transport)

    def test_key_from_environment(self, monkeypatch):
        monkeypatch.setenv("GROQ_API_KEY", "gsk-env-value")
        rec = Recorder((200, fixture("openai_chat.json")))
        chat(["x"], ChatParams(model="llama3"), ProviderConfig(provider=ProviderId.GROQ), rec.transport)
        assert rec.requests[0].headers["authorization"] == "Bearer gsk-env-value"

    def test_unconfigured_provider(self):
        with LLMClient(config(ProviderId.OPENAI), Recorder((200, {})).transport) as client:
            with pytest.raises(ConfigurationError):
                client.chat(["x"], ChatParams(model="sonnet"), "anthropic")

    def test_keys_redacted_from_logs(self, caplog):
        with LLMClient(config(ProviderId.OPENAI), Recorder((200, {})).transport):
            with caplog.at_level(logging.INFO, logger="netscale.llm.client"):
                logging.getLogger("netscale.llm.client").warning("sending with key %s", KEY)
        assert KEY not in caplog.text
        assert "***" in caplog.text
        assert redact(f"Bearer {KEY}") == "Bearer ***"


class TestModels:
    """Test model listing and the merged catalog."""

    def test_openai_listing_types(self):
        rec = Recorder((200, fixture("openai_models.json")))
        catalog = list_available_models(cfgs=[config(ProviderId.OPENAI)], transport=rec.transport)
        types = {e.model_id: e.type for e in catalog.entries}
        assert types == {"gpt-4o": "chat", "text-embedding-3-small": "embedding", "gpt-4o-mini": "chat"}
        assert rec.requests[0].method == "GET"

    def test_jina_catalog_needs_no_request(self):
        rec = Recorder((500, "should not be called"))
        catalog = list_available_models(cfgs=[config(ProviderId.JINA)], transport=rec.transport)
        assert "jina-embeddings-v3" in catalog.model_ids
        assert rec.requests == []

    def test_merged_catalog_with_filters_and_errors(self):
        def handler(request):
            host = request.url.host
            if "anthropic" in host:
                return httpx.Response(200, json=fixture("anthropic_models.json"))
            if "groq" in host:
                return httpx.Response(200, json=fixture("groq_models.json"))
            if "huggingface" in host:
                return httpx.Response(200, json=fixture("huggingface_models.json"))
            return httpx.Response(401, json=fixture("unauthorized.json"))

        cfgs = [config(p) for p in (ProviderId.OPENAI, ProviderId.ANTHROPIC,
                                    ProviderId.GROQ, ProviderId.HUGGINGFACE)]
        transport = httpx.MockTransport(handler)
        catalog = list_available_models(cfgs=cfgs, transport=transport)
        assert "openai" in catalog.errors
        assert "claude-haiku-4-5" in catalog.model_ids
        assert "qwen/qwen3-32b" in catalog.model_ids

        embeddings = list_available_models(type="embedding", cfgs=cfgs, transport=transport)
        assert embeddings.model_ids == ["BAAI/bge-large-en-v1.5"]

        groq_only = list_available_models(provider="groq", cfgs=cfgs, transport=transport)
        assert {e.provider for e in groq_only.entries} == {"groq"}
        assert "openai" not in groq_only.errors

    def test_no_providers(self):
        assert list_available_models(cfgs=[]).errors == {"*": "no providers configured"}


class TestResolution:
    """Test aliases and provider inference."""

    @pytest.mark.parametrize("name, expected", [
        ("gpt4o", ("gpt-4o", ProviderId.OPENAI)),
        ("Sonnet", ("claude-sonnet-4-5", ProviderId.ANTHROPIC)),
        ("llama3", ("llama-3.3-70b-versatile", ProviderId.GROQ)),
        ("jina-embeddings-v3", ("jina-embeddings-v3", ProviderId.JINA)),
        ("text-embedding-3-large", ("text-embedding-3-large", ProviderId.OPENAI)),
        ("mistralai/Mistral-7B-Instruct-v0.3", ("mistralai/Mistral-7B-Instruct-v0.3", ProviderId.HUGGINGFACE)),
    ])
    def test_resolve(self, name, expected):
        assert resolve_model(name) == expected

    def test_pinned_provider_wins(self):
        assert resolve_model("llama3", "huggingface") == ("llama-3.3-70b-versatile", ProviderId.HUGGINGFACE)

    def test_model_type(self):
        assert model_type("nomic-embed-text") == "embedding"
        assert model_type("gpt-4o") == "chat"
