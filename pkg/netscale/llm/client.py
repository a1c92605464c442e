"""HTTP client for chat, embedding and model-listing endpoints."""

from __future__ import annotations

import json
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar, Union

import httpx
import numpy as np
from tenacity import (
    RetryError,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential_jitter,
)

from netscale.core.config import EMBED_BATCH_SIZE
from netscale.core.errors import (
    ConfigurationError,
    InputError,
    ProtocolError,
    ProviderError,
    RateLimitError,
)
from netscale.core.types import EmbeddingKind, EmbeddingMatrix
from netscale.llm.providers import (
    JINA_CATALOG,
    ChatParams,
    ModelEntry,
    ProviderConfig,
    ProviderId,
    codec_for,
    model_type,
    resolve_model,
)
from netscale.utils.logging import SecretRedactingFilter, register_secret

logger = logging.getLogger(__name__)
logger.addFilter(SecretRedactingFilter())

T = TypeVar("T")


def dumps(body: Dict[str, Any]) -> bytes:
    """Deterministic JSON encoding of a request body."""
    return json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


class _Retryable(Exception):
    def __init__(self, response: Optional[httpx.Response] = None, error: Optional[Exception] = None):
        self.response = response
        self.error = error
        super().__init__(str(error) if error else f"HTTP {response.status_code if response else '?'}")


@dataclass(frozen=True)
class ChatResponse:
    prompt_index: int
    rep: int
    text: str
    usage: Dict[str, int] = field(default_factory=dict)


@dataclass
class ChatResult:
    """Responses ordered by (prompt, rep)."""
    model: str
    provider: str
    responses: List[ChatResponse] = field(default_factory=list)

    @property
    def texts(self) -> List[str]:
        return [r.text for r in self.responses]

    def for_prompt(self, index: int) -> List[str]:
        return [r.text for r in self.responses if r.prompt_index == index]

    @property
    def usage(self) -> Dict[str, int]:
        total: Dict[str, int] = {}
        for r in self.responses:
            for k, v in r.usage.items():
                total[k] = total.get(k, 0) + v
        return total


@dataclass
class ModelCatalog:
    """Models across providers, plus per-provider listing errors."""
    entries: List[ModelEntry] = field(default_factory=list)
    errors: Dict[str, str] = field(default_factory=dict)

    def add(self, entry: ModelEntry) -> None:
        if all((e.provider, e.model_id) != (entry.provider, entry.model_id) for e in self.entries):
            self.entries.append(entry)

    def filter(self, provider: Optional[str] = None, type: Optional[str] = None) -> "ModelCatalog":
        return ModelCatalog(
            [
                e for e in self.entries
                if (provider is None or e.provider == provider) and (type is None or e.type == type)
            ],
            dict(self.errors),
        )

    @property
    def model_ids(self) -> List[str]:
        return [e.model_id for e in self.entries]


class LLMClient:
    """Thread-safe client over one or more providers.

    At most max_in_flight requests run concurrently per provider; batched
    calls return results in input order.
    """

    def __init__(
        self,
        configs: Union[ProviderConfig, Iterable[ProviderConfig]],
        transport: Optional[httpx.BaseTransport] = None,
    ):
        if isinstance(configs, ProviderConfig):
            configs = [configs]
        self.configs: Dict[ProviderId, ProviderConfig] = {c.provider: c for c in configs}
        self._transport = transport
        self._clients: Dict[ProviderId, httpx.Client] = {}
        self._slots: Dict[ProviderId, threading.Semaphore] = {
            p: threading.Semaphore(c.max_in_flight) for p, c in self.configs.items()
        }
        self._lock = threading.Lock()
        self.request_count = 0
        for cfg in self.configs.values():
            if cfg.api_key is not None:
                register_secret(cfg.api_key.get_secret_value())

    def __enter__(self) -> "LLMClient":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def close(self) -> None:
        with self._lock:
            for client in self._clients.values():
                client.close()
            self._clients.clear()

    def config(self, provider: ProviderId | str) -> ProviderConfig:
        provider = ProviderId(provider)
        try:
            return self.configs[provider]
        except KeyError:
            raise ConfigurationError(
                f"provider {provider.value} is not configured", provider=provider.value
            ) from None

    def _client(self, cfg: ProviderConfig) -> httpx.Client:
        with self._lock:
            client = self._clients.get(cfg.provider)
            if client is None:
                key = cfg.resolved_key()
                register_secret(key)
                client = httpx.Client(
                    base_url=cfg.url,
                    headers=codec_for(cfg.provider).headers(key),
                    timeout=cfg.timeout,
                    transport=self._transport,
                )
                self._clients[cfg.provider] = client
            return client

    def _pick_provider(self, model: str, provider: Optional[ProviderId | str]) -> tuple:
        if provider is None and len(self.configs) == 1:
            provider = next(iter(self.configs))
        model_id, resolved = resolve_model(model, provider)
        return model_id, self.config(resolved)

    def request(
        self,
        cfg: ProviderConfig,
        method: str,
        path: str,
        body: Optional[Dict[str, Any]] = None,
    ) -> Any:
        """Send one request with retries; return the decoded JSON payload.

        Raises:
            ConfigurationError: 401/403
            RateLimitError: still 429 after the retry budget
            ProviderError: other HTTP or transport failures
            ProtocolError: body is not valid JSON
        """
        client = self._client(cfg)
        name = cfg.provider.value
        content = dumps(body) if body is not None else None
        attempt_no = 0

        def send() -> httpx.Response:
            nonlocal attempt_no
            attempt_no += 1
            with self._lock:
                self.request_count += 1
            try:
                with self._slots[cfg.provider]:
                    response = client.request(method, path, content=content)
            except httpx.TransportError as exc:
                logger.info("%s %s attempt %d: transport error %s", name, path, attempt_no, exc)
                raise _Retryable(error=exc) from exc
            logger.info("%s %s attempt %d: HTTP %d", name, path, attempt_no, response.status_code)
            if response.status_code == 429 or response.status_code >= 500:
                raise _Retryable(response=response)
            return response

        policy = cfg.retry
        retrying = Retrying(
            stop=stop_after_attempt(policy.max_attempts),
            wait=wait_exponential_jitter(
                initial=policy.backoff_base, max=policy.backoff_max, jitter=policy.backoff_base
            ),
            retry=retry_if_exception_type(_Retryable),
            before_sleep=lambda state: logger.debug(
                "%s retrying after %.2fs", name, state.next_action.sleep if state.next_action else 0.0
            ),
        )
        try:
            response = retrying(send)
        except RetryError as exc:
            last = exc.last_attempt.exception()
            assert isinstance(last, _Retryable)
            if last.response is not None and last.response.status_code == 429:
                raise RateLimitError(
                    f"{name} rate limit persisted after {policy.max_attempts} attempts",
                    provider=name, status=429,
                ) from None
            status = last.response.status_code if last.response is not None else None
            raise ProviderError(
                f"{name} request failed after {policy.max_attempts} attempts: {last}",
                provider=name, status=status,
            ) from None

        status = response.status_code
        if status in (401, 403):
            raise ConfigurationError(
                f"{name} rejected the credentials (HTTP {status})", provider=name, status=status
            )
        if status >= 400:
            raise ProviderError(
                f"{name} returned HTTP {status}: {response.text[:500]}", provider=name, status=status
            )
        try:
            return response.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ProtocolError(
                f"{name} returned a non-JSON body", raw_body=response.text, provider=name, status=status
            ) from exc

    def _decode(self, cfg: ProviderConfig, payload: Any, decoder: Callable[[Any], T]) -> T:
        try:
            return decoder(payload)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise ProtocolError(
                f"{cfg.provider.value} returned an unexpected payload: {exc}",
                raw_body=json.dumps(payload, ensure_ascii=False)[:10_000],
                provider=cfg.provider.value,
            ) from exc

    def _ordered_map(self, cfg: ProviderConfig, fn: Callable[[Any], T], jobs: Sequence[Any]) -> List[T]:
        if len(jobs) <= 1 or cfg.max_in_flight == 1:
            return [fn(job) for job in jobs]
        with ThreadPoolExecutor(max_workers=min(cfg.max_in_flight, len(jobs))) as pool:
            return list(pool.map(fn, jobs))

    def chat(
        self,
        prompts: Sequence[str],
        params: ChatParams,
        provider: Optional[ProviderId | str] = None,
    ) -> ChatResult:
        """reps responses per prompt, ordered by (prompt, rep)."""
        if not prompts:
            raise InputError("chat needs at least one prompt")
        model_id, cfg = self._pick_provider(params.model, provider)
        params = params.model_copy(update={"model": model_id})
        codec = codec_for(cfg.provider)
        jobs = [(i, r) for i in range(len(prompts)) for r in range(params.reps)]

        def one(job: tuple) -> ChatResponse:
            i, r = job
            path, body = codec.chat_request(prompts[i], params)
            payload = self.request(cfg, "POST", path, body)
            text, usage = self._decode(cfg, payload, codec.chat_response)
            return ChatResponse(i, r, text, usage)

        return ChatResult(model_id, cfg.provider.value, self._ordered_map(cfg, one, jobs))

    def embed(
        self,
        texts: Sequence[str],
        model: str,
        provider: Optional[ProviderId | str] = None,
        item_ids: Optional[Sequence[str]] = None,
        batch_size: int = EMBED_BATCH_SIZE,
    ) -> EmbeddingMatrix:
        """Embed texts into a dims x n matrix with columns in input order.

        Raises:
            InputError: no texts or an empty text
            ProtocolError: batches disagree on dimension or count
        """
        if not texts:
            raise InputError("embed needs at least one text")
        for k, text in enumerate(texts):
            if not text or not text.strip():
                raise InputError(f"text {k} is empty")
        ids = list(item_ids) if item_ids is not None else [str(k + 1) for k in range(len(texts))]
        if len(ids) != len(texts):
            raise InputError("item_ids must match texts one to one")

        model_id, cfg = self._pick_provider(model, provider)
        codec = codec_for(cfg.provider)
        batches = [list(texts[k:k + batch_size]) for k in range(0, len(texts), batch_size)]

        def one(batch: List[str]) -> List[List[float]]:
            path, body = codec.embed_request(batch, model_id)
            payload = self.request(cfg, "POST", path, body)
            vectors = self._decode(cfg, payload, codec.embed_response)
            if len(vectors) != len(batch):
                raise ProtocolError(
                    f"asked for {len(batch)} embeddings, got {len(vectors)}",
                    raw_body=json.dumps(payload)[:10_000], provider=cfg.provider.value,
                )
            return vectors

        vectors = [v for batch in self._ordered_map(cfg, one, batches) for v in batch]
        dims = {len(v) for v in vectors}
        if len(dims) != 1:
            raise ProtocolError(
                f"embedding dimensions differ across batches: {sorted(dims)}",
                provider=cfg.provider.value,
            )
        logger.info("Embedded %d texts with %s (%d dims)", len(texts), model_id, dims.pop())
        return EmbeddingMatrix(np.asarray(vectors, dtype=np.float64).T, ids, EmbeddingKind.FULL)

    def list_models(self, provider: ProviderId | str) -> List[ModelEntry]:
        cfg = self.config(provider)
        if cfg.provider is ProviderId.JINA:
            return [ModelEntry("jina", m, "embedding") for m in JINA_CATALOG]
        codec = codec_for(cfg.provider)
        payload = self.request(cfg, "GET", "/models")
        ids = self._decode(cfg, payload, codec.models_response)
        if cfg.provider is ProviderId.ANTHROPIC:
            return [ModelEntry(cfg.provider.value, m, "chat") for m in ids]
        return [ModelEntry(cfg.provider.value, m, model_type(m)) for m in ids]


def chat(
    prompts: Sequence[str],
    params: ChatParams,
    cfg: ProviderConfig,
    transport: Optional[httpx.BaseTransport] = None,
) -> ChatResult:
    """One-shot chat against a single provider."""
    with LLMClient(cfg, transport) as client:
        return client.chat(prompts, params, cfg.provider)


def embed_texts(
    texts: Sequence[str],
    model: str,
    cfg: ProviderConfig,
    item_ids: Optional[Sequence[str]] = None,
    transport: Optional[httpx.BaseTransport] = None,
) -> EmbeddingMatrix:
    """One-shot embedding against a single provider."""
    with LLMClient(cfg, transport) as client:
        return client.embed(texts, model, cfg.provider, item_ids)


def list_available_models(
    provider: Optional[str] = None,
    type: Optional[str] = None,
    cfgs: Iterable[ProviderConfig] = (),
    transport: Optional[httpx.BaseTransport] = None,
) -> ModelCatalog:
    """Merged catalog over configured providers; filters apply conjunctively.

    A provider whose listing fails contributes an error entry instead of models.
    """
    cfgs = list(cfgs)
    catalog = ModelCatalog()
    if not cfgs:
        catalog.errors["*"] = "no providers configured"
        return catalog
    with LLMClient(cfgs, transport) as client:
        for cfg in cfgs:
            name = cfg.provider.value
            if provider is not None and name != provider:
                continue
            try:
                for entry in client.list_models(cfg.provider):
                    catalog.add(entry)
            except ProviderError as exc:
                logger.warning("Model listing failed for %s: %s", name, exc)
                catalog.errors[name] = str(exc)
    return catalog.filter(provider, type)
