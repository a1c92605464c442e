"""Run configuration files (TOML or YAML)."""

from __future__ import annotations

import logging
import os
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from netscale.core.config import (
    DEFAULT_CHAT_MODEL,
    DEFAULT_EMBEDDING_MODEL,
    MIN_REDUCTION_POOL,
    N_BOOT,
    STABILITY_THRESHOLD,
    UVA_CUTOFF,
)
from netscale.core.errors import InputError, PoolIOError
from netscale.core.kernel import PipelineOptions
from netscale.core.types import AttributeSpec
from netscale.llm.providers import ChatParams, ProviderConfig, ProviderId
from netscale.prompts.builder import GenerationSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = logging.getLogger(__name__)

_ENV_REF = re.compile(r"^\$\{([A-Za-z_][A-Za-z0-9_]*)\}$")


class GenerationSettings(BaseModel):
    """What to generate and with which chat model."""
    model_config = ConfigDict(extra="forbid")

    preset: Optional[str] = None
    custom_prompts: bool = False
    item_attributes: Dict[str, List[str]] = Field(default_factory=dict)
    target_n: int = Field(default=60, gt=0)
    domain: Optional[str] = None
    scale_title: Optional[str] = None
    audience: Optional[str] = None
    item_type_definitions: Dict[str, str] = Field(default_factory=dict)
    response_options: List[str] = Field(default_factory=list)
    item_examples: Optional[str] = None  # path to an item table
    prompt_notes: Optional[str] = None
    system_role: Optional[str] = None
    main_prompts: Optional[Dict[str, str]] = None
    adaptive: bool = True

    model: str = DEFAULT_CHAT_MODEL
    provider: Optional[ProviderId] = None
    temperature: float = Field(default=1.0, ge=0.0)
    top_p: float = Field(default=1.0, gt=0.0, le=1.0)
    max_tokens: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _one_prompt_source(self) -> "GenerationSettings":
        if self.custom_prompts and self.main_prompts:
            raise ValueError("set either custom_prompts (preset prompts) or main_prompts, not both")
        return self

    def chat_params(self) -> ChatParams:
        return ChatParams(
            model=self.model,
            temperature=self.temperature,
            top_p=self.top_p,
            max_tokens=self.max_tokens,
            system_role=self.system_role,
        )

    def to_spec(self, base_dir: Path) -> GenerationSpec:
        """GenerationSpec from a preset, the explicit fields, or both (explicit wins).

        Raises:
            InputError: no attributes given, or unknown preset
        """
        from netscale.core.pool import load_pool
        from netscale.presets import get_preset

        if self.preset:
            spec = get_preset(self.preset).generation_spec(self.target_n, custom=self.custom_prompts)
        elif self.item_attributes:
            spec = GenerationSpec(attribute_spec=AttributeSpec(self.item_attributes), target_n=self.target_n)
        else:
            raise InputError("generation needs item_attributes or a preset")

        if self.item_attributes:
            spec.attribute_spec = AttributeSpec(self.item_attributes)
        for name in ("domain", "scale_title", "audience", "prompt_notes", "system_role", "main_prompts"):
            value = getattr(self, name)
            if value:
                setattr(spec, name, value)
        if self.item_type_definitions:
            spec.item_type_definitions = dict(self.item_type_definitions)
        if self.response_options:
            spec.response_options = list(self.response_options)
        if self.item_examples:
            spec.item_examples = list(load_pool(base_dir / self.item_examples).items)
        spec.adaptive = self.adaptive
        return spec


class EmbeddingSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    model: str = DEFAULT_EMBEDDING_MODEL
    provider: Optional[ProviderId] = None


class PipelineSettings(BaseModel):
    """File form of PipelineOptions (the seed lives at the top level)."""
    model_config = ConfigDict(extra="forbid")

    ega_model: str = Field(default="auto", pattern="^(auto|glasso|tmfg)$")
    all_together: bool = False
    run_overall: bool = False
    keep_org: bool = False
    items_only: bool = False
    embeddings_only: bool = False
    uva_cutoff: float = Field(default=UVA_CUTOFF, gt=0.0, le=1.0)
    stability_threshold: float = Field(default=STABILITY_THRESHOLD, ge=0.0, le=1.0)
    n_boot: int = Field(default=N_BOOT, ge=1)
    prune: str = Field(default="all", pattern="^(all|one)$")
    workers: int = Field(default=1, ge=1)
    boot_workers: int = Field(default=1, ge=1)
    min_pool: int = Field(default=MIN_REDUCTION_POOL, ge=4)

    def to_options(self, seed: int) -> PipelineOptions:
        return PipelineOptions(seed=seed, **self.model_dump())


class RunConfig(BaseModel):
    """A complete run: inputs, generation, embedding, pipeline and providers."""
    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    out: str = "netscale_out"
    items: Optional[str] = None
    embeddings: Optional[str] = None
    generation: GenerationSettings = Field(default_factory=GenerationSettings)
    embedding: EmbeddingSettings = Field(default_factory=EmbeddingSettings)
    pipeline: PipelineSettings = Field(default_factory=PipelineSettings)
    providers: Dict[ProviderId, ProviderConfig] = Field(default_factory=dict)
    base_dir: Path = Field(default=Path("."), exclude=True)

    @model_validator(mode="before")
    @classmethod
    def _provider_names(cls, data: Any) -> Any:
        if isinstance(data, dict) and isinstance(data.get("providers"), dict):
            data = dict(data)
            data["providers"] = {
                name: {**(body or {}), "provider": name} for name, body in data["providers"].items()
            }
        return data

    @model_validator(mode="after")
    def _exclusive(self) -> "RunConfig":
        if self.pipeline.items_only and self.pipeline.embeddings_only:
            raise ValueError("items_only and embeddings_only are mutually exclusive")
        return self

    def path(self, value: Optional[str]) -> Optional[Path]:
        """Resolve a config-relative path."""
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def provider_configs(self) -> List[ProviderConfig]:
        """Configured providers, plus a default entry for every provider whose key is in the environment."""
        configs = dict(self.providers)
        for provider in ProviderId:
            if provider not in configs:
                candidate = ProviderConfig(provider=provider)
                if candidate.has_key():
                    configs[provider] = candidate
        return [configs[p] for p in ProviderId if p in configs]

    def options(self) -> PipelineOptions:
        return self.pipeline.to_options(self.seed)


def interpolate_keys(data: Dict[str, Any]) -> Dict[str, Any]:
    """Replace "${VAR}" in providers.*.api_key with the environment value.

    An unset variable drops the key, so the provider's own environment
    variable is consulted when the key is needed.
    """
    providers = data.get("providers")
    if not isinstance(providers, dict):
        return data
    resolved = {}
    for name, body in providers.items():
        body = dict(body or {})
        key = body.get("api_key")
        if isinstance(key, str):
            match = _ENV_REF.match(key.strip())
            if match:
                value = os.environ.get(match.group(1))
                if value:
                    body["api_key"] = value
                else:
                    logger.warning("api_key for %s references unset variable %s", name, match.group(1))
                    body.pop("api_key")
        resolved[name] = body
    return {**data, "providers": resolved}


def _read(path: Path) -> Dict[str, Any]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PoolIOError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(text)
        else:
            data = yaml.safe_load(text) or {}
    except (tomllib.TOMLDecodeError, yaml.YAMLError) as exc:
        raise InputError(f"{path}: cannot parse config: {exc}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: config must be a table/mapping at the top level")
    return data


def load_config(source: Union[str, Path, None] = None, **overrides: Any) -> RunConfig:
    """Load and fully validate a run config.

    overrides are top-level fields (seed, out, items, embeddings) applied on
    top of the file, None values ignored; dict values (pipeline, generation,
    embedding) are merged into that section.

    Raises:
        InputError: parse or validation failure
        PoolIOError: unreadable file
    """
    data: Dict[str, Any] = {}
    base_dir = Path(".")
    if source is not None:
        path = Path(source)
        data = interpolate_keys(_read(path))
        base_dir = path.parent
    data["base_dir"] = base_dir
    for key, value in overrides.items():
        if isinstance(value, dict):
            section = dict(data.get(key) or {})
            section.update(value)
            data[key] = section
        elif value is not None:
            data[key] = value
    try:
        config = RunConfig(**data)
    except ValidationError as exc:
        raise InputError(f"invalid configuration: {exc}") from None
    return config
