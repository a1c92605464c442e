"""Adaptive item generation loop."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Protocol, Sequence

from netscale.core.config import BATCH_ITEMS_PER_ATTRIBUTE, MAX_GENERATION_FAILURES
from netscale.core.errors import GenerationError, InputError, ParseError
from netscale.core.pool import validate_pool
from netscale.core.types import Item, ItemPool, Provenance
from netscale.llm.providers import ChatParams
from netscale.prompts.builder import (
    STRICT_FORMAT_REMINDER,
    GenerationSpec,
    build_builtin_prompt,
    build_custom_prompt,
    validate_custom_prompts,
)
from netscale.prompts.parser import parse_generated_items

logger = logging.getLogger(__name__)


class ChatClient(Protocol):
    def chat(self, prompts: Sequence[str], params: ChatParams, provider=None): ...


@dataclass
class _TypeRun:
    item_type: str
    items: List[Item] = field(default_factory=list)
    batches: int = 0
    failures: int = 0
    exhausted: bool = False


def check_generation_spec(spec: GenerationSpec) -> None:
    """Raise InputError unless the spec can drive generation."""
    if spec.target_n <= 0:
        raise InputError(f"target_n must be positive, got {spec.target_n}")
    report = validate_pool(ItemPool([]), spec.attribute_spec)
    if spec.custom_mode:
        report.violations.extend(validate_custom_prompts(spec).violations)
    if report.violations:
        raise InputError(
            "generation spec is invalid: " + "; ".join(v.message for v in report.violations)
        )


def _generate_type(
    spec: GenerationSpec,
    item_type: str,
    client: ChatClient,
    params: ChatParams,
    provider: Optional[str],
) -> _TypeRun:
    run = _TypeRun(item_type)
    attributes = spec.attribute_spec.types[item_type]
    seen = set()
    strict = False
    counter = itertools.count(1)

    while len(run.items) < spec.target_n:
        if run.failures >= MAX_GENERATION_FAILURES:
            run.exhausted = True
            logger.warning(
                "%s: giving up after %d consecutive failed batches (%d/%d items)",
                item_type, run.failures, len(run.items), spec.target_n,
            )
            break

        remaining = spec.target_n - len(run.items)
        batch_n = min(remaining, BATCH_ITEMS_PER_ATTRIBUTE * len(attributes))
        prior = [i.statement for i in run.items] if spec.adaptive else []
        if spec.custom_mode:
            prompt = build_custom_prompt(spec, item_type, prior)
        else:
            prompt = build_builtin_prompt(spec, item_type, prior, batch_n)
        if strict:
            prompt += "\n\n" + STRICT_FORMAT_REMINDER

        run.batches += 1
        response = client.chat([prompt], params, provider).texts[0]
        try:
            parsed = parse_generated_items(response, item_type, attributes, counter)
        except ParseError as exc:
            run.failures += 1
            strict = True
            logger.warning("%s batch %d: %s", item_type, run.batches, exc)
            continue
        strict = False

        new = 0
        for item in parsed.items:
            key = item.statement.casefold()
            if key in seen:
                continue
            seen.add(key)
            run.items.append(item)
            new += 1
        # A batch of pure repeats counts toward the failure budget
        run.failures = 0 if new else run.failures + 1
        logger.info(
            "%s batch %d: %d new item(s), %d/%d", item_type, run.batches, new,
            min(len(run.items), spec.target_n), spec.target_n,
        )

    run.items = run.items[: spec.target_n]
    return run


def _assemble(runs: List[_TypeRun]) -> ItemPool:
    items = []
    for run in runs:
        for item in run.items:
            items.append(Item(str(len(items) + 1), item.statement, item.attribute, item.item_type))
    return ItemPool(items, Provenance.GENERATED)


def generate_item_pool(
    spec: GenerationSpec,
    client: ChatClient,
    params: ChatParams,
    provider: Optional[str] = None,
    workers: int = 1,
) -> ItemPool:
    """Generate target_n items per type.

    Types may run concurrently; batches within a type are sequential. Ids
    are "1".."N" across types in declaration order.

    Raises:
        InputError: invalid spec
        GenerationError: a type exhausted its failure budget (carries the partial pool)
    """
    check_generation_spec(spec)
    params = params.model_copy(update={"reps": 1, "system_role": spec.effective_system_role()})
    types = spec.attribute_spec.type_names

    def one(item_type: str) -> _TypeRun:
        return _generate_type(spec, item_type, client, params, provider)

    if workers > 1 and len(types) > 1:
        with ThreadPoolExecutor(max_workers=min(workers, len(types))) as executor:
            runs = list(executor.map(one, types))
    else:
        runs = [one(t) for t in types]

    pool = _assemble(runs)
    shortfall: Dict[str, int] = {
        r.item_type: spec.target_n - len(r.items) for r in runs if len(r.items) < spec.target_n
    }
    if shortfall:
        raise GenerationError(
            "generation budget exhausted: "
            + ", ".join(f"{t} short by {n}" for t, n in shortfall.items()),
            shortfall=shortfall,
            partial=pool,
        )

    report = validate_pool(pool, spec.attribute_spec)
    if report.violations:
        raise GenerationError(
            "generated pool failed validation: " + "; ".join(v.message for v in report.violations),
            shortfall={},
            partial=pool,
        )
    logger.info("Generated %d items across %d type(s)", len(pool), len(types))
    return pool
