"""Reduction pipeline: EGA -> UVA -> embedding selection -> bootEGA -> final EGA."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from netscale.core.config import (
    DEFAULT_EMBEDDING_MODEL,
    MIN_REDUCTION_POOL,
    MIN_STAGE_POOL,
    N_BOOT,
    SEED_KEYS,
    STABILITY_THRESHOLD,
    UVA_CUTOFF,
)
from netscale.core.errors import DegenerateInputError, EstimationError, InputError
from netscale.core.types import (
    EmbeddingKind,
    EmbeddingMatrix,
    Item,
    ItemPool,
    NetworkMethod,
    Partition,
)
from netscale.network.correlation import sparsify_embeddings
from netscale.network.ega import EgaResult, run_ega
from netscale.reduction.bootega import BootReport, run_boot, stability_reduce
from netscale.reduction.uva import UvaReport, uva_reduce
from netscale.utils.logging import AuditTrail, StageRecord
from netscale.utils.math import derive_seed

logger = logging.getLogger(__name__)

ALL_TOGETHER_TYPE = "all"
EGA_MODELS = ("auto", "glasso", "tmfg")


@dataclass
class PipelineOptions:
    """Run flags and reduction parameters."""
    ega_model: str = "auto"  # auto | glasso | tmfg
    all_together: bool = False
    run_overall: bool = False
    keep_org: bool = False
    items_only: bool = False
    embeddings_only: bool = False
    uva_cutoff: float = UVA_CUTOFF
    stability_threshold: float = STABILITY_THRESHOLD
    n_boot: int = N_BOOT
    seed: int = 0
    prune: str = "all"  # all | one
    workers: int = 1  # item types reduced concurrently
    boot_workers: int = 1  # bootstrap replicates per type
    min_pool: int = MIN_REDUCTION_POOL

    def __post_init__(self) -> None:
        if self.items_only and self.embeddings_only:
            raise InputError("items_only and embeddings_only are mutually exclusive")
        if self.ega_model not in EGA_MODELS:
            raise InputError(f"ega_model must be one of {EGA_MODELS}, got {self.ega_model!r}")
        if self.prune not in ("all", "one"):
            raise InputError(f"prune must be 'all' or 'one', got {self.prune!r}")
        if not 0.0 < self.uva_cutoff <= 1.0:
            raise InputError(f"uva_cutoff must be in (0, 1], got {self.uva_cutoff}")
        if not 0.0 <= self.stability_threshold <= 1.0:
            raise InputError(f"stability_threshold must be in [0, 1], got {self.stability_threshold}")
        if self.n_boot < 1:
            raise InputError(f"n_boot must be >= 1, got {self.n_boot}")
        if self.workers < 1 or self.boot_workers < 1:
            raise InputError("workers must be >= 1")
        if self.min_pool < MIN_STAGE_POOL:
            raise InputError(f"min_pool must be >= {MIN_STAGE_POOL}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TypeResult:
    """Everything one reduction run produced for one item type."""
    item_type: str
    start_N: int
    final_N: int
    final_items: ItemPool
    EGA_model_selected: Optional[str] = None
    initial_NMI: Optional[float] = None
    final_NMI: Optional[float] = None
    initial_EGA: Optional[EgaResult] = None
    final_EGA: Optional[EgaResult] = None
    UVA: Optional[UvaReport] = None
    bootEGA: Optional[BootReport] = None
    embeddings: Dict[str, Any] = field(default_factory=dict)
    initial_items: Optional[ItemPool] = None
    model_selection: Dict[str, Optional[float]] = field(default_factory=dict)
    embedding_selection: Dict[str, Optional[float]] = field(default_factory=dict)
    network_plot: Any = None
    stability_plot: Any = None
    degraded: bool = False
    notes: List[str] = field(default_factory=list)
    seed: int = 0

    @property
    def n_removed(self) -> int:
        uva = self.UVA.n_removed if self.UVA else 0
        boot = self.bootEGA.n_removed if self.bootEGA else 0
        return uva + boot


@dataclass
class OverallResult:
    """Aggregation across types, or a post-hoc analysis with run_overall."""
    final_items: ItemPool
    embeddings: Dict[str, Any] = field(default_factory=dict)
    initial_items: Optional[ItemPool] = None
    analysed: bool = False
    EGA_model_selected: Optional[str] = None
    initial_NMI: Optional[float] = None
    final_NMI: Optional[float] = None
    initial_EGA: Optional[EgaResult] = None
    final_EGA: Optional[EgaResult] = None
    start_N: Optional[int] = None
    final_N: Optional[int] = None
    network_plot: Any = None
    notes: List[str] = field(default_factory=list)


@dataclass
class GenieResult:
    """Per-type results plus the overall element; flat holds the single result of all_together."""
    item_type_level: Dict[str, TypeResult] = field(default_factory=dict)
    overall: Optional[OverallResult] = None
    flat: Optional[TypeResult] = None
    options: Dict[str, Any] = field(default_factory=dict)
    audit: AuditTrail = field(default_factory=AuditTrail)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def type_results(self) -> List[TypeResult]:
        return [self.flat] if self.flat is not None else list(self.item_type_level.values())

    @property
    def degraded(self) -> bool:
        return any(r.degraded for r in self.type_results)


def type_seed(seed: int, item_type: str) -> int:
    """Per-type seed; depends only on the run seed and the type name."""
    return derive_seed(seed, item_type)


def _truth(pool: ItemPool, key: str) -> Partition:
    return Partition(pool.ids, pool.labels(key))


def _select_model(
    emb: EmbeddingMatrix, truth: Partition, ega_model: str
) -> Tuple[EgaResult, Dict[str, Optional[float]], List[str]]:
    """Initial EGA under the pinned model, or the better of glasso/tmfg (tie -> glasso)."""
    notes: List[str] = []
    if ega_model != "auto":
        result = run_ega(emb, ega_model, truth)
        return result, {ega_model: result.nmi.value}, notes

    scores: Dict[str, Optional[float]] = {}
    best: Optional[EgaResult] = None
    for method in (NetworkMethod.GLASSO, NetworkMethod.TMFG):
        try:
            result = run_ega(emb, method, truth)
        except EstimationError as exc:
            notes.append(f"{method.value} failed during model selection: {exc}")
            logger.warning("Model selection: %s failed (%s)", method.value, exc)
            scores[method.value] = None
            continue
        scores[method.value] = result.nmi.value
        if best is None or result.nmi.value > best.nmi.value:
            best = result
    if best is None:
        raise EstimationError("both glasso and tmfg failed during model selection")
    return best, scores, notes


def _degraded(
    item_type: str,
    pool: ItemPool,
    start_pool: ItemPool,
    note: str,
    seed: int,
    **fields: Any,
) -> TypeResult:
    logger.warning("[%s] degraded: %s", item_type, note)
    result = TypeResult(
        item_type=item_type,
        start_N=len(start_pool),
        final_N=len(pool),
        final_items=pool,
        degraded=True,
        notes=[note],
        seed=seed,
        **fields,
    )
    return result


def run_reduction(
    pool: ItemPool,
    emb_full: EmbeddingMatrix,
    truth: str = "attribute",
    opts: Optional[PipelineOptions] = None,
    item_type: Optional[str] = None,
    audit: Optional[AuditTrail] = None,
) -> TypeResult:
    """Reduce one item pool.

    This is the per-type pipeline:
    1. Subset the embeddings to the pool
    2. Initial EGA and model selection against the truth labels
    3. UVA with the selected model
    4. Full vs sparse embeddings on the post-UVA pool
    5. bootEGA stability pruning on the selected embeddings
    6. Final EGA

    A pool below opts.min_pool, or a stage that cannot be estimated, yields
    a degraded result instead of an exception.

    Args:
        pool: Items to reduce
        emb_full: Embeddings whose columns cover the pool ids
        truth: Item field used as ground truth ('attribute' or 'item_type')
        opts: Pipeline options
        item_type: Label used in logs and the audit trail
        audit: Optional audit trail

    Returns:
        TypeResult

    Raises:
        InputError: embeddings lack a column for some pool item
    """
    opts = opts or PipelineOptions()
    label = item_type or (pool.types[0] if pool.types else "items")
    seed = type_seed(opts.seed, label)
    audit = audit if audit is not None else AuditTrail()

    # Step 1: embeddings for this pool
    emb = emb_full.subset(pool.ids)
    truth_partition = _truth(pool, truth)
    org: Dict[str, Any] = {}
    if opts.keep_org:
        org["full_org"] = emb
        org["sparse_org"] = sparsify_embeddings(emb)
    initial_items = pool if opts.keep_org else None

    if len(pool) < opts.min_pool:
        audit.add_stage(StageRecord(label, "skipped", len(pool), len(pool), {"reason": "pool below minimum"}))
        return _degraded(
            label, pool, pool,
            f"pool has {len(pool)} items; at least {opts.min_pool} are needed for reduction",
            seed, embeddings={"full": emb, "sparse": sparsify_embeddings(emb), "selected": "full", **org},
            initial_items=initial_items,
        )

    # Step 2: initial EGA and model selection
    try:
        initial, model_scores, notes = _select_model(emb, truth_partition, opts.ega_model)
    except EstimationError as exc:
        audit.add_stage(StageRecord(label, "initial_ega", len(pool), len(pool), {"error": str(exc)}))
        return _degraded(
            label, pool, pool, f"initial EGA failed: {exc}", seed,
            embeddings={"full": emb, "sparse": sparsify_embeddings(emb), "selected": "full", **org},
            initial_items=initial_items,
        )
    method = initial.method
    logger.info(
        "[%s] initial EGA: %s selected, NMI %.2f%% (%d communities)",
        label, method.value, initial.nmi.value, initial.n_communities,
    )
    audit.add_stage(StageRecord(
        label, "initial_ega", len(pool), len(pool),
        {"model": method.value, "NMI": round(initial.nmi.value, 4), "scores": model_scores},
    ))

    # Step 3: UVA
    try:
        post_uva, uva_report = uva_reduce(pool, emb, method, opts.uva_cutoff)
    except EstimationError as exc:
        return _degraded(
            label, pool, pool, f"UVA failed: {exc}", seed,
            EGA_model_selected=method.value, initial_NMI=initial.nmi.value, initial_EGA=initial,
            embeddings={"full": emb, "sparse": sparsify_embeddings(emb), "selected": "full", **org},
            initial_items=initial_items, model_selection=model_scores,
        )
    audit.add_stage(StageRecord(
        label, "uva", len(pool), len(post_uva),
        {"n_sweeps": uva_report.n_sweeps, "truncated": uva_report.truncated},
    ))

    # Step 4: full vs sparse embeddings (tie -> full)
    full_post = emb.subset(post_uva.ids)
    sparse_post = sparsify_embeddings(full_post)
    post_truth = _truth(post_uva, truth)
    try:
        full_ega = run_ega(full_post, method, post_truth)
    except (DegenerateInputError, EstimationError) as exc:
        audit.add_stage(StageRecord(label, "embedding_selection", len(post_uva), len(post_uva), {"error": str(exc)}))
        return _degraded(
            label, post_uva, pool, f"EGA on post-UVA embeddings failed: {exc}", seed,
            EGA_model_selected=method.value, initial_NMI=initial.nmi.value, initial_EGA=initial,
            UVA=uva_report,
            embeddings={"full": full_post, "sparse": sparse_post, "selected": "full", **org},
            initial_items=initial_items, model_selection=model_scores,
        )
    embedding_scores: Dict[str, Optional[float]] = {"full": full_ega.nmi.value, "sparse": None}
    selected_kind = EmbeddingKind.FULL
    try:
        sparse_ega = run_ega(sparse_post, method, post_truth)
        embedding_scores["sparse"] = sparse_ega.nmi.value
        if sparse_ega.nmi.value > full_ega.nmi.value:
            selected_kind = EmbeddingKind.SPARSE
    except (DegenerateInputError, EstimationError) as exc:
        notes.append(f"sparse embeddings could not be analysed: {exc}")
        logger.warning("[%s] sparse embeddings skipped: %s", label, exc)
    selected_emb = sparse_post if selected_kind is EmbeddingKind.SPARSE else full_post
    logger.info("[%s] embedding selection: %s %s", label, selected_kind.value, embedding_scores)
    audit.add_stage(StageRecord(
        label, "embedding_selection", len(post_uva), len(post_uva),
        {"selected": selected_kind.value, "scores": embedding_scores},
    ))

    # Step 5: bootEGA
    try:
        with_redundancies = run_boot(
            emb, method, opts.n_boot, derive_seed(seed, SEED_KEYS["boot_redundant"]),
            workers=opts.boot_workers,
        )
        final_pool, boot_report = stability_reduce(
            post_uva,
            selected_emb,
            method,
            threshold=opts.stability_threshold,
            n=opts.n_boot,
            seed=derive_seed(seed, SEED_KEYS["boot"]),
            prune=opts.prune,
            workers=opts.boot_workers,
        )
    except (DegenerateInputError, EstimationError) as exc:
        audit.add_stage(StageRecord(label, "bootega", len(post_uva), len(post_uva), {"error": str(exc)}))
        return _degraded(
            label, post_uva, pool, f"bootEGA failed: {exc}", seed,
            EGA_model_selected=method.value, initial_NMI=initial.nmi.value, initial_EGA=initial,
            UVA=uva_report,
            embeddings={"full": full_post, "sparse": sparse_post, "selected": selected_kind.value, **org},
            initial_items=initial_items, model_selection=model_scores,
            embedding_selection=embedding_scores,
        )
    boot_report.initial_boot_with_redundancies = with_redundancies
    audit.add_stage(StageRecord(
        label, "bootega", len(post_uva), len(final_pool),
        {"iterations": boot_report.n_iterations, "truncated": boot_report.truncated},
    ))

    # Step 6: final EGA
    final_emb = selected_emb.subset(final_pool.ids)
    try:
        final_ega = run_ega(final_emb, method, _truth(final_pool, truth))
    except (DegenerateInputError, EstimationError) as exc:
        audit.add_stage(StageRecord(label, "final_ega", len(final_pool), len(final_pool), {"error": str(exc)}))
        return _degraded(
            label, final_pool, pool, f"final EGA failed: {exc}", seed,
            EGA_model_selected=method.value, initial_NMI=initial.nmi.value, initial_EGA=initial,
            UVA=uva_report, bootEGA=boot_report,
            embeddings={
                "full": full_post.subset(final_pool.ids),
                "sparse": sparse_post.subset(final_pool.ids),
                "selected": selected_kind.value,
                **org,
            },
            initial_items=initial_items, model_selection=model_scores,
            embedding_selection=embedding_scores,
        )
    final_items = final_pool.with_communities(final_ega.partition)
    logger.info(
        "[%s] final EGA: NMI %.2f%% -> %.2f%%, %d -> %d items",
        label, initial.nmi.value, final_ega.nmi.value, len(pool), len(final_pool),
    )
    audit.add_stage(StageRecord(
        label, "final_ega", len(final_pool), len(final_pool),
        {"NMI": round(final_ega.nmi.value, 4), "communities": final_ega.n_communities},
    ))

    if uva_report.truncated:
        notes.append("UVA stopped early to keep the minimum pool size")
    if boot_report.truncated:
        notes.append("bootEGA stopped early to keep the minimum pool size")
    truncated = uva_report.truncated or boot_report.truncated
    if truncated:
        logger.warning("[%s] degraded: reduction truncated at the minimum pool size", label)

    return TypeResult(
        item_type=label,
        start_N=len(pool),
        final_N=len(final_pool),
        final_items=final_items,
        EGA_model_selected=method.value,
        initial_NMI=initial.nmi.value,
        final_NMI=final_ega.nmi.value,
        initial_EGA=initial,
        final_EGA=final_ega,
        UVA=uva_report,
        bootEGA=boot_report,
        embeddings={
            "full": full_post.subset(final_pool.ids),
            "sparse": sparse_post.subset(final_pool.ids),
            "selected": selected_kind.value,
            **org,
        },
        initial_items=initial_items,
        model_selection=model_scores,
        embedding_selection=embedding_scores,
        degraded=truncated,
        notes=notes,
        seed=seed,
    )


def _concat(matrices: List[EmbeddingMatrix], kind: EmbeddingKind) -> Optional[EmbeddingMatrix]:
    matrices = [m for m in matrices if m is not None and m.n_items]
    if not matrices:
        return None
    ids = [i for m in matrices for i in m.item_ids]
    return EmbeddingMatrix(np.hstack([m.values for m in matrices]), ids, kind)


def _overall(
    results: List[TypeResult],
    pool: ItemPool,
    emb: EmbeddingMatrix,
    opts: PipelineOptions,
) -> OverallResult:
    final_items = ItemPool(
        [item for r in results for item in r.final_items.items], pool.provenance
    )
    final_full = emb.subset(final_items.ids)
    overall = OverallResult(
        final_items=final_items,
        embeddings={
            "full": final_full,
            "sparse": _concat([r.embeddings.get("sparse") for r in results], EmbeddingKind.SPARSE),
        },
    )
    if opts.keep_org:
        overall.initial_items = pool
        overall.embeddings["full_org"] = emb.subset(pool.ids)
        overall.embeddings["sparse_org"] = sparsify_embeddings(overall.embeddings["full_org"])

    if not opts.run_overall:
        return overall

    # Post-hoc EGA against type labels; no reduction
    overall.analysed = True
    overall.start_N = len(pool)
    overall.final_N = len(final_items)
    if len(final_items) < MIN_STAGE_POOL:
        overall.notes.append("too few final items for an overall analysis")
        return overall
    try:
        initial, _, notes = _select_model(
            emb.subset(pool.ids), _truth(pool, "item_type"), opts.ega_model
        )
        overall.notes.extend(notes)
        final = run_ega(final_full, initial.method, _truth(final_items, "item_type"))
    except (EstimationError, DegenerateInputError) as exc:
        overall.notes.append(f"overall analysis failed: {exc}")
        logger.warning("Overall analysis failed: %s", exc)
        return overall
    overall.EGA_model_selected = initial.method.value
    overall.initial_EGA, overall.final_EGA = initial, final
    overall.initial_NMI, overall.final_NMI = initial.nmi.value, final.nmi.value
    overall.final_items = final_items.with_communities(final.partition)
    logger.info(
        "Overall analysis: NMI %.2f%% -> %.2f%% against type labels",
        initial.nmi.value, final.nmi.value,
    )
    return overall


def _together(pool: ItemPool) -> ItemPool:
    return ItemPool(
        [
            Item(i.id, i.statement, f"{i.item_type} {i.attribute}", ALL_TOGETHER_TYPE, i.ega_community)
            for i in pool.items
        ],
        pool.provenance,
    )


def _attach_plots(result: GenieResult, seed: int) -> None:
    from netscale.report.plots import render_overall_plot, render_plots

    for type_result in result.type_results:
        type_result.network_plot, type_result.stability_plot = render_plots(
            type_result, seed=derive_seed(type_result.seed, SEED_KEYS["layout"])
        )
    if result.overall is not None and result.overall.analysed:
        result.overall.network_plot = render_overall_plot(
            result.overall, seed=derive_seed(seed, "overall", SEED_KEYS["layout"])
        )


def run_genie(
    pool: ItemPool,
    embeddings: Union[EmbeddingMatrix, Any],
    opts: Optional[PipelineOptions] = None,
    embedding_model: Optional[str] = None,
    provider: Optional[str] = None,
    render: bool = True,
) -> GenieResult:
    """Reduce a user-supplied pool.

    embeddings is either a precomputed matrix keyed by item id (offline) or
    a client with an embed() method, used with embedding_model.

    Raises:
        InputError: the matrix lacks columns for some items
    """
    opts = opts or PipelineOptions()
    if not len(pool):
        raise InputError("item pool is empty")

    if isinstance(embeddings, EmbeddingMatrix):
        emb = embeddings.subset(pool.ids)
    else:
        emb = embed_pool(pool, embeddings, embedding_model, provider)

    audit = AuditTrail(metadata={"seed": opts.seed})
    result = GenieResult(options=opts.to_dict(), audit=audit)
    types = pool.types

    if opts.all_together and len(types) > 1:
        together = _together(pool)
        result.flat = run_reduction(together, emb, "attribute", opts, ALL_TOGETHER_TYPE, audit)
        result.metadata["all_together"] = True
    else:
        if opts.all_together:
            logger.info("all_together ignored: only one item type present")

        def one(item_type: str) -> TypeResult:
            return run_reduction(pool.of_type(item_type), emb, "attribute", opts, item_type, audit)

        if opts.workers > 1 and len(types) > 1:
            with ThreadPoolExecutor(max_workers=min(opts.workers, len(types))) as executor:
                results = list(executor.map(one, types))
        else:
            results = [one(t) for t in types]
        result.item_type_level = dict(zip(types, results))
        result.overall = _overall(results, pool, emb, opts)

    if render:
        _attach_plots(result, opts.seed)
    result.metadata["type_order"] = [r.item_type for r in result.type_results]
    return result


def embed_pool(
    pool: ItemPool, client: Any, model: Optional[str], provider: Optional[str] = None
) -> EmbeddingMatrix:
    """Embed statements one item type at a time and join the columns in pool order."""
    model = model or DEFAULT_EMBEDDING_MODEL
    parts = []
    for item_type in pool.types:
        sub = pool.of_type(item_type)
        parts.append(client.embed([i.statement for i in sub.items], model, provider, sub.ids))
    dims = {p.n_dims for p in parts}
    if len(dims) != 1:
        raise InputError(f"embedding dimensions differ across item types: {sorted(dims)}")
    return _concat(parts, EmbeddingKind.FULL).subset(pool.ids)


def run_aigenie(
    spec: Any,
    opts: Optional[PipelineOptions],
    client: Any,
    chat_params: Any,
    embedding_model: Optional[str] = None,
    chat_provider: Optional[str] = None,
    embed_provider: Optional[str] = None,
    render: bool = True,
) -> Union[GenieResult, ItemPool, Tuple[ItemPool, EmbeddingMatrix]]:
    """Generate items, embed them and reduce them.

    Returns the pool alone with items_only, (pool, embeddings) with
    embeddings_only, otherwise a GenieResult.

    Raises:
        GenerationError: generation fell short (carries the partial pool)
    """
    from netscale.prompts.generation import generate_item_pool

    opts = opts or PipelineOptions()
    pool = generate_item_pool(spec, client, chat_params, chat_provider, workers=opts.workers)
    if opts.items_only:
        return pool

    emb = embed_pool(pool, client, embedding_model, embed_provider)
    if opts.embeddings_only:
        return pool, emb

    result = run_genie(pool, emb, opts, render=render)
    result.metadata["generation"] = {
        "model": chat_params.model,
        "temperature": chat_params.temperature,
        "top_p": chat_params.top_p,
        "max_tokens": chat_params.max_tokens,
        "embedding_model": embedding_model,
        "target_n": spec.target_n,
    }
    return result
