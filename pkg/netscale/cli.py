"""Command-line entry point: run, reduce, generate, models, chat."""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Iterator, List, Optional

import httpx
from pydantic import ValidationError

from netscale import __version__
from netscale.core.errors import (
    EstimationError,
    GenerationError,
    InputError,
    NetscaleError,
    OfflineViolation,
    ParseError,
    ProviderError,
)
from netscale.core.kernel import GenieResult, run_aigenie, run_genie
from netscale.core.pool import load_embeddings, load_pool
from netscale.llm.client import LLMClient, list_available_models
from netscale.llm.providers import ChatParams, ProviderId
from netscale.prompts.generation import generate_item_pool
from netscale.report.writer import write_embedding_table, write_items, write_result
from netscale.settings import RunConfig, load_config
from netscale.utils.logging import setup_logger
from netscale.utils.offline import offline_guard

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PROVIDER = 2
EXIT_DEGRADED = 3


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the input-error status."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, (ProviderError, GenerationError, ParseError, OfflineViolation)):
        return EXIT_PROVIDER
    if isinstance(exc, EstimationError):
        return EXIT_DEGRADED
    return EXIT_INPUT


def _cli_path(value: Optional[str]) -> Optional[str]:
    """Paths given on the command line are relative to the working directory."""
    return None if value is None else str(Path(value).absolute())


def _config(args: argparse.Namespace) -> RunConfig:
    """Config file, then command-line flags on top."""
    pipeline = {
        key: getattr(args, key)
        for key in (
            "ega_model", "all_together", "run_overall", "keep_org", "n_boot",
            "uva_cutoff", "stability_threshold", "prune", "workers", "boot_workers",
        )
        if getattr(args, key, None) not in (None, False)
    }
    generation = {
        key: getattr(args, key)
        for key in ("preset", "target_n", "model", "temperature", "top_p", "max_tokens")
        if getattr(args, key, None) is not None
    }
    if getattr(args, "chat_provider", None):
        generation["provider"] = args.chat_provider
    embedding = {}
    if getattr(args, "embedding_model", None):
        embedding["model"] = args.embedding_model
    if getattr(args, "embed_provider", None):
        embedding["provider"] = args.embed_provider
    return load_config(
        args.config,
        seed=args.seed,
        out=args.out,
        items=_cli_path(getattr(args, "items", None)),
        embeddings=_cli_path(getattr(args, "embeddings", None)),
        pipeline=pipeline,
        generation=generation,
        embedding=embedding,
    )


def _client(config: RunConfig, transport: Optional[httpx.BaseTransport]) -> LLMClient:
    return LLMClient(config.provider_configs(), transport)


def _summarise(result: GenieResult) -> None:
    for r in result.type_results:
        status = " (degraded)" if r.degraded else ""
        initial = "n/a" if r.initial_NMI is None else f"{r.initial_NMI:.2f}%"
        final = "n/a" if r.final_NMI is None else f"{r.final_NMI:.2f}%"
        print(
            f"{r.item_type}: {r.start_N} -> {r.final_N} items, NMI {initial} -> {final}, "
            f"model {r.EGA_model_selected or 'n/a'}{status}"
        )


def _finish(result: GenieResult, out: Path) -> int:
    write_result(result, out)
    _summarise(result)
    return EXIT_DEGRADED if result.degraded else EXIT_OK


def _reduce_command(args: argparse.Namespace, transport: Optional[httpx.BaseTransport]) -> int:
    config = _config(args)
    items = config.path(config.items)
    if items is None:
        raise InputError("reduce needs --items (or items in the config)")
    pool = load_pool(items)
    embeddings_path = config.path(config.embeddings)
    if embeddings_path is not None:
        result = run_genie(pool, load_embeddings(embeddings_path), config.options())
    else:
        with _client(config, transport) as client:
            result = run_genie(
                pool, client, config.options(),
                embedding_model=config.embedding.model, provider=config.embedding.provider,
            )
    return _finish(result, Path(config.out))


def _run_command(args: argparse.Namespace, transport: Optional[httpx.BaseTransport]) -> int:
    config = _config(args)
    spec = config.generation.to_spec(config.base_dir)
    out = Path(config.out)
    with _client(config, transport) as client:
        try:
            outcome = run_aigenie(
                spec,
                config.options(),
                client,
                config.generation.chat_params(),
                embedding_model=config.embedding.model,
                chat_provider=config.generation.provider,
                embed_provider=config.embedding.provider,
            )
        except GenerationError as exc:
            if exc.partial is not None and len(exc.partial):
                path = write_items(exc.partial, out, "items_partial.csv")
                logger.error("Partial pool of %d items written to %s", len(exc.partial), path)
            raise
    if isinstance(outcome, GenieResult):
        return _finish(outcome, out)
    if isinstance(outcome, tuple):
        pool, emb = outcome
        write_items(pool, out)
        write_embedding_table(emb, out)
        print(f"{len(pool)} items and {emb.n_dims}-dimensional embeddings written to {out}")
        return EXIT_OK
    write_items(outcome, out)
    print(f"{len(outcome)} items written to {out}")
    return EXIT_OK


def _generate_command(args: argparse.Namespace, transport: Optional[httpx.BaseTransport]) -> int:
    config = _config(args)
    spec = config.generation.to_spec(config.base_dir)
    out = Path(config.out)
    with _client(config, transport) as client:
        try:
            pool = generate_item_pool(
                spec, client, config.generation.chat_params(),
                config.generation.provider, workers=config.pipeline.workers,
            )
        except GenerationError as exc:
            if exc.partial is not None and len(exc.partial):
                write_items(exc.partial, out, "items_partial.csv")
            raise
    path = write_items(pool, out)
    print(f"{len(pool)} items written to {path}")
    return EXIT_OK


def _models_command(args: argparse.Namespace, transport: Optional[httpx.BaseTransport]) -> int:
    config = load_config(args.config)
    catalog = list_available_models(args.provider, args.type, config.provider_configs(), transport)
    for entry in catalog.entries:
        print(f"{entry.provider}\t{entry.model_id}\t{entry.type}")
    for provider, message in catalog.errors.items():
        print(f"{provider}: {message}", file=sys.stderr)
    if catalog.errors and not catalog.entries:
        return EXIT_PROVIDER
    return EXIT_OK


def _chat_command(args: argparse.Namespace, transport: Optional[httpx.BaseTransport]) -> int:
    config = load_config(args.config)
    params = ChatParams(
        model=args.model,
        temperature=args.temperature,
        top_p=args.top_p,
        system_role=args.system_role,
        reps=args.reps,
        max_tokens=args.max_tokens,
    )
    with _client(config, transport) as client:
        result = client.chat(args.prompt, params, args.provider)
    for response in result.responses:
        print(response.text)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="TOML or YAML run configuration")
    parser.add_argument("--out", type=str, default=None, help="Output directory")
    parser.add_argument("--seed", type=int, default=None, help="Run seed")
    parser.add_argument(
        "--offline", action="store_true", help="Fail on any network connection attempt"
    )
    parser.add_argument(
        "--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level",
    )


def _add_pipeline(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ega-model", dest="ega_model", choices=["auto", "glasso", "tmfg"])
    parser.add_argument("--all-together", dest="all_together", action="store_true",
                        help="Reduce all item types as one pool")
    parser.add_argument("--run-overall", dest="run_overall", action="store_true",
                        help="Post-hoc EGA over the combined final pool")
    parser.add_argument("--keep-org", dest="keep_org", action="store_true",
                        help="Keep pre-reduction items and embeddings in the report")
    parser.add_argument("--n-boot", dest="n_boot", type=int, help="Bootstrap replicates")
    parser.add_argument("--uva-cutoff", dest="uva_cutoff", type=float, help="wTO redundancy cutoff")
    parser.add_argument("--stability-threshold", dest="stability_threshold", type=float)
    parser.add_argument("--prune", choices=["all", "one"], help="Unstable items removed per iteration")
    parser.add_argument("--workers", type=int, help="Item types processed concurrently")
    parser.add_argument("--boot-workers", dest="boot_workers", type=int,
                        help="Bootstrap replicates estimated concurrently")
    parser.add_argument("--embedding-model", dest="embedding_model")
    parser.add_argument("--embed-provider", dest="embed_provider", choices=[p.value for p in ProviderId])


def _add_generation(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", help="big_five or ai_anxiety")
    parser.add_argument("--target-n", dest="target_n", type=int, help="Items per type")
    parser.add_argument("--model", help="Chat model id or alias")
    parser.add_argument("--chat-provider", dest="chat_provider", choices=[p.value for p in ProviderId])
    parser.add_argument("--temperature", type=float)
    parser.add_argument("--top-p", dest="top_p", type=float)
    parser.add_argument("--max-tokens", dest="max_tokens", type=int)


def _parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netscale", description="LLM item generation and network-based scale reduction")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run_parser = subparsers.add_parser("run", help="Generate, embed and reduce")
    _add_common(run_parser)
    _add_generation(run_parser)
    _add_pipeline(run_parser)
    run_parser.set_defaults(func=_run_command)

    reduce_parser = subparsers.add_parser("reduce", help="Reduce an existing item pool")
    _add_common(reduce_parser)
    reduce_parser.add_argument("--items", help="Item table (CSV or JSON)")
    reduce_parser.add_argument("--embeddings", help="Precomputed embeddings CSV (columns = item ids)")
    _add_pipeline(reduce_parser)
    reduce_parser.set_defaults(func=_reduce_command)

    generate_parser = subparsers.add_parser("generate", help="Generate items only")
    _add_common(generate_parser)
    _add_generation(generate_parser)
    generate_parser.set_defaults(func=_generate_command)

    models_parser = subparsers.add_parser("models", help="List available models")
    _add_common(models_parser)
    models_parser.add_argument("--provider", choices=[p.value for p in ProviderId])
    models_parser.add_argument("--type", choices=["chat", "embedding"])
    models_parser.set_defaults(func=_models_command)

    chat_parser = subparsers.add_parser("chat", help="Send prompts to a chat model")
    _add_common(chat_parser)
    chat_parser.add_argument("--model", required=True)
    chat_parser.add_argument("--prompt", action="append", required=True, help="Repeatable")
    chat_parser.add_argument("--provider", choices=[p.value for p in ProviderId])
    chat_parser.add_argument("--temperature", type=float, default=1.0)
    chat_parser.add_argument("--top-p", dest="top_p", type=float, default=1.0)
    chat_parser.add_argument("--system-role", dest="system_role")
    chat_parser.add_argument("--reps", type=int, default=1)
    chat_parser.add_argument("--max-tokens", dest="max_tokens", type=int)
    chat_parser.set_defaults(func=_chat_command)

    return parser


@contextlib.contextmanager
def _maybe_offline(enabled: bool) -> Iterator[None]:
    if not enabled:
        yield
        return
    with offline_guard() as stats:
        yield
    logger.info("Offline mode: %d connection attempt(s) refused", stats.attempts)


def main(argv: Optional[List[str]] = None, transport: Optional[httpx.BaseTransport] = None) -> int:
    args = _parser().parse_args(argv)
    setup_logger("netscale", getattr(logging, args.log_level))
    func: Callable[[argparse.Namespace, Any], int] = args.func
    try:
        with _maybe_offline(args.offline):
            return func(args, transport)
    except NetscaleError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exit_code(exc)
    except ValidationError as exc:
        logger.error("Invalid arguments: %s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
