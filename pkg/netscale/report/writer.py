"""Run report serialization: result.json plus per-type tables and plot documents.

Layout of an output directory:
    result.json                   full result tree
    final_items_<type>.csv        ID, statement, attribute, type, EGA_com
    network_<type>.svg/.csv       before/after networks and their node table
    stability_<type>.svg/.csv     item stabilities before/after pruning
    embeddings_<type>_full.csv    final items' full embeddings
    embeddings_<type>_sparse.csv  final items' sparsified embeddings
    uva_log_<type>.csv            one row per removed redundant item
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from netscale import __version__
from netscale.core.errors import PoolIOError
from netscale.core.kernel import GenieResult, OverallResult, TypeResult
from netscale.core.pool import embeddings_to_frame, pool_to_frame
from netscale.core.types import EmbeddingMatrix, ItemPool

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def atomic_write_text(target: PathLike, text: str) -> Path:
    """Write via a temp file in the same directory, then rename over the target."""
    path = Path(target)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
    except OSError as exc:
        raise PoolIOError(f"cannot write {path}: {exc}") from exc
    return path


def _csv(frame: pd.DataFrame, **kwargs: Any) -> str:
    return frame.to_csv(index=False, lineterminator="\n", **kwargs)


def slug(name: str) -> str:
    """File-name-safe form of an item type name."""
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name.strip()) or "type"


def _items(pool: Optional[ItemPool]) -> Optional[List[Dict[str, Any]]]:
    if pool is None:
        return None
    return pool_to_frame(pool, include_community=True).to_dict(orient="records")


def _matrix_info(emb: Optional[EmbeddingMatrix], file: Optional[str] = None) -> Optional[Dict[str, Any]]:
    if emb is None:
        return None
    info: Dict[str, Any] = {"kind": emb.kind.value, "n_dims": emb.n_dims, "item_ids": list(emb.item_ids)}
    if file:
        info["file"] = file
    return info


def _round(value: Optional[float]) -> Optional[float]:
    return None if value is None else round(float(value), 10)


def type_result_to_dict(result: TypeResult, files: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
    """One item type's element of the result tree."""
    files = files or {}
    emb = result.embeddings
    embeddings: Dict[str, Any] = {
        "selected": emb.get("selected"),
        "full": _matrix_info(emb.get("full"), files.get("embeddings_full")),
        "sparse": _matrix_info(emb.get("sparse"), files.get("embeddings_sparse")),
    }
    for key in ("full_org", "sparse_org"):
        if key in emb:
            embeddings[key] = _matrix_info(emb[key])

    out: Dict[str, Any] = {
        "final_NMI": _round(result.final_NMI),
        "initial_NMI": _round(result.initial_NMI),
        "embeddings": embeddings,
        "UVA": None if result.UVA is None else result.UVA.to_dict(),
        "bootEGA": None if result.bootEGA is None else result.bootEGA.to_dict(),
        "EGA.model_selected": result.EGA_model_selected,
        "final_items": _items(result.final_items),
        "final_EGA": None if result.final_EGA is None else result.final_EGA.to_dict(),
        "initial_EGA": None if result.initial_EGA is None else result.initial_EGA.to_dict(),
        "start_N": result.start_N,
        "final_N": result.final_N,
        "network_plot": files.get("network_plot"),
        "stability_plot": files.get("stability_plot"),
        "model_selection_NMI": {k: _round(v) for k, v in result.model_selection.items()},
        "embedding_selection_NMI": {k: _round(v) for k, v in result.embedding_selection.items()},
        "degraded": result.degraded,
        "notes": list(result.notes),
        "seed": result.seed,
    }
    if result.initial_items is not None:
        out["initial_items"] = _items(result.initial_items)
    return out


def overall_to_dict(overall: OverallResult, files: Optional[Dict[str, str]] = None) -> Dict[str, Any]:
    files = files or {}
    embeddings = {
        "full": _matrix_info(overall.embeddings.get("full")),
        "sparse": _matrix_info(overall.embeddings.get("sparse")),
    }
    for key in ("full_org", "sparse_org"):
        if key in overall.embeddings:
            embeddings[key] = _matrix_info(overall.embeddings[key])
    out: Dict[str, Any] = {"final_items": _items(overall.final_items), "embeddings": embeddings}
    if overall.initial_items is not None:
        out["initial_items"] = _items(overall.initial_items)
    if overall.analysed:
        out.update({
            "final_NMI": _round(overall.final_NMI),
            "initial_NMI": _round(overall.initial_NMI),
            "EGA.model_selected": overall.EGA_model_selected,
            "final_EGA": None if overall.final_EGA is None else overall.final_EGA.to_dict(),
            "initial_EGA": None if overall.initial_EGA is None else overall.initial_EGA.to_dict(),
            "start_N": overall.start_N,
            "final_N": overall.final_N,
            "network_plot": files.get("network_plot"),
            "notes": list(overall.notes),
        })
    return out


def result_to_dict(result: GenieResult, files: Optional[Dict[str, Dict[str, str]]] = None) -> Dict[str, Any]:
    """The full result tree, keyed the way the output directory is."""
    files = files or {}
    run = {
        "version": __version__,
        "options": result.options,
        "metadata": result.metadata,
        "degraded": result.degraded,
        "audit": result.audit.to_dict(type_order=[r.item_type for r in result.type_results]),
    }
    if result.flat is not None:
        body = type_result_to_dict(result.flat, files.get(result.flat.item_type))
        body["run"] = run
        return body
    return {
        "item_type_level": {
            name: type_result_to_dict(r, files.get(name)) for name, r in result.item_type_level.items()
        },
        "overall": None if result.overall is None else overall_to_dict(result.overall, files.get("overall")),
        "run": run,
    }


def uva_log_frame(result: TypeResult) -> pd.DataFrame:
    rows = []
    if result.UVA is not None:
        for decision in result.UVA.redundant_pairs:
            for removed in decision.removed:
                rows.append({
                    "sweep": decision.sweep,
                    "cluster_id": decision.cluster_id,
                    "removed": removed,
                    "kept": decision.kept,
                    "cluster": " ".join(decision.items),
                    "wto_max": decision.wto_max,
                })
    return pd.DataFrame(rows, columns=["sweep", "cluster_id", "removed", "kept", "cluster", "wto_max"])


def _write_type(result: TypeResult, out: Path) -> Dict[str, str]:
    name = slug(result.item_type)
    files: Dict[str, str] = {}

    def put(key: str, filename: str, text: str) -> None:
        atomic_write_text(out / filename, text)
        files[key] = filename

    put("final_items", f"final_items_{name}.csv", _csv(pool_to_frame(result.final_items, True)))
    for kind in ("full", "sparse"):
        emb = result.embeddings.get(kind)
        if emb is not None:
            put(
                f"embeddings_{kind}",
                f"embeddings_{name}_{kind}.csv",
                _csv(embeddings_to_frame(emb), float_format="%.17g"),
            )
    put("uva_log", f"uva_log_{name}.csv", _csv(uva_log_frame(result)))
    if result.network_plot is not None:
        put("network_plot", f"network_{name}.svg", result.network_plot.svg)
        put("network_table", f"network_{name}.csv", _csv(result.network_plot.data))
    if result.stability_plot is not None:
        put("stability_plot", f"stability_{name}.svg", result.stability_plot.svg)
        put("stability_table", f"stability_{name}.csv", _csv(result.stability_plot.data))
    return files


def write_result(result: GenieResult, out_dir: PathLike) -> Path:
    """Write every artifact of a run under out_dir; returns the result.json path."""
    out = Path(out_dir)
    files: Dict[str, Dict[str, str]] = {}
    for type_result in result.type_results:
        files[type_result.item_type] = _write_type(type_result, out)
    if result.overall is not None and result.overall.network_plot is not None:
        atomic_write_text(out / "network_overall.svg", result.overall.network_plot.svg)
        atomic_write_text(out / "network_overall.csv", _csv(result.overall.network_plot.data))
        files["overall"] = {"network_plot": "network_overall.svg"}
    if result.overall is not None:
        atomic_write_text(
            out / "final_items_overall.csv", _csv(pool_to_frame(result.overall.final_items, True))
        )

    path = atomic_write_text(out / "result.json", dumps_report(result_to_dict(result, files)))
    logger.info("Wrote run report to %s", path)
    return path


def dumps_report(tree: Dict[str, Any]) -> str:
    return json.dumps(tree, indent=2, sort_keys=False, ensure_ascii=False, allow_nan=False) + "\n"


def write_items(pool: ItemPool, out_dir: PathLike, name: str = "items.csv") -> Path:
    """Items-only output (generate command, or partial pools after a shortfall)."""
    return atomic_write_text(Path(out_dir) / name, _csv(pool_to_frame(pool)))


def write_embedding_table(emb: EmbeddingMatrix, out_dir: PathLike, name: str = "embeddings.csv") -> Path:
    return atomic_write_text(Path(out_dir) / name, _csv(embeddings_to_frame(emb), float_format="%.17g"))
