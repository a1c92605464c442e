"""Item pool validation and tabular I/O."""

from __future__ import annotations

import json
import logging
from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from netscale.core.errors import PoolIOError, PoolValidationError, SchemaError
from netscale.core.types import (
    AttributeSpec,
    EmbeddingKind,
    EmbeddingMatrix,
    Item,
    ItemPool,
    Provenance,
    ValidationReport,
    Violation,
)

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("statement", "attribute", "type", "ID")
COMMUNITY_COLUMN = "EGA_com"


def validate_pool(pool: ItemPool, spec: AttributeSpec) -> ValidationReport:
    """Report every problem with a pool against an attribute spec.

    Never raises. Duplicate statements under distinct ids are warnings,
    the rest are violations.
    """
    report = ValidationReport()

    for item_type, attrs in spec.types.items():
        if len(attrs) < 2:
            report.violations.append(Violation(
                "too_few_attributes",
                f"item type {item_type!r} declares {len(attrs)} attribute(s); at least 2 are required",
            ))
        for attr, count in Counter(attrs).items():
            if count > 1:
                report.violations.append(Violation(
                    "duplicate_attribute",
                    f"attribute {attr!r} is declared {count} times for item type {item_type!r}",
                ))

    id_counts = Counter(item.id for item in pool.items)
    for item_id, count in id_counts.items():
        if count > 1:
            report.violations.append(Violation(
                "duplicate_id", f"id {item_id!r} is used by {count} items", item_id,
            ))

    seen_statements: Dict[str, str] = {}
    for item in pool.items:
        statement = item.statement.strip()
        if not statement:
            report.violations.append(Violation(
                "empty_statement", f"item {item.id!r} has an empty statement", item.id,
            ))
        elif statement in seen_statements:
            report.warnings.append(Violation(
                "duplicate_statement",
                f"item {item.id!r} repeats the statement of item {seen_statements[statement]!r}",
                item.id,
            ))
        else:
            seen_statements[statement] = item.id

        item_type = item.item_type.strip()
        if item_type not in spec.types:
            report.violations.append(Violation(
                "unknown_type", f"item {item.id!r} has unknown type {item.item_type!r}", item.id,
            ))
        elif item.attribute.strip() not in spec.types[item_type]:
            report.violations.append(Violation(
                "unknown_attribute",
                f"item {item.id!r} has attribute {item.attribute!r}, "
                f"not declared for type {item_type!r}",
                item.id,
            ))

    return report


def _read_table(path: Path) -> pd.DataFrame:
    try:
        if path.suffix.lower() == ".json":
            with path.open(encoding="utf-8") as fh:
                records = json.load(fh)
            if not isinstance(records, list):
                raise SchemaError(f"{path}: expected a JSON array of item objects")
            if not records:
                raise SchemaError(f"{path}: item table is empty")
            return pd.DataFrame.from_records(records).astype(str)
        return pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except SchemaError:
        raise
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: item table is empty (no header row)") from None
    except (OSError, UnicodeDecodeError, json.JSONDecodeError, pd.errors.ParserError) as exc:
        raise PoolIOError(f"cannot read item table {path}: {exc}") from exc


def _community(value: object) -> Optional[int]:
    """Parse an EGA_com cell; blank means unset. Raises ValueError for non-integers."""
    text = str(value).strip()
    if text.lower() in ("", "nan", "none"):
        return None
    number = float(text)
    if not number.is_integer():
        raise ValueError(text)
    return int(number)


def load_pool(
    source: Union[str, Path],
    spec: Optional[AttributeSpec] = None,
    provenance: Provenance | str = Provenance.USER_SUPPLIED,
) -> ItemPool:
    """Load an item pool from CSV or JSON.

    Header columns statement, attribute, type and ID are matched
    case-insensitively in any order; extra columns are ignored.
    When spec is omitted it is inferred from the file.

    Raises:
        SchemaError: empty table or missing required column
        PoolIOError: file unreadable
        PoolValidationError: the loaded pool fails validate_pool
    """
    path = Path(source)
    frame = _read_table(path)

    lookup = {str(c).strip().lower(): c for c in frame.columns}
    columns = {}
    for name in REQUIRED_COLUMNS:
        if name.lower() not in lookup:
            raise SchemaError(f"{path}: missing required column {name!r}")
        columns[name] = lookup[name.lower()]
    community_col = lookup.get(COMMUNITY_COLUMN.lower())

    if frame.empty:
        raise SchemaError(f"{path}: item table has a header but no rows")

    items: List[Item] = []
    bad_rows = ValidationReport()
    for position, (_, row) in enumerate(frame.iterrows(), start=1):
        item_id = str(row[columns["ID"]]).strip()
        community = None
        if community_col is not None:
            try:
                community = _community(row[community_col])
            except ValueError:
                bad_rows.violations.append(Violation(
                    "bad_community",
                    f"row {position}: {COMMUNITY_COLUMN} value {row[community_col]!r} is not an integer",
                    item_id,
                ))
        items.append(Item(
            id=item_id,
            statement=str(row[columns["statement"]]).strip(),
            attribute=str(row[columns["attribute"]]).strip(),
            item_type=str(row[columns["type"]]).strip(),
            ega_community=community,
        ))
    if bad_rows.violations:
        raise PoolValidationError(bad_rows)

    pool = ItemPool(items, provenance)
    report = validate_pool(pool, spec or AttributeSpec.from_pool(pool))
    for warning in report.warnings:
        logger.warning("%s: %s", path, warning.message)
    if report.violations:
        raise PoolValidationError(report)

    logger.info("Loaded %d items across %d type(s) from %s", len(pool), len(pool.types), path)
    return pool


def pool_to_frame(pool: ItemPool, include_community: bool = False) -> pd.DataFrame:
    """Four-column table (ID, statement, attribute, type), plus EGA_com on request."""
    data = {
        "ID": [i.id for i in pool.items],
        "statement": [i.statement for i in pool.items],
        "attribute": [i.attribute for i in pool.items],
        "type": [i.item_type for i in pool.items],
    }
    if include_community:
        data[COMMUNITY_COLUMN] = [
            "" if i.ega_community is None else str(i.ega_community) for i in pool.items
        ]
    return pd.DataFrame(data, columns=list(data))


def write_pool(pool: ItemPool, target: Union[str, Path], include_community: bool = False) -> Path:
    """Write a pool as CSV or JSON (chosen by suffix)."""
    path = Path(target)
    frame = pool_to_frame(pool, include_community)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix.lower() == ".json":
            path.write_text(
                json.dumps(frame.to_dict(orient="records"), ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )
        else:
            frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    except OSError as exc:
        raise PoolIOError(f"cannot write item table {path}: {exc}") from exc
    return path


def load_embeddings(source: Union[str, Path], kind: str = "full") -> EmbeddingMatrix:
    """Read an embedding CSV: one column per item id, one row per dimension.

    Raises:
        SchemaError: no columns, no rows or non-numeric values
        PoolIOError: file unreadable
    """
    path = Path(source)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: embedding table is empty") from None
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise PoolIOError(f"cannot read embedding table {path}: {exc}") from exc
    if frame.empty or not len(frame.columns):
        raise SchemaError(f"{path}: embedding table has no rows")
    try:
        values = frame.apply(pd.to_numeric, errors="raise").to_numpy(dtype=float)
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric embedding value ({exc})") from None
    ids = [str(c).strip() for c in frame.columns]
    logger.info("Loaded %d x %d embeddings from %s", values.shape[0], values.shape[1], path)
    return EmbeddingMatrix(values, ids, EmbeddingKind(kind))


def embeddings_to_frame(emb: EmbeddingMatrix) -> pd.DataFrame:
    return pd.DataFrame(emb.values, columns=list(emb.item_ids))


def write_embeddings(emb: EmbeddingMatrix, target: Union[str, Path]) -> Path:
    """Write embeddings in the layout load_embeddings reads, full float precision."""
    path = Path(target)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        embeddings_to_frame(emb).to_csv(
            path, index=False, float_format="%.17g", encoding="utf-8", lineterminator="\n"
        )
    except OSError as exc:
        raise PoolIOError(f"cannot write embedding table {path}: {exc}") from exc
    return path
