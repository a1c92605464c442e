"""Parse model responses into items."""

from __future__ import annotations

import itertools
import logging
import re
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

from netscale.core.errors import ParseError
from netscale.core.types import Item

logger = logging.getLogger(__name__)

LIST_MARKER = re.compile(r"^\s*(?:[-*•]+|\(?\d+[.):]|\(?[a-zA-Z][.)])\s+")
LINE_GRAMMAR = re.compile(r"^(?P<attribute>[^|]+?)\s*\|\s*(?P<statement>.+)$")


@dataclass
class ParseResult:
    items: List[Item] = field(default_factory=list)
    skipped: int = 0


def parse_generated_items(
    response: str,
    item_type: str,
    attributes: Sequence[str],
    next_id: Optional[Iterator[int]] = None,
) -> ParseResult:
    """Turn 'attribute | statement' lines into items.

    Lines not matching the grammar, or naming an attribute outside
    attributes (exact, case-sensitive), are skipped and counted. Blank
    lines are ignored.

    Raises:
        ParseError: no line could be parsed
    """
    counter = next_id if next_id is not None else itertools.count(1)
    allowed = set(attributes)
    result = ParseResult()

    for raw in response.splitlines():
        line = raw.strip()
        if not line:
            continue
        line = LIST_MARKER.sub("", line).strip()
        match = LINE_GRAMMAR.match(line)
        if match is None:
            result.skipped += 1
            continue
        attribute = match.group("attribute").strip().strip("*\"'`").strip()
        statement = match.group("statement").strip().strip("\"").strip()
        if attribute not in allowed or not statement:
            logger.debug("Skipping line with attribute %r for %s", attribute, item_type)
            result.skipped += 1
            continue
        result.items.append(Item(
            id=str(next(counter)),
            statement=statement,
            attribute=attribute,
            item_type=item_type,
        ))

    if not result.items:
        raise ParseError(
            f"no parsable 'attribute | statement' lines for {item_type} "
            f"({result.skipped} line(s) skipped)",
            skipped=result.skipped,
        )
    if result.skipped:
        logger.warning("Skipped %d unparsable line(s) for %s", result.skipped, item_type)
    return result
