"""Core data types for netscale."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from netscale.core.errors import InputError


class Provenance(str, Enum):
    """Where the items of a pool came from."""
    GENERATED = "generated"
    USER_SUPPLIED = "user-supplied"


class EmbeddingKind(str, Enum):
    """Full embeddings or their sparsified variant."""
    FULL = "full"
    SPARSE = "sparse"


class NetworkMethod(str, Enum):
    """Network estimation method."""
    GLASSO = "glasso"
    TMFG = "tmfg"


@dataclass(frozen=True)
class Item:
    """A single candidate scale item."""
    id: str
    statement: str
    attribute: str
    item_type: str
    ega_community: Optional[int] = None

    def with_community(self, label: Optional[int]) -> "Item":
        return replace(self, ega_community=label)


@dataclass(frozen=True)
class AttributeSpec:
    """Ordered mapping item_type -> attribute labels.

    Construction never raises on short or duplicated attribute lists;
    validate_pool reports those so every problem surfaces at once.
    """
    types: Mapping[str, Tuple[str, ...]]

    def __init__(self, types: Mapping[str, Sequence[str]]):
        object.__setattr__(
            self,
            "types",
            {str(t).strip(): tuple(str(a).strip() for a in attrs) for t, attrs in types.items()},
        )

    @property
    def type_names(self) -> List[str]:
        return list(self.types)

    def attributes(self, item_type: str) -> Tuple[str, ...]:
        try:
            return self.types[item_type]
        except KeyError:
            raise InputError(f"unknown item type {item_type!r}") from None

    @classmethod
    def from_pool(cls, pool: "ItemPool") -> "AttributeSpec":
        """Infer a spec from the attributes a pool actually uses, in first-seen order."""
        types: Dict[str, List[str]] = {}
        for item in pool.items:
            attrs = types.setdefault(item.item_type, [])
            if item.attribute not in attrs:
                attrs.append(item.attribute)
        return cls(types)

    def to_dict(self) -> Dict[str, List[str]]:
        return {t: list(a) for t, a in self.types.items()}


@dataclass(frozen=True)
class ItemPool:
    """Ordered, immutable collection of items."""
    items: Tuple[Item, ...]
    provenance: Provenance = Provenance.USER_SUPPLIED

    def __init__(self, items: Iterable[Item], provenance: Provenance | str = Provenance.USER_SUPPLIED):
        object.__setattr__(self, "items", tuple(items))
        object.__setattr__(self, "provenance", Provenance(provenance))

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def ids(self) -> List[str]:
        return [item.id for item in self.items]

    @property
    def types(self) -> List[str]:
        """Item types in first-appearance order."""
        seen: Dict[str, None] = {}
        for item in self.items:
            seen.setdefault(item.item_type, None)
        return list(seen)

    def of_type(self, item_type: str) -> "ItemPool":
        return ItemPool([i for i in self.items if i.item_type == item_type], self.provenance)

    def subset(self, ids: Iterable[str]) -> "ItemPool":
        """Items whose id is in ids, in pool order."""
        keep = set(ids)
        return ItemPool([i for i in self.items if i.id in keep], self.provenance)

    def with_communities(self, partition: "Partition") -> "ItemPool":
        labels = partition.as_dict()
        return ItemPool([i.with_community(labels.get(i.id)) for i in self.items], self.provenance)

    def labels(self, key: str = "attribute") -> List[str]:
        """Ground-truth labels per item ('attribute' or 'item_type')."""
        return [getattr(i, key) for i in self.items]


@dataclass(frozen=True)
class EmbeddingMatrix:
    """dims x items matrix; columns keyed by item id."""
    values: NDArray[np.float64]
    item_ids: Tuple[str, ...]
    kind: EmbeddingKind = EmbeddingKind.FULL

    def __init__(
        self,
        values: Any,
        item_ids: Sequence[str],
        kind: EmbeddingKind | str = EmbeddingKind.FULL,
    ):
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise InputError(f"embedding matrix must be 2-D, got {arr.ndim}-D")
        ids = tuple(str(i) for i in item_ids)
        if arr.shape[1] != len(ids):
            raise InputError(
                f"embedding matrix has {arr.shape[1]} columns but {len(ids)} item ids"
            )
        if len(set(ids)) != len(ids):
            raise InputError("embedding item ids must be unique")
        if not np.all(np.isfinite(arr)):
            raise InputError("embedding matrix contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "item_ids", ids)
        object.__setattr__(self, "kind", EmbeddingKind(kind))

    @property
    def n_dims(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_items(self) -> int:
        return int(self.values.shape[1])

    def subset(self, ids: Sequence[str]) -> "EmbeddingMatrix":
        """Columns for ids, in the order given."""
        index = {item_id: k for k, item_id in enumerate(self.item_ids)}
        missing = [i for i in ids if i not in index]
        if missing:
            raise InputError(f"embedding matrix has no column for ids: {', '.join(missing)}")
        cols = [index[i] for i in ids]
        return EmbeddingMatrix(self.values[:, cols], list(ids), self.kind)


@dataclass(frozen=True)
class Partition:
    """item id -> community label (>= 1), canonicalized by first appearance."""
    item_ids: Tuple[str, ...]
    labels: Tuple[int, ...]

    def __init__(self, item_ids: Sequence[str], labels: Sequence[Any]):
        if len(item_ids) != len(labels):
            raise InputError("partition needs exactly one label per item")
        mapping: Dict[Any, int] = {}
        canon = []
        for label in labels:
            if label not in mapping:
                mapping[label] = len(mapping) + 1
            canon.append(mapping[label])
        object.__setattr__(self, "item_ids", tuple(str(i) for i in item_ids))
        object.__setattr__(self, "labels", tuple(canon))

    @property
    def n_communities(self) -> int:
        return len(set(self.labels))

    def as_dict(self) -> Dict[str, int]:
        return dict(zip(self.item_ids, self.labels))

    def label_of(self, item_id: str) -> int:
        return self.as_dict()[item_id]

    def restrict(self, ids: Sequence[str]) -> "Partition":
        lookup = self.as_dict()
        return Partition(list(ids), [lookup[i] for i in ids])


@dataclass(frozen=True)
class Violation:
    """One validation finding."""
    kind: str
    message: str
    item_id: Optional[str] = None


@dataclass
class ValidationReport:
    """Violations make a pool invalid; warnings do not."""
    violations: List[Violation] = field(default_factory=list)
    warnings: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return bool(self.violations)

    def kinds(self) -> List[str]:
        return [v.kind for v in self.violations]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "violations": [v.__dict__ for v in self.violations],
            "warnings": [w.__dict__ for w in self.warnings],
        }


@dataclass(frozen=True)
class CorrelationMatrix:
    """p x p symmetric correlation matrix with unit diagonal."""
    values: NDArray[np.float64]
    item_ids: Tuple[str, ...]

    @property
    def p(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class Network:
    """Symmetric weighted adjacency over items, zero diagonal."""
    weights: NDArray[np.float64]
    item_ids: Tuple[str, ...]
    method: NetworkMethod
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def p(self) -> int:
        return int(self.weights.shape[0])

    @property
    def n_edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.weights, k=1)))

    def edges(self) -> List[Tuple[str, str, float]]:
        rows, cols = np.nonzero(np.triu(self.weights, k=1))
        return [
            (self.item_ids[i], self.item_ids[j], float(self.weights[i, j]))
            for i, j in zip(rows, cols)
        ]


@dataclass(frozen=True)
class NmiScore:
    """Normalized mutual information as a percentage in [0, 100]."""
    value: float
    normalization: str = "arithmetic"

    def __float__(self) -> float:
        return self.value

    def __str__(self) -> str:
        return f"{self.value:.2f}%"
