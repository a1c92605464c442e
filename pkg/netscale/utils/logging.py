"""Logging and audit trail utilities."""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional
import logging
import sys
import threading


_SECRETS: set = set()
_SECRETS_LOCK = threading.Lock()


def register_secret(secret: Optional[str]) -> None:
    """Register a secret string so log records never render it."""
    if secret and len(secret) >= 4:
        with _SECRETS_LOCK:
            _SECRETS.add(secret)


def redact(text: str, secrets: Optional[Iterable[str]] = None) -> str:
    """Replace every registered (or given) secret in text with '***'."""
    with _SECRETS_LOCK:
        pool = set(_SECRETS)
    if secrets:
        pool.update(s for s in secrets if s)
    for secret in sorted(pool, key=len, reverse=True):
        text = text.replace(secret, "***")
    return text


class SecretRedactingFilter(logging.Filter):
    """Scrub registered API keys from log records before they are emitted."""

    def filter(self, record: logging.LogRecord) -> bool:
        message = record.getMessage()
        cleaned = redact(message)
        if cleaned != message:
            record.msg = cleaned
            record.args = None
        return True


def setup_logger(name: str = "netscale", level: int = logging.INFO) -> logging.Logger:
    """Setup a logger with standard formatting.

    Args:
        name: Logger name
        level: Logging level

    Returns:
        Configured logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Console handler (stderr keeps stdout clean for `chat` output)
    if not any(getattr(h, "_netscale", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler._netscale = True  # type: ignore[attr-defined]
        handler.setFormatter(
            logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        )
        handler.addFilter(SecretRedactingFilter())
        logger.addHandler(handler)

    for handler in logger.handlers:
        handler.setLevel(level)
    return logger


@dataclass
class StageRecord:
    """Record of a single pipeline stage for one item type."""
    item_type: str
    stage: str
    n_before: int
    n_after: int
    detail: Dict[str, Any] = field(default_factory=dict)


@dataclass
class AuditTrail:
    """Complete audit trail of a reduction run."""
    stages: List[StageRecord] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add_stage(self, record: StageRecord) -> None:
        """Add a stage record to the trail."""
        with self._lock:
            self.stages.append(record)

    def for_type(self, item_type: str) -> List[StageRecord]:
        """Stage records belonging to one item type, in insertion order."""
        return [s for s in self.stages if s.item_type == item_type]

    def to_dict(self, type_order: Optional[List[str]] = None) -> Dict[str, Any]:
        """Convert to dictionary for serialization.

        Types run concurrently, so records are regrouped by type_order to keep
        the serialized trail independent of thread scheduling.
        """
        stages = self.stages
        if type_order is not None:
            rank = {t: i for i, t in enumerate(type_order)}
            stages = sorted(
                enumerate(stages), key=lambda p: (rank.get(p[1].item_type, len(rank)), p[0])
            )
            stages = [s for _, s in stages]
        return {
            "stages": [
                {
                    "item_type": s.item_type,
                    "stage": s.stage,
                    "n_before": s.n_before,
                    "n_after": s.n_after,
                    **({"detail": s.detail} if s.detail else {}),
                }
                for s in stages
            ],
            "metadata": self.metadata,
        }

    def summary(self) -> str:
        """Generate human-readable summary."""
        lines = ["Reduction Audit Trail", "=" * 50]

        for stage in self.stages:
            lines.append(f"[{stage.item_type}] {stage.stage}: {stage.n_before} -> {stage.n_after}")
            for key, value in stage.detail.items():
                lines.append(f"  → {key}={value}")

        return "\n".join(lines)
