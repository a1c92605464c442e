"""Logging, seeding and offline helpers."""

from netscale.utils.logging import AuditTrail, StageRecord, setup_logger
from netscale.utils.math import derive_seed

__all__ = ["setup_logger", "AuditTrail", "StageRecord", "derive_seed"]
