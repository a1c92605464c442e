"""Offline guard: refuse outbound socket connections inside a block."""

from __future__ import annotations

import contextlib
import logging
import socket
import threading
from dataclasses import dataclass
from typing import Iterator

from netscale.core.errors import OfflineViolation

logger = logging.getLogger(__name__)

_lock = threading.Lock()


@dataclass
class OfflineStats:
    attempts: int = 0


@contextlib.contextmanager
def offline_guard() -> Iterator[OfflineStats]:
    """Patch socket connects so any attempt raises OfflineViolation.

    Yields a counter of refused attempts. Unix-domain sockets are allowed.
    """
    stats = OfflineStats()
    original_connect = socket.socket.connect
    original_connect_ex = socket.socket.connect_ex
    original_create = socket.create_connection

    def _refuse(address: object) -> None:
        stats.attempts += 1
        logger.error("Offline mode: refused connection to %s", address)
        raise OfflineViolation(f"network access attempted while offline: {address}")

    def connect(self: socket.socket, address: object) -> None:
        if self.family == getattr(socket, "AF_UNIX", None):
            return original_connect(self, address)
        _refuse(address)

    def connect_ex(self: socket.socket, address: object) -> int:
        if self.family == getattr(socket, "AF_UNIX", None):
            return original_connect_ex(self, address)
        _refuse(address)
        return 1

    def create_connection(address: object, *args: object, **kwargs: object) -> socket.socket:
        _refuse(address)
        raise AssertionError("unreachable")

    with _lock:
        socket.socket.connect = connect  # type: ignore[method-assign]
        socket.socket.connect_ex = connect_ex  # type: ignore[method-assign]
        socket.create_connection = create_connection  # type: ignore[assignment]
    try:
        yield stats
    finally:
        with _lock:
            socket.socket.connect = original_connect  # type: ignore[method-assign]
            socket.socket.connect_ex = original_connect_ex  # type: ignore[method-assign]
            socket.create_connection = original_create
