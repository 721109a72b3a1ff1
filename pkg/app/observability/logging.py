"""Standard Python logging configuration."""
from __future__ import annotations

import logging
import sys
from pathlib import Path

LEVEL = logging.INFO

_FORMATTER = logging.Formatter(
    fmt='[%(asctime)s] [%(process)d] [%(levelname)s] %(name)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S %z'
)


def setup_logging(level: int | str = LEVEL) -> None:
    """Configure standard Python logging.

    Call **exactly once** at startup; later calls only adjust the level.
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    if getattr(setup_logging, "_configured", False):  # type: ignore[attr-defined]
        return

    # Configure stdout handler
    handler = logging.StreamHandler(sys.stdout)
    handler.setFormatter(_FORMATTER)

    root_logger.handlers.clear()
    root_logger.addHandler(handler)

    setup_logging._configured = True  # type: ignore[attr-defined]


def attach_run_log(path: Path | str) -> logging.Handler:
    """Mirror all records into the run's sidecar log; returns the handler so the caller can detach it."""
    handler = logging.FileHandler(path, mode="w", encoding="utf-8")
    handler.setFormatter(_FORMATTER)
    logging.getLogger().addHandler(handler)
    return handler


def detach_run_log(handler: logging.Handler) -> None:
    logging.getLogger().removeHandler(handler)
    handler.close()
