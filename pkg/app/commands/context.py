"""Per-run values shared by every command."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class RunContext:
    out_dir: Path
    seed: int = 0
    threads: int = 1
