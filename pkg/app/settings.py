"""Process-level settings read from the environment (GHOSTLAB_*)."""
from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class LabSettings(BaseSettings):
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    threads: int = Field(default=1, ge=1)  # sweep points solved concurrently
    seed: int = 0
    out_dir: Path = Path("output")

    model_config = SettingsConfigDict(env_prefix="GHOSTLAB_", extra="ignore")


@lru_cache
def get_settings() -> LabSettings:
    return LabSettings()
