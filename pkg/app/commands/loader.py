"""YAML config loading."""
from __future__ import annotations

from pathlib import Path
from typing import TypeVar

import yaml
from pydantic import BaseModel

from app.services.errors import ParameterError

Model = TypeVar("Model", bound=BaseModel)


def load_config(path: Path | str, model: type[Model]) -> Model:
    """Parse ``path`` into ``model``; relative file references resolve against the config's directory."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParameterError(f"{path}: not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParameterError(f"{path}: expected a mapping at the top level")
    config = model.model_validate(raw)

    updates = {
        name: path.parent / value
        for name, value in config
        if isinstance(value, Path) and not value.is_absolute()
    }
    return config.model_copy(update=updates) if updates else config
