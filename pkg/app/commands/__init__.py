"""One module per CLI command; ``COMMANDS`` maps each name to its config model and runner."""
from __future__ import annotations

from pathlib import Path
from typing import Any, Callable, NamedTuple

from pydantic import BaseModel

from app.commands import classify, colimit, metrics, moser, sweep
from app.commands.context import RunContext
from app.commands.schemas import ClassifyConfig, ColimitConfig, MetricsConfig, MoserConfig, SweepConfig

__all__: list[str] = ["COMMANDS", "Command", "RunContext"]


class Command(NamedTuple):
    config_model: type[BaseModel]
    run: Callable[[Any, RunContext], list[Path]]
    help: str


COMMANDS: dict[str, Command] = {
    "classify": Command(ClassifyConfig, classify.run, "classify growth parameters against the threshold"),
    "sweep": Command(SweepConfig, sweep.run, "solve double-phase problems across a q grid"),
    "moser": Command(MoserConfig, moser.run, "iterate the integrability exponent recurrence"),
    "metrics": Command(MetricsConfig, metrics.run, "measure regularity of a stored field"),
    "colimit": Command(ColimitConfig, colimit.run, "validate a claim DAG and glue its payloads"),
}
