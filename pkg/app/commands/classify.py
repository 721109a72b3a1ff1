"""classify: regime verdicts for a list of growth parameters."""
from __future__ import annotations

import logging
from collections import Counter
from pathlib import Path

from app.commands.context import RunContext
from app.commands.schemas import ClassifyConfig
from app.services.export import write_rows
from app.services.threshold import classify

logger = logging.getLogger(__name__)


def run(config: ClassifyConfig, ctx: RunContext) -> list[Path]:
    rows = []
    for params in config.parameters(ctx.seed):
        verdict = classify(params)
        rows.append({
            "p": params.p,
            "q": params.q,
            "alpha": params.alpha,
            "n": params.n,
            "regime": verdict.regime.value,
            "margin": verdict.margin,
        })
    tally = Counter(row["regime"] for row in rows)
    logger.info("classified %d parameter tuples: %s", len(rows), dict(sorted(tally.items())))
    return [write_rows(ctx.out_dir / "verdicts.csv", "verdicts", rows)]
