"""moser: the integrability exponent sequence as a CSV."""
from __future__ import annotations

import logging
from pathlib import Path

from app.commands.context import RunContext
from app.commands.schemas import MoserConfig
from app.services.export import write_rows
from app.services.threshold import moser_sequence

logger = logging.getLogger(__name__)


def run(config: MoserConfig, ctx: RunContext) -> list[Path]:
    seq = moser_sequence(config.t0, config.sigma, config.p, config.gamma, config.q,
                         config.max_iters, config.target)
    logger.info("moser increment=%g diverges=%s steps_to_target=%s",
                seq.increment, seq.diverges, seq.steps_to_target)
    rows = ({"i": i, "t_i": t} for i, t in enumerate(seq.t))
    return [write_rows(ctx.out_dir / "moser.csv", "moser", rows)]
