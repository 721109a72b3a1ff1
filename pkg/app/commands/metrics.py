"""metrics: regularity measurements on a stored field."""
from __future__ import annotations

import logging
from pathlib import Path

from app.commands.context import RunContext
from app.commands.schemas import MetricsConfig
from app.services.export import read_field, write_rows
from app.services.grid import discrete_gradient
from app.services.integrands import DoublePhase, IntegrandSpec
from app.services.regularity import fit_caccioppoli, holder_exponent
from app.services.threshold import classify

logger = logging.getLogger(__name__)


def run(config: MetricsConfig, ctx: RunContext) -> list[Path]:
    growth = config.growth
    fld = read_field(config.field)
    gradients = discrete_gradient(fld)
    spec = IntegrandSpec(family=DoublePhase(p=growth.p, q=growth.q), mu=config.mu)
    probe = config.metrics_probe
    holder = holder_exponent(gradients, probe.center, probe.radii)
    fit = fit_caccioppoli(gradients, spec, growth.p, growth.q, probe.offsets)
    regime = classify(growth).regime
    logger.info("%s (m=%d): holder=%.4f s_order=%.4f regime=%s",
                config.field.name, fld.grid.m, holder.exponent, fit.s_order, regime.value)
    row = {
        "p": growth.p,
        "q": growth.q,
        "alpha": growth.alpha,
        "regime": regime.value,
        "s_order": fit.s_order,
        "C": fit.C,
        "holder_exponent": holder.exponent,
        "fit_quality": holder.fit_quality,
    }
    return [write_rows(ctx.out_dir / "metrics.csv", "metrics", [row])]
