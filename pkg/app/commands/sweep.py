"""sweep: solve the double-phase problem for each q and measure regularity.

Points are independent and may be solved on a thread pool; rows are written
by the caller in q order. A failed solve becomes a ``converged=false`` row;
a failed regularity fit keeps the solver verdict and leaves the metric columns
NaN. Either way the sweep carries on.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from app.commands.context import RunContext
from app.commands.schemas import SweepConfig, boundary_field
from app.services.export import write_field, write_history, write_rows, write_series
from app.services.grid import discrete_gradient, make_grid
from app.services.integrands import DoublePhase, IntegrandSpec, ghost_regularize
from app.services.plots import line_chart
from app.services.regularity import fit_caccioppoli, holder_exponent
from app.services.solver import SolveResult, ghost_continuation

logger = logging.getLogger(__name__)

_NAN_METRICS = {"holder_exponent": math.nan, "holder_fit": math.nan, "s_order": math.nan,
                "C": math.nan, "residual": math.nan}


@dataclass(frozen=True)
class SweepPoint:
    q: float
    row: dict[str, float | int | bool]
    result: SolveResult | None


def solve_point(config: SweepConfig, q: float) -> SweepPoint:
    grid = make_grid(config.grid.m)
    spec = IntegrandSpec(family=DoublePhase(p=config.sweep.p, q=q))
    try:
        result = ghost_continuation(spec, config.coefficient, None, grid,
                                    boundary_field(config.boundary, grid), config.solver)
    except ValueError as exc:
        logger.warning("q=%g: solve failed: %s", q, exc)
        row = {"q": q, "converged": False, "iterations": 0, "energy": math.nan, **_NAN_METRICS}
        return SweepPoint(q, row, None)

    row = {"q": q, "converged": result.converged, "iterations": result.iterations,
           "energy": result.energy, **_NAN_METRICS}
    probe = config.metrics_probe
    try:
        gradients = discrete_gradient(result.field)
        holder = holder_exponent(gradients, probe.center, probe.radii)
        fit = fit_caccioppoli(gradients, ghost_regularize(spec, *config.solver.target),
                              config.sweep.p, q, probe.offsets)
    except ValueError as exc:
        logger.warning("q=%g: regularity fit failed: %s", q, exc)
        return SweepPoint(q, row, result)

    row.update(holder_exponent=holder.exponent, holder_fit=holder.fit_quality,
               s_order=fit.s_order, C=fit.C, residual=fit.residual)
    logger.info("q=%g: converged=%s iterations=%d holder=%.4f s_order=%.4f",
                q, result.converged, result.iterations, holder.exponent, fit.s_order)
    return SweepPoint(q, row, result)


def _side_mean(qs: list[float], values: list[float], below: bool, q_star: float) -> float:
    picked = [v for q, v in zip(qs, values) if (q < q_star) == below and math.isfinite(v)]
    return float(np.mean(picked)) if picked else math.nan


def run(config: SweepConfig, ctx: RunContext) -> list[Path]:
    qs = config.sweep.q
    q_star = config.critical_q
    logger.info("sweep p=%g alpha=%g n=%d over %d q values, q*=%g, m=%d",
                config.sweep.p, config.alpha, config.sweep.n, len(qs), q_star, config.grid.m)
    with ThreadPoolExecutor(max_workers=ctx.threads) as pool:
        points = list(pool.map(lambda q: solve_point(config, q), qs))

    rows = [pt.row for pt in points]
    holder = [float(r["holder_exponent"]) for r in rows]
    s_order = [float(r["s_order"]) for r in rows]
    written = [
        write_rows(ctx.out_dir / "sweep.csv", "sweep", rows),
        write_series(ctx.out_dir / "holder.dat", qs, holder),
        write_series(ctx.out_dir / "s_order.dat", qs, s_order),
    ]
    logger.info("mean holder exponent: %.4f below q*, %.4f above",
                _side_mean(qs, holder, True, q_star), _side_mean(qs, holder, False, q_star))

    if config.plot.svg:
        svg = line_chart(
            f"double phase p={config.sweep.p:g}, alpha={config.alpha:g}, n={config.sweep.n}",
            "q",
            {"holder exponent": (qs, holder), "s_order": (qs, s_order)},
            marker_x=q_star,
        )
        out = ctx.out_dir / "sweep.svg"
        out.write_text(svg, encoding="utf-8")
        written.append(out)

    if config.save_fields:
        fields_dir = ctx.out_dir / "fields"
        fields_dir.mkdir(exist_ok=True)
        for pt in points:
            if pt.result is None:
                continue
            written.append(write_field(fields_dir / f"field_q{pt.q:g}.csv", pt.result.field))
            written.append(write_history(fields_dir / f"history_q{pt.q:g}.csv",
                                         pt.result.energy_history, pt.result.grad_norm_history))
    return written
