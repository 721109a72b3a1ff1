"""Descent solver for the discretized energy, ghost continuation and gradient splitting."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field, field_validator

from app.observability import metrics
from app.services.errors import ParameterError, SingularityError
from app.services.grid import (
    DiscreteField,
    Grid,
    discrete_gradient,
    gradient_operator,
    harmonic_extension,
)
from app.services.integrands import (
    CoefficientField,
    IntegrandSpec,
    coefficient_values,
    density,
    density_gradient,
    ghost_regularize,
)

__all__: list[str] = [
    "MAX_BACKTRACKS",
    "SolveConfig",
    "StageRecord",
    "SolveResult",
    "Band",
    "SplitBounds",
    "DiscreteEnergy",
    "assemble_objective_gradient",
    "minimize",
    "ghost_continuation",
    "split_gradient_bounds",
]

logger = logging.getLogger(__name__)

MAX_BACKTRACKS = 60
_MIN_STEP, _MAX_STEP = 1e-12, 1e12


class SolveConfig(BaseModel):
    tol_grad: float = Field(default=1e-7, gt=0)
    max_iters: int = Field(default=2000, ge=0)
    armijo_c: float = Field(default=1e-4, gt=0, lt=1)
    backtrack_factor: float = Field(default=0.5, gt=0, lt=1)
    continuation: list[tuple[float, float]] = Field(default_factory=lambda: [(0.0, 0.0)])
    # intermediate stages stop at stage_tol_factor * max(eps, mu), never below tol_grad
    stage_tol_factor: float = Field(default=1e-3, gt=0)

    model_config = {"extra": "forbid", "frozen": True}

    @field_validator("continuation")
    @classmethod
    def check_schedule(cls, v: list[tuple[float, float]]) -> list[tuple[float, float]]:
        # (eps, mu) pairs, strictly decreasing in lexicographic order
        if not v:
            raise ParameterError("continuation schedule must not be empty")
        for eps, mu in v:
            if eps < 0 or mu < 0:
                raise ParameterError(f"continuation pair ({eps}, {mu}) must be nonnegative")
        for prev, nxt in zip(v, v[1:]):
            if not tuple(nxt) < tuple(prev):
                raise ParameterError(f"continuation must decrease strictly: {prev} then {nxt}")
        return v

    @property
    def target(self) -> tuple[float, float]:
        return self.continuation[-1]

    def stage_tol(self, index: int) -> float:
        """Gradient tolerance of stage ``index``; only the last stage is held to tol_grad."""
        if index == len(self.continuation) - 1:
            return self.tol_grad
        eps, mu = self.continuation[index]
        return max(self.tol_grad, self.stage_tol_factor * max(eps, mu))


@dataclass(frozen=True)
class StageRecord:
    eps: float
    mu: float
    energy: float
    iterations: int
    converged: bool
    aborted: bool = False
    start: int = 0  # index of the stage's first entry in energy_history
    tol: float = 0.0
    values: NDArray[np.float64] | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SolveResult:
    field: DiscreteField
    energy_history: list[float]
    grad_norm_history: list[float]
    grad_norm: float
    iterations: int
    converged: bool
    per_stage: list[StageRecord] = field(default_factory=list)

    @property
    def energy(self) -> float:
        return self.energy_history[-1]

    def stage_histories(self) -> list[list[float]]:
        bounds = [rec.start for rec in self.per_stage] + [len(self.energy_history)]
        return [self.energy_history[lo:hi] for lo, hi in zip(bounds, bounds[1:])]


class DiscreteEnergy:
    """The quadrature energy of one integrand on one grid, as a function of nodal values."""

    def __init__(self, spec: IntegrandSpec, coeff_a: CoefficientField | None,
                 coeff_b: CoefficientField | None, grid: Grid):
        centers = grid.cell_centers()
        self.spec = spec
        self.grid = grid
        self.a_vals, self.b_vals = coefficient_values(spec, coeff_a, coeff_b, centers)
        self.operator = gradient_operator(grid)
        self.interior = ~grid.boundary_mask()
        self._weight = grid.h**2

    def cell_gradients(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        m = self.grid.m
        flat = self.operator @ values.ravel()
        return np.stack([flat[: m * m].reshape(m, m), flat[m * m:].reshape(m, m)], axis=-1)

    def energy(self, values: NDArray[np.float64]) -> float:
        dens = density(self.spec, self.a_vals, self.b_vals, self.cell_gradients(values))
        return math.fsum((self._weight * dens).ravel())

    def gradient(self, values: NDArray[np.float64]) -> NDArray[np.float64]:
        flux = self._weight * density_gradient(self.spec, self.a_vals, self.b_vals, self.cell_gradients(values))
        stacked = np.concatenate([flux[..., 0].ravel(), flux[..., 1].ravel()])
        grad = (self.operator.T @ stacked).reshape(values.shape)
        return np.where(self.interior, grad, 0.0)


def assemble_objective_gradient(spec: IntegrandSpec, coeff_a: CoefficientField | None,
                                coeff_b: CoefficientField | None, fld: DiscreteField) -> DiscreteField:
    """Derivative of the quadrature energy with respect to interior nodal values; zero on the boundary."""
    energy = DiscreteEnergy(spec, coeff_a, coeff_b, fld.grid)
    return fld.with_values(energy.gradient(fld.values))


@dataclass
class _StageOutcome:
    values: NDArray[np.float64]
    energies: list[float]
    grad_norms: list[float]
    iterations: int
    converged: bool
    aborted: bool
    step: float


def _descend(energy: DiscreteEnergy, start: NDArray[np.float64], config: SolveConfig,
             tol: float, step: float = 1.0) -> _StageOutcome:
    """Steepest descent with Armijo backtracking from a Barzilai-Borwein trial step.

    ``step`` is the first trial step; the outcome carries the last BB step so
    a warm-started stage can resume from it.
    """
    u = start.copy()
    e = energy.energy(u)
    g = energy.gradient(u)
    gnorm = float(np.max(np.abs(g)))
    energies, grad_norms = [e], [gnorm]
    iterations = 0
    while gnorm > tol and iterations < config.max_iters:
        slope = float(np.vdot(g, g))
        trial = step
        for _ in range(MAX_BACKTRACKS):
            candidate = u - trial * g
            e_new = energy.energy(candidate)
            if e_new <= e - config.armijo_c * trial * slope:
                break
            trial *= config.backtrack_factor
        else:
            metrics.LINE_SEARCH_FAILURES.labels(energy.spec.kind).inc()
            logger.warning(
                "line search failed after %d backtracks (energy=%.12g, grad_norm=%.3e, iteration=%d)",
                MAX_BACKTRACKS, e, gnorm, iterations,
            )
            return _StageOutcome(u, energies, grad_norms, iterations, False, True, step)

        g_new = energy.gradient(candidate)
        s = candidate - u
        y = g_new - g
        sy = float(np.vdot(s, y))
        step = float(np.clip(np.vdot(s, s) / sy, _MIN_STEP, _MAX_STEP)) if sy > 0 else trial
        u, e, g = candidate, e_new, g_new
        gnorm = float(np.max(np.abs(g)))
        energies.append(e)
        grad_norms.append(gnorm)
        iterations += 1

    metrics.SOLVE_ITERATIONS.labels(energy.spec.kind).inc(iterations)
    return _StageOutcome(u, energies, grad_norms, iterations, gnorm <= tol, False, step)


def _start_values(boundary: DiscreteField, initial: DiscreteField | None) -> NDArray[np.float64]:
    if initial is None:
        return harmonic_extension(boundary).values
    if initial.grid != boundary.grid:
        raise ParameterError("initial field and boundary data live on different grids")
    mask = boundary.boundary_mask
    return np.where(mask, boundary.values, initial.values)


def minimize(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
             grid: Grid, boundary: DiscreteField, config: SolveConfig,
             initial: DiscreteField | None = None) -> SolveResult:
    """Minimize the discretized energy at the config's target regularization.

    Starts from ``initial`` (boundary values re-imposed) or from the discrete
    harmonic extension of the boundary data. Non-convergence is reported in
    the result, not raised.
    """
    if boundary.grid != grid:
        raise ParameterError("boundary data does not live on the solve grid")
    eps, mu = config.target
    target = ghost_regularize(spec, eps, mu)
    started = time.perf_counter()
    metrics.SOLVES.labels(spec.kind).inc()
    outcome = _descend(DiscreteEnergy(target, coeff_a, coeff_b, grid), _start_values(boundary, initial),
                       config, config.tol_grad)
    metrics.SOLVE_DURATION.labels(spec.kind).observe(time.perf_counter() - started)
    logger.info(
        "solve %s m=%d eps=%g mu=%g: %d iterations, energy=%.10g, converged=%s",
        spec.kind, grid.m, eps, mu, outcome.iterations, outcome.energies[-1], outcome.converged,
    )
    stage = StageRecord(eps, mu, outcome.energies[-1], outcome.iterations, outcome.converged, outcome.aborted,
                        0, config.tol_grad, outcome.values)
    return SolveResult(
        field=boundary.with_values(outcome.values),
        energy_history=outcome.energies,
        grad_norm_history=outcome.grad_norms,
        grad_norm=outcome.grad_norms[-1],
        iterations=outcome.iterations,
        converged=outcome.converged,
        per_stage=[stage],
    )


def ghost_continuation(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
                       grid: Grid, boundary: DiscreteField, config: SolveConfig) -> SolveResult:
    """Run one descent per (eps, mu) stage, warm-starting each from the previous field.

    Intermediate stages stop at their looser ``config.stage_tol``; only the
    last stage must reach ``tol_grad``. Each stage also resumes from the
    previous stage's step length. A failed stage (line-search abort or a
    singular gradient) ends the schedule; the stages run so far are returned.
    """
    if boundary.grid != grid:
        raise ParameterError("boundary data does not live on the solve grid")
    values = harmonic_extension(boundary).values
    energies: list[float] = []
    grad_norms: list[float] = []
    stages: list[StageRecord] = []
    total_iterations = 0
    converged = False
    step = 1.0
    started = time.perf_counter()
    metrics.SOLVES.labels(spec.kind).inc()
    for index, (eps, mu) in enumerate(config.continuation):
        stage_spec = ghost_regularize(spec, eps, mu)
        tol = config.stage_tol(index)
        try:
            outcome = _descend(DiscreteEnergy(stage_spec, coeff_a, coeff_b, grid), values, config, tol, step)
        except SingularityError as exc:
            metrics.STAGE_ABORTS.labels(spec.kind).inc()
            logger.warning("stage eps=%g mu=%g aborted: %s", eps, mu, exc)
            converged = False
            break
        stages.append(StageRecord(eps, mu, outcome.energies[-1], outcome.iterations, outcome.converged,
                                  outcome.aborted, len(energies), tol, outcome.values))
        energies.extend(outcome.energies)
        grad_norms.extend(outcome.grad_norms)
        total_iterations += outcome.iterations
        values = outcome.values
        step = outcome.step
        converged = outcome.converged
        logger.info("stage eps=%g mu=%g tol=%.1e: %d iterations, energy=%.10g, converged=%s",
                    eps, mu, tol, outcome.iterations, outcome.energies[-1], outcome.converged)
        if outcome.aborted:
            metrics.STAGE_ABORTS.labels(spec.kind).inc()
            logger.warning("stage eps=%g mu=%g aborted; skipping remaining stages", eps, mu)
            break
    metrics.SOLVE_DURATION.labels(spec.kind).observe(time.perf_counter() - started)

    if len(stages) < len(config.continuation):
        converged = False
    if not energies:
        # the first stage already failed: report the starting field
        start_energy = DiscreteEnergy(ghost_regularize(spec, *config.continuation[0]), coeff_a, coeff_b, grid)
        energies = [start_energy.energy(values)]
        grad_norms = [math.nan]
    return SolveResult(
        field=boundary.with_values(values),
        energy_history=energies,
        grad_norm_history=grad_norms,
        grad_norm=grad_norms[-1],
        iterations=total_iterations,
        converged=converged,
        per_stage=stages,
    )


# -----------------------------------------------------------------------------
# Gradient splitting
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Band:
    lower: float
    upper: float  # math.inf for the last band
    cells: int
    energy: float
    share: float
    max_gradient: float


@dataclass(frozen=True)
class SplitBounds:
    thresholds: list[float]
    bands: list[Band]
    total_energy: float

    @property
    def total_cells(self) -> int:
        return sum(band.cells for band in self.bands)


def split_gradient_bounds(spec: IntegrandSpec, coeff_a: CoefficientField | None,
                          coeff_b: CoefficientField | None, fld: DiscreteField,
                          thresholds: Sequence[float]) -> SplitBounds:
    """Partition cells into bands [t_k, t_{k+1}) of |Du| (the last band is open) and report each band's energy."""
    levels = [float(t) for t in thresholds]
    if not levels or levels[0] != 0:
        raise ParameterError("thresholds must start at 0")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ParameterError("thresholds must be strictly increasing")

    grid = fld.grid
    centers = grid.cell_centers()
    grads = discrete_gradient(fld).values
    a_vals, b_vals = coefficient_values(spec, coeff_a, coeff_b, centers)
    dens = grid.h**2 * density(spec, a_vals, b_vals, grads)
    mags = np.hypot(grads[..., 0], grads[..., 1])
    band_index = np.searchsorted(np.asarray(levels), mags, side="right") - 1
    total = math.fsum(dens.ravel())

    bands = []
    uppers = levels[1:] + [math.inf]
    for k, (lo, hi) in enumerate(zip(levels, uppers)):
        members = band_index == k
        energy = math.fsum(dens[members])
        bands.append(Band(
            lower=lo,
            upper=hi,
            cells=int(members.sum()),
            energy=energy,
            share=energy / total if total > 0 else 0.0,
            max_gradient=float(mags[members].max()) if members.any() else 0.0,
        ))
    return SplitBounds(levels, bands, total)
