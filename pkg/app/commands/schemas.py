"""Pydantic models for experiment config files, one per command.

Every model forbids unknown keys; the domain models it embeds re-check their
own invariants while the file is parsed.
"""
from __future__ import annotations

import itertools
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, Field, field_validator, model_validator

from app.services.grid import DiscreteField, Grid, field_from_function
from app.services.integrands import DistancePower, SmoothedStep
from app.services.solver import SolveConfig
from app.services.threshold import GrowthParams, critical_exponent

_STRICT = {"extra": "forbid", "allow_inf_nan": False}


# -----------------------------------------------------------------------------
# Shared sections
# -----------------------------------------------------------------------------
class GridSection(BaseModel):
    m: int = Field(ge=4)

    model_config = _STRICT


class Affine(BaseModel):
    kind: Literal["affine"] = "affine"
    c0: float = 0.0
    c1: float = 1.0
    c2: float = 0.0

    model_config = _STRICT

    def __call__(self, x1: NDArray, x2: NDArray) -> NDArray:
        return self.c0 + self.c1 * x1 + self.c2 * x2


class Saddle(BaseModel):
    """x1^2 - x2^2."""

    kind: Literal["saddle"] = "saddle"

    model_config = _STRICT

    def __call__(self, x1: NDArray, x2: NDArray) -> NDArray:
        return x1**2 - x2**2


class RadialPower(BaseModel):
    """|x - center|^exponent."""

    kind: Literal["radial_power"] = "radial_power"
    center: tuple[float, float] = (0.5, 0.5)
    exponent: float = Field(default=1.5, gt=1)

    model_config = _STRICT

    def __call__(self, x1: NDArray, x2: NDArray) -> NDArray:
        return np.hypot(x1 - self.center[0], x2 - self.center[1]) ** self.exponent


BoundaryData = Annotated[Union[Affine, Saddle, RadialPower], Field(discriminator="kind")]


def boundary_field(data: BoundaryData, grid: Grid) -> DiscreteField:
    return field_from_function(grid, data)


class ProbeSection(BaseModel):
    """Where and how regularity is measured on a computed gradient."""

    center: tuple[float, float] = (0.5, 0.5)
    radii: list[float] = Field(default_factory=lambda: [0.25, 0.125, 0.0625, 0.03125])
    offsets: list[tuple[int, int]] = Field(default_factory=lambda: [(1, 0), (2, 0), (3, 0), (4, 0)])

    model_config = _STRICT


# -----------------------------------------------------------------------------
# classify
# -----------------------------------------------------------------------------
class ParameterGrid(BaseModel):
    """Cartesian product of exponent lists; combinations with q < p are skipped."""

    p: list[float]
    q: list[float]
    alpha: list[float]
    n: list[int] = Field(default_factory=lambda: [2])
    family: Literal["power", "double_phase"] = "power"

    model_config = _STRICT

    def expand(self) -> list[GrowthParams]:
        return [
            GrowthParams(p=p, q=q, alpha=alpha, n=n, family=self.family)
            for p, q, alpha, n in itertools.product(self.p, self.q, self.alpha, self.n)
            if q >= p
        ]


class RandomDraws(BaseModel):
    """Uniform draws of (p, q/p, alpha, n), seeded from the command line."""

    count: int = Field(ge=1)
    p: tuple[float, float] = (1.1, 4.0)
    q_over_p: tuple[float, float] = (1.0, 2.0)
    alpha: tuple[float, float] = (0.05, 1.0)
    n: tuple[int, int] = (2, 5)
    family: Literal["power", "double_phase"] = "power"

    model_config = _STRICT

    def draw(self, seed: int) -> list[GrowthParams]:
        rng = np.random.default_rng(seed)
        drawn = []
        for _ in range(self.count):
            p = float(rng.uniform(*self.p))
            q = max(p, p * float(rng.uniform(*self.q_over_p)))
            alpha = float(rng.uniform(*self.alpha))
            n = int(rng.integers(self.n[0], self.n[1] + 1))
            drawn.append(GrowthParams(p=p, q=q, alpha=alpha, n=n, family=self.family))
        return drawn


class ClassifyConfig(BaseModel):
    tuples: list[GrowthParams] = Field(default_factory=list)
    grid: ParameterGrid | None = None
    random_draws: RandomDraws | None = None

    model_config = _STRICT

    @model_validator(mode="after")
    def check_nonempty(self) -> "ClassifyConfig":
        if not self.tuples and (self.grid is None or not self.grid.expand()) and self.random_draws is None:
            raise ValueError("classify needs at least one parameter tuple")
        return self

    def parameters(self, seed: int) -> list[GrowthParams]:
        params = list(self.tuples)
        if self.grid is not None:
            params.extend(self.grid.expand())
        if self.random_draws is not None:
            params.extend(self.random_draws.draw(seed))
        return params


# -----------------------------------------------------------------------------
# sweep
# -----------------------------------------------------------------------------
class SweepSection(BaseModel):
    p: float = Field(gt=1)
    n: int = Field(default=2, ge=2)
    q: list[float] = Field(min_length=2)

    model_config = _STRICT

    @field_validator("q")
    @classmethod
    def check_increasing(cls, v: list[float]) -> list[float]:
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("sweep q values must be strictly increasing")
        return v


class PlotSection(BaseModel):
    svg: bool = False

    model_config = _STRICT


class SweepConfig(BaseModel):
    sweep: SweepSection
    coefficient: Union[DistancePower, SmoothedStep] = Field(discriminator="kind")
    grid: GridSection
    solver: SolveConfig = Field(default_factory=SolveConfig)
    boundary: BoundaryData
    metrics_probe: ProbeSection = Field(default_factory=ProbeSection)
    plot: PlotSection = Field(default_factory=PlotSection)
    save_fields: bool = False

    model_config = _STRICT

    @property
    def alpha(self) -> float:
        return self.coefficient.alpha

    @property
    def critical_q(self) -> float:
        return critical_exponent(self.sweep.p, self.alpha, self.sweep.n)

    @model_validator(mode="after")
    def check_straddle(self) -> "SweepConfig":
        qs = self.sweep.q
        if qs[0] < self.sweep.p:
            raise ValueError(f"sweep q values must be >= p={self.sweep.p}")
        q_star = self.critical_q
        if not qs[0] < q_star < qs[-1]:
            raise ValueError(f"sweep q range [{qs[0]}, {qs[-1]}] does not straddle q*={q_star}")
        return self


# -----------------------------------------------------------------------------
# moser
# -----------------------------------------------------------------------------
class MoserConfig(BaseModel):
    t0: float = Field(default=1.0, ge=1)
    sigma: float = Field(gt=0)
    p: float
    gamma: float  # never derived; always supplied
    q: float
    max_iters: int = Field(default=20, ge=1)
    target: float | None = None

    model_config = _STRICT


# -----------------------------------------------------------------------------
# metrics
# -----------------------------------------------------------------------------
class MetricsConfig(BaseModel):
    field: Path  # field CSV; relative paths resolve against the config file
    growth: GrowthParams
    mu: float = Field(default=0.0, ge=0)
    metrics_probe: ProbeSection = Field(default_factory=ProbeSection)

    model_config = _STRICT


# -----------------------------------------------------------------------------
# colimit
# -----------------------------------------------------------------------------
class CheckerSection(BaseModel):
    kind: Literal["accept_all", "reject_ids", "threshold"] = "accept_all"
    ids: list[str] = Field(default_factory=list)

    model_config = _STRICT


class ColimitConfig(BaseModel):
    dag: Path  # DAG text file; relative paths resolve against the config file
    checker: CheckerSection = Field(default_factory=CheckerSection)

    model_config = _STRICT
