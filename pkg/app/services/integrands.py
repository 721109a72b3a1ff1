"""Convex integrand families, spatial coefficients and their z-derivatives.

Densities are radial in z. Every family is a sum of phases
``coef(x) * g(rho)`` with ``rho = sqrt(|z|^2 + mu^2)`` for shifted phases and
``rho = |z|`` otherwise, so gradients and Hessians follow from the scalar
profile ``g`` and its first two derivatives.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Annotated, Literal, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field, model_validator

from app.services.errors import DegenerateError, DomainError, ParameterError, SingularityError

__all__: list[str] = [
    "PPower",
    "DoublePhase",
    "LogMultiphase",
    "IntegrandSpec",
    "Constant",
    "DistancePower",
    "SmoothedStep",
    "CoefficientField",
    "ZERO",
    "ONE",
    "coefficient_values",
    "density",
    "density_gradient",
    "density_hessian",
    "eval_density",
    "grad_density",
    "hess_density",
    "ellipticity_ratio",
    "ghost_regularize",
    "holder_seminorm",
]

DEGENERACY_TOL = 1e-12

_FROZEN = {"extra": "forbid", "frozen": True, "allow_inf_nan": False}


# -----------------------------------------------------------------------------
# Integrand families
# -----------------------------------------------------------------------------
class PPower(BaseModel):
    kind: Literal["p_power"] = "p_power"
    p: float

    model_config = _FROZEN

    @model_validator(mode="after")
    def check_exponent(self) -> "PPower":
        if not self.p > 1:
            raise ParameterError(f"p_power requires p > 1, got p={self.p}")
        return self


class DoublePhase(BaseModel):
    kind: Literal["double_phase"] = "double_phase"
    p: float
    q: float

    model_config = _FROZEN

    @model_validator(mode="after")
    def check_exponents(self) -> "DoublePhase":
        if not 1 < self.p <= self.q:
            raise ParameterError(f"double_phase requires 1 < p <= q, got p={self.p}, q={self.q}")
        return self


class LogMultiphase(BaseModel):
    kind: Literal["log_multiphase"] = "log_multiphase"
    q: float
    s: float

    model_config = _FROZEN

    @model_validator(mode="after")
    def check_exponents(self) -> "LogMultiphase":
        if not (self.q > 1 and self.s > 1):
            raise ParameterError(f"log_multiphase requires q > 1 and s > 1, got q={self.q}, s={self.s}")
        return self


Family = Annotated[Union[PPower, DoublePhase, LogMultiphase], Field(discriminator="kind")]


class IntegrandSpec(BaseModel):
    """An integrand family plus its regularization (mu shifts |z|, eps lifts coefficients)."""

    family: Family
    mu: float = Field(default=0.0, ge=0)
    eps: float = Field(default=0.0, ge=0)

    model_config = _FROZEN

    @property
    def kind(self) -> str:
        return self.family.kind

    @property
    def p(self) -> float | None:
        return getattr(self.family, "p", None)

    @property
    def q(self) -> float | None:
        return getattr(self.family, "q", None)

    @property
    def s(self) -> float | None:
        return getattr(self.family, "s", None)


# -----------------------------------------------------------------------------
# Coefficient fields on [0, 1]^2
# -----------------------------------------------------------------------------
class Constant(BaseModel):
    kind: Literal["constant"] = "constant"
    c0: float = Field(default=1.0, ge=0)

    model_config = _FROZEN

    @property
    def alpha(self) -> float:
        return 1.0

    def evaluate(self, points: ArrayLike) -> NDArray[np.float64]:
        pts = np.asarray(points, dtype=float)
        return np.full(pts.shape[:-1], self.c0)


class DistancePower(BaseModel):
    """amplitude * dist(x, {x1 = offset})^alpha; its Hölder seminorm is the amplitude."""

    kind: Literal["distance_power"] = "distance_power"
    alpha: float = Field(gt=0, le=1)
    offset: float = 0.5
    amplitude: float = Field(default=1.0, ge=0)

    model_config = _FROZEN

    def evaluate(self, points: ArrayLike) -> NDArray[np.float64]:
        pts = np.asarray(points, dtype=float)
        return self.amplitude * np.abs(pts[..., 0] - self.offset) ** self.alpha


class SmoothedStep(BaseModel):
    """Rises from 0 to amplitude across [center - width/2, center + width/2] with a t^alpha profile."""

    kind: Literal["smoothed_step"] = "smoothed_step"
    alpha: float = Field(gt=0, le=1)
    center: float = 0.5
    width: float = Field(default=0.2, gt=0)
    amplitude: float = Field(default=1.0, ge=0)

    model_config = _FROZEN

    def evaluate(self, points: ArrayLike) -> NDArray[np.float64]:
        pts = np.asarray(points, dtype=float)
        t = np.clip((pts[..., 0] - self.center) / self.width + 0.5, 0.0, 1.0)
        return self.amplitude * t**self.alpha


CoefficientField = Annotated[Union[Constant, DistancePower, SmoothedStep], Field(discriminator="kind")]

ZERO = Constant(c0=0.0)
ONE = Constant(c0=1.0)


def coefficient_values(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
                       points: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Evaluate both coefficients; a missing one is c = 1 for p_power and 0 for a phase weight."""
    default_a = ONE if isinstance(spec.family, PPower) else ZERO
    return (coeff_a or default_a).evaluate(points), (coeff_b or ZERO).evaluate(points)


def holder_seminorm(coeff: CoefficientField, m: int = 32) -> float:
    """Empirical sup |f(x) - f(y)| / |x - y|^alpha over node pairs of an m-grid."""
    ticks = np.arange(m + 1) / m
    x1, x2 = np.meshgrid(ticks, ticks, indexing="ij")
    pts = np.stack([x1.ravel(), x2.ravel()], axis=-1)
    vals = coeff.evaluate(pts)
    dist = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    diff = np.abs(vals[:, None] - vals[None, :])
    off_diag = dist > 0
    return float(np.max(diff[off_diag] / dist[off_diag] ** coeff.alpha))


# -----------------------------------------------------------------------------
# Radial phases
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class _Phase:
    coef: NDArray[np.float64] | float
    exponent: float | None  # None marks the rho*log(1+rho) phase
    shifted: bool

    @property
    def nonsmooth(self) -> bool:
        return self.exponent is not None and self.exponent < 2


def _phases(spec: IntegrandSpec, a_vals: ArrayLike, b_vals: ArrayLike) -> list[_Phase]:
    a = np.asarray(a_vals, dtype=float)
    b = np.asarray(b_vals, dtype=float)
    fam = spec.family
    if isinstance(fam, PPower):
        return [_Phase(a + spec.eps, fam.p, True)]
    if isinstance(fam, DoublePhase):
        return [_Phase(1.0, fam.p, True), _Phase(a + spec.eps, fam.q, True)]
    return [
        _Phase(1.0, None, True),
        _Phase(a + spec.eps, fam.q, False),
        _Phase(b + spec.eps, fam.s, False),
    ]


def _rho(phase: _Phase, r: NDArray[np.float64], mu: float) -> NDArray[np.float64]:
    return np.sqrt(r * r + mu * mu) if phase.shifted else r


def _profile(phase: _Phase, rho: NDArray[np.float64]):
    """Return g, g', g'' and the limit-safe g'/rho for one phase."""
    with np.errstate(divide="ignore", invalid="ignore"):
        if phase.exponent is None:
            g = rho * np.log1p(rho)
            g1 = np.log1p(rho) + rho / (1 + rho)
            g2 = 1 / (1 + rho) + 1 / (1 + rho) ** 2
            g1_over_rho = np.where(rho > 0, g1 / np.where(rho > 0, rho, 1.0), 2.0)
        else:
            k = phase.exponent
            g = rho**k
            g1 = k * rho ** (k - 1)
            g2 = k * (k - 1) * rho ** (k - 2)
            g1_over_rho = k * rho ** (k - 2)
    return g, g1, g2, g1_over_rho


def _check_gradient_smooth(spec: IntegrandSpec, phases: Sequence[_Phase], r: NDArray[np.float64]) -> None:
    if spec.mu == 0 and np.any(r == 0) and any(ph.nonsmooth for ph in phases):
        raise SingularityError("gradient undefined at z = 0 for exponents < 2 without mu-regularization")


def _check_hessian_smooth(spec: IntegrandSpec, phases: Sequence[_Phase], r: NDArray[np.float64]) -> None:
    if not np.any(r == 0):
        return
    if any(ph.nonsmooth and (not ph.shifted or spec.mu == 0) for ph in phases):
        raise SingularityError("Hessian undefined at z = 0 for an unshifted phase with exponent < 2")


# -----------------------------------------------------------------------------
# Vectorized densities: z has shape (..., 2), coefficients broadcast against z[..., 0]
# -----------------------------------------------------------------------------
def density(spec: IntegrandSpec, a_vals: ArrayLike, b_vals: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
    zv = np.asarray(z, dtype=float)
    r = np.hypot(zv[..., 0], zv[..., 1])
    total = np.zeros_like(r)
    for phase in _phases(spec, a_vals, b_vals):
        g, _, _, _ = _profile(phase, _rho(phase, r, spec.mu))
        total = total + phase.coef * g
    return total


def density_gradient(spec: IntegrandSpec, a_vals: ArrayLike, b_vals: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
    zv = np.asarray(z, dtype=float)
    r = np.hypot(zv[..., 0], zv[..., 1])
    phases = _phases(spec, a_vals, b_vals)
    _check_gradient_smooth(spec, phases, r)
    scale = np.zeros_like(r)
    for phase in phases:
        rho = _rho(phase, r, spec.mu)
        _, g1, _, _ = _profile(phase, rho)
        safe = np.where(rho > 0, rho, 1.0)
        scale = scale + phase.coef * np.where(rho > 0, g1 / safe, 0.0)
    return scale[..., None] * zv


def density_hessian(spec: IntegrandSpec, a_vals: ArrayLike, b_vals: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
    zv = np.asarray(z, dtype=float)
    r = np.hypot(zv[..., 0], zv[..., 1])
    phases = _phases(spec, a_vals, b_vals)
    _check_hessian_smooth(spec, phases, r)
    return _hessian_of(phases, spec.mu, zv, r)


def _hessian_of(phases: Sequence[_Phase], mu: float, zv: NDArray[np.float64], r: NDArray[np.float64]):
    outer = zv[..., :, None] * zv[..., None, :]
    eye = np.eye(2)
    hess = np.zeros(zv.shape[:-1] + (2, 2))
    for phase in phases:
        rho = _rho(phase, r, mu)
        _, _, g2, g1_over_rho = _profile(phase, rho)
        safe = np.where(rho > 0, rho, 1.0)
        radial = np.where(rho > 0, (g2 - g1_over_rho) / safe**2, 0.0)
        coef = np.asarray(phase.coef, dtype=float)
        hess = hess + (coef * g1_over_rho)[..., None, None] * eye + (coef * radial)[..., None, None] * outer
    return hess


# -----------------------------------------------------------------------------
# Point operations
# -----------------------------------------------------------------------------
def _point(x: ArrayLike) -> NDArray[np.float64]:
    pt = np.asarray(x, dtype=float)
    if pt.shape != (2,):
        raise DomainError(f"expected a point in the plane, got shape {pt.shape}")
    if not (np.all(pt >= 0) and np.all(pt <= 1)):
        raise DomainError(f"point {tuple(pt)} lies outside the unit square")
    return pt


def _vector(z: ArrayLike) -> NDArray[np.float64]:
    zv = np.asarray(z, dtype=float)
    if zv.shape != (2,) or not np.all(np.isfinite(zv)):
        raise ParameterError(f"expected a finite gradient vector with 2 components, got {z!r}")
    return zv


def eval_density(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
                 x: ArrayLike, z: ArrayLike) -> float:
    """Pointwise energy density.

    For p_power ``coeff_a`` is the multiplicative coefficient c(x); double_phase
    uses it as a(x) and ignores ``coeff_b``; log_multiphase uses both.
    """
    pt, zv = _point(x), _vector(z)
    a, b = coefficient_values(spec, coeff_a, coeff_b, pt)
    return float(density(spec, a, b, zv))


def grad_density(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
                 x: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
    pt, zv = _point(x), _vector(z)
    a, b = coefficient_values(spec, coeff_a, coeff_b, pt)
    return density_gradient(spec, a, b, zv)


def hess_density(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
                 x: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
    pt, zv = _point(x), _vector(z)
    a, b = coefficient_values(spec, coeff_a, coeff_b, pt)
    return density_hessian(spec, a, b, zv)


def ellipticity_ratio(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
                      x: ArrayLike, z: ArrayLike) -> float:
    """Largest Hessian eigenvalue over the smallest eigenvalue of the lowest-growth phase.

    The lowest phase is what remains where the higher-phase coefficients
    vanish, so its smallest eigenvalue is the x-uniform ellipticity lower bound.
    For p_power both eigenvalues come from the same Hessian.
    """
    pt, zv = _point(x), _vector(z)
    a, b = coefficient_values(spec, coeff_a, coeff_b, pt)
    full = density_hessian(spec, a, b, zv)
    lowest = _phases(spec, a, b)[:1]
    base = _hessian_of(lowest, spec.mu, zv, np.hypot(zv[0], zv[1]))
    lam_min = float(np.linalg.eigvalsh(base)[0])
    if lam_min <= DEGENERACY_TOL:
        raise DegenerateError(f"smallest eigenvalue {lam_min:.3e} is not positive at z={tuple(zv)}")
    return float(np.linalg.eigvalsh(full)[-1]) / lam_min


def ghost_regularize(spec: IntegrandSpec, eps: float, mu: float) -> IntegrandSpec:
    """Copy of ``spec`` with the coefficient lift eps and the gradient shift mu set."""
    return IntegrandSpec(family=spec.family, eps=eps, mu=mu)
