"""Empirical regularity of computed gradients.

Difference quotients of V_p(Du), fractional Caccioppoli ratios and fits, and
local Hölder exponents from oscillation decay. Balls are axis-aligned squares
on the cell lattice: a cell belongs to a ball when its center does.
"""
from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel

from app.services.errors import ParameterError, RegressionError, SingularityError, SizeError
from app.services.grid import CellGradientField
from app.services.integrands import IntegrandSpec

__all__: list[str] = [
    "INNER_HALF_WIDTH",
    "OUTER_HALF_WIDTH",
    "MAX_OFFSET_LENGTH",
    "FIT_OFFSET_LENGTH",
    "SMOOTH_SENTINEL",
    "CaccioppoliFit",
    "HolderEstimate",
    "vp_map",
    "vp_field",
    "tau_h",
    "caccioppoli_lhs",
    "caccioppoli_energy",
    "caccioppoli_ratio",
    "fit_caccioppoli",
    "holder_exponent",
]

logger = logging.getLogger(__name__)

CENTER = (0.5, 0.5)
INNER_HALF_WIDTH = 0.25
OUTER_HALF_WIDTH = 0.45
MAX_OFFSET_LENGTH = 0.05
# a shifted inner ball must stay inside the outer one
FIT_OFFSET_LENGTH = OUTER_HALF_WIDTH - INNER_HALF_WIDTH
SMOOTH_SENTINEL = 1.5
ZERO_TOL = 1e-10
MIN_FIT_POINTS = 4


class CaccioppoliFit(BaseModel):
    C: float
    s_order: float
    residual: float
    h_values: list[float]
    exact: bool = False  # all difference quotients vanished


class HolderEstimate(BaseModel):
    exponent: float
    fit_quality: float
    radii: list[float]
    oscillations: list[float]
    sentinel: bool = False


def vp_map(z: ArrayLike, p: float, mu: float = 0.0) -> NDArray[np.float64]:
    """V_p(z) = (|z|^2 + mu^2)^((p-2)/4) z; mu = 0 gives |z|^((p-2)/2) z."""
    if not p > 1:
        raise ParameterError(f"V_p needs p > 1, got {p}")
    zv = np.asarray(z, dtype=float)
    r2 = zv[..., 0] ** 2 + zv[..., 1] ** 2
    if mu == 0 and p < 2 and np.any(r2 == 0):
        raise SingularityError("V_p is singular at z = 0 for p < 2; supply mu-regularized gradients")
    with np.errstate(divide="ignore"):
        factor = (r2 + mu * mu) ** ((p - 2) / 4)
    return factor[..., None] * zv


def vp_field(gradients: CellGradientField, p: float, mu: float = 0.0) -> CellGradientField:
    return CellGradientField(gradients.grid, vp_map(gradients.values, p, mu), gradients.origin)


def tau_h(fld: CellGradientField, offset: Sequence[int]) -> CellGradientField:
    """Forward difference f(x + h) - f(x) over the cells where both terms exist."""
    di, dj = (int(v) for v in offset)
    if di == 0 and dj == 0:
        raise SizeError("difference offset must be at least one cell")
    rows, cols = fld.values.shape[:2]
    if abs(di) >= rows or abs(dj) >= cols:
        raise SizeError(f"offset {(di, dj)} exceeds the {rows}x{cols} cell field")
    i0, i1 = max(0, -di), rows - max(0, di)
    j0, j1 = max(0, -dj), cols - max(0, dj)
    diff = fld.values[i0 + di:i1 + di, j0 + dj:j1 + dj] - fld.values[i0:i1, j0:j1]
    return CellGradientField(fld.grid, diff, (fld.origin[0] + i0, fld.origin[1] + j0))


def _in_square(fld: CellGradientField, center: Sequence[float], half_width: float) -> NDArray[np.bool_]:
    centers = fld.centers()
    dist = np.max(np.abs(centers - np.asarray(center, dtype=float)), axis=-1)
    return dist <= half_width + 1e-12


def _offset_length(fld: CellGradientField, offset: Sequence[int]) -> float:
    return math.hypot(*offset) * fld.grid.h


def caccioppoli_lhs(gradients: CellGradientField, p: float, offset: Sequence[int],
                    half_width: float = INNER_HALF_WIDTH, mu: float = 0.0,
                    center: Sequence[float] = CENTER) -> float:
    """sum over the ball of h^2 |tau_h V_p(Du)|^2."""
    diff = tau_h(vp_field(gradients, p, mu), offset)
    mask = _in_square(diff, center, half_width)
    sq = np.sum(diff.values**2, axis=-1)
    return math.fsum((gradients.grid.h**2 * sq[mask]).ravel())


def caccioppoli_energy(gradients: CellGradientField, q: float, half_width: float = OUTER_HALF_WIDTH,
                       center: Sequence[float] = CENTER) -> float:
    """sum over the ball of h^2 (1 + |Du|^q)."""
    mask = _in_square(gradients, center, half_width)
    vals = 1 + gradients.magnitude() ** q
    return math.fsum((gradients.grid.h**2 * vals[mask]).ravel())


def _check_offset(gradients: CellGradientField, offset: Sequence[int], limit: float) -> float:
    length = _offset_length(gradients, offset)
    if not 0 < length < limit:
        raise SizeError(f"offset {tuple(offset)} has length {length:.4f}; must be in (0, {limit})")
    return length


def caccioppoli_ratio(gradients: CellGradientField, spec: IntegrandSpec, p: float, q: float,
                      s_order: float, offset: Sequence[int]) -> float:
    """LHS over |h|^(2s) times the outer-ball energy; uses the integrand's mu for V_p."""
    length = _check_offset(gradients, offset, MAX_OFFSET_LENGTH)
    lhs = caccioppoli_lhs(gradients, p, offset, mu=spec.mu)
    rhs = length ** (2 * s_order) * caccioppoli_energy(gradients, q)
    return lhs / rhs


def _vp_scale(gradients: CellGradientField, p: float, mu: float) -> float:
    mask = _in_square(gradients, CENTER, INNER_HALF_WIDTH)
    vp = vp_field(gradients, p, mu).values
    return math.fsum((gradients.grid.h**2 * (1 + np.sum(vp**2, axis=-1))[mask]).ravel())


def fit_caccioppoli(gradients: CellGradientField, spec: IntegrandSpec, p: float, q: float,
                    offsets: Sequence[Sequence[int]]) -> CaccioppoliFit:
    """Fit LHS(h) ~ C' |h|^(2s) by log-log regression.

    C is C' divided by the outer-ball energy so it is dimensionless. When every
    difference quotient vanishes the field is exactly regular at this
    resolution: s_order is +inf and C is 0.
    """
    lengths = [_check_offset(gradients, off, FIT_OFFSET_LENGTH) for off in offsets]
    if len(set(lengths)) < MIN_FIT_POINTS:
        raise ParameterError(f"need at least {MIN_FIT_POINTS} distinct offset lengths, got {len(set(lengths))}")
    if max(lengths) < 4 * min(lengths):
        raise ParameterError("offset lengths must span a factor of at least 4")

    lhs = np.array([caccioppoli_lhs(gradients, p, off, mu=spec.mu) for off in offsets])
    floor = ZERO_TOL**2 * _vp_scale(gradients, p, spec.mu)
    zero = lhs <= floor
    if zero.all():
        return CaccioppoliFit(C=0.0, s_order=math.inf, residual=0.0, h_values=lengths, exact=True)
    if zero.any():
        raise RegressionError("difference quotients vanish for some offsets but not others")

    log_h, log_lhs = np.log(lengths), np.log(lhs)
    slope, intercept = np.polyfit(log_h, log_lhs, 1)
    residual = float(np.sqrt(np.mean((log_lhs - (slope * log_h + intercept)) ** 2)))
    energy = caccioppoli_energy(gradients, q)
    fit = CaccioppoliFit(C=float(math.exp(intercept) / energy), s_order=float(slope / 2),
                         residual=residual, h_values=lengths)
    logger.debug("caccioppoli fit: s=%.4f C=%.4g residual=%.3g", fit.s_order, fit.C, fit.residual)
    return fit


def holder_exponent(gradients: CellGradientField, center: Sequence[float],
                    radii: Sequence[float]) -> HolderEstimate:
    """Slope of log osc(r) against log r, clamped to [0, 1.5].

    osc(r) is the largest component-wise max - min of Du over the square of
    half-width r. Zero oscillation at every radius yields the 1.5 sentinel
    (at least Lipschitz at this resolution); zero oscillation at only some
    radii is a RegressionError, the fit always uses every radius.
    """
    rs = [float(r) for r in radii]
    if len(rs) < MIN_FIT_POINTS:
        raise ParameterError(f"need at least {MIN_FIT_POINTS} radii, got {len(rs)}")
    if any(b >= a for a, b in zip(rs, rs[1:])):
        raise ParameterError("radii must be strictly decreasing")
    if rs[-1] < 2 * gradients.grid.h:
        raise ParameterError(f"smallest radius {rs[-1]} is below two cells ({2 * gradients.grid.h})")

    scale = 1 + float(np.max(np.abs(gradients.values)))
    oscillations = []
    for r in rs:
        inside = gradients.values[_in_square(gradients, center, r)]
        osc = float(np.max(inside.max(axis=0) - inside.min(axis=0))) if inside.size else 0.0
        oscillations.append(osc if osc > ZERO_TOL * scale else 0.0)

    if not any(oscillations):
        return HolderEstimate(exponent=SMOOTH_SENTINEL, fit_quality=1.0, radii=rs,
                              oscillations=oscillations, sentinel=True)
    if not all(oscillations):
        raise RegressionError("oscillation vanishes at some radii but not others")
    log_r = np.log(rs)
    log_o = np.log(oscillations)
    slope, intercept = np.polyfit(log_r, log_o, 1)
    ss_res = float(np.sum((log_o - (slope * log_r + intercept)) ** 2))
    ss_tot = float(np.sum((log_o - log_o.mean()) ** 2))
    quality = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return HolderEstimate(exponent=float(np.clip(slope, 0.0, SMOOTH_SENTINEL)), fit_quality=quality,
                          radii=rs, oscillations=oscillations)
