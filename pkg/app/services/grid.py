"""Uniform grids on the unit square, nodal fields, cell gradients and quadrature.

Nodal arrays are indexed ``values[i, j]`` at ``(x1, x2) = (i/m, j/m)``; cell
``(i, j)`` spans nodes ``i..i+1`` by ``j..j+1``. Cell gradients are the
gradient of the bilinear interpolant at the cell center.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
import scipy.sparse as sparse
from numpy.typing import NDArray
from scipy.sparse.linalg import spsolve

from app.services.errors import ParameterError, SizeError
from app.services.integrands import CoefficientField, IntegrandSpec, coefficient_values, density

__all__: list[str] = [
    "MIN_RESOLUTION",
    "Grid",
    "DiscreteField",
    "CellGradientField",
    "make_grid",
    "field_from_function",
    "discrete_gradient",
    "gradient_operator",
    "harmonic_extension",
    "cell_densities",
    "integrate",
]

MIN_RESOLUTION = 4


@dataclass(frozen=True)
class Grid:
    m: int

    @property
    def spacing(self) -> Fraction:
        return Fraction(1, self.m)

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def node_count(self) -> int:
        return (self.m + 1) ** 2

    @property
    def ticks(self) -> NDArray[np.float64]:
        return np.arange(self.m + 1) / self.m

    def node_coordinates(self) -> NDArray[np.float64]:
        """Shape (m+1, m+1, 2)."""
        x1, x2 = np.meshgrid(self.ticks, self.ticks, indexing="ij")
        return np.stack([x1, x2], axis=-1)

    def cell_centers(self) -> NDArray[np.float64]:
        """Shape (m, m, 2)."""
        mid = (np.arange(self.m) + 0.5) / self.m
        c1, c2 = np.meshgrid(mid, mid, indexing="ij")
        return np.stack([c1, c2], axis=-1)

    def boundary_mask(self) -> NDArray[np.bool_]:
        mask = np.zeros((self.m + 1, self.m + 1), dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask


def make_grid(m: int) -> Grid:
    if int(m) != m or m < MIN_RESOLUTION:
        raise SizeError(f"grid resolution must be an integer >= {MIN_RESOLUTION}, got {m}")
    return Grid(int(m))


@dataclass(frozen=True)
class DiscreteField:
    grid: Grid
    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        expected = (self.grid.m + 1, self.grid.m + 1)
        if vals.shape != expected:
            raise ParameterError(f"field shape {vals.shape} does not match grid nodes {expected}")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("field values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def boundary_mask(self) -> NDArray[np.bool_]:
        return self.grid.boundary_mask()

    def with_values(self, values: NDArray[np.float64]) -> "DiscreteField":
        return DiscreteField(self.grid, values)


@dataclass(frozen=True)
class CellGradientField:
    """Per-cell gradient vectors, shape (rows, cols, 2).

    ``origin`` is the grid index of the first cell, so fields shrunk by a
    difference quotient keep their positions.
    """

    grid: Grid
    values: NDArray[np.float64]
    origin: tuple[int, int] = field(default=(0, 0))

    def centers(self) -> NDArray[np.float64]:
        rows, cols = self.values.shape[:2]
        i0, j0 = self.origin
        c1 = (np.arange(i0, i0 + rows) + 0.5) / self.grid.m
        c2 = (np.arange(j0, j0 + cols) + 0.5) / self.grid.m
        x1, x2 = np.meshgrid(c1, c2, indexing="ij")
        return np.stack([x1, x2], axis=-1)

    def magnitude(self) -> NDArray[np.float64]:
        return np.hypot(self.values[..., 0], self.values[..., 1])


def field_from_function(grid: Grid, fn: Callable[[NDArray, NDArray], NDArray]) -> DiscreteField:
    nodes = grid.node_coordinates()
    return DiscreteField(grid, np.asarray(fn(nodes[..., 0], nodes[..., 1]), dtype=float) + np.zeros(nodes.shape[:2]))


def discrete_gradient(fld: DiscreteField) -> CellGradientField:
    u = fld.values
    h = fld.grid.h
    g1 = ((u[1:, :-1] + u[1:, 1:]) - (u[:-1, :-1] + u[:-1, 1:])) / (2 * h)
    g2 = ((u[:-1, 1:] + u[1:, 1:]) - (u[:-1, :-1] + u[1:, :-1])) / (2 * h)
    return CellGradientField(fld.grid, np.stack([g1, g2], axis=-1))


def gradient_operator(grid: Grid) -> sparse.csr_matrix:
    """Sparse map from raveled nodal values to stacked cell gradients.

    Rows ``0..m^2-1`` hold the x1-components of the raveled cells, the next
    ``m^2`` rows the x2-components; ``D @ u.ravel()`` agrees with
    :func:`discrete_gradient`.
    """
    m = grid.m
    w = 1.0 / (2 * grid.h)
    ci, cj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    cell = (ci * m + cj).ravel()

    def node(di: int, dj: int):
        return ((ci + di) * (m + 1) + (cj + dj)).ravel()

    n00, n10, n01, n11 = node(0, 0), node(1, 0), node(0, 1), node(1, 1)
    rows = np.concatenate([cell] * 4 + [cell + m * m] * 4)
    cols = np.concatenate([n00, n01, n10, n11, n00, n10, n01, n11])
    signs = np.repeat([-w, -w, w, w, -w, -w, w, w], m * m)
    return sparse.csr_matrix((signs, (rows, cols)), shape=(2 * m * m, grid.node_count))


def harmonic_extension(boundary: DiscreteField) -> DiscreteField:
    """Minimizer of the discrete Dirichlet energy sum h^2 |Du|^2 with the boundary values of ``boundary``."""
    grid = boundary.grid
    op = gradient_operator(grid)
    stiffness = (op.T @ op).tocsr()
    mask = grid.boundary_mask().ravel()
    interior = np.flatnonzero(~mask)
    border = np.flatnonzero(mask)
    u = boundary.values.ravel().copy()
    rhs = -(stiffness[interior][:, border] @ u[border])
    u[interior] = spsolve(stiffness[interior][:, interior].tocsc(), rhs)
    return boundary.with_values(u.reshape(boundary.values.shape))


def cell_densities(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
                   fld: DiscreteField) -> NDArray[np.float64]:
    """h^2 * density at each cell center, shape (m, m)."""
    centers = fld.grid.cell_centers()
    a, b = coefficient_values(spec, coeff_a, coeff_b, centers)
    grads = discrete_gradient(fld).values
    return fld.grid.h**2 * density(spec, a, b, grads)


def integrate(spec: IntegrandSpec, coeff_a: CoefficientField | None, coeff_b: CoefficientField | None,
              fld: DiscreteField) -> float:
    """Cell-center quadrature of the energy; compensated summation keeps it order-independent."""
    return math.fsum(cell_densities(spec, coeff_a, coeff_b, fld).ravel())
