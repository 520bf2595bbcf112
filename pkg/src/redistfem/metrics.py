"""Error norms for redistanced fields and convergence-order computation.

The domain norms are mean-square normalized (divided by the domain measure)
and reported as square roots; the interface norm is unnormalized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fem
from .cutfem import CutInterface
from .mesh import Mesh
from .validation import check_field


@dataclass
class ErrorReport:
    l2_error: float | None
    eikonal_error: float
    interface_error: float
    h: float


def _p1_square_integral(mesh: Mesh, values: np.ndarray) -> float:
    """Exact integral of the square of a P1 field."""
    e = values[mesh.cells]  # (nc, d+1)
    d = mesh.dim
    pair = e.sum(axis=1) ** 2 + (e ** 2).sum(axis=1)
    return float((mesh.cell_volumes * pair).sum() / ((d + 1) * (d + 2)))


def l2_error(mesh: Mesh, phi, exact) -> float:
    """Root mean-square difference to the vertex interpolant of ``exact``.

    ``exact`` is a callable evaluated at the mesh vertices; the difference of
    the two P1 fields is integrated exactly.
    """
    phi = check_field(mesh, phi, "phi")
    exact_vals = np.asarray(exact(mesh.vertices), dtype=np.float64)
    diff = phi - exact_vals
    volume = float(mesh.cell_volumes.sum())
    return math.sqrt(_p1_square_integral(mesh, diff) / volume)


def eikonal_error(mesh: Mesh, phi) -> float:
    """Root mean-square deviation of the gradient norm from one."""
    g = fem.cell_gradients(mesh, phi)
    dev = 1.0 - np.linalg.norm(g, axis=1)
    volume = float(mesh.cell_volumes.sum())
    return math.sqrt(float((mesh.cell_volumes * dev ** 2).sum()) / volume)


def interface_error(mesh: Mesh, phi, interface0: CutInterface) -> float:
    """Root of the integral of phi^2 over the initial zero contour (no
    normalization)."""
    if interface0.num_facets == 0:
        raise ValueError("empty interface")
    vals = fem.evaluate(mesh, phi, interface0.qpoints, interface0.qcells)
    return math.sqrt(float((interface0.qweights * vals ** 2).sum()))


def convergence_order(errors) -> float:
    """Observed order between the coarsest and finest (h, error) samples."""
    data = sorted(((float(h), float(e)) for h, e in errors), reverse=True)
    if len(data) < 2:
        raise ValueError("need at least two (h, error) samples")
    (h0, e0), (h1, e1) = data[0], data[-1]
    if h0 == h1:
        raise ValueError("mesh sizes must be distinct")
    if e0 <= 0 or e1 <= 0:
        raise ValueError("errors must be positive")
    return math.log(e0 / e1) / math.log(h0 / h1)


def mean_gradient_norm(mesh: Mesh, phi, lower=None, upper=None) -> float:
    """Volume-weighted mean of |grad phi| over cells with centroid in a box."""
    g = np.linalg.norm(fem.cell_gradients(mesh, phi), axis=1)
    mask = np.ones(mesh.num_cells, dtype=bool)
    c = mesh.cell_centroids
    if lower is not None:
        mask &= np.all(c >= np.asarray(lower, dtype=np.float64), axis=1)
    if upper is not None:
        mask &= np.all(c <= np.asarray(upper, dtype=np.float64), axis=1)
    if not mask.any():
        raise ValueError("no cell centroid inside the requested region")
    vols = mesh.cell_volumes[mask]
    return float((vols * g[mask]).sum() / vols.sum())
