"""Cut cells: classification, interface reconstruction, surface quadrature
and weak (Nitsche) enforcement of the interface condition.

The zero contour of a P1 field is reconstructed per cut cell by linear
interpolation along sign-changing edges: a point in 1D, a segment in 2D, a
triangle or a quadrilateral (split into two triangles) in 3D.  Vertex values
within the snap tolerance of zero are treated as positive so that no
zero-measure or duplicated facets arise.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh
from .validation import check_field

SNAP_REL = 1e-12

INSIDE, CUT, OUTSIDE = -1, 0, 1

# Symmetric Gauss rules on the reference triangle (barycentric points,
# weights summing to one).
_TRI_RULES = {
    1: (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])),
    2: (np.array([[2 / 3, 1 / 6, 1 / 6],
                  [1 / 6, 2 / 3, 1 / 6],
                  [1 / 6, 1 / 6, 2 / 3]]), np.full(3, 1 / 3)),
    3: (np.array([[1 / 3, 1 / 3, 1 / 3],
                  [0.6, 0.2, 0.2],
                  [0.2, 0.6, 0.2],
                  [0.2, 0.2, 0.6]]),
        np.array([-27 / 48, 25 / 48, 25 / 48, 25 / 48])),
}


@dataclass
class CutInterface:
    """Piecewise-linear reconstruction of the zero contour with quadrature.

    ``facet_points`` holds the corner points of each facet: one point per
    facet in 1D, two in 2D, three in 3D.  Normals are constant per facet,
    oriented from the negative to the positive side of the level set.
    Quadrature points carry the index of the facet they belong to.
    """

    dim: int
    cells: np.ndarray          # (n_facets,) owning cell per facet
    facet_points: np.ndarray   # (n_facets, dim, dim) corner coordinates
    measures: np.ndarray       # (n_facets,)
    normals: np.ndarray        # (n_facets, dim)
    qpoints: np.ndarray        # (n_q, dim)
    qweights: np.ndarray       # (n_q,)
    qfacets: np.ndarray        # (n_q,) facet index per quadrature point
    degree: int

    @property
    def num_facets(self) -> int:
        return len(self.cells)

    @property
    def qcells(self) -> np.ndarray:
        return self.cells[self.qfacets]

    @property
    def qnormals(self) -> np.ndarray:
        return self.normals[self.qfacets]

    def total_measure(self) -> float:
        return float(self.measures.sum())


def snap_tolerance(phi0) -> float:
    scale = float(np.max(np.abs(phi0))) if len(phi0) else 0.0
    return SNAP_REL * scale


def snapped_values(phi0) -> np.ndarray:
    """Copy of the vertex values with near-zero entries pushed to +snap_tol."""
    phi0 = np.asarray(phi0, dtype=np.float64)
    tol = snap_tolerance(phi0)
    out = phi0.copy()
    out[np.abs(out) < tol] = tol if tol > 0 else 0.0
    return out


def classify_cells(mesh: Mesh, phi0) -> np.ndarray:
    """Tag each cell INSIDE (-1), CUT (0) or OUTSIDE (+1).

    A cell is cut iff, after snapping, it has vertex values of both signs.
    """
    phi0 = check_field(mesh, phi0, "phi0")
    pos = snapped_values(phi0) > 0
    at_cells = pos[mesh.cells]
    any_pos = at_cells.any(axis=1)
    all_pos = at_cells.all(axis=1)
    tags = np.where(all_pos, OUTSIDE, np.where(any_pos, CUT, INSIDE))
    return tags.astype(np.int8)


def interface_normal(mesh: Mesh, phi0, cell_id: int) -> np.ndarray:
    """Unit normal of the zero contour on one cut cell (from - to +)."""
    phi0 = check_field(mesh, phi0, "phi0")
    g = mesh.cell_basis_gradients[cell_id].T @ snapped_values(phi0)[mesh.cells[cell_id]]
    norm = np.linalg.norm(g)
    if norm == 0.0:
        raise ValueError(f"zero level-set gradient on cut cell {cell_id}")
    return g / norm


def _edge_cuts(vals: np.ndarray, pts: np.ndarray, dim: int):
    """Intersection points on sign-changing edges of one simplex.

    Returns (points, edge pairs); ``t = phi_a / (phi_a - phi_b)`` along each
    edge, exact for affine fields.
    """
    points, pairs = [], []
    for a, b in combinations(range(dim + 1), 2):
        if (vals[a] > 0) != (vals[b] > 0):
            t = vals[a] / (vals[a] - vals[b])
            points.append(pts[a] + t * (pts[b] - pts[a]))
            pairs.append((a, b))
    return points, pairs


def reconstruct_interface(mesh: Mesh, phi0, degree: int = 2) -> CutInterface:
    """Reconstruct the zero contour of a P1 field over all cut cells.

    Cells crossed through a vertex are handled by the snapping rule (the
    vertex counts as positive); no degenerate configuration raises.
    """
    phi0 = check_field(mesh, phi0, "phi0")
    vals = snapped_values(phi0)
    d = mesh.dim
    tags = classify_cells(mesh, phi0)
    cut_ids = np.flatnonzero(tags == CUT)

    owners, corners, normals = [], [], []
    for cid in cut_ids:
        cell = mesh.cells[cid]
        cvals = vals[cell]
        pts = mesh.vertices[cell]
        cut_pts, pairs = _edge_cuts(cvals, pts, d)
        g = mesh.cell_basis_gradients[cid].T @ cvals
        gn = np.linalg.norm(g)
        if gn == 0.0:
            raise ValueError(f"zero level-set gradient on cut cell {cid}")
        n = g / gn
        if d == 1:
            owners.append(cid)
            corners.append([cut_pts[0]])
            normals.append(n)
        elif d == 2:
            owners.append(cid)
            corners.append(cut_pts)
            normals.append(n)
        else:
            if len(cut_pts) == 3:
                owners.append(cid)
                corners.append(cut_pts)
                normals.append(n)
            else:
                # 2-2 sign split: four edge cuts form a planar quadrilateral.
                # Order them cyclically (consecutive points share a tet
                # vertex) and split along the shorter diagonal.
                neg = [v for v in range(4) if cvals[v] <= 0]
                quad = {}
                for p, (a, b) in zip(cut_pts, pairs):
                    lo = a if a in neg else b
                    hi = b if a in neg else a
                    quad[(lo, hi)] = p
                (m1, m2), (p1, p2) = neg, [v for v in range(4) if v not in neg]
                cycle = [quad[(m1, p1)], quad[(m1, p2)],
                         quad[(m2, p2)], quad[(m2, p1)]]
                d02 = np.linalg.norm(cycle[0] - cycle[2])
                d13 = np.linalg.norm(cycle[1] - cycle[3])
                if d02 <= d13:
                    tris = [(0, 1, 2), (0, 2, 3)]
                else:
                    tris = [(1, 2, 3), (1, 3, 0)]
                for tri in tris:
                    owners.append(cid)
                    corners.append([cycle[k] for k in tri])
                    normals.append(n)

    nf = len(owners)
    facet_points = np.array(corners, dtype=np.float64).reshape(nf, d, d)
    interface = CutInterface(
        dim=d,
        cells=np.array(owners, dtype=np.int64),
        facet_points=facet_points,
        measures=_facet_measures(facet_points, d),
        normals=np.array(normals, dtype=np.float64).reshape(nf, d),
        qpoints=np.zeros((0, d)),
        qweights=np.zeros(0),
        qfacets=np.zeros(0, dtype=np.int64),
        degree=0,
    )
    return cut_quadrature(interface, degree)


def _facet_measures(facet_points: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        return np.ones(len(facet_points))
    if dim == 2:
        return np.linalg.norm(facet_points[:, 1] - facet_points[:, 0], axis=1)
    cross = np.cross(facet_points[:, 1] - facet_points[:, 0],
                     facet_points[:, 2] - facet_points[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def cut_quadrature(interface: CutInterface, degree: int) -> CutInterface:
    """Gauss quadrature of the requested polynomial degree on every facet.

    Weights on each facet sum to its measure.  Segments support any degree;
    triangles support degrees 1 to 3.
    """
    degree = int(degree)
    if degree < 1:
        raise ValueError(f"quadrature degree must be >= 1, got {degree}")
    d = interface.dim
    fp = interface.facet_points
    if d == 1:
        pts = fp[:, 0, :]
        wts = interface.measures.copy()
        fidx = np.arange(interface.num_facets, dtype=np.int64)
    elif d == 2:
        npts = (degree + 2) // 2
        xg, wg = np.polynomial.legendre.leggauss(npts)
        mid = 0.5 * (fp[:, 0, :] + fp[:, 1, :])
        half = 0.5 * (fp[:, 1, :] - fp[:, 0, :])
        pts = (mid[:, None, :] + xg[None, :, None] * half[:, None, :]).reshape(-1, 2)
        wts = (0.5 * wg[None, :] * interface.measures[:, None]).reshape(-1)
        fidx = np.repeat(np.arange(interface.num_facets, dtype=np.int64), npts)
    else:
        if degree not in _TRI_RULES:
            raise ValueError(
                f"unsupported quadrature degree {degree} on triangle facets "
                f"(supported: {sorted(_TRI_RULES)})")
        bary, wg = _TRI_RULES[degree]
        pts = np.einsum("qb,fbd->fqd", bary, fp).reshape(-1, 3)
        wts = (wg[None, :] * interface.measures[:, None]).reshape(-1)
        fidx = np.repeat(np.arange(interface.num_facets, dtype=np.int64), len(wg))
    return replace(interface, qpoints=pts, qweights=wts, qfacets=fidx,
                   degree=degree)


def assemble_nitsche(A: sp.spmatrix, b: np.ndarray, mesh: Mesh,
                     interface: CutInterface, gamma_d: float,
                     h: float | None = None) -> tuple[sp.csr_matrix, np.ndarray]:
    """Add symmetric Nitsche terms for a homogeneous interface condition.

    Over the interface quadrature this adds
    ``-(grad u . n) v - (grad v . n) u + (gamma_d / h) u v`` to the matrix;
    with zero Dirichlet data the right-hand side is unchanged.  ``h`` defaults
    to the diameter of each cut cell.
    """
    if gamma_d <= 0:
        raise ValueError("gamma_d must be positive")
    b = np.asarray(b, dtype=np.float64).copy()
    if interface.num_facets == 0:
        return A.tocsr().copy(), b
    d = mesh.dim
    cells = interface.qcells
    verts = mesh.cells[cells]                      # (nq, d+1)
    grads = mesh.cell_basis_gradients[cells]       # (nq, d+1, d)
    rel = interface.qpoints - mesh.cell_centroids[cells]
    lam = 1.0 / (d + 1) + np.einsum("qid,qd->qi", grads, rel)
    gn = np.einsum("qid,qd->qi", grads, interface.qnormals)
    h_cell = np.full(len(cells), float(h)) if h is not None \
        else mesh.cell_diameters[cells]
    w = interface.qweights
    local = (-lam[:, :, None] * gn[:, None, :]
             - gn[:, :, None] * lam[:, None, :]
             + (gamma_d / h_cell)[:, None, None] * lam[:, :, None] * lam[:, None, :])
    local *= w[:, None, None]
    m = d + 1
    rows = np.repeat(verts, m, axis=1).ravel()
    cols = np.tile(verts, (1, m)).ravel()
    n = mesh.num_vertices
    update = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return (A + update).tocsr(), b
