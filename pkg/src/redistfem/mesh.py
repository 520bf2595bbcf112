"""Simplicial meshes on intervals and boxes with the geometry needed for P1 assembly.

Meshes are immutable after construction (the underlying arrays are marked
read-only), so they can be shared freely between concurrent runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .validation import check_cell_id

_FACTORIAL = {1: 1.0, 2: 2.0, 3: 6.0}


@dataclass
class CellGeometry:
    """Geometry of one simplex: volume and the constant P1 basis gradients."""

    volume: float
    grad_barycentric: np.ndarray  # (dim+1, dim)
    vertex_ids: np.ndarray  # (dim+1,)


class Mesh:
    """Simplicial mesh in dimension 1, 2 or 3.

    Parameters
    ----------
    dim : int
        Topological dimension, one of 1, 2, 3.
    vertices : array, shape (n_vertices, dim)
        Vertex coordinates.
    cells : array, shape (n_cells, dim+1)
        Vertex indices per simplex.  Cells with negative orientation are
        reordered so that every cell has positive signed volume.
    h : float, optional
        Nominal mesh size (axis-aligned edge length for structured meshes).
        Falls back to the median cell diameter when not provided.

    Boundary facets (with outward unit normals) are derived from the cell
    connectivity: a facet shared by exactly one cell is a boundary facet.
    """

    def __init__(self, dim: int, vertices, cells, h: float | None = None):
        if dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
        self.dim = int(dim)
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        if vertices.ndim == 1:
            vertices = vertices[:, None]
        if vertices.shape[1] != dim:
            raise ValueError(
                f"vertices must have shape (n, {dim}), got {vertices.shape}"
            )
        cells = np.ascontiguousarray(cells, dtype=np.int64)
        if cells.ndim != 2 or cells.shape[1] != dim + 1:
            raise ValueError(
                f"cells must have shape (n, {dim + 1}), got {cells.shape}"
            )
        if cells.size and (cells.min() < 0 or cells.max() >= len(vertices)):
            raise ValueError("cell vertex indices out of range")

        self.vertices = vertices
        self.cells = self._fix_orientation(cells)
        self._compute_geometry()
        self._extract_boundary()
        self.h = float(h) if h is not None else float(np.median(self.cell_diameters))
        for arr in (self.vertices, self.cells, self.boundary_facets,
                    self.boundary_normals, self.cell_volumes,
                    self.cell_basis_gradients, self.cell_diameters):
            arr.flags.writeable = False

    # ------------------------------------------------------------------
    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    def _signed_volumes(self, cells: np.ndarray) -> np.ndarray:
        pts = self.vertices[cells]
        edges = pts[:, 1:, :] - pts[:, :1, :]  # (nc, d, d)
        return np.linalg.det(edges) / _FACTORIAL[self.dim]

    def _fix_orientation(self, cells: np.ndarray) -> np.ndarray:
        cells = cells.copy()
        vol = self._signed_volumes(cells)
        flip = vol < 0
        if np.any(flip):
            cells[flip, -2], cells[flip, -1] = (
                cells[flip, -1].copy(), cells[flip, -2].copy())
            vol = self._signed_volumes(cells)
        if np.any(vol <= 0):
            bad = int(np.argmin(vol))
            raise ValueError(f"cell {bad} has non-positive volume {vol[bad]:g}")
        return cells

    def _compute_geometry(self) -> None:
        d = self.dim
        pts = self.vertices[self.cells]  # (nc, d+1, d)
        edges = pts[:, 1:, :] - pts[:, :1, :]  # (nc, d, d)
        self.cell_volumes = np.linalg.det(edges) / _FACTORIAL[d]
        # barycentric coordinates satisfy x - v0 = E lam with the edge
        # vectors as columns of E, so grad lam_i is the i-th row of E^-1,
        # i.e. the i-th column of inv(edges); grad lam_0 closes the sum.
        inv = np.linalg.inv(edges)  # (nc, d, d)
        grads = np.empty((self.num_cells, d + 1, d))
        grads[:, 1:, :] = np.swapaxes(inv, 1, 2)
        grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
        self.cell_basis_gradients = grads
        diff = pts[:, :, None, :] - pts[:, None, :, :]
        self.cell_diameters = np.sqrt((diff ** 2).sum(-1)).max(axis=(1, 2))
        self.cell_centroids = pts.mean(axis=1)
        self.cell_centroids.flags.writeable = False

    def _extract_boundary(self) -> None:
        d = self.dim
        counts: dict[tuple, list] = {}
        for cid, cell in enumerate(self.cells):
            for local in combinations(range(d + 1), d):
                omit = (set(range(d + 1)) - set(local)).pop()
                key = tuple(sorted(int(cell[i]) for i in local))
                counts.setdefault(key, []).append((cid, omit))
        facets, normals, owners = [], [], []
        for key, owners_list in counts.items():
            if len(owners_list) > 2:
                raise ValueError(f"facet {key} shared by more than two cells")
            if len(owners_list) == 1:
                cid, omit = owners_list[0]
                facets.append(key)
                # lam_omit decreases away from the omitted vertex, so the
                # outward direction is -grad(lam_omit).
                g = -self.cell_basis_gradients[cid, omit]
                normals.append(g / np.linalg.norm(g))
                owners.append(cid)
        order = np.lexsort(np.array(facets, dtype=np.int64).T[::-1]) if facets else []
        self.boundary_facets = np.array(facets, dtype=np.int64).reshape(-1, d)[order]
        self.boundary_normals = np.array(normals, dtype=np.float64).reshape(-1, d)[order]
        self.boundary_cells = np.array(owners, dtype=np.int64)[order]
        self.boundary_cells.flags.writeable = False

    def boundary_facet_measures(self) -> np.ndarray:
        """Measure of each boundary facet (1 for points, length, area)."""
        if self.dim == 1:
            return np.ones(len(self.boundary_facets))
        pts = self.vertices[self.boundary_facets]
        if self.dim == 2:
            return np.linalg.norm(pts[:, 1] - pts[:, 0], axis=1)
        cross = np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def domain_diameter(self) -> float:
        span = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(span))

    def vertex_cell_incidence(self) -> list[np.ndarray]:
        """Cells incident to each vertex."""
        inc: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for cid, cell in enumerate(self.cells):
            for v in cell:
                inc[int(v)].append(cid)
        return [np.array(c, dtype=np.int64) for c in inc]


def cell_geometry(mesh: Mesh, cell_id: int) -> CellGeometry:
    """Exact volume and constant P1 basis gradients of one cell."""
    cell_id = check_cell_id(mesh, cell_id)
    return CellGeometry(
        volume=float(mesh.cell_volumes[cell_id]),
        grad_barycentric=mesh.cell_basis_gradients[cell_id].copy(),
        vertex_ids=mesh.cells[cell_id].copy(),
    )


def interval_mesh(a: float, b: float, n: int) -> Mesh:
    """Uniform mesh of [a, b] with n cells and n+1 vertices."""
    n = int(n)
    if n < 1:
        raise ValueError(f"need at least one cell, got n={n}")
    if not a < b:
        raise ValueError(f"interval requires a < b, got [{a}, {b}]")
    x = np.linspace(a, b, n + 1)
    cells = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    return Mesh(1, x[:, None], cells, h=(b - a) / n)


def box_mesh(lower, upper, n) -> Mesh:
    """Structured simplicial mesh of a 2D or 3D box.

    Each grid square is split into two triangles along the lower-left to
    upper-right diagonal; each grid cube into six tetrahedra sharing the
    main diagonal, which yields a conforming mesh with no hanging facets.

    Parameters
    ----------
    lower, upper : sequence of float, length 2 or 3
        Box corners, componentwise lower < upper.
    n : int or sequence of int
        Number of grid cells per axis.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    dim = lower.shape[0]
    if dim not in (2, 3) or upper.shape != lower.shape:
        raise ValueError("lower/upper must both have length 2 or 3")
    if not np.all(lower < upper):
        raise ValueError(f"degenerate box: lower={lower}, upper={upper}")
    n = np.broadcast_to(np.asarray(n, dtype=np.int64), (dim,)).copy()
    if np.any(n < 1):
        raise ValueError(f"need at least one cell per axis, got n={n}")

    axes = [np.linspace(lower[k], upper[k], n[k] + 1) for k in range(dim)]
    if dim == 2:
        X, Y = np.meshgrid(axes[0], axes[1], indexing="ij")
        verts = np.column_stack([X.ravel(), Y.ravel()])

        def vid(i, j):
            return i * (n[1] + 1) + j

        cells = []
        for i in range(n[0]):
            for j in range(n[1]):
                a_, b_, c_, d_ = (vid(i, j), vid(i + 1, j),
                                  vid(i + 1, j + 1), vid(i, j + 1))
                cells.append((a_, b_, c_))
                cells.append((a_, c_, d_))
    else:
        X, Y, Z = np.meshgrid(axes[0], axes[1], axes[2], indexing="ij")
        verts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

        def vid(i, j, k):
            return (i * (n[1] + 1) + j) * (n[2] + 1) + k

        # Kuhn subdivision: one tet per vertex-permutation path along the
        # main diagonal of the cube.
        paths = list(permutations(range(3)))
        cells = []
        for i in range(n[0]):
            for j in range(n[1]):
                for k in range(n[2]):
                    base = np.array([i, j, k])
                    for path in paths:
                        corner = base.copy()
                        tet = [vid(*corner)]
                        for axis in path:
                            corner[axis] += 1
                            tet.append(vid(*corner))
                        cells.append(tuple(tet))
    h = float(np.max((upper - lower) / n))
    return Mesh(dim, verts, np.array(cells, dtype=np.int64), h=h)


def extract_submesh(mesh: Mesh, cell_mask) -> tuple[Mesh, np.ndarray]:
    """Submesh of the selected cells.

    Returns the new mesh and the array of original vertex ids, i.e.
    ``sub.vertices == mesh.vertices[vertex_ids]``.
    """
    cell_mask = np.asarray(cell_mask, dtype=bool)
    if cell_mask.shape != (mesh.num_cells,):
        raise ValueError("cell_mask must have one entry per cell")
    if not cell_mask.any():
        raise ValueError("submesh selection is empty")
    kept = mesh.cells[cell_mask]
    vertex_ids = np.unique(kept)
    renumber = np.full(mesh.num_vertices, -1, dtype=np.int64)
    renumber[vertex_ids] = np.arange(len(vertex_ids))
    sub = Mesh(mesh.dim, mesh.vertices[vertex_ids], renumber[kept], h=mesh.h)
    return sub, vertex_ids
