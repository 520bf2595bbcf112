"""Legacy ASCII VTK writers for meshes, vertex fields and interface facets."""
from __future__ import annotations

import numpy as np

from .cutfem import CutInterface
from .mesh import Mesh

_CELL_TYPES = {1: 3, 2: 5, 3: 10}  # VTK_LINE, VTK_TRIANGLE, VTK_TETRA


def _pad3(points: np.ndarray) -> np.ndarray:
    out = np.zeros((len(points), 3))
    out[:, :points.shape[1]] = points
    return out


def _fmt(x: float) -> str:
    return repr(float(x))


def write_vtk(path, mesh: Mesh, point_data: dict | None = None,
              title: str = "redistfem fields") -> None:
    """Write the mesh and optional per-vertex scalar fields as an
    unstructured grid (legacy ASCII format)."""
    point_data = point_data or {}
    pts = _pad3(mesh.vertices)
    m = mesh.dim + 1
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 2.0\n")
        f.write(f"{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {len(pts)} double\n")
        for p in pts:
            f.write(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
        f.write(f"\nCELLS {mesh.num_cells} {mesh.num_cells * (m + 1)}\n")
        for cell in mesh.cells:
            f.write(f"{m} " + " ".join(str(int(v)) for v in cell) + "\n")
        f.write(f"\nCELL_TYPES {mesh.num_cells}\n")
        ctype = _CELL_TYPES[mesh.dim]
        f.write("\n".join([str(ctype)] * mesh.num_cells) + "\n")
        if point_data:
            f.write(f"\nPOINT_DATA {mesh.num_vertices}\n")
            for name, values in point_data.items():
                values = np.asarray(values, dtype=np.float64)
                if values.shape != (mesh.num_vertices,):
                    raise ValueError(f"field {name!r} must be per-vertex")
                f.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
                f.write("\n".join(_fmt(v) for v in values) + "\n")


def write_interface_vtk(path, interface: CutInterface) -> None:
    """Write reconstructed interface facets as VTK polydata (vertices in 1D,
    lines in 2D, triangles in 3D)."""
    d = interface.dim
    pts = _pad3(interface.facet_points.reshape(-1, d))
    nf = interface.num_facets
    with open(path, "w") as f:
        f.write("# vtk DataFile Version 2.0\n")
        f.write("redistfem interface\nASCII\nDATASET POLYDATA\n")
        f.write(f"POINTS {len(pts)} double\n")
        for p in pts:
            f.write(f"{_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}\n")
        ids = np.arange(nf * d).reshape(nf, d)
        if d == 1:
            f.write(f"\nVERTICES {nf} {nf * 2}\n")
        elif d == 2:
            f.write(f"\nLINES {nf} {nf * 3}\n")
        else:
            f.write(f"\nPOLYGONS {nf} {nf * 4}\n")
        for row in ids:
            f.write(f"{d} " + " ".join(str(int(v)) for v in row) + "\n")
