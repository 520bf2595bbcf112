"""Small input-validation helpers shared across the package."""
from __future__ import annotations

import numpy as np


def as_float_array(values, name: str = "array") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf values")
    return arr


def check_field(mesh, values, name: str = "field") -> np.ndarray:
    """Validate a per-vertex coefficient vector against a mesh.

    Returns the values as a finite 1-d float64 array of length
    ``mesh.num_vertices``.
    """
    arr = as_float_array(values, name)
    if arr.ndim != 1 or arr.shape[0] != mesh.num_vertices:
        raise ValueError(
            f"{name} must have one value per vertex: expected length "
            f"{mesh.num_vertices}, got shape {arr.shape}"
        )
    return arr


def check_cell_id(mesh, cell_id: int) -> int:
    cell_id = int(cell_id)
    if not 0 <= cell_id < mesh.num_cells:
        raise IndexError(
            f"cell id {cell_id} out of range for mesh with {mesh.num_cells} cells"
        )
    return cell_id
