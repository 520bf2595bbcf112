"""Benchmark case registry: mesh, initial level set, exact distance and
per-case defaults for the CLI and the test suite."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import levelset as ls
from .mesh import Mesh, box_mesh, interval_mesh


@dataclass
class CaseSetup:
    tag: str
    mesh: Mesh
    phi0: np.ndarray
    exact_sdf: object | None
    levelset: object
    defaults: dict = field(default_factory=dict)


_CASE_DEFAULTS = {
    # gamma values follow the benchmark convention of each test problem
    "piecewise_affine_1d": dict(n=120, mode="fitted", gamma_d=1e4),
    "circle": dict(n=80, mode="unfitted", gamma_d=1e4),
    "step": dict(n=40, mode="unfitted", gamma_d=10.0),
    "arctan_noise": dict(n=41, mode="unfitted", gamma_d=10.0),
    "star": dict(n=160, mode="unfitted", gamma_d=1e3),
    "torus": dict(n=20, mode="unfitted", gamma_d=1e3),
}

CASE_TAGS = tuple(_CASE_DEFAULTS)


def case_defaults(tag: str) -> dict:
    if tag not in _CASE_DEFAULTS:
        raise ValueError(f"unknown case {tag!r}; available: {', '.join(CASE_TAGS)}")
    return dict(_CASE_DEFAULTS[tag])


def build_case(tag: str, n: int | None = None, seed: int = 0,
               params: dict | None = None) -> CaseSetup:
    """Instantiate a benchmark case at resolution ``n`` (cells per axis)."""
    defaults = case_defaults(tag)
    params = dict(params or {})
    n = int(n if n is not None else defaults["n"])

    if tag == "piecewise_affine_1d":
        if n % 6:
            raise ValueError("piecewise_affine_1d needs n divisible by 6 so "
                             "the breakpoints and zero crossing are vertices")
        mesh = interval_mesh(0.0, 1.0, n)
        case = ls.ThreeSlopeLevelSet()
        exact = case.exact_sdf
    elif tag == "circle":
        mesh = box_mesh((0.0, 0.0), (1.0, 1.0), n)
        case = ls.CircleLevelSet(center=params.pop("center", (0.5, 0.5)),
                                 radius=params.pop("radius", 0.25))
        exact = case.exact_sdf
    elif tag == "step":
        mesh = box_mesh((0.0, 0.0), (1.0, 1.0), n)
        case = ls.StepLevelSet(threshold=params.pop("threshold", 0.5))
        exact = case.exact_sdf
    elif tag == "arctan_noise":
        mesh = box_mesh((0.0, 0.0), (1.0, 1.0), n)
        case = ls.ArctanNoiseLevelSet(
            amplitude=params.pop("amplitude", 0.02), seed=seed,
            steepness=params.pop("steepness", 10.0))
        exact = case.exact_sdf if case.amplitude == 0.0 else None
    elif tag == "star":
        mesh = box_mesh((0.0, 0.0), (1.0, 1.0), n)
        case = ls.StarLevelSet(center=params.pop("center", (0.5, 0.5)),
                               rays=params.pop("rays", 8))
        exact = None
    else:  # torus
        half = params.pop("half_width", 1.25)
        mesh = box_mesh((-half,) * 3, (half,) * 3, n)
        case = ls.TorusLevelSet(ring_radius=params.pop("ring_radius", 0.75),
                                tube_radius=params.pop("tube_radius", 0.25))
        exact = case.exact_sdf
    if params:
        raise ValueError(f"unknown parameters for case {tag!r}: {sorted(params)}")
    phi0 = case(mesh.vertices)
    return CaseSetup(tag=tag, mesh=mesh, phi0=phi0, exact_sdf=exact,
                     levelset=case, defaults=defaults)
