"""Analytic initial level-set functions and exact signed-distance references.

Every case evaluates deterministically; the noisy arctan case derives its
per-point perturbation from a keyed hash of the coordinates, so repeated
evaluation is bitwise reproducible for a fixed seed regardless of call order.
"""
from __future__ import annotations

import hashlib

import numpy as np


def _points(p, dim: int):
    arr = np.asarray(p, dtype=np.float64)
    if dim == 1:
        squeeze = arr.ndim == 0
        arr = arr.reshape(-1, 1)
    else:
        squeeze = arr.ndim == 1
        arr = np.atleast_2d(arr)
    if arr.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {arr.shape}")
    return np.ascontiguousarray(arr), squeeze


def _ret(values: np.ndarray, squeeze: bool):
    return float(values[0]) if squeeze else values


class CircleLevelSet:
    """Quadratic circle function (x-x0)^2 + (y-y0)^2 - r^2 (not a distance)."""

    dim = 2

    def __init__(self, center=(0.5, 0.5), radius=0.25):
        self.center = np.asarray(center, dtype=np.float64)
        self.radius = float(radius)

    def __call__(self, p):
        pts, sq = _points(p, 2)
        rel = pts - self.center
        return _ret((rel ** 2).sum(axis=1) - self.radius ** 2, sq)

    def exact_sdf(self, p):
        pts, sq = _points(p, 2)
        return _ret(np.linalg.norm(pts - self.center, axis=1) - self.radius, sq)


class StepLevelSet:
    """Piecewise constant step: +1 left of the threshold, -1 right of it."""

    dim = 2

    def __init__(self, threshold=0.5):
        self.threshold = float(threshold)

    def __call__(self, p):
        pts, sq = _points(p, 2)
        x = pts[:, 0]
        return _ret(np.where(x > self.threshold, -1.0,
                             np.where(x < self.threshold, 1.0, 0.0)), sq)

    def exact_sdf(self, p):
        pts, sq = _points(p, 2)
        return _ret(self.threshold - pts[:, 0], sq)


class ThreeSlopeLevelSet:
    """1D piecewise-affine profile with slopes 0.6, 0.3 and 0 on [0, 1].

    The single zero crossing sits at x = 0.5; the flat tail on [2/3, 1]
    makes this the canonical stress test for gradient-degenerate regions.
    """

    dim = 1

    def __call__(self, p):
        pts, sq = _points(p, 1)
        x = pts[:, 0]
        vals = np.where(x <= 1.0 / 3.0, 0.6 * x - 0.25,
                        np.where(x <= 2.0 / 3.0, 0.3 * x - 0.15, 0.05))
        return _ret(vals, sq)

    def exact_sdf(self, p):
        pts, sq = _points(p, 1)
        return _ret(pts[:, 0] - 0.5, sq)


class ArctanNoiseLevelSet:
    """arctan(10(x - 0.5)) plus small independent Gaussian noise per point."""

    dim = 2

    def __init__(self, amplitude=0.02, seed=0, steepness=10.0, threshold=0.5):
        self.amplitude = float(amplitude)
        self.seed = int(seed)
        self.steepness = float(steepness)
        self.threshold = float(threshold)

    def _noise(self, pts: np.ndarray) -> np.ndarray:
        key = np.int64(self.seed).tobytes()
        out = np.empty(len(pts))
        for i, row in enumerate(pts):
            digest = hashlib.blake2b(row.tobytes(), key=key, digest_size=8).digest()
            rng = np.random.default_rng(int.from_bytes(digest, "little"))
            out[i] = rng.standard_normal()
        return out

    def __call__(self, p):
        pts, sq = _points(p, 2)
        vals = np.arctan(self.steepness * (pts[:, 0] - self.threshold))
        if self.amplitude != 0.0:
            vals = vals + self.amplitude * self._noise(pts)
        return _ret(vals, sq)

    def exact_sdf(self, p):
        if self.amplitude != 0.0:
            raise ValueError("exact distance unknown for a perturbed interface")
        pts, sq = _points(p, 2)
        return _ret(pts[:, 0] - self.threshold, sq)


class StarLevelSet:
    """Star-shaped contour r(theta) = 0.25 + 0.1 cos(n theta + 2) about a center."""

    dim = 2

    def __init__(self, center=(0.5, 0.5), rays=8):
        self.center = np.asarray(center, dtype=np.float64)
        self.rays = int(rays)

    def __call__(self, p):
        pts, sq = _points(p, 2)
        rel = pts - self.center
        rho = np.linalg.norm(rel, axis=1)
        theta = np.arctan2(rel[:, 1], rel[:, 0])
        vals = 0.5 * (rho - 0.25 - 0.1 * np.cos(self.rays * theta + 2.0))
        return _ret(vals, sq)


class TorusLevelSet:
    """Torus quartic (sqrt(x^2 + y^2) - R)^2 + z^2 - r^2 with exact distance."""

    dim = 3

    def __init__(self, ring_radius=0.75, tube_radius=0.25):
        self.ring_radius = float(ring_radius)
        self.tube_radius = float(tube_radius)

    def _tube_distance(self, pts: np.ndarray) -> np.ndarray:
        axial = np.hypot(pts[:, 0], pts[:, 1]) - self.ring_radius
        return np.hypot(axial, pts[:, 2])

    def __call__(self, p):
        pts, sq = _points(p, 3)
        return _ret(self._tube_distance(pts) ** 2 - self.tube_radius ** 2, sq)

    def exact_sdf(self, p):
        pts, sq = _points(p, 3)
        return _ret(self._tube_distance(pts) - self.tube_radius, sq)


def sign_field(phi0, tol_zero: float = 0.0) -> np.ndarray:
    """Vertex sign of the initial level set: -1, 0 or +1 per vertex.

    Values within ``tol_zero`` of zero count as lying on the interface.
    """
    if tol_zero < 0:
        raise ValueError("tol_zero must be non-negative")
    phi0 = np.asarray(phi0, dtype=np.float64)
    out = np.zeros(phi0.shape, dtype=np.int8)
    out[phi0 > tol_zero] = 1
    out[phi0 < -tol_zero] = -1
    return out
