"""Scikit-learn compatible wrapper around the redistancing core.

Each row of ``X`` is a per-vertex level-set field on the mesh bound at
construction time; ``transform`` returns the redistanced fields row by row.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .mesh import Mesh
from .redistance import RedistanceConfig, run


class Redistancer(BaseEstimator, TransformerMixin):
    """Transform level-set fields into approximate signed distance fields.

    Parameters mirror :class:`redistfem.redistance.RedistanceConfig`; the
    mesh is a constructor argument so the estimator composes with pipelines
    operating on arrays of nodal values.

    Attributes
    ----------
    n_features_in_ : int
        Number of mesh vertices seen during :meth:`fit`.
    reports_ : list of RedistanceReport
        One report per row of the last ``transform`` call.
    """

    def __init__(self, mesh: Mesh | None = None, mode: str = "unfitted",
                 scheme: str = "original", gamma_d: float = 1e4,
                 eps_grad: float = 1e-10, stop_rule: str = "increment",
                 stop_eps: float = 1e-8, max_iters: int = 500,
                 annulus: float | None = None, predictor: bool = True,
                 solver_tol: float = 1e-12):
        self.mesh = mesh
        self.mode = mode
        self.scheme = scheme
        self.gamma_d = gamma_d
        self.eps_grad = eps_grad
        self.stop_rule = stop_rule
        self.stop_eps = stop_eps
        self.max_iters = max_iters
        self.annulus = annulus
        self.predictor = predictor
        self.solver_tol = solver_tol

    def _config(self) -> RedistanceConfig:
        return RedistanceConfig(
            mode=self.mode, scheme=self.scheme, gamma_d=self.gamma_d,
            eps_grad=self.eps_grad, stop_rule=self.stop_rule,
            stop_eps=self.stop_eps, max_iters=self.max_iters,
            annulus=self.annulus, predictor=self.predictor,
            solver_tol=self.solver_tol).validate()

    def _validate_X(self, X) -> np.ndarray:
        X = check_array(X, dtype=np.float64, ensure_2d=False)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.mesh.num_vertices:
            raise ValueError(
                f"X has {X.shape[1]} columns but the mesh has "
                f"{self.mesh.num_vertices} vertices")
        return X

    def fit(self, X, y=None):
        if self.mesh is None:
            raise ValueError("Redistancer requires a mesh")
        self._config()
        X = self._validate_X(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "n_features_in_")
        X = self._validate_X(X)
        cfg = self._config()
        out = np.empty_like(X)
        reports = []
        for k, row in enumerate(X):
            report = run(self.mesh, row, cfg)
            if report.band_vertices is None:
                out[k] = report.field
            else:
                out[k] = row
                out[k, report.band_vertices] = report.field
            reports.append(report)
        self.reports_ = reports
        return out
