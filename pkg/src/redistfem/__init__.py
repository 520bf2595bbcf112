"""redistfem: finite element redistancing of level-set functions.

Computes approximate signed distance functions from arbitrary initial level
sets on simplicial meshes (1D/2D/3D) with a two-stage scheme: a linear
sign-source diffusion predictor followed by Picard-iterated least-squares
Eikonal correction, with fitted (strong Dirichlet) or unfitted (Nitsche +
cut quadrature) interface treatment.
"""
from .cutfem import (CutInterface, assemble_nitsche, classify_cells,
                     cut_quadrature, interface_normal, reconstruct_interface)
from .estimator import Redistancer
from .fem import (SolverError, apply_strong_dirichlet, assemble_corrector_rhs,
                  assemble_sign_source, assemble_stiffness, cell_gradients,
                  solve_spd)
from .levelset import (ArctanNoiseLevelSet, CircleLevelSet, StarLevelSet,
                       StepLevelSet, ThreeSlopeLevelSet, TorusLevelSet,
                       sign_field)
from .mesh import (CellGeometry, Mesh, box_mesh, cell_geometry,
                   extract_submesh, interval_mesh)
from .metrics import (ErrorReport, convergence_order, eikonal_error,
                      interface_error, l2_error, mean_gradient_norm)
from .redistance import (NumericalError, RedistanceConfig, RedistanceReport,
                         corrector_step, d_star, narrow_band_run, run,
                         run_1d_comparison, solve_predictor)

__version__ = "0.1.0"

__all__ = [
    "ArctanNoiseLevelSet", "CellGeometry", "CircleLevelSet", "CutInterface",
    "ErrorReport", "Mesh", "NumericalError", "RedistanceConfig",
    "RedistanceReport", "Redistancer", "SolverError", "StarLevelSet",
    "StepLevelSet", "ThreeSlopeLevelSet", "TorusLevelSet",
    "apply_strong_dirichlet", "assemble_corrector_rhs", "assemble_nitsche",
    "assemble_sign_source", "assemble_stiffness", "box_mesh",
    "cell_geometry", "cell_gradients", "classify_cells", "convergence_order",
    "corrector_step", "cut_quadrature", "d_star", "eikonal_error",
    "extract_submesh", "interface_error", "interface_normal",
    "interval_mesh", "l2_error", "mean_gradient_norm", "narrow_band_run",
    "reconstruct_interface", "run", "run_1d_comparison", "sign_field",
    "solve_predictor", "solve_spd",
]
