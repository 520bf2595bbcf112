"""Predictor-corrector redistancing.

The predictor solves the linear diffusion problem ``-lap(phi_p) = sgn(phi0)``
with a homogeneous condition on the zero contour and sign-valued Neumann data
on the domain boundary, producing a sign-preserving first guess free of flat
regions.  The corrector then runs Picard iterations on the least-squares
minimization of the Eikonal equation: each step solves a Laplace problem
whose right-hand side carries the nonlinear diffusion coefficient evaluated
at the previous iterate.  The interface condition is enforced strongly on an
interface-fitted mesh or weakly (Nitsche with cut quadrature) on an unfitted
background mesh.  The system operator is assembled once per run; only the
right-hand side changes across iterations.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import fem, metrics
from .cutfem import (assemble_nitsche, cut_quadrature, reconstruct_interface,
                     snap_tolerance)
from .levelset import sign_field
from .mesh import Mesh, extract_submesh
from .validation import check_field

MODES = ("fitted", "unfitted")
SCHEMES = ("original", "basting", "adams")
STOP_RULES = ("residual", "increment")


class NumericalError(RuntimeError):
    """A run produced non-finite values."""


# The Nitsche terms are assembled with the midpoint rule: it integrates the
# consistency terms exactly (P1 trace times constant flux is affine on each
# facet) and lumps the penalty to one constraint per facet.  A two-point rule
# additionally pins the tangential slope of the trace along the inexact
# reconstructed contour, which over-constrains cut cells and makes the Picard
# map admit a spurious zigzag fixed point next to the interface.
_NITSCHE_QUAD_DEGREE = 1


@dataclass
class RedistanceConfig:
    """Parameters of a redistancing run.

    ``annulus`` restricts the computation to a narrow band of cells whose
    predictor magnitude is at most ``annulus * h``; ``None`` runs on the full
    domain.
    """

    mode: str = "unfitted"
    scheme: str = "original"
    gamma_d: float = 1e4
    eps_grad: float = 1e-10
    stop_rule: str = "increment"
    stop_eps: float = 1e-8
    max_iters: int = 500
    annulus: float | None = None
    predictor: bool = True
    solver_tol: float = 1e-12
    quad_degree: int = 2

    def validate(self) -> "RedistanceConfig":
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.stop_rule not in STOP_RULES:
            raise ValueError(
                f"stop_rule must be one of {STOP_RULES}, got {self.stop_rule!r}")
        if not self.gamma_d > 0:
            raise ValueError("gamma_d must be positive")
        if not self.eps_grad > 0:
            raise ValueError("eps_grad must be positive")
        if not self.stop_eps > 0:
            raise ValueError("stop_eps must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.annulus is not None and not self.annulus > 0:
            raise ValueError("annulus band width must be positive")
        return self


@dataclass
class RedistanceReport:
    """Iteration history and final state of a run.

    The per-iteration arrays have one entry per corrector solve; the state of
    the initial iterate (predictor or raw input) is kept separately in the
    ``initial_*`` fields.  For narrow-band runs ``mesh`` is the band submesh
    and ``band_vertices`` maps its vertices back to the original mesh.
    """

    mesh: Mesh
    field: np.ndarray
    predictor_field: np.ndarray | None
    iterations: int
    converged: bool
    wall_time: float
    eikonal_errors: np.ndarray
    interface_errors: np.ndarray
    l2_errors: np.ndarray | None
    initial_eikonal: float
    initial_interface: float
    initial_l2: float | None
    sign_violations: np.ndarray
    band_vertices: np.ndarray | None = None

    def final_errors(self) -> metrics.ErrorReport:
        last = self.iterations - 1
        return metrics.ErrorReport(
            l2_error=None if self.l2_errors is None else float(self.l2_errors[last]),
            eikonal_error=float(self.eikonal_errors[last]),
            interface_error=float(self.interface_errors[last]),
            h=self.mesh.h,
        )


def d_star(scheme: str, g, eps_grad: float):
    """Picard diffusion coefficient of the selected scheme.

    original: 1/max(g, eps) everywhere; the modified schemes replace the
    g <= 1 branch by 3g - 2g^2 (double-well potential) or 2 - g.
    """
    if eps_grad <= 0:
        raise ValueError("eps_grad must be positive")
    g = np.asarray(g, dtype=np.float64)
    if np.any(g < 0):
        raise ValueError("gradient norms must be non-negative")
    inv = 1.0 / np.maximum(g, eps_grad)
    if scheme == "original":
        out = inv
    elif scheme == "basting":
        out = np.where(g > 1.0, inv, 3.0 * g - 2.0 * g ** 2)
    elif scheme == "adams":
        out = np.where(g > 1.0, inv, 2.0 - g)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return out if out.ndim else float(out)


class CorrectorSystem:
    """Operator shared by the predictor and all corrector iterations.

    Assembles the stiffness matrix once and applies the interface treatment
    of the selected mode: symmetric Nitsche terms over the reconstructed zero
    contour (unfitted) or strong elimination of the vertices lying on it
    (fitted).  The zero contour is frozen from the initial level set.
    """

    def __init__(self, mesh: Mesh, phi0, cfg: RedistanceConfig):
        cfg.validate()
        self.mesh = mesh
        self.cfg = cfg
        phi0 = check_field(mesh, phi0, "phi0")
        self.interface = reconstruct_interface(mesh, phi0, cfg.quad_degree)
        if self.interface.num_facets == 0:
            raise ValueError("no interface: phi0 does not change sign")
        stiffness = fem.assemble_stiffness(mesh)
        zero = np.zeros(mesh.num_vertices)
        if cfg.mode == "unfitted":
            self.dirichlet = None
            nitsche_quad = cut_quadrature(self.interface, _NITSCHE_QUAD_DEGREE)
            self.matrix, _ = assemble_nitsche(
                stiffness, zero, mesh, nitsche_quad, cfg.gamma_d)
        else:
            tol = snap_tolerance(phi0)
            dofs = np.flatnonzero(np.abs(phi0) <= tol)
            if len(dofs) == 0:
                raise ValueError(
                    "fitted mode requires mesh vertices on the zero level set")
            self.dirichlet = dofs
            self.matrix, _ = fem.apply_strong_dirichlet(stiffness, zero, dofs, 0.0)
        cut = np.zeros(mesh.num_cells, dtype=bool)
        cut[self.interface.cells] = True
        uncut = np.ones(mesh.num_vertices, dtype=bool)
        uncut[mesh.cells[cut].ravel()] = False
        if self.dirichlet is not None:
            uncut[self.dirichlet] = False
        self.uncut_vertices = np.flatnonzero(uncut)

    def solve(self, b: np.ndarray, x0=None) -> np.ndarray:
        if self.dirichlet is not None:
            b = b.copy()
            b[self.dirichlet] = 0.0
        return fem.solve_spd(self.matrix, b, tol=self.cfg.solver_tol, x0=x0)


def solve_predictor(mesh: Mesh, phi0, cfg: RedistanceConfig,
                    system: CorrectorSystem | None = None) -> np.ndarray:
    """Solve the sign-source diffusion predictor.

    Raises when ``phi0`` does not change sign.  The returned field is checked
    a posteriori for sign agreement with ``phi0`` away from the interface; a
    violation signals a broken setup and is reported as a warning.
    """
    phi0 = check_field(mesh, phi0, "phi0")
    if system is None:
        system = CorrectorSystem(mesh, phi0, cfg)
    sgn = sign_field(phi0, tol_zero=1e-14 * mesh.domain_diameter())
    if not (np.any(sgn > 0) and np.any(sgn < 0)):
        raise ValueError("no interface: phi0 does not change sign")
    b = fem.assemble_sign_source(mesh, sgn)
    phi_p = system.solve(b)
    bad = _sign_violations(phi_p, sgn, system.uncut_vertices)
    if bad:
        warnings.warn(
            f"predictor sign disagrees with phi0 at {bad} vertices away from "
            "the interface", RuntimeWarning, stacklevel=2)
    return phi_p


def corrector_step(mesh: Mesh, phi_n, cfg: RedistanceConfig,
                   system: CorrectorSystem) -> np.ndarray:
    """One Picard update: solve the pre-assembled operator against the
    nonlinear right-hand side of the previous iterate."""
    b = fem.assemble_corrector_rhs(mesh, phi_n, cfg.eps_grad, cfg.scheme)
    return system.solve(b, x0=np.asarray(phi_n, dtype=np.float64))


def _sign_violations(phi: np.ndarray, sgn0: np.ndarray, vertices: np.ndarray) -> int:
    idx = vertices[sgn0[vertices] != 0]
    return int(np.count_nonzero(np.sign(phi[idx]) != sgn0[idx]))


def run(mesh: Mesh, phi0, cfg: RedistanceConfig,
        exact_sdf=None) -> RedistanceReport:
    """Predictor (optional) followed by Picard corrector iterations.

    Stops when the configured rule holds: ``residual`` compares the Eikonal
    L2 norm against ``stop_eps``; ``increment`` compares the change of that
    norm between consecutive iterates.  Hitting ``max_iters`` is reported as
    non-convergence, not raised.
    """
    cfg.validate()
    if cfg.annulus is not None:
        return narrow_band_run(mesh, phi0, cfg, cfg.annulus, exact_sdf)
    t0 = time.perf_counter()
    phi0 = check_field(mesh, phi0, "phi0")
    system = CorrectorSystem(mesh, phi0, cfg)
    sgn0 = sign_field(phi0, tol_zero=1e-14 * mesh.domain_diameter())

    # The interface error is measured over the zero set of the predictor
    # solution (the initial value of the iterative scheme), so the predictor
    # is solved even when it does not seed the iteration.  Its contour
    # deviates from the reconstructed zero set of phi0 at the same order the
    # norm resolves, so the two are not interchangeable.
    phi_p = solve_predictor(mesh, phi0, cfg, system=system)
    measure_iface = reconstruct_interface(mesh, phi_p, cfg.quad_degree)

    if cfg.predictor:
        phi = phi_p.copy()
        predictor_field = phi_p
    else:
        phi = phi0.copy()
        predictor_field = None

    track_l2 = exact_sdf is not None
    eik_hist: list[float] = []
    gam_hist: list[float] = []
    l2_hist: list[float] = []
    viol_hist: list[int] = []

    initial_eik = metrics.eikonal_error(mesh, phi)
    initial_gam = metrics.interface_error(mesh, phi, measure_iface)
    initial_l2 = metrics.l2_error(mesh, phi, exact_sdf) if track_l2 else None

    eik_prev = initial_eik
    converged = False
    for _ in range(cfg.max_iters):
        phi = corrector_step(mesh, phi, cfg, system)
        if not np.all(np.isfinite(phi)):
            raise NumericalError("corrector iterate contains non-finite values")
        eik = metrics.eikonal_error(mesh, phi)
        eik_hist.append(eik)
        gam_hist.append(metrics.interface_error(mesh, phi, measure_iface))
        if track_l2:
            l2_hist.append(metrics.l2_error(mesh, phi, exact_sdf))
        viol_hist.append(_sign_violations(phi, sgn0, system.uncut_vertices))
        if cfg.stop_rule == "residual":
            converged = eik < cfg.stop_eps
        else:
            converged = abs(eik - eik_prev) < cfg.stop_eps
        eik_prev = eik
        if converged:
            break

    return RedistanceReport(
        mesh=mesh,
        field=phi,
        predictor_field=predictor_field,
        iterations=len(eik_hist),
        converged=converged,
        wall_time=time.perf_counter() - t0,
        eikonal_errors=np.array(eik_hist),
        interface_errors=np.array(gam_hist),
        l2_errors=np.array(l2_hist) if track_l2 else None,
        initial_eikonal=initial_eik,
        initial_interface=initial_gam,
        initial_l2=initial_l2,
        sign_violations=np.array(viol_hist, dtype=np.int64),
    )


def narrow_band_run(mesh: Mesh, phi0, cfg: RedistanceConfig,
                    band_width: float, exact_sdf=None) -> RedistanceReport:
    """Restrict the computation to cells near the zero contour.

    The band collects cells whose predictor magnitude is at most
    ``band_width * h`` plus one layer of neighbours; the run is then repeated
    on that submesh, whose outer boundary naturally receives the sign-valued
    Neumann condition of the predictor.  The report covers band cells only.
    """
    if not band_width > 0:
        raise ValueError("band width must be positive")
    t0 = time.perf_counter()
    phi0 = check_field(mesh, phi0, "phi0")
    full_cfg = replace(cfg, annulus=None)
    phi_p = solve_predictor(mesh, phi0, full_cfg)

    near = np.abs(phi_p) <= band_width * mesh.h
    core = near[mesh.cells].any(axis=1)
    if not core.any():
        raise ValueError("empty band: no cell within the requested width")
    touched = np.zeros(mesh.num_vertices, dtype=bool)
    touched[mesh.cells[core].ravel()] = True
    band = core | touched[mesh.cells].any(axis=1)

    sub, vertex_ids = extract_submesh(mesh, band)
    report = run(sub, phi0[vertex_ids], full_cfg, exact_sdf)
    report.band_vertices = vertex_ids
    report.wall_time = time.perf_counter() - t0
    return report


def run_1d_comparison(scheme: str, n: int = 120,
                      iterations: int = 10) -> tuple[Mesh, np.ndarray]:
    """Fixed number of corrector iterations on the 1D three-slope profile.

    ``scheme`` selects the modified-diffusion variants ("basting", "adams",
    run without a predictor) or the predictor-corrector method ("pc").
    Returns the interface-fitted mesh and the field after ``iterations``
    fixed-point steps.
    """
    from .levelset import ThreeSlopeLevelSet

    variants = {"basting": ("basting", False), "adams": ("adams", False),
                "pc": ("original", True), "original": ("original", True),
                "pc-original": ("original", True)}
    if scheme not in variants:
        raise ValueError(f"scheme must be one of {sorted(variants)}, got {scheme!r}")
    picard_scheme, use_predictor = variants[scheme]
    if n % 6:
        raise ValueError("n must be a multiple of 6 so the slope breakpoints "
                         "and the zero crossing are mesh vertices")
    from .mesh import interval_mesh

    mesh = interval_mesh(0.0, 1.0, n)
    phi0 = ThreeSlopeLevelSet()(mesh.vertices)
    cfg = RedistanceConfig(mode="fitted", scheme=picard_scheme,
                           predictor=use_predictor, max_iters=iterations)
    system = CorrectorSystem(mesh, phi0, cfg)
    phi = solve_predictor(mesh, phi0, cfg, system=system) if use_predictor \
        else phi0.copy()
    for _ in range(iterations):
        phi = corrector_step(mesh, phi, cfg, system)
    return mesh, phi
