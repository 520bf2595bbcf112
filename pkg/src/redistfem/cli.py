"""Command line driver: single runs, convergence sweeps and scheme comparisons.

Configuration comes from a JSON file (``--config``) whose keys mirror the run
spec; every field can be overridden by a flag of the same name.  Exit codes:
0 success, 1 configuration error, 2 numerical failure (solver breakdown or
non-finite values), 3 non-convergence within the iteration budget.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .cases import CASE_TAGS, build_case, case_defaults
from .fem import SolverError
from .metrics import convergence_order
from .redistance import NumericalError, RedistanceConfig, RedistanceReport, run
from .vtkio import write_interface_vtk, write_vtk


class ConfigError(ValueError):
    pass


EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_NO_CONVERGENCE = 0, 1, 2, 3

_SPEC_KEYS = {
    "case": str, "n": (int, list), "seed": int, "case_params": dict,
    "mode": str, "scheme": str, "gamma_d": (int, float),
    "eps_grad": (int, float), "stop_rule": str, "stop_eps": (int, float),
    "max_iters": int, "annulus": (int, float, type(None)),
    "predictor": bool, "solver_tol": (int, float), "schemes": list,
    "out": str, "vtk": bool, "csv": bool, "interface_vtk": bool,
}

_VARIANTS = {
    # token -> (picard scheme, predictor enabled)
    "pc": ("original", True),
    "elliptic": ("original", False),
    "basting": ("basting", False),
    "adams": ("adams", False),
}


@dataclass
class RunSpec:
    case: str = "circle"
    n: object = None
    seed: int = 0
    case_params: dict = field(default_factory=dict)
    mode: str | None = None
    scheme: str = "original"
    gamma_d: float | None = None
    eps_grad: float = 1e-10
    stop_rule: str = "increment"
    stop_eps: float = 1e-8
    max_iters: int = 500
    annulus: float | None = None
    predictor: bool = True
    solver_tol: float = 1e-12
    schemes: list = field(default_factory=list)
    out: str = "results"
    vtk: bool = True
    csv: bool = True
    interface_vtk: bool = False


def _key_line(text: str, key: str) -> str:
    for i, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return f":{i}"
    return ""


def load_spec(config_path: str | None, overrides: dict) -> RunSpec:
    spec = RunSpec()
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise ConfigError(f"{config_path}: no such config file")
        text = path.read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(
                f"{config_path}:{err.lineno}:{err.colno}: {err.msg}") from err
        if not isinstance(data, dict):
            raise ConfigError(f"{config_path}:1: config must be a JSON object")
        for key, value in data.items():
            if key not in _SPEC_KEYS:
                raise ConfigError(
                    f"{config_path}{_key_line(text, key)}: unknown key {key!r}")
            expected = _SPEC_KEYS[key]
            if not isinstance(expected, tuple):
                expected = (expected,)
            ok = isinstance(value, expected) and not (
                isinstance(value, bool) and bool not in expected)
            if not ok:
                raise ConfigError(
                    f"{config_path}{_key_line(text, key)}: key {key!r} "
                    f"has invalid type {type(value).__name__}")
            setattr(spec, key, value)
    for key, value in overrides.items():
        if value is not None:
            setattr(spec, key, value)
    if spec.case not in CASE_TAGS:
        raise ConfigError(
            f"unknown case {spec.case!r}; available: {', '.join(CASE_TAGS)}")
    return spec


def _resolve(spec: RunSpec) -> tuple[RunSpec, RedistanceConfig]:
    defaults = case_defaults(spec.case)
    spec = replace(spec,
                   mode=spec.mode or defaults["mode"],
                   gamma_d=spec.gamma_d if spec.gamma_d is not None
                   else defaults["gamma_d"])
    try:
        cfg = RedistanceConfig(
            mode=spec.mode, scheme=spec.scheme, gamma_d=float(spec.gamma_d),
            eps_grad=float(spec.eps_grad), stop_rule=spec.stop_rule,
            stop_eps=float(spec.stop_eps), max_iters=int(spec.max_iters),
            annulus=None if spec.annulus is None else float(spec.annulus),
            predictor=bool(spec.predictor),
            solver_tol=float(spec.solver_tol)).validate()
    except ValueError as err:
        raise ConfigError(str(err)) from err
    return spec, cfg


def _single_n(spec: RunSpec) -> int:
    if spec.n is None:
        return case_defaults(spec.case)["n"]
    if isinstance(spec.n, list):
        if len(spec.n) != 1:
            raise ConfigError("this command needs a single mesh resolution")
        return int(spec.n[0])
    return int(spec.n)


def _csv_value(x) -> str:
    return "nan" if x is None else repr(float(x))


def write_history_csv(path, report: RedistanceReport) -> None:
    lines = ["iter,eikonal_error,l2_error,interface_error"]
    lines.append(",".join(["0", _csv_value(report.initial_eikonal),
                           _csv_value(report.initial_l2),
                           _csv_value(report.initial_interface)]))
    for k in range(report.iterations):
        l2 = None if report.l2_errors is None else report.l2_errors[k]
        lines.append(",".join([str(k + 1),
                               _csv_value(report.eikonal_errors[k]),
                               _csv_value(l2),
                               _csv_value(report.interface_errors[k])]))
    Path(path).write_text("\n".join(lines) + "\n")


def _print_report(report: RedistanceReport) -> None:
    err = report.final_errors()
    status = "converged" if report.converged else "NOT converged"
    print(f"{status} after {report.iterations} iterations "
          f"({report.wall_time:.6g} s)")
    l2 = "n/a" if err.l2_error is None else f"{err.l2_error:.6g}"
    print(f"h = {err.h:.6g}  eikonal = {err.eikonal_error:.6g}  "
          f"l2 = {l2}  interface = {err.interface_error:.6g}")


def _execute(spec: RunSpec, cfg: RedistanceConfig, n: int,
             out_dir: Path) -> RedistanceReport:
    setup = build_case(spec.case, n=n, seed=spec.seed, params=spec.case_params)
    report = run(setup.mesh, setup.phi0, cfg, exact_sdf=setup.exact_sdf)
    out_dir.mkdir(parents=True, exist_ok=True)
    if spec.csv:
        write_history_csv(out_dir / "history.csv", report)
    if spec.vtk:
        mesh = report.mesh
        if report.band_vertices is None:
            phi0_out = setup.phi0
        else:
            phi0_out = setup.phi0[report.band_vertices]
        write_vtk(out_dir / "final.vtk", mesh,
                  {"phi": report.field, "phi0": phi0_out})
        if report.predictor_field is not None:
            write_vtk(out_dir / "predictor.vtk", mesh,
                      {"phi_p": report.predictor_field})
    if spec.interface_vtk:
        from .cutfem import reconstruct_interface
        interface = reconstruct_interface(report.mesh,
                                          setup.phi0 if report.band_vertices is None
                                          else setup.phi0[report.band_vertices])
        write_interface_vtk(out_dir / "interface.vtk", interface)
    return report


def cmd_run(spec: RunSpec) -> int:
    spec, cfg = _resolve(spec)
    report = _execute(spec, cfg, _single_n(spec), Path(spec.out))
    _print_report(report)
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def cmd_convergence(spec: RunSpec) -> int:
    spec, cfg = _resolve(spec)
    if not isinstance(spec.n, list) or len(spec.n) < 2:
        raise ConfigError("convergence needs a list of at least two "
                          "mesh resolutions (e.g. --n 60,80,120,160)")
    resolutions = [int(v) for v in spec.n]
    if len(set(resolutions)) != len(resolutions):
        raise ConfigError("mesh resolutions must be distinct")
    out = Path(spec.out)
    rows, all_converged = [], True
    for n in resolutions:
        report = _execute(spec, cfg, n, out / f"n{n}")
        err = report.final_errors()
        rows.append((err.h, err.eikonal_error, err.l2_error,
                     err.interface_error, report.iterations, report.converged))
        all_converged &= report.converged
        print(f"n={n}: ", end="")
        _print_report(report)
    orders = []
    for col in (1, 2, 3):
        samples = [(r[0], r[col]) for r in rows if r[col] is not None]
        orders.append(convergence_order(samples) if len(samples) >= 2 else None)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["h,eikonal_error,l2_error,interface_error,iterations,converged"]
    for h, eik, l2, gam, iters, conv in rows:
        lines.append(",".join([repr(float(h)), _csv_value(eik), _csv_value(l2),
                               _csv_value(gam), str(iters), str(conv)]))
    lines.append(",".join(["order", _csv_value(orders[0]), _csv_value(orders[1]),
                           _csv_value(orders[2]), "", ""]))
    (out / "orders.csv").write_text("\n".join(lines) + "\n")
    names = ("eikonal", "l2", "interface")
    parts = [f"{nm} = {o:.6g}" for nm, o in zip(names, orders) if o is not None]
    print("orders: " + "  ".join(parts))
    return EXIT_OK if all_converged else EXIT_NO_CONVERGENCE


def cmd_compare(spec: RunSpec) -> int:
    spec, cfg = _resolve(spec)
    tokens = list(spec.schemes)
    if len(tokens) < 2:
        raise ConfigError("compare needs at least two variants "
                          "(e.g. --schemes pc,elliptic)")
    unknown = [t for t in tokens if t not in _VARIANTS]
    if unknown:
        raise ConfigError(f"unknown variants {unknown}; "
                          f"available: {', '.join(_VARIANTS)}")
    out = Path(spec.out)
    n = _single_n(spec)
    rows, all_converged = [], True
    for token in tokens:
        scheme, use_predictor = _VARIANTS[token]
        variant_cfg = replace(cfg, scheme=scheme, predictor=use_predictor)
        report = _execute(spec, variant_cfg, n, out / token)
        err = report.final_errors()
        rows.append((token, report.iterations, report.converged,
                     err.eikonal_error, err.l2_error, err.interface_error))
        all_converged &= report.converged
        print(f"{token}: ", end="")
        _print_report(report)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["variant,iterations,converged,eikonal_error,l2_error,interface_error"]
    for token, iters, conv, eik, l2, gam in rows:
        lines.append(",".join([token, str(iters), str(conv), _csv_value(eik),
                               _csv_value(l2), _csv_value(gam)]))
    (out / "compare.csv").write_text("\n".join(lines) + "\n")
    return EXIT_OK if all_converged else EXIT_NO_CONVERGENCE


def _int_list(text: str):
    parts = [p for p in text.split(",") if p]
    values = [int(p) for p in parts]
    return values[0] if len(values) == 1 else values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="redistfem",
        description="Signed-distance reinitialization of level-set fields "
                    "with a predictor-corrector finite element method.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("convergence", cmd_convergence),
                     ("compare", cmd_compare)):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--config", default=None, help="JSON run spec")
        p.add_argument("--case", choices=CASE_TAGS, default=None)
        p.add_argument("--n", type=_int_list, default=None,
                       help="mesh resolution, or comma list for sweeps")
        p.add_argument("--gamma-d", dest="gamma_d", type=float, default=None)
        p.add_argument("--scheme", choices=("original", "basting", "adams"),
                       default=None)
        p.add_argument("--mode", choices=("fitted", "unfitted"), default=None)
        p.add_argument("--no-predictor", dest="predictor",
                       action="store_const", const=False, default=None)
        p.add_argument("--annulus", type=float, default=None,
                       help="narrow band width in multiples of h")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--stop-rule", dest="stop_rule",
                       choices=("residual", "increment"), default=None)
        p.add_argument("--stop-eps", dest="stop_eps", type=float, default=None)
        p.add_argument("--max-iters", dest="max_iters", type=int, default=None)
        p.add_argument("--eps-grad", dest="eps_grad", type=float, default=None)
        p.add_argument("--solver-tol", dest="solver_tol", type=float,
                       default=None)
        p.add_argument("--interface-vtk", dest="interface_vtk",
                       action="store_const", const=True, default=None)
        p.add_argument("--no-vtk", dest="vtk", action="store_const",
                       const=False, default=None)
        if name == "compare":
            p.add_argument("--schemes", type=lambda s: s.split(","),
                           default=None,
                           help="comma list from: " + ", ".join(_VARIANTS))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "fn", "config")}
    try:
        spec = load_spec(args.config, overrides)
        return args.fn(spec)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, NumericalError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
