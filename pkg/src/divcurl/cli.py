"""Command-line entry point ``divcurl``.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 for usage or configuration errors and 3 for numerical failures
(precondition violations, CG breakdown).  A JSON report is written on
every path, to ``--report`` or to standard output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import diffops as D
from . import fields as F
from . import io as qio
from . import set_threads
from .errors import (
    ConfigurationError,
    DivCurlError,
    FormatError,
    OutOfDomainError,
    PreconditionError,
    SingularPointError,
    SolverError,
    StencilError,
)
from .grid import BoundaryField, Domain, Field, build_ball_domain, build_box_domain, extend, extract_boundary
from .integral import QuadratureConfig
from .solvers import Conductivity, SolveReport
from .verify import EXPERIMENTS, ResidualSuite, convergence_order

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
N_RANGE = (8, 96)
DEFAULT_CHECK_TOL = 0.05


class UsageError(ConfigurationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ parsing

def _floats(text: str, count: int | None = None) -> np.ndarray:
    try:
        vals = np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc
    if count is not None and len(vals) != count:
        raise UsageError(f"expected {count} numbers, got {text!r}")
    return vals


def parse_domain(spec: str, n: int | None, star_center) -> Domain:
    """``ball:R:n`` or ``box:side:n`` (cube centered at the origin)."""
    parts = spec.split(":")
    if parts[0] not in ("ball", "box") or len(parts) not in (2, 3):
        raise UsageError(f"domain must look like ball:R:n or box:side:n, got {spec!r}")
    try:
        size = float(parts[1])
        nn = int(parts[2]) if len(parts) == 3 else 32
    except ValueError as exc:
        raise UsageError(f"bad domain numbers in {spec!r}") from exc
    nn = nn if n is None else int(n)
    if not N_RANGE[0] <= nn <= N_RANGE[1]:
        raise UsageError(f"n must lie in [{N_RANGE[0]}, {N_RANGE[1]}], got {nn}")
    if parts[0] == "ball":
        return build_ball_domain(size, nn, star_center=star_center)
    half = size / 2
    return build_box_domain((-half,) * 3, (half,) * 3, nn, star_center=star_center)


def _builtin_func(name: str):
    if name not in F.BUILTINS:
        raise UsageError(f"unknown builtin field {name!r}; choose from {sorted(F.BUILTINS)}")
    return F.BUILTINS[name]


def load_field(spec: str | None, domain: Domain, components: int) -> Field | None:
    """``builtin:name`` or ``file:path`` (QF1 on the same grid)."""
    if spec is None:
        return None
    kind, _, rest = spec.partition(":")
    if kind == "builtin":
        return F.builtin_field(rest, domain, components)
    if kind == "file":
        if not Path(rest).is_file():
            raise UsageError(f"input file {rest!r} does not exist")
        fld = qio.read_field(rest, domain)
        if fld.components != components:
            raise UsageError(f"{rest}: expected {components} components, found {fld.components}")
        return fld
    raise UsageError(f"field spec must be builtin:<name> or file:<path>, got {spec!r}")


def load_boundary(spec: str, domain: Domain, components: int) -> BoundaryField:
    """Boundary data from a builtin (evaluated exactly) or a file (interpolated)."""
    boundary = extract_boundary(domain)
    kind, _, rest = spec.partition(":")
    if kind == "builtin":
        comps, func = _builtin_func(rest)
        if rest == "zero":
            return BoundaryField(boundary, np.zeros((len(boundary.points), components)))
        if comps != components:
            raise UsageError(f"builtin {rest!r} has {comps} components, expected {components}")
        return BoundaryField.from_function(boundary, func)
    fld = load_field(spec, domain, components)
    return BoundaryField(boundary, extend(fld, 2).sample(boundary.points))


def load_conductivity(spec: str, domain: Domain) -> Conductivity:
    """``builtin:name``, ``file:path`` or ``const:value`` for the factor ``f``."""
    kind, _, rest = spec.partition(":")
    if kind == "const":
        try:
            return Conductivity.constant(domain, float(rest))
        except ValueError as exc:
            raise UsageError(f"bad constant {rest!r}") from exc
    if kind == "builtin":
        comps, func = _builtin_func(rest)
        if comps != 1:
            raise UsageError(f"conductivity factor must be scalar, {rest!r} is not")
        return Conductivity.from_function(domain, func)
    return Conductivity(load_field(spec, domain, 1))


def read_config_file(path: str) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    if not Path(path).is_file():
        raise UsageError(f"config file {path!r} does not exist")
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        k, v = (t.strip() for t in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(args, parser, overrides: dict):
    defaults = {a.dest: a for a in parser._actions}
    for key, raw in overrides.items():
        if key not in defaults or key in ("help", "command", "config"):
            raise UsageError(f"unknown config key {key!r}")
        action = defaults[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                value = action.type(raw)
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config key {key!r}: bad value {raw!r}") from exc
        else:
            value = raw
        setattr(args, key, value)


# ------------------------------------------------------------------ parser

def _common(p: argparse.ArgumentParser, domain: bool = True):
    if domain:
        p.add_argument("--domain", default="ball:1:32", help="ball:R:n or box:side:n (default ball:1:32)")
        p.add_argument("--n", type=int, default=None, help="voxels across the domain; overrides the domain spec")
        p.add_argument("--star-center", default=None, help="star center x,y,z")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default DIVCURL_THREADS or all cores)")
    p.add_argument("--config", default=None, help="flat key=value file overriding flags")
    p.add_argument("--out", default=None, help="output field path (.qf1, .csv or .vtk)")
    p.add_argument("--report", default=None, help="JSON report path (default: stdout)")
    p.add_argument("--tol", type=float, default=D.DEFAULT_TOL, help="precondition tolerance")
    p.add_argument("--check-tol", type=float, default=DEFAULT_CHECK_TOL, help="tolerance for reported residual checks")
    p.add_argument("--no-check", action="store_true", help="skip precondition gates")
    p.add_argument("--quad-depth", type=int, default=2, help="singular cell subdivision depth")
    p.add_argument("--eval-subset", type=int, default=1, help="evaluation lattice stride")
    p.add_argument("--near-radius", type=int, default=2, help="near-field table radius in cells")
    p.add_argument("--ray-count", type=int, default=32, help="Gauss nodes per ray integral")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="divcurl", description="Quaternionic div-curl, Vekua and static Maxwell solvers.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        return p

    p = cmd("solve-divcurl", "solve div w = g0, curl w = g")
    _common(p)
    p.add_argument("--g0", default=None, help="scalar field spec")
    p.add_argument("--g", default=None, help="solenoidal vector field spec")
    p.add_argument("--h", default=None, help="harmonic gauge field spec")

    for name, help_ in (("invert-curl", "right inverse of the curl"), ("invert-doublecurl", "right inverse of curl curl")):
        p = cmd(name, help_)
        _common(p)
        p.add_argument("--g", required=True, help="solenoidal vector field spec")

    p = cmd("solve-boundary", "div-free field with curl g from SI boundary data")
    _common(p)
    p.add_argument("--phi", required=True, help="vector boundary data spec")

    p = cmd("grigorev", "ray-integral solution for harmonic data")
    _common(p)
    p.add_argument("--g0", default=None)
    p.add_argument("--g", default=None)

    p = cmd("vekua-complete", "complete a scalar part to a Vekua solution")
    _common(p)
    p.add_argument("--f", required=True, help="conductivity factor spec (builtin:, file: or const:)")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--w0", default=None, help="scalar part spec")
    grp.add_argument("--phi", default=None, help="boundary trace of the scalar part")

    p = cmd("vekua-antiderivative", "solve V W = 0, Vbar W = G")
    _common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--G", dest="G", required=True, help="vector field spec")

    p = cmd("solve-conductivity", "solve div(f^2 grad u) = g0 with Dirichlet data")
    _common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--g0", default=None)
    p.add_argument("--phi", default=None, help="scalar boundary data spec")
    p.add_argument("--cg-tol", type=float, default=1e-10)
    p.add_argument("--maxiter", type=int, default=None)

    p = cmd("hilbert", "boundary Hilbert transform of scalar data")
    _common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--phi", required=True)

    p = cmd("maxwell", "static Maxwell system with permeability f^2")
    _common(p)
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--cg-tol", type=float, default=1e-10)

    p = cmd("minimize", "minimize the curl or conductivity energy")
    _common(p)
    p.add_argument("--f", default="const:1")
    p.add_argument("--phi", required=True, help="boundary data spec")
    p.add_argument("--source", default=None)
    p.add_argument("--mode", choices=("double-curl", "conductivity-scalar"), default="double-curl")
    p.add_argument("--min-tol", type=float, default=1e-8)
    p.add_argument("--maxiter", type=int, default=None)

    from .suites import SUITES

    p = cmd("verify", "run a named verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--star-center", default=None)
    _common(p, domain=False)

    p = cmd("convergence", "refinement study of a named experiment")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--resolutions", default="16,24,32")
    p.add_argument("--min-order", type=float, default=None)
    _common(p, domain=False)

    p = cmd("export", "convert a field file or builtin to QF1, CSV or VTK")
    _common(p)
    p.add_argument("--field", required=True, help="field spec")
    p.add_argument("--components", type=int, default=None)
    return parser


# ---------------------------------------------------------------- helpers

def _quad(args) -> QuadratureConfig:
    return QuadratureConfig(args.quad_depth, args.eval_subset, args.near_radius)


def _domain(args) -> Domain:
    sc = None if args.star_center is None else _floats(args.star_center, 3)
    return parse_domain(args.domain, args.n, sc)


def _write(field: Field, path: str | None, suffix: str = ""):
    if path is None:
        return None
    p = Path(path)
    if suffix:
        p = p.with_name(p.stem + suffix + p.suffix)
    ext = p.suffix.lower()
    if ext == ".csv":
        qio.write_csv(field, p)
    elif ext == ".vtk":
        qio.write_vtk(field, p)
    else:
        qio.write_field(field, p)
    return str(p)


def _apply_check_tol(residuals: ResidualSuite, tol: float) -> ResidualSuite:
    """Attach ``tol`` to interior checks that carry none; ``full_`` checks stay informational."""
    for name, chk in residuals.checks.items():
        if chk.tolerance is None and not name.startswith("full_"):
            chk.tolerance = tol
    return residuals


def _solve_result(report: SolveReport, args, outputs: dict) -> dict:
    _apply_check_tol(report.residuals, args.check_tol)
    return {"solver": report.to_dict(), "checks": report.residuals.to_dict(), "pass": report.residuals.all_pass, "outputs": outputs}


# ----------------------------------------------------------------- commands

def _cmd_solve_divcurl(args):
    from .solvers import solve_divcurl

    dom = _domain(args)
    g0 = load_field(args.g0, dom, 1)
    g = load_field(args.g, dom, 3)
    h = load_field(args.h, dom, 1)
    rep = SolveReport()
    w = solve_divcurl(g0, g, h, args.tol, not args.no_check, _quad(args), rep, args.ray_count)
    return _solve_result(rep, args, {"w": _write(w, args.out)})


def _cmd_invert_curl(args):
    from .solvers import curl_inverse

    dom = _domain(args)
    g = load_field(args.g, dom, 3)
    rep = SolveReport()
    w = curl_inverse(g, args.tol, not args.no_check, _quad(args), rep, args.ray_count)
    return _solve_result(rep, args, {"w": _write(w, args.out)})


def _cmd_invert_doublecurl(args):
    from .solvers import double_curl_inverse

    dom = _domain(args)
    g = load_field(args.g, dom, 3)
    rep = SolveReport()
    w = double_curl_inverse(g, args.tol, not args.no_check, _quad(args), rep, args.ray_count)
    return _solve_result(rep, args, {"w": _write(w, args.out)})


def _cmd_solve_boundary(args):
    from .solvers import solve_divcurl_boundary
    from .verify import residual_divcurl

    dom = _domain(args)
    phi = load_boundary(args.phi, dom, 3)
    rep = SolveReport()
    w = solve_divcurl_boundary(phi, dom, _quad(args), rep, args.ray_count)
    if args.phi.startswith("builtin:"):
        # the builtin is defined in the volume too, so the result can be checked
        g = F.builtin_field(args.phi.split(":", 1)[1], dom, 3)
        rep.residuals.merge(residual_divcurl(w, None, g))
    else:
        rep.notes.append("boundary data only: volume residuals not available")
    return _solve_result(rep, args, {"w": _write(w, args.out)})


def _cmd_grigorev(args):
    from .solvers import grigorev_solution

    dom = _domain(args)
    g0 = load_field(args.g0, dom, 1)
    g = load_field(args.g, dom, 3)
    rep = SolveReport()
    w = grigorev_solution(g0, g, args.tol, not args.no_check, rep, args.ray_count)
    return _solve_result(rep, args, {"w": _write(w, args.out)})


def _cmd_vekua_complete(args):
    from .solvers import solve_conductivity, vekua_complete

    dom = _domain(args)
    f = load_conductivity(args.f, dom)
    rep = SolveReport()
    if args.w0 is not None:
        W0 = load_field(args.w0, dom, 1)
    else:
        phi = load_boundary(args.phi, dom, 1)
        data = BoundaryField(phi.boundary, phi.values[:, 0] / f.at(phi.boundary.points))
        W0 = f.f * solve_conductivity(f, None, data, report=rep)
        rep.residuals = ResidualSuite()
    W = vekua_complete(f, W0, None, args.tol, not args.no_check, _quad(args), rep, args.ray_count)
    return _solve_result(rep, args, {"W": _write(W, args.out)})


def _cmd_vekua_antiderivative(args):
    from .solvers import vekua_antiderivative

    dom = _domain(args)
    f = load_conductivity(args.f, dom)
    G = load_field(args.G, dom, 3)
    rep = SolveReport()
    W = vekua_antiderivative(f, G, None, args.tol, not args.no_check, _quad(args), rep, args.ray_count)
    return _solve_result(rep, args, {"W": _write(W, args.out)})


def _cmd_solve_conductivity(args):
    from .solvers import solve_conductivity

    dom = _domain(args)
    f = load_conductivity(args.f, dom)
    g0 = load_field(args.g0, dom, 1)
    phi = None if args.phi is None else load_boundary(args.phi, dom, 1)
    rep = SolveReport()
    u = solve_conductivity(f, g0, phi, args.cg_tol, args.maxiter, report=rep)
    return _solve_result(rep, args, {"u": _write(u, args.out)})


def _cmd_hilbert(args):
    from .solvers import hilbert_transform

    dom = _domain(args)
    f = load_conductivity(args.f, dom)
    phi = load_boundary(args.phi, dom, 1)
    rep = SolveReport()
    hb = hilbert_transform(f, phi, dom, args.tol, not args.no_check, _quad(args), rep, args.ray_count)
    out = None
    if args.out is not None:
        b = hb.boundary
        table = np.column_stack([b.points, b.normals, hb.values])
        np.savetxt(args.out, table, delimiter=",", header="x,y,z,nx,ny,nz,h1,h2,h3", comments="")
        out = args.out
    return _solve_result(rep, args, {"hilbert": out})


def _cmd_maxwell(args):
    from .solvers import solve_maxwell

    dom = _domain(args)
    f = load_conductivity(args.f, dom)
    g = load_field(args.g, dom, 3)
    rep = SolveReport()
    E, H = solve_maxwell(f, g, args.tol, not args.no_check, _quad(args), rep, args.ray_count, args.cg_tol)
    return _solve_result(rep, args, {"E": _write(E, args.out, "_E"), "H": _write(H, args.out, "_H")})


def _cmd_minimize(args):
    from . import variational as V

    dom = _domain(args)
    f = load_conductivity(args.f, dom)
    comps = 3 if args.mode == "double-curl" else 1
    phi = load_boundary(args.phi, dom, comps)
    src = load_field(args.source, dom, comps)
    prob = V.EnergyProblem(f, phi, src, args.mode, args.tol)
    W, mrep = V.minimize(prob, None, args.min_tol, args.maxiter)
    e = mrep.energies
    checks = ResidualSuite()
    checks.add("gradient", mrep.gradient_norms[-1], mrep.gradient_norms[0], "full", args.min_tol)
    checks.add("monotone", float(max(0.0, np.max(np.diff(e)))) if len(e) > 1 else 0.0, abs(e[0]) or 1.0, "full", 1e-12)
    return {"minimize": mrep.to_dict(), "checks": checks.to_dict(), "pass": checks.all_pass, "outputs": {"W": _write(W, args.out)}}


def _cmd_verify(args):
    from .suites import run_suite

    if args.n is not None and not N_RANGE[0] <= args.n <= N_RANGE[1]:
        raise UsageError(f"n must lie in [{N_RANGE[0]}, {N_RANGE[1]}], got {args.n}")
    sc = None if args.star_center is None else _floats(args.star_center, 3)
    res = run_suite(args.suite, args.n, sc, _quad(args))
    out = res.to_dict()
    out["failed"] = res.checks.failed()
    return out


def _cmd_convergence(args):
    res = [int(v) for v in _floats(args.resolutions)]
    if any(not N_RANGE[0] <= r <= N_RANGE[1] for r in res):
        raise UsageError(f"resolutions must lie in [{N_RANGE[0]}, {N_RANGE[1]}]")
    est = convergence_order(args.experiment, res)
    ok = True
    if args.min_order is not None and est.flag != "rounding-floor":
        ok = est.order is not None and est.order >= args.min_order
    return {"convergence": est.to_dict(), "min_order": args.min_order, "pass": ok}


def _cmd_export(args):
    dom = _domain(args)
    kind, _, rest = args.field.partition(":")
    comps = args.components
    if comps is None:
        if kind == "builtin":
            comps = _builtin_func(rest)[0]
        elif kind == "file" and Path(rest).is_file():
            comps = qio.read_field(rest).components
        else:
            raise UsageError(f"cannot determine components of {args.field!r}")
    fld = load_field(args.field, dom, comps)
    if args.out is None:
        raise UsageError("export needs --out")
    return {"outputs": {"field": _write(fld, args.out)}, "pass": True}


COMMANDS = {
    "solve-divcurl": _cmd_solve_divcurl,
    "invert-curl": _cmd_invert_curl,
    "invert-doublecurl": _cmd_invert_doublecurl,
    "solve-boundary": _cmd_solve_boundary,
    "grigorev": _cmd_grigorev,
    "vekua-complete": _cmd_vekua_complete,
    "vekua-antiderivative": _cmd_vekua_antiderivative,
    "solve-conductivity": _cmd_solve_conductivity,
    "hilbert": _cmd_hilbert,
    "maxwell": _cmd_maxwell,
    "minimize": _cmd_minimize,
    "verify": _cmd_verify,
    "convergence": _cmd_convergence,
    "export": _cmd_export,
}


def _effective(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if not callable(v)}


def _emit(payload: dict, path: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        Path(path).write_text(text + "\n")


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _scan_report(argv: list) -> str | None:
    # lets a report be written even when argument parsing fails
    for k, tok in enumerate(argv):
        if tok == "--report" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--report="):
            return tok.split("=", 1)[1]
    return None


def run(argv=None) -> int:
    """Parse ``argv``, run one command and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    payload: dict = {"argv": argv}
    report_path = _scan_report(argv)
    code = EXIT_OK
    start = time.perf_counter()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        report_path = args.report
        if args.config is not None:
            sub = parser._subparsers._group_actions[0].choices[args.command]
            _apply_config(args, sub, read_config_file(args.config))
            report_path = args.report
        if args.tol <= 0 or args.check_tol <= 0:
            raise UsageError("tolerances must be positive")
        threads = args.threads if args.threads is not None else os.environ.get("DIVCURL_THREADS")
        payload["threads"] = set_threads(None if threads is None else int(threads))
        payload["command"] = args.command
        payload["config"] = _effective(args)
        result = COMMANDS[args.command](args)
        payload.update(result)
        code = EXIT_OK if result.get("pass", True) else EXIT_CHECK
    except (PreconditionError, SolverError, SingularPointError, OutOfDomainError, StencilError) as exc:
        code = EXIT_NUMERIC
        payload["error"] = {"type": type(exc).__name__, "message": str(exc)}
        for attr in ("residual", "tolerance", "history"):
            if getattr(exc, attr, None) is not None:
                payload["error"][attr] = getattr(exc, attr)
    except (ConfigurationError, FormatError, ValueError, OSError) as exc:
        code = EXIT_USAGE
        payload["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except DivCurlError as exc:
        code = EXIT_NUMERIC
        payload["error"] = {"type": type(exc).__name__, "message": str(exc)}
    payload["exit_code"] = code
    payload["runtime"] = time.perf_counter() - start
    try:
        _emit(payload, report_path)
    except OSError as exc:
        sys.stderr.write(f"divcurl: cannot write report: {exc}\n")
        return EXIT_USAGE
    if "error" in payload:
        sys.stderr.write(f"divcurl: {payload['error']['type']}: {payload['error']['message']}\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
