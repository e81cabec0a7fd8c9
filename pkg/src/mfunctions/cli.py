"""Command line front end.

Every subcommand writes one output file (``--out``) plus a manifest
``<out>.manifest.json`` recording the command line, resolved parameters,
seed, version, wall time and warnings.  Without ``--out`` the result goes
to stdout as JSON.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .characters import FamilySpec, family_average, weyl_discrepancy
from .density import (curve_measure, convolve, histogram, rasterize, reconstruct_density,
                      support_radius)
from .errors import CapabilityError, ContractError, ConvergenceError, DomainError
from .functionals import Moment, parse_functional
from .injectivity import radius_report
from .io import atomic_write, density_to_csv, dumps, manifest_path
from .localgf import Convention, GParams, g_local, verify_against_series
from .primesys import NumberField, PrimeSite, enumerate_sites, is_prime, rational_system
from .torus import mc_average, quad_average, tail_bound

WORKERS_ENV = "MFUNCTIONS_WORKERS"
MOMENT_SET = ((1, 0), (0, 1), (1, 1), (2, 0))


# -- argument types -----------------------------------------------------------

def _positive_int(text):
    try:
        v = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1 or v != float(text):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _even_grid(text):
    v = _positive_int(text)
    if v < 8 or v % 2:
        raise argparse.ArgumentTypeError(f"--grid must be an even integer >= 8, got {text!r}")
    return v


def _functional(text):
    try:
        return parse_functional(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _site_from_norm(norm: int) -> PrimeSite:
    if is_prime(norm):
        return PrimeSite(norm, norm)
    r = math.isqrt(norm)
    if r * r == norm and is_prime(r):
        return PrimeSite(norm, r)
    raise DomainError(f"--norm must be a prime or the square of a prime, got {norm}")


# -- shared option groups -----------------------------------------------------

def _add_field(p, cutoff_default=None):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--field", choices=["Q"], default="Q", help="base field (default Q)")
    g.add_argument("--disc", type=int, help="negative fundamental discriminant of an imaginary quadratic field")
    p.add_argument("--cutoff", type=_positive_float, required=cutoff_default is None,
                   default=cutoff_default, help="norm cutoff y")


def _add_gparams(p, sigma_default=None):
    p.add_argument("--sigma", type=_positive_float, required=sigma_default is None, default=sigma_default)
    p.add_argument("--order", type=_positive_int, default=1, help="derivative order m")
    p.add_argument("--imag-t", type=float, default=0.0, help="Im(s)")
    p.add_argument("--convention", choices=["derived", "paper"], default="derived")


def _add_common(p):
    p.add_argument("--out", help="output path (stdout JSON if omitted)")
    p.add_argument("--json", action="store_true", help="structured JSON on stdout")
    p.add_argument("--workers", type=_positive_int, default=None,
                   help=f"worker threads (default ${WORKERS_ENV} or all cores)")


def _field(args) -> NumberField:
    return NumberField(args.disc) if getattr(args, "disc", None) is not None else NumberField.rationals()


def _gparams(args) -> GParams:
    return GParams(args.sigma, args.order, args.imag_t, args.convention)


def _workers(args) -> int:
    if args.workers:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _convention_notice(params: GParams) -> list[str]:
    if params.convention is Convention.PAPER and params.order_m >= 2:
        return ["convention 'paper' uses (k!)^2 S(m,k); for m >= 2 it disagrees with the "
                "term-by-term differentiated Dirichlet series (see verify-derivative)"]
    return []


# -- subcommands --------------------------------------------------------------
# each returns (payload, text_or_None, params_dict, warnings, exit_code)

def cmd_sites(args):
    system = enumerate_sites(_field(args), args.cutoff)
    return system.to_records(), None, {"field": str(system.field), "cutoff": args.cutoff}, [], 0


def cmd_gvalues(args):
    params = _gparams(args)
    site = _site_from_norm(args.norm)
    theta = 2 * np.pi * np.arange(args.angles) / args.angles
    g = g_local(site, params, np.exp(1j * theta))
    warnings = _convention_notice(params)
    payload = {
        "metadata": {"norm": site.norm, "residue_prime": site.residue_prime, "sigma": params.sigma,
                     "order": params.order_m, "imag_t": params.imag_t,
                     "convention": params.convention.value, "notice": warnings},
        "values": [{"theta": float(a), "g_re": float(v.real), "g_im": float(v.imag)}
                   for a, v in zip(theta, np.atleast_1d(g))],
    }
    return payload, None, payload["metadata"], warnings, 0


def cmd_verify_derivative(args):
    rows = verify_against_series(args.max_order, args.norms, args.sigmas, args.angles)
    table, ok = [], True
    for r in rows:
        passed = r.passed(args.tol)
        if r.convention is Convention.DERIVED and not passed:
            ok = False
        table.append({"order": r.order_m, "convention": r.convention.value,
                      "max_rel_err": r.max_rel_err, "points": r.points, "match": passed})
    lines = [f"{'m':>3} {'convention':<10} {'max rel err':>12}  verdict"]
    for t in table:
        lines.append(f"{t['order']:>3} {t['convention']:<10} {t['max_rel_err']:>12.3e}  "
                     f"{'PASS' if t['match'] else ('FAIL' if t['convention'] == 'derived' else 'DEVIATES')}")
    params = {"max_order": args.max_order, "norms": args.norms, "sigmas": args.sigmas,
              "angles": args.angles, "tol": args.tol}
    return {"rows": table, "derived_all_match": ok}, "\n".join(lines) + "\n", params, [], 0 if ok else 1


def _system(args):
    return enumerate_sites(_field(args), args.cutoff)


def cmd_average(args):
    system, params = _system(args), _gparams(args)
    fn = args.functional
    resolved = {"field": str(system.field), "cutoff": args.cutoff, "sites": len(system),
                "sigma": params.sigma, "order": params.order_m, "imag_t": params.imag_t,
                "convention": params.convention.value, "functional": str(fn), "method": args.method}
    if args.method == "quad":
        v = quad_average(system, params, fn, args.nodes)
        payload = {"value_re": v.real, "value_im": v.imag, "stderr": 0.0, "n": args.nodes ** len(system),
                   "seed": None}
        resolved["nodes"] = args.nodes
    else:
        est = mc_average(system, params, fn, int(args.samples), args.seed, _workers(args))
        payload = est.to_dict()
        resolved.update(samples=int(args.samples), seed=args.seed)
    return payload, None, resolved, _convention_notice(params), 0


def cmd_tailbound(args):
    params = _gparams(args)
    field = _field(args)
    b = tail_bound(field, params, args.cutoff)
    resolved = {"field": str(field), "cutoff": args.cutoff, "sigma": params.sigma,
                "order": params.order_m, "convention": params.convention.value}
    return {"bound": b, **resolved}, None, resolved, _convention_notice(params), 0


def _build_density(args, system, params):
    extent = "auto" if args.extent is None else args.extent
    if args.method == "charfn":
        fx = "auto" if args.freq_extent is None else args.freq_extent
        return reconstruct_density(system, params, args.grid, extent, fx, args.smoothing)
    if args.method == "histogram":
        return histogram(system, params, int(args.samples), args.seed, args.grid, extent)
    if params.order_m != 1:
        raise CapabilityError("the convolve method uses exact curve measures, available for m = 1 only")
    if len(system) == 0:
        raise DomainError("no sites below the cutoff")
    R = 1.1 * support_radius(system, params) if extent == "auto" else float(extent)
    bw = None if args.smoothing == 0 else args.smoothing
    dens = None
    for site in system.sites:
        r = rasterize(curve_measure(site, params.sigma, args.nodes), args.grid, R, bw)
        dens = r if dens is None else convolve(dens, r)
    return dens


def _density_manifest(d):
    return {"mass": d.mass, "raw_mass": d.raw_mass, "min_value": d.raw_min, "extent": d.extent,
            "grid": d.grid_n, "smoothing": d.smoothing,
            "out_of_support_fraction": d.out_of_support_fraction, **d.meta}


def cmd_density(args):
    system, params = _system(args), _gparams(args)
    d = _build_density(args, system, params)
    resolved = {"field": str(system.field), "cutoff": args.cutoff, "sites": len(system),
                "sigma": params.sigma, "order": params.order_m, "imag_t": params.imag_t,
                "convention": params.convention.value, "method": args.method, "grid": args.grid}
    if args.method == "histogram":
        resolved.update(samples=int(args.samples), seed=args.seed)
    resolved.update(_density_manifest(d))
    warnings = _convention_notice(params) + list(d.warnings)
    return resolved, density_to_csv(d), resolved, warnings, 0


def cmd_moments(args):
    system, params = _system(args), _gparams(args)
    d = reconstruct_density(system, params, args.grid)
    rows = []
    for a, b in MOMENT_SET:
        g = d.moment(a, b)
        est = mc_average(system, params, Moment(a, b), int(args.samples), args.seed, _workers(args))
        rows.append({"a": a, "b": b, "grid_re": g.real, "grid_im": g.imag,
                     "mc_re": est.value.real, "mc_im": est.value.imag, "mc_stderr": est.stderr,
                     "abs_diff": abs(g - est.value)})
    resolved = {"field": str(system.field), "cutoff": args.cutoff, "sigma": params.sigma,
                "order": params.order_m, "convention": params.convention.value, "grid": args.grid,
                "samples": int(args.samples), "seed": args.seed, **_density_manifest(d)}
    return {"moments": rows}, None, resolved, _convention_notice(params) + d.warnings, 0


def cmd_radius(args):
    rep = radius_report(args.order, args.convention, args.norm, args.nodes)
    resolved = {"order": args.order, "convention": args.convention, "norms": args.norm, "nodes": args.nodes}
    return rep.to_dict(), None, resolved, [], 0


def cmd_family_avg(args):
    system, params = rational_system(args.cutoff), _gparams(args)
    spec = FamilySpec(args.conductor_max, even_only=not args.all_parity)
    res = family_average(spec, system, params, args.functional, trace=args.trace)
    resolved = {"conductor_max": args.conductor_max, "even_only": spec.even_only, "cutoff": args.cutoff,
                "sigma": params.sigma, "order": params.order_m, "imag_t": params.imag_t,
                "convention": params.convention.value, "functional": str(args.functional)}
    return res.to_dict(), None, resolved, _convention_notice(params), 0


def cmd_weyl(args):
    k = len(args.exponents)
    system = rational_system(2)
    y = 2
    while len(system) < k:
        y *= 2
        system = rational_system(y)
    system = system.prefix(k)
    spec = FamilySpec(args.conductor_max, even_only=not args.all_parity)
    res = weyl_discrepancy(spec, system, args.exponents, trace=args.trace)
    resolved = {"conductor_max": args.conductor_max, "even_only": spec.even_only,
                "primes": [s.residue_prime for s in system.sites], "exponents": args.exponents}
    out = res.to_dict()
    out["abs"] = abs(res.value)
    return out, None, resolved, [], 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mfunctions", allow_abbrev=False,
                                 description="Value-distribution densities of derivatives of L'/L.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.set_defaults(func=func)
        _add_common(p)
        return p

    p = add("sites", cmd_sites, "enumerate prime sites up to a norm cutoff")
    _add_field(p)

    p = add("gvalues", cmd_gvalues, "local g-function on equispaced circle points")
    p.add_argument("--norm", type=_positive_int, required=True)
    _add_gparams(p)
    p.add_argument("--angles", type=_positive_int, default=16)

    p = add("verify-derivative", cmd_verify_derivative, "compare both conventions with the series oracle")
    p.add_argument("--max-order", type=_positive_int, default=5)
    p.add_argument("--norms", type=_int_list, default=[2, 3, 5, 7])
    p.add_argument("--sigmas", type=_float_list, default=[1.2, 2.0, 3.0])
    p.add_argument("--angles", type=_positive_int, default=16)
    p.add_argument("--tol", type=_positive_float, default=1e-10)

    p = add("average", cmd_average, "torus average of a catalogue functional")
    _add_field(p)
    _add_gparams(p)
    p.add_argument("--functional", type=_functional, required=True)
    p.add_argument("--samples", type=_positive_float, default=1e5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=["mc", "quad"], default="mc")
    p.add_argument("--nodes", type=_positive_int, default=128)

    p = add("tailbound", cmd_tailbound, "bound on the Euler-product truncation error")
    _add_field(p)
    _add_gparams(p)

    p = add("density", cmd_density, "density grid M_{sigma,P} as CSV")
    _add_field(p)
    _add_gparams(p)
    p.add_argument("--grid", type=_even_grid, default=256)
    p.add_argument("--method", choices=["charfn", "histogram", "convolve"], default="charfn")
    p.add_argument("--extent", type=_positive_float, default=None)
    p.add_argument("--freq-extent", type=_positive_float, default=None)
    p.add_argument("--smoothing", type=float, default=0.0, help="Gaussian bandwidth (0: none / default)")
    p.add_argument("--samples", type=_positive_float, default=1e6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=_positive_int, default=8192, help="curve nodes for --method convolve")

    p = add("moments", cmd_moments, "grid moments against torus Monte Carlo")
    _add_field(p)
    _add_gparams(p)
    p.add_argument("--grid", type=_even_grid, default=256)
    p.add_argument("--samples", type=_positive_float, default=1e5)
    p.add_argument("--seed", type=int, default=0)

    p = add("radius", cmd_radius, "critical points, injectivity radius and sigma threshold")
    p.add_argument("--order", type=_positive_int, required=True)
    p.add_argument("--convention", choices=["derived", "paper"], default="derived")
    p.add_argument("--norm", type=_int_list, default=[2])
    p.add_argument("--nodes", type=_positive_int, default=8192)

    p = add("family-avg", cmd_family_avg, "nested average over even characters of prime conductor")
    p.add_argument("--conductor-max", type=_positive_int, required=True)
    p.add_argument("--cutoff", type=_positive_float, required=True)
    _add_gparams(p)
    p.add_argument("--functional", type=_functional, required=True)
    p.add_argument("--all-parity", action="store_true", help="include odd characters")
    p.add_argument("--trace", action="store_true", help="include per-conductor averages")

    p = add("weyl", cmd_weyl, "family average of prod chi(p_i)^k_i")
    p.add_argument("--exponents", type=_int_list, required=True)
    p.add_argument("--conductor-max", type=_positive_int, required=True)
    p.add_argument("--all-parity", action="store_true")
    p.add_argument("--trace", action="store_true")
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        payload, text, resolved, warnings, code = args.func(args)
    except (DomainError, CapabilityError, ConvergenceError, ContractError, ValueError) as e:
        print(f"mfunctions {args.command}: error: {e}", file=sys.stderr)
        return 1
    wall = time.perf_counter() - t0
    body = text if text is not None else dumps(payload)
    if args.out:
        atomic_write(args.out, body)
        manifest = {"command_line": ["mfunctions", *argv], "command": args.command,
                    "parameters": resolved, "seed": resolved.get("seed"), "version": __version__,
                    "wall_time_s": wall, "warnings": warnings}
        atomic_write(manifest_path(args.out), dumps(manifest))
        if args.json:
            sys.stdout.write(dumps(payload))
        elif text is not None and args.command == "verify-derivative":
            sys.stdout.write(text)
    else:
        if args.json or text is None:
            sys.stdout.write(dumps(payload))
        else:
            sys.stdout.write(text)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
