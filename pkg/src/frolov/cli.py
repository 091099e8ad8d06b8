"""Command-line front end.

Subcommands: ``gen`` (generator polynomial and matrices), ``points``
(enumerate the cube), ``dual`` (shell counts and norm-product minimum),
``fns`` (available integrands), ``study`` (convergence study), ``fool``
(lower-bound demonstration), ``rerun`` (replay a manifest).

Every file-producing run writes a ``<stem>.manifest.json`` capturing the
full configuration, the library version, and the membership/ordering
policies; replaying it reproduces byte-identical outputs.  Exit codes:
0 success, 1 domain/usage errors, 2 budget or certification failures.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .cubature import compare_generators, geometric_schedule, run_study
from .dual import spectrum_report
from .enumeration import DEFAULT_BUDGET, enumerate_points, iter_point_blocks
from .errors import FrolovError, InvalidSpecError
from .fooling import Variant, lower_bound_demo
from .generator import GeneratorSpec, Kind, build_polynomial, assemble_lattice
from .serialize import (
    demo_fit_payload,
    dual_report_payload,
    dump_json,
    generator_payload,
    load_manifest,
    manifest_payload,
    point_set_blocks,
    study_fit_payload,
    write_demo_csv,
    write_points_csv,
    write_study_csv,
)
from .testfns import Scale, SmoothnessClass, list_functions, parse_function


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract here is exit 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _kind(value: str) -> Kind:
    try:
        return {"standard": Kind.STANDARD, "chebyshev": Kind.CHEBYSHEV}[value]
    except KeyError:
        raise InvalidSpecError(f"unknown kind {value!r}; use standard or chebyshev") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="frolov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"frolov {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p: argparse.ArgumentParser, schedule: bool = False) -> None:
        p.add_argument("--dim", type=int, default=2, help="dimension d")
        p.add_argument("--kind", default="standard", choices=["standard", "chebyshev"])
        p.add_argument("--threads", type=int, default=1, help="worker-thread cap")
        p.add_argument("--budget", type=float, default=float(DEFAULT_BUDGET),
                       help="enumeration candidate budget")
        p.add_argument("--seed", type=int, default=0,
                       help="recorded in the manifest; no subcommand consumes randomness")
        p.add_argument("--out", default=None, help="output file path")
        p.add_argument("--no-plot", action="store_true",
                       help="skip the companion figure next to the output file")
        if schedule:
            p.add_argument("--nmin", type=float, default=256.0)
            p.add_argument("--nmax", type=float, default=1048576.0)
            p.add_argument("--ratio", type=float, default=2.0)

    p_gen = sub.add_parser("gen", help="generator polynomial, roots, and matrices")
    common(p_gen)
    p_gen.add_argument("--n", type=float, required=True, help="lattice scale (real, >= 1)")
    p_gen.add_argument("--emit", default="json", choices=["json"])

    p_points = sub.add_parser("points", help="enumerate lattice points in [0,1)^d")
    common(p_points)
    p_points.add_argument("--n", type=float, required=True)
    p_points.add_argument("--stream", action="store_true",
                          help="write rows as they are produced, without materializing")

    p_dual = sub.add_parser("dual", help="dual-lattice shell counts and norm products")
    common(p_dual)
    p_dual.add_argument("--n", type=float, required=True)
    p_dual.add_argument("--mmax", type=int, default=None,
                        help="max |m|_1 of counted shells (default log2(n) + 8)")
    p_dual.add_argument("--radius", type=float, default=None,
                        help="axis radius of the min-product search box (default 64 n^(1/d))")
    p_dual.add_argument("--c1", type=float, default=1.0)
    p_dual.add_argument("--c2", type=float, default=1.0)

    p_fns = sub.add_parser("fns", help="available test integrands")
    p_fns.add_argument("--list", action="store_true")
    p_fns.add_argument("name", nargs="?", default=None, help="address, e.g. spline:k=3")
    p_fns.add_argument("--dim", type=int, default=2)

    p_study = sub.add_parser("study", help="convergence study over a geometric schedule")
    common(p_study, schedule=True)
    p_study.add_argument("--fn", required=True, help="hat | bump | spline:k=K")
    p_study.add_argument("--compare", action="store_true",
                         help="run both generator kinds and report error ratios")

    p_fool = sub.add_parser("fool", help="fooling-function lower-bound demonstration")
    common(p_fool, schedule=True)
    p_fool.add_argument("--s", type=float, default=2.0)
    p_fool.add_argument("--p", type=float, default=1.0)
    p_fool.add_argument("--theta", type=float, default=math.inf)
    p_fool.add_argument("--scale", default="B", choices=["B", "F"])
    p_fool.add_argument("--variant", default="g1", choices=list(Variant.ALL))

    p_rerun = sub.add_parser("rerun", help="replay a previous run from its manifest")
    p_rerun.add_argument("--manifest", required=True)
    return parser


# ---------------------------------------------------------------------------


def _write_manifest(args: argparse.Namespace) -> None:
    if args.out is None:
        return
    options = {k: v for k, v in vars(args).items() if k != "subcommand"}
    path = Path(args.out).with_suffix(".manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        dump_json(manifest_payload(args.subcommand, options), handle)


def _maybe_figure(args: argparse.Namespace, render) -> None:
    if args.out is None or args.no_plot:
        return
    render(str(Path(args.out).with_suffix(".png")))


def _cmd_gen(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(args.dim, _kind(args.kind))
    poly = build_polynomial(spec)
    lattice = assemble_lattice(poly, args.n)
    payload = generator_payload(poly, lattice)
    if args.out is None:
        dump_json(payload, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            dump_json(payload, handle)
        _write_manifest(args)
    return 0


def _cmd_points(args: argparse.Namespace) -> int:
    lattice = assemble_lattice(build_polynomial(GeneratorSpec(args.dim, _kind(args.kind))), args.n)
    budget = int(args.budget)
    out = sys.stdout if args.out is None else open(args.out, "w", encoding="utf-8", newline="\n")
    try:
        if args.stream:
            count = write_points_csv(out, iter_point_blocks(lattice, budget=budget), args.dim)
        else:
            points = enumerate_points(lattice, budget=budget, threads=args.threads)
            count = write_points_csv(out, point_set_blocks(points), args.dim)
            from .plots import save_points_figure

            _maybe_figure(args, lambda path: save_points_figure(points, path))
    finally:
        if out is not sys.stdout:
            out.close()
    if args.out is not None:
        _write_manifest(args)
        print(f"wrote {count} points to {args.out}", file=sys.stderr)
    return 0


def _cmd_dual(args: argparse.Namespace) -> int:
    lattice = assemble_lattice(build_polynomial(GeneratorSpec(args.dim, _kind(args.kind))), args.n)
    mmax = args.mmax if args.mmax is not None else int(math.ceil(math.log2(args.n))) + 8
    radius = args.radius if args.radius is not None else 64.0 * args.n ** (1.0 / args.dim)
    report = spectrum_report(
        lattice, mmax, radius, c1=args.c1, c2=args.c2,
        budget=int(args.budget), threads=args.threads,
    )
    payload = dual_report_payload(report)
    if args.out is None:
        dump_json(payload, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            dump_json(payload, handle)
        _write_manifest(args)
        from .plots import save_dual_figure

        _maybe_figure(args, lambda p: save_dual_figure(report, p))
    return 0


def _cmd_fns(args: argparse.Namespace) -> int:
    if args.name is None or args.list:
        for address, description in list_functions():
            print(f"{address:14s} {description}")
        return 0
    f = parse_function(args.name, args.dim)
    print(f"name:               {f.name}")
    print(f"arity:              {f.arity}")
    print(f"reference integral: {f.reference_integral!r} (error bound {f.reference_error_bound:g})")
    if f.declared_class is not None:
        cls = f.declared_class
        print(f"declared class:     s={cls.s:g}, p={cls.p:g}, theta={cls.theta:g}, {cls.scale.value} scale")
    return 0


def _schedule_from_args(args: argparse.Namespace) -> list[float]:
    return geometric_schedule(args.nmin, args.nmax, args.ratio)


def _cmd_study(args: argparse.Namespace) -> int:
    f = parse_function(args.fn, args.dim)
    schedule = _schedule_from_args(args)
    budget = int(args.budget)
    if args.compare:
        comparison = compare_generators(f, schedule, budget=budget, threads=args.threads)
        study = comparison.standard
    else:
        spec = GeneratorSpec(args.dim, _kind(args.kind))
        comparison = None
        study = run_study(spec, f, schedule, budget=budget, threads=args.threads)
    if args.out is None:
        write_study_csv(sys.stdout, study)
        return 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        write_study_csv(handle, study)
    fit_path = Path(args.out).with_suffix(".fit.json")
    payload = study_fit_payload(study)
    if comparison is not None:
        payload["chebyshev_fit"] = study_fit_payload(comparison.chebyshev)
        payload["error_ratios"] = list(comparison.error_ratios)
    with open(fit_path, "w", encoding="utf-8", newline="\n") as handle:
        dump_json(payload, handle)
    _write_manifest(args)
    from .plots import save_study_figure

    _maybe_figure(args, lambda path: save_study_figure(study, path))
    return 0


def _cmd_fool(args: argparse.Namespace) -> int:
    cls = SmoothnessClass(s=args.s, p=args.p, theta=args.theta, scale=Scale(args.scale))
    spec = GeneratorSpec(args.dim, _kind(args.kind))
    demo = lower_bound_demo(spec, cls, args.variant, _schedule_from_args(args),
                            budget=int(args.budget))
    if args.out is None:
        write_demo_csv(sys.stdout, demo)
        return 0
    with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
        write_demo_csv(handle, demo)
    with open(Path(args.out).with_suffix(".fit.json"), "w", encoding="utf-8", newline="\n") as handle:
        dump_json(demo_fit_payload(demo), handle)
    _write_manifest(args)
    from .plots import save_demo_figure

    _maybe_figure(args, lambda path: save_demo_figure(demo, path))
    return 0


def _cmd_rerun(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    replay = argparse.Namespace(subcommand=manifest["subcommand"], **manifest["options"])
    return _DISPATCH[manifest["subcommand"]](replay)


_DISPATCH = {
    "gen": _cmd_gen,
    "points": _cmd_points,
    "dual": _cmd_dual,
    "fns": _cmd_fns,
    "study": _cmd_study,
    "fool": _cmd_fool,
    "rerun": _cmd_rerun,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.subcommand](args)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    except FrolovError as exc:
        print(f"frolov: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
