"""Command line entry point ``pencil``.

Exit status: 0 when every check passes, 2 when a verification fails, 1 for
usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import io
from .current import boundary
from .exceptions import PencilError
from .netgraph import build_graph
from .pencil import verify_pc_inequality
from .pipeline import PipelineConfig, load_space_spec, run_pipeline, sweep_scales
from .poincare import pi_survey
from .space import build_net

EXIT_OK, EXIT_INPUT, EXIT_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_pipeline_args(p, with_scale=True):
    p.add_argument("--space", required=True, help="space JSON file or gen:name:p1,p2,...")
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--target", type=int, required=True)
    if with_scale:
        p.add_argument("--scale", type=int, required=True, help="n in r_n = 2^-n d(s, t)")
    p.add_argument("--c0", type=float, default=4.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lip-multiplier", type=float, default=2.0,
                   help="Lipschitz radius in units of the largest nearest-neighbour distance")
    p.add_argument("--half-multiplier", type=float, default=2.0,
                   help="good-half length cap as a multiple of the mean curve length")
    p.add_argument("--num-g", type=int, default=20)
    p.add_argument("--num-lipschitz", type=int, default=100)
    p.add_argument("--num-balls", type=int, default=20)
    p.add_argument("--timings", action="store_true", help="include wall times (breaks byte-identity)")


def _config(args, scale) -> PipelineConfig:
    return PipelineConfig(
        space=args.space, source=args.source, target=args.target, scale=scale,
        c0=args.c0, lam=args.lam, lip_multiplier=args.lip_multiplier, seed=args.seed,
        half_multiplier=args.half_multiplier, num_g=args.num_g,
        num_lipschitz=args.num_lipschitz, num_balls=args.num_balls,
    )


def _emit(obj, path):
    if path in (None, "-"):
        sys.stdout.write(json.dumps(obj, indent=2) + "\n")
    else:
        io.write_json_atomic(path, obj)


def cmd_run(args) -> int:
    report = run_pipeline(_config(args, args.scale))
    _emit(report.to_dict(args.timings), args.out)
    art = report.artifacts
    if args.pencil_out and "pencil" in art:
        io.save_pencil(art["pencil"], args.pencil_out)
    if args.current_out and "current" in art:
        io.write_json_atomic(args.current_out, {
            "segments": io.current_to_list(art["current"]),
            "boundary": io.boundary_to_dict(boundary(art["current"])),
        })
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_sweep(args) -> int:
    reports, summary = sweep_scales(_config(args, args.nmin), args.nmin, args.nmax)
    out = {
        "summary": summary,
        "reports": {str(n): r.to_dict(args.timings) for n, r in sorted(reports.items())},
    }
    _emit(out, args.out)
    ok = not summary["errors"] and all(r.passed for r in reports.values())
    return EXIT_OK if ok else EXIT_FAILED


def _load_g(spec, n, rng) -> list:
    if spec.startswith("random:"):
        k = int(spec.split(":", 1)[1])
        if k < 1:
            raise PencilError("random:K needs K >= 1")
        return [rng.uniform(0.0, 1.0, size=n) for _ in range(k)]
    with open(spec) as fh:
        data = json.load(fh)
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n:
        raise PencilError(f"g file must hold one value per point ({n}) or a list of such rows")
    return list(arr)


def cmd_verify_pc(args) -> int:
    space = load_space_spec(args.space)
    pencil = io.load_pencil(args.pencil)
    for c in pencil.curves:
        for x in c.path:
            space.check_id(x)
    if not pencil.normalized:
        pencil = pencil.normalize()
    rng = np.random.default_rng(args.seed)
    checks = [verify_pc_inequality(pencil, space, g, args.c0) for g in _load_g(args.g, len(space), rng)]
    ratios = [c.ratio for c in checks]
    finite = all(np.isfinite(ratios))
    worst = max(ratios)
    passed = finite and (args.max_ratio is None or worst <= args.max_ratio)
    out = {
        "curves": len(pencil.curves),
        "c0": args.c0,
        "tests": [{"lhs": io.real(c.lhs), "rhs": io.real(c.rhs), "ratio": io.real(c.ratio)} for c in checks],
        "max_ratio": io.real(worst),
        "all_finite": finite,
        "passed": passed,
    }
    _emit(out, args.out)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_verify_pi(args) -> int:
    space = load_space_spec(args.space)
    lip_radius = args.lip_radius if args.lip_radius is not None else 2 * space.resolution
    survey = pi_survey(space, args.num_tests, np.random.default_rng(args.seed), args.lam, lip_radius)
    survey.generator = args.space
    out = {
        "lambda": args.lam,
        "lip_radius": io.real(lip_radius),
        "generator": args.space,
        "worst_ratio": io.real(survey.worst_ratio),
        "flagged": len(survey.flagged),
        "oscillation_violations": len(survey.oscillation_violations),
        "records": [
            {"center": r.center, "radius": io.real(r.radius), "lhs": io.real(r.lhs),
             "rhs": io.real(r.rhs), "ratio": io.real(r.ratio)}
            for r in survey.records
        ],
    }
    _emit(out, args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["center", "radius", "lhs", "rhs", "ratio"])
            for r in survey.records:
                w.writerow([r.center, io.real(r.radius), io.real(r.lhs), io.real(r.rhs),
                            "" if np.isnan(r.ratio) else io.real(r.ratio)])
    bad = survey.flagged or survey.oscillation_violations
    return EXIT_FAILED if bad else EXIT_OK


def cmd_dump_graph(args) -> int:
    space = load_space_spec(args.space)
    s, t = space.check_id(args.source), space.check_id(args.target)
    dst = float(space.dist[s, t])
    net = build_net(space, s, t, dst * 2.0 ** (-args.scale), args.c0 * dst)
    _emit(io.graph_to_dict(build_graph(net, space), space), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pencil", description="Pencils of curves from discrete max flows.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run the pipeline at one scale")
    _add_pipeline_args(p)
    p.add_argument("--out", default="-")
    p.add_argument("--pencil-out", help="also write the good-half pencil")
    p.add_argument("--current-out", help="also write the normalised current and its boundary")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run the pipeline over a range of scales")
    _add_pipeline_args(p, with_scale=False)
    p.add_argument("--nmin", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify-pc", help="check the pencil inequality for a stored pencil")
    p.add_argument("--pencil", required=True)
    p.add_argument("--space", required=True)
    p.add_argument("--g", default="random:20", help="JSON file of g values or random:K")
    p.add_argument("--c0", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-ratio", type=float, help="fail if the measured constant exceeds this")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify_pc)

    p = sub.add_parser("verify-pi", help="sample the weak 1-Poincare ratio on random balls")
    p.add_argument("--space", required=True)
    p.add_argument("--num-tests", type=int, default=100)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--lip-radius", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--csv", help="also write per-ball records as CSV")
    p.set_defaults(func=cmd_verify_pi)

    p = sub.add_parser("dump-graph", help="write the net graph at one scale")
    p.add_argument("--space", required=True)
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--c0", type=float, default=4.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_dump_graph)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PencilError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"pencil: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
