"""Command-line front end: verification suites, bound reports, quadrature
demos and sharpness searches.

Exit codes: 0 when every executed check passes, 1 when any fails, 2 on bad
input or usage.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import serialize, suite
from .bounds import CoefficientBox, counterpart_bounds, gruss_bounds, instance_scale
from .generate import (
    Instance,
    PairInstance,
    certified_box_arrays,
    generate_certified_instance,
    generate_certified_pair,
    rng_from_seed,
)
from .quadrature import (
    WeightedL2Context,
    build_family,
    counting_measure,
    gauss_legendre,
    l2_counterpart_report,
    l2_gruss_report,
    l2_sandwich_gruss,
    periodic_trapezoid,
    sample,
    sandwich_box,
)
from .sharpness import SearchConfig, maximize_gruss_ratio, maximize_residual_ratio
from .space import REAL, norm
from .suite import SuiteConfig, run_suite


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part)


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="64-bit RNG seed")
    parser.add_argument("--tol", type=float, default=None, help="tolerance override")
    parser.add_argument("--out", default=None, help="output file path")
    parser.add_argument(
        "--format", choices=("json", "csv"), default="json", help="output format"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthobounds",
        description=(
            "Compute and certify counterpart-of-Bessel and Gruss-type bound "
            "chains over finite orthonormal families."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the randomized invariant suite")
    p.add_argument("--instances", type=int, default=50, help="instances per grid cell")
    p.add_argument("--dims", type=_int_list, default=(2, 4, 8, 16))
    p.add_argument("--family-sizes", type=_int_list, default=(1, 2, 4, 8))
    p.add_argument("--fields", type=_str_list, default=("real", "complex"))
    p.add_argument(
        "--tightness-out", default=None, help="also emit a per-instance tightness CSV"
    )
    _add_common(p)

    p = sub.add_parser("bounds", help="residual chain report for an instance file")
    p.add_argument("instance", help="instance JSON path")
    _add_common(p)

    p = sub.add_parser("gruss", help="deviation chain report for an instance file")
    p.add_argument("instance", help="instance JSON path (must carry y and box_y)")
    _add_common(p)

    p = sub.add_parser("l2demo", help="weighted-L2 demo on a built-in example")
    p.add_argument("kind", choices=("trig", "legendre", "counting"))
    p.add_argument("--nodes", type=int, default=1024, help="quadrature node count")
    _add_common(p)

    p = sub.add_parser("sharpness", help="search for the best-constant ratio 1/4")
    p.add_argument("--mode", choices=("residual", "gruss"), default="residual")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--family-size", type=int, default=2)
    p.add_argument("--field", choices=("real", "complex"), default="real")
    p.add_argument("--restarts", type=int, default=64)
    p.add_argument("--steps", type=int, default=2000)
    _add_common(p)
    return parser


def _cmd_verify(args) -> int:
    cfg = SuiteConfig(
        instance_count=args.instances,
        dims=tuple(args.dims),
        family_sizes=tuple(args.family_sizes),
        fields=tuple(args.fields),
        seed=args.seed if args.seed is not None else SuiteConfig.seed,
        tolerance=args.tol if args.tol is not None else SuiteConfig.tolerance,
    )
    outcome = run_suite(cfg)
    for name, tally in sorted(outcome.checks.items()):
        status = "ok" if tally.failed == 0 else "FAIL"
        print(
            f"{status:4s} {name:24s} passed={tally.passed:<7d} failed={tally.failed:<5d} "
            f"worst_margin={tally.worst_margin:.3e}"
        )
    payload = outcome.to_dict()
    if args.format == "csv" and args.out:
        rows = [
            (name, tally.passed, tally.failed, float(tally.worst_margin))
            for name, tally in sorted(outcome.checks.items())
        ]
        serialize.write_csv(args.out, ("check", "passed", "failed", "worst_margin"), rows)
    elif args.out:
        serialize.dump_json(payload, args.out)
    if args.tightness_out:
        rng_ids = []
        for i in range(min(cfg.instance_count, 100)):
            rng = rng_from_seed(cfg.seed, 9000, i)
            rng_ids.append((f"bessel-{i:04d}", generate_certified_instance(rng, 4, 2, REAL)))
            rng_ids.append((f"gruss-{i:04d}", generate_certified_pair(rng, 4, 2, REAL)))
        suite.emit_tightness_table(rng_ids, args.tightness_out)
    print(f"total_failed={outcome.total_failed}")
    return 0 if outcome.ok else 1


def _report_exit(payload: dict, certified_ok: bool, args) -> int:
    if args.format == "csv" and args.out:
        rows = [(key, value if isinstance(value, float) else str(value)) for key, value in payload.items()]
        serialize.write_csv(args.out, ("field", "value"), rows)
    else:
        text = serialize.dump_json(payload, args.out)
        if not args.out:
            print(text)
    return 0 if certified_ok else 1


def _cmd_bounds(args) -> int:
    payload = serialize.load_json(args.instance)
    inst = serialize.instance_from_dict(payload)
    if isinstance(inst, PairInstance):
        inst = Instance(inst.ctx, inst.x, inst.family, inst.indices, inst.box_x)
    report = counterpart_bounds(inst.ctx, inst.x, inst.family, inst.indices, inst.box, args.tol)
    body = serialize.report_payload(report, payload)
    scale = instance_scale(inst.ctx, inst.x, inst.box)
    chain_ok = (not report.certified) or (
        report.residual >= -1e-9 * scale
        and report.residual <= report.refined + 1e-9 * scale
        and report.refined <= report.coarse + 1e-9 * scale
    )
    return _report_exit(body, chain_ok, args)


def _cmd_gruss(args) -> int:
    payload = serialize.load_json(args.instance)
    inst = serialize.instance_from_dict(payload)
    if not isinstance(inst, PairInstance):
        print("instance file must carry y (and box_y) for a deviation report", file=sys.stderr)
        return 2
    report = gruss_bounds(
        inst.ctx, inst.x, inst.y, inst.family, inst.indices, inst.box_x, inst.box_y, args.tol
    )
    body = serialize.report_payload(report, payload)
    scale = norm(inst.ctx, inst.x) ** 2 + norm(inst.ctx, inst.y) ** 2
    chain_ok = (not report.certified) or (
        report.deviation_abs <= report.refined + 1e-9 * scale
        and report.refined <= report.coarse + 1e-9 * scale
    )
    return _report_exit(body, chain_ok, args)


def _cmd_l2demo(args) -> int:
    if args.kind == "trig":
        ctx = WeightedL2Context.uniform_density(periodic_trapezoid(args.nodes))
        fam = build_family(ctx, "trig", 3)
        f = sample(ctx, lambda s: 2.0 + np.sin(s))
        g = sample(ctx, lambda s: 2.0 + np.cos(s))
        root = float(np.sqrt(2.0 * np.pi))
        m, M = {0: root}, {0: 3.0 * root}
        box = sandwich_box((0,), m, M)
        report = l2_counterpart_report(ctx, f, fam, (0,), box)
        # the bracketing touches its bounds at the peak nodes, so give the
        # node-wise margins room for sin() rounding
        gruss = l2_sandwich_gruss(ctx, f, g, fam, (0,), m, M, m, M, sandwich_tol=1e-12)
        payload = serialize.l2_instance_to_dict(ctx, {"f": f, "g": g})
        payload["reports"] = {"counterpart": report.to_dict(), "gruss": gruss.to_dict()}
        ok = report.certified and gruss.certified
    elif args.kind == "legendre":
        ctx = WeightedL2Context.uniform_density(gauss_legendre(args.nodes))
        fam = build_family(ctx, "legendre", 4)
        f = sample(ctx, np.exp)
        rng = rng_from_seed(args.seed if args.seed is not None else 0, 5)
        idx = (0, 1, 2, 3)
        mid, d = certified_box_arrays(rng, ctx.context, f, fam, idx)
        box = CoefficientBox.centered(idx, mid, d)
        report = l2_counterpart_report(ctx, f, fam, idx, box)
        payload = serialize.l2_instance_to_dict(ctx, {"f": f})
        payload["reports"] = {"counterpart": report.to_dict()}
        ok = report.certified
    else:
        ctx = WeightedL2Context.uniform_density(counting_measure(3))
        fam = build_family(ctx, "indicator", 3)
        f = np.array([0.5, 0.3, 0.2])
        g = np.array([0.2, 0.6, 0.1])
        idx = (0, 1)
        box = sandwich_box(idx, {0: 0.0, 1: 0.0}, {0: 1.0, 1: 1.0})
        report = l2_counterpart_report(ctx, f, fam, idx, box)
        gruss = l2_gruss_report(ctx, f, g, fam, idx, box, box)
        payload = serialize.l2_instance_to_dict(ctx, {"f": f, "g": g})
        payload["reports"] = {"counterpart": report.to_dict(), "gruss": gruss.to_dict()}
        ok = report.certified and gruss.certified
    text = serialize.dump_json(payload, args.out)
    if not args.out:
        print(text)
    return 0 if ok else 1


def _cmd_sharpness(args) -> int:
    cfg = SearchConfig(
        dimension=args.dim,
        family_size=args.family_size,
        field=args.field,
        restarts=args.restarts,
        steps_per_restart=args.steps,
        seed=args.seed if args.seed is not None else SearchConfig.seed,
    )
    if args.mode == "residual":
        result = maximize_residual_ratio(cfg)
    else:
        result = maximize_gruss_ratio(cfg)
    payload = {
        "mode": args.mode,
        "best_ratio": result.best_ratio,
        "evaluations": result.evaluations,
        "degenerate": result.degenerate,
        "best_instance": result.best_instance,
    }
    text = serialize.dump_json(payload, args.out)
    if not args.out:
        print(text)
    print(f"best_ratio={result.best_ratio:.12f} evaluations={result.evaluations}")
    return 0 if -1e-12 <= result.best_ratio <= 0.25 + 1e-9 else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "verify": _cmd_verify,
        "bounds": _cmd_bounds,
        "gruss": _cmd_gruss,
        "l2demo": _cmd_l2demo,
        "sharpness": _cmd_sharpness,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
