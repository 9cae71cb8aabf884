"""Command line front end.

Exit codes: 0 on success, 2 when a validation or data check fails, 1 for
usage errors (unknown flags, malformed arguments).
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np
from numpy.random import SeedSequence

from . import __version__
from .params import SystemParams, load_params

_VAR_ALIASES = {
    "p_beta": "p_beta_dbm",
    "p_beta_dbm": "p_beta_dbm",
    "d_alpha_beta": "d_alpha_beta_m",
    "d_alpha_beta_m": "d_alpha_beta_m",
    "rs": "rs",
    "zeta": "zeta",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; remap that to 1 so that
    2 stays reserved for validation failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="sim", description="secure offloading simulator")
    parser.add_argument("--version", action="version", version=f"sim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sweep = sub.add_parser("sweep", help="run a parameter sweep and write a CSV")
    sweep.add_argument("--var", required=True, choices=sorted(_VAR_ALIASES))
    sweep.add_argument("--from", dest="start", type=float, help="first sweep value")
    sweep.add_argument("--to", dest="stop", type=float, help="last sweep value (inclusive)")
    sweep.add_argument("--step", type=float, help="sweep value spacing")
    sweep.add_argument("--values", help="explicit comma-separated sweep values")
    sweep.add_argument("--schemes", default="gpm-noma,gpm-noma-nan,rpm-noma,gpm-oma")
    sweep.add_argument("--reps", type=int, default=1000)
    sweep.add_argument("--seed", type=int, default=42)
    sweep.add_argument("--rep-start", type=int, default=0)
    sweep.add_argument("--lambda-grid", type=float, default=0.005)
    sweep.add_argument("--config", help="JSON file overriding system parameters")
    sweep.add_argument("--out", required=True, help="output CSV path")

    validate = sub.add_parser("validate", help="check analytics against Monte Carlo")
    validate.add_argument("--grid", default="default", choices=("default", "quick"))
    validate.add_argument("--config", help="JSON file overriding system parameters")

    plot = sub.add_parser("plot", help="render a sweep CSV as an SVG figure")
    plot.add_argument("--kind", required=True)
    plot.add_argument("--in", dest="csv_in", required=True)
    plot.add_argument("--out", required=True)

    demo = sub.add_parser("pair-demo", help="dump one generated scenario with pairing")
    demo.add_argument("--seed", type=int, default=42)
    demo.add_argument("--out", required=True, help="output CSV path")
    demo.add_argument("--config", help="JSON file overriding system parameters")

    one = sub.add_parser("optimize-one", help="optimize a single pair and print the schedule")
    one.add_argument("--seed", type=int, default=42)
    one.add_argument("--p-beta", type=float, help="edge transmit power override (dBm)")
    one.add_argument("--scheme", default="gpm-noma")
    one.add_argument("--config", help="JSON file overriding system parameters")

    sub.add_parser("bench", help="compare accelerated and plain kernel lanes")
    return parser


def _load_config(path) -> SystemParams:
    return load_params(path) if path else SystemParams()


def _sweep_values(args) -> tuple[float, ...]:
    if args.values is not None:
        if args.start is not None or args.stop is not None or args.step is not None:
            raise ValueError("give either --values or --from/--to/--step, not both")
        return tuple(float(v) for v in args.values.split(","))
    if args.start is None or args.stop is None or args.step is None:
        raise ValueError("need --from, --to and --step (or --values)")
    if args.step <= 0:
        raise ValueError("--step must be positive")
    n = int(round((args.stop - args.start) / args.step))
    values = tuple(args.start + i * args.step for i in range(n + 1))
    if not values or values[-1] > args.stop + 1e-9:
        raise ValueError("empty sweep range")
    return values


def _cmd_sweep(args) -> int:
    from .experiments import SweepSpec, run_sweep

    params = _load_config(args.config)
    spec = SweepSpec(
        variable=_VAR_ALIASES[args.var],
        values=_sweep_values(args),
        schemes=tuple(s.strip() for s in args.schemes.split(",") if s.strip()),
        replications=args.reps,
        master_seed=args.seed,
        rep_start=args.rep_start,
        lambda_grid=args.lambda_grid,
        outputs=args.out,
    )
    t0 = time.perf_counter()
    rows = run_sweep(spec, params)
    print(
        f"wrote {args.out}: {len(rows)} rows "
        f"({len(spec.schemes)} schemes x {len(spec.values)} values, "
        f"{spec.replications} reps) in {time.perf_counter() - t0:.1f}s"
    )
    return 0


def _cmd_validate(args) -> int:
    from .experiments import validate_analytics

    report = validate_analytics(_load_config(args.config), grid=args.grid)
    print(report.text, end="")
    return 0 if report.passed else 2


def _cmd_plot(args) -> int:
    from .plotting import render_plot

    try:
        out = render_plot(args.csv_in, args.kind, args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"sim plot: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {out}")
    return 0


def _cmd_pair_demo(args) -> int:
    from .scenario import assign_groups, dump_scenario_csv, generate_scenario, pair_gpm

    params = _load_config(args.config)
    vehicles, eve = generate_scenario(params, args.seed)
    groups = assign_groups(vehicles, params)
    pairing = pair_gpm(groups, vehicles)
    dump_scenario_csv(args.out, vehicles, eve, groups, pairing)
    print(
        f"wrote {args.out}: {len(vehicles)} vehicles, "
        f"{len(groups.center_ids)} center / {len(groups.edge_ids)} edge, "
        f"{len(pairing.pairs)} pairs, {len(pairing.unpaired)} unpaired"
    )
    return 0


def _cmd_optimize_one(args) -> int:
    from .channel import draw_channels
    from .experiments import parse_scheme
    from .optimizer import GaConfig, OptContext, exhaustive_search, ga_pats, oma_baseline
    from .scenario import assign_groups, generate_scenario, pair_gpm, pair_link_geometry, pair_rpm

    params = _load_config(args.config)
    if args.p_beta is not None:
        params = params.with_updates(p_edge_dbm=args.p_beta)
    scheme = parse_scheme(args.scheme)
    vehicles, eve = generate_scenario(params, SeedSequence(entropy=args.seed, spawn_key=(0,)))
    groups = assign_groups(vehicles, params)
    if scheme.pairing == "rpm":
        pairing = pair_rpm(groups, vehicles, SeedSequence(entropy=args.seed, spawn_key=(1,)))
    else:
        pairing = pair_gpm(groups, vehicles)
    if not pairing.pairs:
        print("sim optimize-one: generated scenario has no pairs", file=sys.stderr)
        return 2
    pair = pairing.pairs[0]
    geometry = pair_link_geometry(pair, vehicles, eve, params)
    draw = draw_channels(params, SeedSequence(entropy=args.seed, spawn_key=(2, pair[1])))
    ctx = OptContext.from_draw(
        params,
        geometry,
        draw,
        an_mode="model" if scheme.an else "off",
        oma=scheme.access == "oma",
    )
    if scheme.access == "oma":
        res = oma_baseline(ctx)
    elif scheme.optimizer == "ga":
        res = ga_pats(ctx, GaConfig(seed=args.seed))
    else:
        res = exhaustive_search(ctx)
    print(f"scheme {scheme.name}: pair center={pair[0]} edge={pair[1]}")
    print(
        "geometry: d_ba=%.1f d_ab=%.1f d_be=%.1f d_ae=%.1f d_bse=%.1f"
        % (
            geometry.d_beta_alpha,
            geometry.d_alpha_b,
            geometry.d_beta_e,
            geometry.d_alpha_e,
            geometry.d_b_e,
        )
    )
    print(
        f"schedule: lambda={res.best.lam:.3f} m_alpha={res.best.m_alpha} "
        f"m_beta={res.best.m_beta} feasible={res.feasible}"
    )
    print(f"delays: edge={res.d_beta:.4f}s center={res.d_alpha:.4f}s")
    if scheme.access == "noma":
        p_alpha, p_beta = ctx.sop(res.best.lam)
        print(f"outage: alpha={p_alpha:.6f} beta={p_beta:.6f}")
    print(f"grid cells examined: {res.evaluations}")
    return 0


def _cmd_bench(_args) -> int:
    from . import kernels

    print(f"active lane: {kernels.ACTIVE} (numba available: {kernels.HAVE_NUMBA})")
    rng = np.random.default_rng(0)
    n = 200_000
    gains = [np.ascontiguousarray(rng.exponential(size=n)) for _ in range(6)]
    y = np.ascontiguousarray(np.linspace(1e-3, 2.6, n))
    t_off = np.ascontiguousarray(rng.uniform(0.05, 0.5, size=512))
    lanes = [("numpy", kernels.outage_counts_numpy, kernels.beta_integrand_numpy,
              kernels.delay_partials_numpy)]
    if kernels.HAVE_NUMBA:
        lanes.append(("numba", kernels.outage_counts_numba, kernels.beta_integrand_numba,
                      kernels.delay_partials_numba))

    def timeit(fn, *fn_args):
        fn(*fn_args)  # warm up (and trigger compilation on the numba lane)
        best = float("inf")
        for _ in range(5):
            t0 = time.perf_counter()
            fn(*fn_args)
            best = min(best, time.perf_counter() - t0)
        return best

    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name, *_ in lanes))
    rows = [
        ("outage_counts", lambda f: timeit(
            f, gains[0], gains[1], gains[2], gains[3], gains[4], gains[5],
            2.0 ** 0.1, 1e-15, 1e-9, 1e-9, 1e-9, 1e-10, 1e-9, 1e-9, 1e-9, 1e-9, 1e-10, 1e-10)),
        ("beta_integrand", lambda f: timeit(
            f, y, 0.25, 1e-4, 2.0, 0.5, 10.0, 1.07, 3.0, 0.1, 0.2, 1e-4, 3.0, False, False)),
        ("delay_partials", lambda f: timeit(f, 0.2, t_off, 10)),
    ]
    for label, runner in rows:
        cells = []
        for _, counts, integ, delays in lanes:
            fn = {"outage_counts": counts, "beta_integrand": integ, "delay_partials": delays}[label]
            cells.append(f"{runner(fn) * 1e3:>10.3f}ms")
        print(f"{label:<18}" + "".join(f"{c:>12}" for c in cells))
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "validate": _cmd_validate,
    "plot": _cmd_plot,
    "pair-demo": _cmd_pair_demo,
    "optimize-one": _cmd_optimize_one,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"sim {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
