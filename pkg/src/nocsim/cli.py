"""Command-line front end: experiment runs, sweeps, and analysis tools.

Exit codes: 0 success, 1 configuration errors, 2 simulation protocol
violations (deadlock or livelock detected).
"""

from __future__ import annotations

import argparse
import os
import sys

from . import config as cfgmod, engine, routing, topology as topo
from .addressing import assign_virtual_coordinates, default_anchors
from .errors import (
    ConfigError,
    DeadlockDetected,
    Infeasible,
    LivelockDetected,
    NocError,
)

CSV_COLUMNS = (
    "algorithm", "rate", "seed", "delivered", "dropped", "avg_latency",
    "p99_latency", "throughput", "utilization", "wireless_share",
)


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _row(algorithm, rate, seed, report):
    return (
        algorithm, f"{rate:g}", str(seed),
        str(report.delivered), str(report.dropped),
        _fmt(report.avg_latency), _fmt(report.p99_latency),
        _fmt(report.throughput), _fmt(report.utilization),
        _fmt(report.wireless_share),
    )


def run_sweep(experiment, out_dir):
    """One CSV row per (algorithm, rate, seed) plus per-(algorithm, rate)
    means; byte-identical across repeated invocations. Partial outputs are
    removed on failure."""
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")
    summary_path = os.path.join(out_dir, "summary.csv")
    rows = []
    try:
        for variant in experiment.variants():
            report = engine.run(variant)
            rows.append(
                (
                    variant.algorithm,
                    variant.traffic.injection_rate,
                    variant.traffic.seed,
                    report,
                )
            )
    except Exception:
        for path in (results_path, summary_path):
            if os.path.exists(path):
                os.remove(path)
        raise

    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    with open(results_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for algorithm, rate, seed, report in rows:
            fh.write(",".join(_row(algorithm, rate, seed, report)) + "\n")

    groups = {}
    for algorithm, rate, seed, report in rows:
        groups.setdefault((algorithm, rate), []).append(report)
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            "algorithm,rate,delivered,dropped,avg_latency,p99_latency,"
            "throughput,utilization,wireless_share\n"
        )
        for (algorithm, rate), reports in sorted(groups.items()):
            k = len(reports)
            mean = lambda attr: sum(getattr(r, attr) for r in reports) / k
            fh.write(
                ",".join(
                    (
                        algorithm, f"{rate:g}",
                        _fmt(mean("delivered")), _fmt(mean("dropped")),
                        _fmt(mean("avg_latency")), _fmt(mean("p99_latency")),
                        _fmt(mean("throughput")), _fmt(mean("utilization")),
                        _fmt(mean("wireless_share")),
                    )
                )
                + "\n"
            )
    return results_path, summary_path


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _load_experiment(args):
    with open(args.config, encoding="utf-8") as fh:
        text = fh.read()
    base_dir = os.path.dirname(os.path.abspath(args.config))
    return cfgmod.parse_config(text, base_dir, seed_override=args.seed)


def _load_topology(args):
    if args.topology:
        with open(args.topology, encoding="utf-8") as fh:
            return topo.from_edge_list_text(fh.read())
    if args.config:
        return _load_experiment(args).template.topology
    raise ConfigError("need --topology or --config")


def cmd_run(args):
    experiment = _load_experiment(args)
    report = engine.run(experiment.template)
    sys.stdout.write(report.serialize())
    return 0


def cmd_sweep(args):
    experiment = _load_experiment(args)
    results, summary = run_sweep(experiment, args.out)
    print(f"wrote {results}")
    print(f"wrote {summary}")
    return 0


def cmd_routes(args):
    topology = _load_topology(args)
    routes = routing.neighborhood_routes(
        topo.TopologyView(topology), args.src, args.dst, args.budget
    )
    for route in sorted(routes):
        print(" ".join(str(n) for n in route))
    return 0


def cmd_coords(args):
    topology = _load_topology(args)
    anchors = default_anchors(topology, args.anchors)
    cmap = assign_virtual_coordinates(topology, anchors)
    sys.stdout.write(cmap.dump())
    return 0


def cmd_check_deadlock(args):
    topology = _load_topology(args)
    algorithm = args.algorithm
    vc_count = args.vcs
    if vc_count is None:
        vc_count = 2 if topology.kind == topo.TORUS else 1
    if algorithm in ("xy", "dyxy") and topology.kind == topo.TORUS and vc_count >= 2:
        relation = routing.torus_xy_dateline_relation(topology, vc_count)
    elif algorithm == "xy":
        relation = routing.xy_relation(topology)
    elif algorithm == "dyxy":
        relation = routing.dyxy_relation(topology)
    elif algorithm == "minimal_adaptive":
        relation = routing.minimal_adaptive_relation(topology)
    else:
        raise ConfigError(f"no deadlock relation for algorithm {algorithm!r}")
    cdg = routing.build_cdg(topology, relation, vc_count)
    free = routing.is_deadlock_free(cdg)
    print(f"deadlock-free: {'true' if free else 'false'}")
    return 0


def cmd_synth(args):
    try:
        result = topo.synthesize(
            args.n, args.max_degree, args.max_diameter, args.seed or 0, args.budget
        )
    except Infeasible as exc:
        print(f"infeasible: {exc}")
        return 0
    text = topo.to_edge_list_text(result)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "synthesized.edges")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {path}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_score(args):
    topology = _load_topology(args)
    s = topo.score(topology)
    print(f"diameter={s.diameter}")
    print(f"avg_distance={s.avg_distance:.6f}")
    print(f"max_degree={s.max_degree}")
    print(f"edge_count={s.edge_count}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nocsim",
        description="Cycle-level NoC simulation workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True, topology=False):
        if config:
            p.add_argument("--config", help="experiment config file")
        if topology:
            p.add_argument("--topology", help="edge-list topology file")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("run", help="run one simulation and print its report")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a rate/seed/algorithm sweep to CSV")
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("routes", help="enumerate all shortest routes")
    common(p, topology=True)
    p.add_argument("--src", type=int, required=True)
    p.add_argument("--dst", type=int, required=True)
    p.add_argument("--budget", type=int, default=routing.DEFAULT_ROUTE_BUDGET)
    p.set_defaults(func=cmd_routes)

    p = sub.add_parser("coords", help="dump virtual coordinates")
    common(p, topology=True)
    p.add_argument("--anchors", type=int, default=3)
    p.set_defaults(func=cmd_coords)

    p = sub.add_parser("check-deadlock", help="channel-dependency cycle check")
    common(p, topology=True)
    p.add_argument("--algorithm", default="xy")
    p.add_argument("--vcs", type=int, default=None)
    p.set_defaults(func=cmd_check_deadlock)

    p = sub.add_parser("synth", help="constrained topology synthesis")
    common(p, config=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-degree", type=int, required=True, dest="max_degree")
    p.add_argument("--max-diameter", type=int, required=True, dest="max_diameter")
    p.add_argument("--budget", type=int, default=200)
    p.set_defaults(func=cmd_synth, out=None)

    p = sub.add_parser("score", help="diameter / average distance / degree")
    common(p, topology=True)
    p.set_defaults(func=cmd_score)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DeadlockDetected, LivelockDetected) as exc:
        print(f"protocol violation: {exc}", file=sys.stderr)
        return 2
    except (NocError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
