"""Command-line interface.

Subcommands: build (network file to junction tree), check (validate a graph
file), gen (random network), bench (experiment table), serve (JSON session
protocol over stdio or TCP), dot (graph-description export).  Exit codes:
0 success, 1 verification failure, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench as benchlib
from . import netio, verify
from .algorithms import PRESETS, run_preset
from .bench import STANDARD_SPECS, NetworkSpec
from .incremental import SessionConfig
from .model import NetworkError, OperationError, build_initial_cluster_graph
from .protocol import SessionServer, serve_stdio


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_build(args) -> int:
    network = netio.parse_network(_read(args.network))
    graph = build_initial_cluster_graph(network)
    report = run_preset(graph, args.preset, seed=args.seed)
    if args.trace:
        _write(args.trace, netio.serialize_trace(graph.trace))
    _write(args.out, netio.serialize_graph(graph))
    print(
        f"cost {report.cost_before} -> {report.cost_after}"
        f" ({report.events} events, preset {report.preset})",
        file=sys.stderr,
    )
    return 0


def cmd_check(args) -> int:
    graph = netio.parse_graph(_read(args.graph))
    reports = [
        verify.check_structure(graph),
        verify.check_family_property(graph),
        verify.check_path_property(graph),
        verify.check_junction_tree(graph.clone()),
    ]
    if args.chordal:
        reports.append(verify.check_chordal_embedding(graph.clone()))
    failed = False
    for rep in reports:
        if rep:
            print(f"ok   {rep.name}")
        else:
            failed = True
            print(f"FAIL {rep.name}: {rep.witnesses[:3]}")
    return 1 if failed else 0


def cmd_gen(args) -> int:
    spec = NetworkSpec(args.name, args.variables, args.arcs,
                       args.card_low, args.card_high, args.seed)
    network = benchlib.generate_random_network(spec)
    _write(args.out, netio.serialize_network(network))
    return 0


def _parse_spec(text: str) -> NetworkSpec:
    parts = text.split(":")
    if len(parts) not in (3, 5, 6):
        raise ValueError(
            f"spec {text!r} must be name:variables:arcs[:cardlow:cardhigh[:seed]]"
        )
    name = parts[0]
    nums = [int(p) for p in parts[1:]]
    if len(nums) == 2:
        return NetworkSpec(name, nums[0], nums[1])
    if len(nums) == 4:
        return NetworkSpec(name, nums[0], nums[1], nums[2], nums[3])
    return NetworkSpec(name, nums[0], nums[1], nums[2], nums[3], nums[4])


def cmd_bench(args) -> int:
    specs = tuple(_parse_spec(s) for s in args.spec) if args.spec else STANDARD_SPECS
    if args.presets:
        presets = tuple(args.presets.split(","))
    else:
        presets = ("IE", "ID") if args.incremental else ("E", "D", "D2")
    if args.incremental:
        lines = ["algorithm\tnetwork\tedits\trestores\tfinal_cost"]
        for spec in specs:
            for preset in presets:
                r = benchlib.run_incremental_experiment(
                    spec, preset, master_seed=args.seed)
                lines.append(f"{r.algorithm}\t{r.network}\t{r.edits}"
                             f"\t{r.restores}\t{r.final_cost}")
        _write(args.out, "\n".join(lines) + "\n")
    else:
        results = benchlib.run_experiment(
            specs, presets, runs=args.runs, master_seed=args.seed)
        _write(args.out, benchlib.format_table(results))
    return 0


def cmd_serve(args) -> int:
    config = SessionConfig(
        preset=args.preset,
        seed=args.seed,
        retraction_shape=args.shape,
        auto_retract=not args.no_auto_retract,
    )
    if args.tcp:
        host, _, port = args.tcp.rpartition(":")
        server = SessionServer(host or "127.0.0.1", int(port), config)
        print(json.dumps({"listening": list(server.server_address)}), flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            server.server_close()
    else:
        serve_stdio(config=config)
    return 0


def cmd_dot(args) -> int:
    graph = netio.parse_graph(_read(args.graph))
    _write(args.out, netio.export_dot(graph))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="jtree",
        description="Junction trees for belief networks by cluster-graph "
                    "transformation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="transform a network file into a junction tree")
    p.add_argument("network", help="network JSON file, or - for stdin")
    p.add_argument("--preset", default="E", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trace", default=None, help="write the event trace here")
    p.add_argument("--out", default=None, help="graph JSON output (default stdout)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("check", help="validate a cluster-graph file")
    p.add_argument("graph", help="graph JSON file, or - for stdin")
    p.add_argument("--chordal", action="store_true",
                   help="also check the chordal embedding")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate a random connected network")
    p.add_argument("--name", default="random")
    p.add_argument("--variables", type=int, required=True)
    p.add_argument("--arcs", type=int, required=True)
    p.add_argument("--card-low", type=int, default=2)
    p.add_argument("--card-high", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run the benchmark experiments")
    p.add_argument("--spec", action="append", default=None,
                   help="name:variables:arcs[:cardlow:cardhigh[:seed]]; repeatable")
    p.add_argument("--presets", default=None, help="comma-separated preset names")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--incremental", action="store_true",
                   help="build each network arc by arc in an edit session")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="serve the JSON session protocol")
    p.add_argument("--stdio", action="store_true", help="serve on stdio (default)")
    p.add_argument("--tcp", default=None, metavar="HOST:PORT",
                   help="listen on TCP instead of stdio (port 0 picks one)")
    p.add_argument("--preset", default="IE", choices=sorted(PRESETS))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--shape", default="chain", choices=("chain", "star"))
    p.add_argument("--no-auto-retract", action="store_true")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("dot", help="export a graph file as graph-description text")
    p.add_argument("graph", help="graph JSON file, or - for stdin")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_dot)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except netio.FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (NetworkError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OperationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
