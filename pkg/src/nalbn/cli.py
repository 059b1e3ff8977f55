"""Command-line front end: ``nalbn <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .data import DataError, infer_schema, inject_mcar, read_csv, write_csv
from .graph import CycleError, Dag, GraphError, scaled_shd, shd, to_cpdag
from .model import BayesianNetwork, FitError, ModelError
from .networks import BUNDLED, load_network
from .scoring import Penalty
from .search import OrderSearchConfig, TabuConfig, exact_order_search, tabu_search
from .sem import DegenerateEvidenceError, SemConfig, structural_em
from .types import node_type_from_dict

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_schema(path):
    """Node types from a BN JSON, a schema JSON ({"nodes": [...]}) or a bundled name."""
    if path in BUNDLED:
        return BUNDLED[path]().node_types
    with open(path) as fh:
        spec = json.load(fh)
    return {n["name"]: node_type_from_dict(n) for n in spec["nodes"]}


def _load_dag(path) -> Dag:
    if path in BUNDLED:
        return BUNDLED[path]().dag
    with open(path) as fh:
        spec = json.load(fh)
    names = [n["name"] if isinstance(n, dict) else n for n in spec["nodes"]]
    return Dag(names, [tuple(a) for a in spec.get("arcs", [])])


def _read_data(args):
    schema = _load_schema(args.schema) if args.schema else infer_schema(args.data, args.na_token)
    return read_csv(args.data, schema, args.na_token)


def _write_json(obj, path):
    text = json.dumps(obj, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(data, path, na_token):
    write_csv(data, path if path else sys.stdout, na_token)


def cmd_sample(args):
    bn = load_network(args.network)
    _emit_csv(bn.sample(args.n, seed=args.seed), args.out, args.na_token)


def cmd_inject(args):
    data = _read_data(args)
    _emit_csv(inject_mcar(data, args.beta, seed=args.seed), args.out, args.na_token)


def _read_order(path, nodes):
    with open(path) as fh:
        text = fh.read()
    order = [t for t in text.replace(",", " ").split() if t]
    if sorted(order) != sorted(nodes):
        raise UsageError(f"order file {path} must list every node exactly once")
    return order


def cmd_learn(args):
    data = _read_data(args)
    if args.algorithm == "sem":
        result = structural_em(
            data, SemConfig(particles=args.particles, tabu=TabuConfig(seed=args.seed), seed=args.seed)
        )
        network = result.network
        penalty_label = "bic"
    else:
        try:
            penalty = Penalty.parse(args.penalty, len(data.nodes))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        penalty_label = penalty.label
        if args.algorithm == "order-exact":
            if not args.order_file:
                raise UsageError("--algorithm order-exact requires --order-file")
            order = _read_order(args.order_file, data.nodes)
            result = exact_order_search(data, OrderSearchConfig(order, args.max_parents), penalty)
        else:
            result = tabu_search(data, TabuConfig(seed=args.seed), penalty)
        network = BayesianNetwork.fit(result.dag, data)
    meta = result.metadata(timing=not args.no_timing)
    meta.update({"algorithm": args.algorithm, "penalty": penalty_label, "n": data.n_rows})
    if result.em_iterations is not None:
        meta["em_iterations"] = result.em_iterations
    _write_json(network.to_dict(), args.out)
    meta_path = (os.path.splitext(args.out)[0] + ".meta.json") if args.out else None
    if meta_path:
        _write_json(meta, meta_path)
    else:
        sys.stderr.write(json.dumps(meta) + "\n")


def cmd_fit(args):
    data = _read_data(args)
    dag = _load_dag(args.structure)
    if tuple(dag.nodes) != tuple(data.nodes):
        dag = Dag(data.nodes, dag.arcs)
    _write_json(BayesianNetwork.fit(dag, data).to_dict(), args.out)


def cmd_shd(args):
    a, b = _load_dag(args.first), _load_dag(args.second)
    ca, cb = to_cpdag(a), to_cpdag(b)
    if args.scaled:
        print(f"{scaled_shd(ca, cb, len(b.arcs)):.6f}")
    else:
        print(shd(ca, cb))


def cmd_experiment(args):
    from .experiments import ExperimentConfig, run_experiment

    spec = {}
    if args.config:
        with open(args.config) as fh:
            spec = json.load(fh)
    overrides = {
        "network": args.network, "replicates": args.replicates, "k_grid": args.k_grid,
        "beta_grid": args.beta_grid, "penalties": args.penalties, "algorithms": args.algorithms,
        "max_parents": args.max_parents, "seed": args.seed, "output": args.output,
        "particles": args.particles,
    }
    spec.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_timing:
        spec["timing"] = False
    try:
        cfg = ExperimentConfig.from_dict(spec)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from None
    df = run_experiment(cfg)
    print(f"{len(df)} result rows in {cfg.output}")


def cmd_summarize(args):
    from .experiments import summarize

    agg = summarize(args.results)
    if args.out:
        agg.to_csv(args.out, index=False, float_format="%.6f")
    else:
        sys.stdout.write(agg.to_csv(index=False, float_format="%.6f"))


def _floats(text):
    return [float(t) for t in text.split(",") if t]


def _ints(text):
    return [int(t) for t in text.split(",") if t]


def _strings(text):
    return [t for t in text.split(",") if t]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nalbn", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(sp):
        sp.add_argument("data", help="input CSV")
        sp.add_argument("--schema", help="BN/schema JSON or bundled network name declaring node types")
        sp.add_argument("--na-token", default="NA")

    sp = sub.add_parser("sample", help="forward-sample a network to CSV")
    sp.add_argument("network", help="BN JSON path or bundled name (" + ", ".join(BUNDLED) + ")")
    sp.add_argument("-n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--na-token", default="NA")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("inject", help="mask cells completely at random")
    data_args(sp)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_inject)

    sp = sub.add_parser("learn", help="learn a network structure and its parameters")
    data_args(sp)
    sp.add_argument("--algorithm", choices=["order-exact", "tabu", "sem"], default="tabu")
    sp.add_argument("--order-file")
    sp.add_argument("--max-parents", type=int, default=2)
    sp.add_argument("--penalty", default="bic", help="bic, aic or alpha:<value>")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--particles", type=int, default=500)
    sp.add_argument("--out", help="BN JSON output; metadata goes to <out>.meta.json")
    sp.add_argument("--no-timing", action="store_true", help="write wall_time_ms as 0")
    sp.set_defaults(func=cmd_learn)

    sp = sub.add_parser("fit", help="fit parameters for a given structure")
    data_args(sp)
    sp.add_argument("--structure", required=True, help="BN or DAG JSON with nodes and arcs")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("shd", help="structural Hamming distance between CPDAGs")
    sp.add_argument("first")
    sp.add_argument("second", help="reference network (its arc count scales --scaled)")
    sp.add_argument("--scaled", action="store_true")
    sp.set_defaults(func=cmd_shd)

    sp = sub.add_parser("experiment", help="run a simulation grid")
    sp.add_argument("config", nargs="?", help="experiment config JSON")
    sp.add_argument("--network")
    sp.add_argument("--replicates", type=int)
    sp.add_argument("--k-grid", type=_ints)
    sp.add_argument("--beta-grid", type=_floats)
    sp.add_argument("--penalties", type=_strings)
    sp.add_argument("--algorithms", type=_strings)
    sp.add_argument("--max-parents", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--output")
    sp.add_argument("--particles", type=int)
    sp.add_argument("--no-timing", action="store_true")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("summarize", help="aggregate a results CSV")
    sp.add_argument("results")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_summarize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"nalbn {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (DataError, ModelError, FitError, GraphError, CycleError, DegenerateEvidenceError,
            FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        sys.stderr.write(f"nalbn {args.command}: {type(exc).__name__}: {exc}\n")
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover
        logging.exception("internal error")
        sys.stderr.write(f"nalbn {args.command}: internal error: {exc}\n")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
