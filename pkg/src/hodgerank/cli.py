"""Command-line interface.

Exit codes
----------
0  success
2  usage error (bad or missing flags)
3  unreadable or malformed input
4  disconnected comparison graph
5  budget or domain error (e.g. m too large for the scheme, p0 < 1)

Errors are reported on stderr as one line ``error: <reason>: <detail>``.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import io
from .experiments import (RANDOM_SCHEMES, ExperimentConfig, SamplerTemplate,
                          count_complete_rounds, fiedler_sweep, ingest_dataset,
                          run_dataset_ensemble, run_ensemble, write_sweep_csv)
from .graph import InvalidRecordError, build_pair_graph, read_records_csv
from .hodge import DisconnectedGraphError, hodge_decompose, hodge_rank, sensitivity
from .sampling import SCHEMES, BudgetError, SamplerSpec, budget_from_p0, canonical_scheme, sample
from .spectral import (EstimatorInputs, estimate_with_replacement,
                       estimate_without_replacement, fiedler, solve_a)

EXIT_USAGE, EXIT_INPUT, EXIT_DISCONNECTED, EXIT_DOMAIN = 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, code, reason, detail):
        super().__init__(detail)
        self.code, self.reason, self.detail = code, reason, detail


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, "usage", message)


def default_seed():
    value = os.environ.get("HODGE_SEED")
    if value is None:
        return 0
    try:
        return int(value)
    except ValueError:
        raise CliError(EXIT_USAGE, "usage", f"HODGE_SEED is not an integer: {value!r}") from None


def parse_grid(text):
    """Parse ``1.5,2,4`` or ``start:stop[:count]`` (geometric, inclusive, 8 points by default)."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = parts[0], parts[1]
            count = int(parts[2]) if len(parts) == 3 else 8
            if start <= 0 or stop < start or count < 1:
                raise ValueError
            if count == 1:
                return [start]
            grid = np.geomspace(start, stop, count)
            return [float(io.fmt(g)) for g in grid]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise CliError(EXIT_USAGE, "usage", f"cannot parse p0 grid {text!r}") from None


def _schemes(text, allowed=RANDOM_SCHEMES):
    try:
        names = [canonical_scheme(s.strip()) for s in text.split(",") if s.strip()]
    except ValueError as err:
        raise CliError(EXIT_USAGE, "usage", str(err)) from None
    for s in names:
        if s not in allowed:
            raise CliError(EXIT_USAGE, "usage", f"scheme {s} not supported here")
    return names


def _emit_text(out, text):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_json(out, obj):
    _emit_text(out, io.dumps(obj))


def _emit_table(out, writer):
    if out in (None, "-"):
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "out.csv")
            writer(path)
            with open(path, encoding="utf-8") as fh:
                sys.stdout.write(fh.read())
    else:
        writer(out)


def _load_graph(args):
    if bool(args.records) == bool(args.graph):
        raise CliError(EXIT_USAGE, "usage", "give exactly one of --records / --graph")
    if args.records:
        records = read_records_csv(args.records, args.n)
        n = args.n if args.n is not None else max((max(r.i, r.j) for r in records), default=-1) + 1
        return build_pair_graph(n, records)
    return io.read_graph(args.graph, args.n)


def cmd_sample(args):
    if (args.m is None) == (args.p0 is None):
        raise CliError(EXIT_USAGE, "usage", "give exactly one of --m / --p0")
    m = args.m if args.m is not None else budget_from_p0(args.n, args.p0)
    scheme = _schemes(args.scheme, SCHEMES)[0]
    seed = args.seed if args.seed is not None else default_seed()
    spec = SamplerSpec(scheme, args.n, m, seed, args.transition_p0)
    graph = sample(spec)
    io.write_graph(args.out, graph, spec.to_dict())


def cmd_rank(args):
    graph = _load_graph(args)
    score = hodge_rank(graph)
    lam = fiedler(graph).fiedler_value if graph.n >= 2 else 0.0
    _emit_json(args.out, {
        "scores": score.x,
        "lambda2": lam,
        "sensitivity": sensitivity(graph) if graph.n >= 2 else None,
        "residual_norm": score.residual_norm,
    })


def cmd_decompose(args):
    _emit_json(args.out, hodge_decompose(_load_graph(args)).to_json_dict())


def cmd_estimate(args):
    p0 = args.p0
    if p0 < 1:
        raise BudgetError(f"p0 must be >= 1, got {p0}")
    limit = 1.0 - math.sqrt(2.0 / p0)
    out = {"p0": p0, "n": args.n, "a_theorem1": solve_a(p0), "limit": limit}
    if args.n is None:
        out.update(a1=limit, a2=limit)
    else:
        inputs = EstimatorInputs.from_p0(args.n, p0)
        out.update(a1=estimate_with_replacement(inputs),
                   a2=estimate_without_replacement(inputs),
                   m=inputs.m, p=inputs.p, d=inputs.d)
    _emit_json(args.out, out)


def cmd_sweep(args):
    seed = args.seed if args.seed is not None else default_seed()
    rows = fiedler_sweep(args.n, parse_grid(args.p0), args.trials, seed,
                         _schemes(args.schemes), threads=args.threads)
    _emit_table(args.out, lambda path: write_sweep_csv(path, rows))


def cmd_simulate(args):
    if args.config:
        config = ExperimentConfig.from_json(args.config)
    else:
        if args.n is None:
            raise CliError(EXIT_USAGE, "usage", "give --config or --n")
        seed = args.seed if args.seed is not None else default_seed()
        config = ExperimentConfig(
            n=args.n,
            samplers=[SamplerTemplate(s) for s in _schemes(args.schemes)],
            p0_grid=parse_grid(args.p0),
            trials=args.trials,
            outlier_percentage=args.op,
            base_seed=seed,
            rescale=args.rescale,
        )
    result = run_ensemble(config, threads=args.threads)
    _emit_table(args.out, result.write_csv)


def cmd_ingest(args):
    dataset = ingest_dataset(args.records, args.n)
    graph = dataset.graph
    summary = {
        "n": graph.n,
        "records": len(dataset.records),
        "pairs": graph.num_edges,
        "complete_rounds": count_complete_rounds(graph),
        "scores": dataset.truth.x,
        "lambda2": fiedler(graph).fiedler_value,
    }
    _emit_json(args.out_truth, summary)
    if args.p0:
        seed = args.seed if args.seed is not None else default_seed()
        result = run_dataset_ensemble(dataset, parse_grid(args.p0), args.trials, seed,
                                      _schemes(args.schemes), threads=args.threads,
                                      rescale=args.rescale)
        if not args.out:
            raise CliError(EXIT_USAGE, "usage", "--p0 needs --out for the result table")
        _emit_table(args.out, result.write_csv)


def build_parser():
    parser = _Parser(prog="hodgerank", description="HodgeRank sampling laboratory")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def graph_inputs(p):
        p.add_argument("--records", help="comparison-record CSV (i,j,value,annotator)")
        p.add_argument("--graph", help="edge-list CSV (i,j,weight[,mean])")
        p.add_argument("--n", type=int, help="number of items (default: inferred)")
        p.add_argument("--out", help="output path (default: stdout)")

    p = sub.add_parser("sample", help="draw a comparison graph")
    p.add_argument("--scheme", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--p0", type=float)
    p.add_argument("--transition-p0", type=float, dest="transition_p0")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="edge-list CSV; the sidecar gets .json")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("rank", help="HodgeRank scores")
    graph_inputs(p)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("decompose", help="gradient/curl/harmonic split")
    graph_inputs(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("estimate", help="Fiedler value estimates for a budget")
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    def ensemble_flags(p, trials):
        p.add_argument("--p0", default="1.5,2,3,4,6")
        p.add_argument("--trials", type=int, default=trials)
        p.add_argument("--seed", type=int)
        p.add_argument("--schemes", default=",".join(RANDOM_SCHEMES))
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out")

    p = sub.add_parser("sweep", help="Fiedler value sweep over p0")
    p.add_argument("--n", type=int, required=True)
    ensemble_flags(p, 100)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="simulated ranking ensemble")
    p.add_argument("--config", help="ExperimentConfig JSON (overrides the flags below)")
    p.add_argument("--n", type=int)
    p.add_argument("--op", type=float, default=0.0, help="outlier percentage")
    p.add_argument("--rescale", action="store_true")
    ensemble_flags(p, 1000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="score a record file; optionally subsample it")
    p.add_argument("--records", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--out-truth", dest="out_truth")
    p.add_argument("--rescale", action="store_true")
    ensemble_flags(p, 100)
    p.set_defaults(func=cmd_ingest, p0=None)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "threads", 1) < 1:
            raise CliError(EXIT_USAGE, "usage", "--threads must be >= 1")
        args.func(args)
    except CliError as err:
        code, reason, detail = err.code, err.reason, err.detail
    except DisconnectedGraphError as err:
        code, reason = EXIT_DISCONNECTED, "disconnected"
        detail = f"{err}; components={err.components()}"
    except (InvalidRecordError, OSError) as err:
        code, reason, detail = EXIT_INPUT, "input", str(err)
    except (BudgetError, ValueError) as err:
        code, reason, detail = EXIT_DOMAIN, "domain", str(err)
    else:
        return 0
    sys.stderr.write(f"error: {reason}: {' '.join(str(detail).split())}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
