"""Command line entry point: ``signcone <command> ...``.

Exit codes: 0 on success, 1 for invalid input, 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from signcone.errors import SignconeRuntimeError, ValidationError
from signcone.experiment import load_config, run_experiment, write_outputs
from signcone.graph import gen_sensor_graph, laplacian, load_graph, save_graph
from signcone.pocs import PocsConfig, angle_error, pocs_reconstruct, save_trace
from signcone.sampling import SignOracle, full_sample, greedy_sample, load_samples, random_sample, save_samples, sign_sample
from signcone.spectral import Band, band_basis, eigendecompose, load_signal, random_bandlimited_signal, save_signal

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


def _basis(graph_path, flo, fhi):
    g = load_graph(graph_path)
    return g, band_basis(eigendecompose(laplacian(g)), Band(flo, fhi))


def cmd_graph_gen(args):
    g = gen_sensor_graph(args.n, args.edges, args.seed)
    save_graph(g, args.out)
    return {"n": g.n, "edges": g.num_edges}


def cmd_signal_gen(args):
    _, basis = _basis(args.graph, args.flo, args.fhi)
    save_signal(random_bandlimited_signal(basis, args.seed), args.out)
    return {"n": basis.n, "B": basis.B}


def cmd_sample(args):
    g, basis = _basis(args.graph, args.flo, args.fhi)
    x = load_signal(args.signal, n=g.n)
    if args.strategy == "full":
        s = full_sample(x)
    elif args.budget is None:
        raise ValidationError(f"--budget is required for strategy {args.strategy}")
    elif args.strategy == "greedy":
        s, _ = greedy_sample(basis, args.budget, SignOracle(x))
    else:
        if args.seed is None:
            raise ValidationError("--seed is required for strategy random")
        s = sign_sample(x, random_sample(g.n, args.budget, args.seed))
    seed = args.seed if args.strategy == "random" else None
    save_samples(s, args.out, args.strategy, seed)
    return {"strategy": args.strategy, "M": len(s)}


def cmd_reconstruct(args):
    g, basis = _basis(args.graph, args.flo, args.fhi)
    s = load_samples(args.samples)
    if s.n != g.n:
        raise ValidationError(f"samples are for n={s.n}, graph has n={g.n}")
    ref = load_signal(args.reference, n=g.n) if args.reference else None
    if args.trace and ref is None:
        raise ValidationError("--trace needs --reference")
    v = np.random.default_rng(args.init_seed).standard_normal(g.n)
    cfg = PocsConfig(max_iters=args.iters, rel_tol=args.tol, trace_stride=args.trace_stride)
    res = pocs_reconstruct(s, basis, v / np.linalg.norm(v), cfg, reference=ref)
    save_signal(res.x_star, args.out)
    if args.trace:
        save_trace(res.trace, args.trace)
    out = {
        "iterations": res.iterations_run,
        "converged": res.converged,
        "collapsed": res.collapsed,
        "final_step": res.final_step,
    }
    if ref is not None and not res.collapsed:
        out["angle_error_deg"] = angle_error(ref, res.x_star)
    return out


def cmd_experiment_run(args):
    report = run_experiment(load_config(args.config))
    paths = write_outputs(report, args.out_dir)
    return {
        "rows": len(report.rows),
        "aggregates": [[a.strategy, a.rate, a.mean_delta_deg] for a in report.aggregates],
        "outputs": {k: str(p) for k, p in paths.items()},
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="signcone", description="Sign sampling and reconstruction of band-limited graph signals.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph").add_subparsers(dest="action", required=True)
    gg = graph.add_parser("gen", help="random sensor graph")
    gg.add_argument("--n", type=int, required=True)
    gg.add_argument("--edges", type=int, required=True)
    gg.add_argument("--seed", type=int, required=True)
    gg.add_argument("--out", required=True)
    gg.set_defaults(func=cmd_graph_gen)

    signal = sub.add_parser("signal").add_subparsers(dest="action", required=True)
    sg = signal.add_parser("gen", help="random unit-norm band-limited signal")
    sg.add_argument("--graph", required=True)
    sg.add_argument("--flo", type=int, required=True)
    sg.add_argument("--fhi", type=int, required=True)
    sg.add_argument("--seed", type=int, required=True)
    sg.add_argument("--out", required=True)
    sg.set_defaults(func=cmd_signal_gen)

    sa = sub.add_parser("sample", help="choose vertices and record their signs")
    sa.add_argument("--graph", required=True)
    sa.add_argument("--signal", required=True)
    sa.add_argument("--flo", type=int, required=True)
    sa.add_argument("--fhi", type=int, required=True)
    sa.add_argument("--strategy", choices=("greedy", "random", "full"), required=True)
    sa.add_argument("--budget", type=int)
    sa.add_argument("--seed", type=int)
    sa.add_argument("--out", required=True)
    sa.set_defaults(func=cmd_sample)

    rc = sub.add_parser("reconstruct", help="alternating projections from a random start")
    rc.add_argument("--graph", required=True)
    rc.add_argument("--samples", required=True)
    rc.add_argument("--flo", type=int, required=True)
    rc.add_argument("--fhi", type=int, required=True)
    rc.add_argument("--init-seed", type=int, default=0)
    rc.add_argument("--iters", type=int, default=10000)
    rc.add_argument("--tol", type=float, default=1e-9)
    rc.add_argument("--trace-stride", type=int, default=1)
    rc.add_argument("--reference")
    rc.add_argument("--trace")
    rc.add_argument("--out", required=True)
    rc.set_defaults(func=cmd_reconstruct)

    exp = sub.add_parser("experiment").add_subparsers(dest="action", required=True)
    er = exp.add_parser("run", help="greedy vs random sweep from a JSON config")
    er.add_argument("--config", required=True)
    er.add_argument("--out-dir", required=True)
    er.set_defaults(func=cmd_experiment_run)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        summary = args.func(args)
    except (ValidationError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (SignconeRuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(json.dumps(summary))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
