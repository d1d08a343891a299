"""Command line: generate | pack | experiment | verify.

Exit codes: 0 success, 1 bad input or a property violation, 2 precondition
failure, 3 partial result.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from hamcore.formats import FormatError, format_edge_list, read_graph
from hamcore.graph_core import RandomGraphProcess, find_tau_k
from hamcore.packer import DEFAULT_CHECKPOINTS, PackerConfig, PackingCertificate, PreconditionError, pack
from hamcore.random_models import SamplerError, sample_gnm_min_degree

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_PARTIAL = 0, 1, 2, 3

log = logging.getLogger("hamcore")


def _setup_logging() -> None:
    level = os.environ.get("HAMCORE_LOG", "").lower()
    mapping = {"trace": logging.DEBUG, "debug": logging.DEBUG, "info": logging.INFO, "error": logging.ERROR}
    logging.basicConfig(level=mapping.get(level, logging.WARNING), format="%(message)s", stream=sys.stderr)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    if args.n is None or args.n < 1:
        print("error: --n must be a positive integer", file=sys.stderr)
        return EXIT_INPUT
    if args.model == "gnm-mindeg":
        if args.k is None or (args.m is None and args.c is None):
            print("error: gnm-mindeg needs --k and one of --m/--c", file=sys.stderr)
            return EXIT_INPUT
        m = args.m if args.m is not None else round(args.c * args.n)
        try:
            g = sample_gnm_min_degree(args.n, m, args.k, np.random.default_rng(args.seed))
        except (ValueError, SamplerError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        k = args.k
    else:
        proc = RandomGraphProcess(args.n, args.seed)
        if args.until_tau_k is not None:
            k = args.until_tau_k
            if k < 1:
                print("error: --until-tau-k must be positive", file=sys.stderr)
                return EXIT_INPUT
            try:
                t = find_tau_k(proc, k)
            except (ValueError, RuntimeError) as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_INPUT
        elif args.m is not None:
            k, t = 0, args.m
            if not 0 <= t <= args.n * (args.n - 1) // 2:
                print("error: --m out of range for the process", file=sys.stderr)
                return EXIT_INPUT
        else:
            print("error: process model needs --until-tau-k or --m", file=sys.stderr)
            return EXIT_INPUT
        g = proc.graph_at(t)
    _emit(format_edge_list(g), args.out)
    summary = f"{g.n} {g.m} {k} {args.seed}"
    print(summary, file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_pack(args) -> int:
    from hamcore.verify import validate_certificate

    try:
        g = read_graph(args.input)
    except FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if g.n == 0 or g.min_degree() < args.k:
        print(f"precondition: minimum degree {g.min_degree() if g.n else 0} < k={args.k}", file=sys.stderr)
        return EXIT_PRECONDITION
    c = args.c if args.c is not None else g.m / g.n
    try:
        cfg = PackerConfig(
            k=args.k, c=c, n=g.n, seed=args.seed, reservoir_fraction=args.reservoir_fraction,
            depth_cap=args.depth_cap, beta=args.beta, gamma=args.gamma, check_hypotheses=False,
        )
    except PreconditionError as exc:
        print(f"precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    if not c > args.k / 2:
        log.warning("c=%.3f does not exceed k/2; results are outside the guaranteed regime", c)
    cert = pack(g, cfg, np.random.default_rng(args.seed))
    verdict = validate_certificate(g, cert) if cert.status != "failed" else None
    _emit(json.dumps(cert.to_json(), sort_keys=True) + "\n", args.out)
    report = verdict.to_json() if verdict else {"property": "certificate", "pass": False, "status": cert.status}
    print(json.dumps(report, sort_keys=True), file=sys.stdout if args.out else sys.stderr)
    if verdict is not None and verdict.violated:
        return EXIT_INPUT
    return EXIT_OK if cert.complete else EXIT_PARTIAL


def cmd_experiment(args) -> int:
    from hamcore.experiment import ExperimentSpec, run_experiment, write_outputs

    try:
        spec = ExperimentSpec(
            n=args.n, k=args.k, c=args.c if args.c is not None else 3.0, trials=args.trials, seed=args.seed,
            model=args.model, parallel=args.parallel,
            checkpoints=tuple(args.checkpoints.split(",")) if args.checkpoints else DEFAULT_CHECKPOINTS,
            reservoir_fraction=args.reservoir_fraction, depth_cap=args.depth_cap, record_ms=args.record_ms,
        )
        if spec.model == "gnm-mindeg":
            spec.packer_config()  # validates k and c up front
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION if isinstance(exc, PreconditionError) else EXIT_INPUT
    records = run_experiment(spec)
    out = args.out or "experiment.csv"
    summary = write_outputs(records, spec, out, args.summary)
    print(json.dumps({"csv": out, "rows": summary["rows"], "success_rate": summary["success_rate"]}))
    return EXIT_OK


def cmd_verify(args) -> int:
    from hamcore import verify as V

    try:
        g = read_graph(args.graph)
        cert = None
        if args.cert:
            cert = PackingCertificate.from_json(json.loads(Path(args.cert).read_text(encoding="utf-8")))
    except (FormatError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    verdicts = []
    if cert is not None:
        verdicts.append(V.validate_certificate(g, cert, standalone=args.standalone))
    try:
        for check in args.check or []:
            if check == "density":
                mode = args.mode if args.mode not in (None, "auto") else ("exact" if g.n <= V.EXACT_DENSITY_LIMIT else "sampled")
                verdicts.append(V.check_density(g, args.gamma, mode))
            elif check == "incidence":
                verdicts.append(V.check_incidence(g, args.beta, args.gamma, args.mode or "auto"))
            elif check == "expansion":
                verdicts.append(V.check_neighborhood_expansion(g, args.k or 3, args.min_size, args.max_size, args.mode or "auto"))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if not verdicts:
        print("error: nothing to verify; pass --cert and/or --check", file=sys.stderr)
        return EXIT_INPUT
    for v in verdicts:
        print(json.dumps(v.to_json(), sort_keys=True))
    return EXIT_INPUT if any(v.violated for v in verdicts) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamcore", description="Hamilton cycle packing in random graphs")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a graph and write it as an edge list")
    g.add_argument("--model", choices=["gnm-mindeg", "process"], default="gnm-mindeg")
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--c", type=float)
    g.add_argument("--k", type=int)
    g.add_argument("--until-tau-k", type=int, dest="until_tau_k")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    def packer_flags(q):
        q.add_argument("--reservoir-fraction", type=float, default=0.5, dest="reservoir_fraction")
        q.add_argument("--depth-cap", type=int, default=60, dest="depth_cap")

    pk = sub.add_parser("pack", help="pack Hamilton cycles plus a tail and validate the certificate")
    pk.add_argument("input")
    pk.add_argument("--k", type=int, required=True)
    pk.add_argument("--c", type=float)
    pk.add_argument("--seed", type=int, default=0)
    pk.add_argument("--beta", type=float, default=0.05)
    pk.add_argument("--gamma", type=float, default=0.05)
    pk.add_argument("--out")
    packer_flags(pk)
    pk.set_defaults(func=cmd_pack)

    ex = sub.add_parser("experiment", help="run seeded trials and write CSV + JSON summary")
    ex.add_argument("--model", choices=["gnm-mindeg", "process"], default="gnm-mindeg")
    ex.add_argument("--n", type=int, required=True)
    ex.add_argument("--k", type=int, required=True)
    ex.add_argument("--c", type=float)
    ex.add_argument("--trials", type=int, default=1)
    ex.add_argument("--seed", type=int, default=0)
    ex.add_argument("--parallel", type=int, default=1)
    ex.add_argument("--checkpoints", help="comma list of tau, 1.1tau, 2tau, nlogn or integers")
    ex.add_argument("--out", help="CSV path (default experiment.csv)")
    ex.add_argument("--summary", help="JSON summary path (default: CSV path with .json)")
    ex.add_argument("--record-ms", action="store_true", dest="record_ms", help="fill the ms column (breaks byte-identity)")
    packer_flags(ex)
    ex.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify", help="validate a certificate and/or check expansion properties")
    v.add_argument("graph")
    v.add_argument("--cert")
    v.add_argument("--check", action="append", choices=["density", "incidence", "expansion"])
    v.add_argument("--gamma", type=float, default=0.05)
    v.add_argument("--beta", type=float, default=0.05)
    v.add_argument("--k", type=int)
    v.add_argument("--mode", choices=["exact", "sampled", "greedy", "heuristic", "auto"])
    v.add_argument("--min-size", type=int, dest="min_size")
    v.add_argument("--max-size", type=int, dest="max_size")
    v.add_argument("--standalone", action="store_true", help="waive k-parity and cycle-count checks")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
