"""Command-line entry point: ``cvvqe {run,ed,validate,dump-hamiltonian}``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys

from . import runner
from .config import ConfigError, ExperimentConfig
from .gaussian import vacuum_covariance
from .ladder import format_polynomial
from .models import bose_hubbard_polynomial
from .validation import format_report, validate
from .wick import trace_matchings

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2
TRACE_MAX_LENGTH = 6

log = logging.getLogger("cvvqe")


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig.from_dict({})
    return cfg.with_overrides(seed=args.seed, output_path=getattr(args, "out", None))


def _trace_hamiltonian(H, n_modes: int):
    V = vacuum_covariance(n_modes)
    for ops, _ in H:
        if len(ops) <= TRACE_MAX_LENGTH:
            for line in trace_matchings(ops, V):
                print(line, file=sys.stderr)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    if args.trace_matchings:
        model = cfg.model()
        _trace_hamiltonian(bose_hubbard_polynomial(model), model.n_sites)
    records, times = runner.run_scan(cfg)
    try:
        out = runner.write_outputs(cfg, records, times)
    except OSError as exc:
        log.error("cannot write results: %s", exc)
        return EXIT_ERROR
    failed = sum(r["status"] != "ok" for r in records)
    print(f"{len(records) - failed}/{len(records)} scan points ok; results in {out}")
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_ed(args) -> int:
    cfg = _load_config(args)
    cutoffs = [int(c) for c in args.cutoffs.split(",")] if args.cutoffs else None
    rows = runner.ed_rows(cfg, cutoffs)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["scan_value", "n_max", "energy"])
    for value, c, e in rows:
        writer.writerow(["" if value is None else f"{value:.17g}", c, f"{e:.17g}"])
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.trace_matchings:
        from .gaussian import GaussianParams, gaussian_covariance
        from .ladder import LadderOp

        V = gaussian_covariance(GaussianParams([0.5], [0.0]))
        n, an = LadderOp(0, True), LadderOp(0, False)
        for ops in ([n, an], [n, n, an, an], [n, n, an, an, n, an]):
            for line in trace_matchings(ops, V):
                print(line, file=sys.stderr)
    checks = validate(quick=args.quick)
    print(format_report(checks))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_ERROR


def cmd_dump(args) -> int:
    cfg = _load_config(args)
    model = cfg.model()
    H = bose_hubbard_polynomial(model)
    print(format_polynomial(H))
    if args.trace_matchings:
        _trace_hamiltonian(H, model.n_sites)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cvvqe", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--config", help="experiment JSON document")
        p.add_argument("--seed", type=int, help="override the master seed")
        if out:
            p.add_argument("--out", help="output directory (overrides output_path)")
        p.add_argument("--trace-matchings", action="store_true",
                       help="print Wick matchings of short monomials to stderr")

    p = sub.add_parser("run", help="optimize every scan point and write CSV/JSON")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ed", help="exact-diagonalization baselines as CSV rows")
    common(p, out=False)
    p.add_argument("--cutoffs", help="comma-separated n_max values (default: ed_cutoffs)")
    p.set_defaults(func=cmd_ed)

    p = sub.add_parser("validate", help="run the Wick/Fock self-check suite")
    p.add_argument("--quick", action="store_true", help="fast subset")
    p.add_argument("--trace-matchings", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dump-hamiltonian", help="print the model as a ladder polynomial")
    common(p, out=False)
    p.set_defaults(func=cmd_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
