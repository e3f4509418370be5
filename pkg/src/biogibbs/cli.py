"""Command-line front end: ``biogibbs run`` and ``biogibbs sweep``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on a
configuration or runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .errors import BiogibbsError, ConfigInvalid
from .scenarios import CHECKS, emit_report, parse_config, run, sweep


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML (or JSON) config file; flags override its values")
    p.add_argument("--scenario", help="identity | projector | diagonal | random-riesz")
    p.add_argument("--dim", type=int)
    p.add_argument("--beta", type=float, help="inverse temperature (default ln 2)")
    p.add_argument("--seed", type=int)
    p.add_argument("--u-index", type=int, dest="u_index",
                   help="projector scenario: basis vector e_k used as u")
    p.add_argument("--c-rule", dest="c_rule", help="diagonal scenario: linear | inverse-linear")
    p.add_argument("--epsilon", type=float, help="random-riesz perturbation size")
    p.add_argument("--checks", help="'all' or a comma list of: " + ", ".join(CHECKS))
    p.add_argument("--samples", type=int, help="random operators per check (default 10)")
    for tol in ("biorth", "kms", "group", "inv"):
        p.add_argument(f"--tol-{tol}", type=float, dest=f"tol_{tol}")
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--timings", action="store_true",
                   help="include per-check wall times (makes the JSON non-reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biogibbs",
                                     description="Verify biorthogonal Gibbs-state identities "
                                                 "on truncated scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="run the verification battery once"))
    sp = sub.add_parser("sweep", help="run across truncation dimensions and fit growth")
    _add_common(sp)
    sp.add_argument("--dims", required=True, help="comma list, e.g. 8,16,32,64")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = ("scenario", "dim", "beta", "seed", "u_index", "c_rule", "epsilon", "checks",
            "samples", "tol_biorth", "tol_kms", "tol_group", "tol_inv", "out", "format")
    return {k: getattr(args, k) for k in keys}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config, **_overrides(args))
        if args.command == "sweep":
            try:
                dims = [int(d) for d in args.dims.split(",") if d.strip()]
            except ValueError:
                raise ConfigInvalid("dims", f"not a comma list of integers: {args.dims!r}") from None
            result = sweep(config, dims)
        else:
            result = run(config)
        text = emit_report(result, config.output_path, config.format, args.timings)
    except (BiogibbsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if config.output_path is None:
        sys.stdout.write(text)
    return result.exit


if __name__ == "__main__":
    sys.exit(main())
