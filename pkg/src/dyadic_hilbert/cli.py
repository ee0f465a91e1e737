"""Command-line front end.

Exit codes: 0 success, 2 usage or domain error, 3 invalid field, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import __version__
from .analysis import (
    adversarial_selection_norm,
    opnorm_exact,
    opnorm_l2,
    opnorm_lp_lower,
    run_verifiers,
)
from .dyadic import DomainError
from .experiments import CSV_HEADER, RunConfig, fmt, run_growth, write_atomic
from .field import DirectionField, generate_field, validate_field
from .haar import GridFunction, forward_haar_2d, inverse_haar_2d
from .operator import apply_hv, apply_hv_adjoint, apply_hv_naive

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_IO = 0, 2, 3, 4

GROWTH_HELP = """\
Configuration precedence (lowest to highest): built-in defaults, the JSON
document given by --config, then command-line flags.  --n and --p may be
repeated and replace the config's resolutions and p_values.
"""


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _load_field(args) -> DirectionField:
    if args.field:
        return DirectionField.from_json(_read(args.field))
    if args.n is None:
        raise UsageError("give --field or --n")
    return generate_field(args.seed, args.n, "random", pmax=args.pmax)


def _estimate_text(est, fmt_name: str) -> str:
    if fmt_name == "json":
        return json.dumps(est.to_dict(), sort_keys=True, indent=2) + "\n"
    row = ["", "", fmt(est.p), est.method, fmt(est.value), fmt(est.residual),
           str(est.iterations), str(est.seed)]
    return ",".join(CSV_HEADER) + "\n" + ",".join(row) + "\n"


def cmd_gen_field(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    v = generate_field(args.seed, args.n, args.mode, k=args.k, pmax=args.pmax, depth=args.depth)
    _emit(v.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_validate_field(args) -> int:
    path = args.path or args.field
    if not path:
        raise UsageError("give a field file")
    verdict = validate_field(DirectionField.from_json(_read(path)))
    if verdict.valid:
        print("valid")
        return EXIT_OK
    p, q = verdict.witness
    print(f"{p.cx},{p.cy},{q.cx},{q.cy}")
    return EXIT_INVALID


def cmd_apply(args) -> int:
    if not args.f or not args.field:
        raise UsageError("--f and --field are required")
    f = GridFunction.from_json(_read(args.f))
    v = DirectionField.from_json(_read(args.field))
    if args.adjoint:
        g = apply_hv_adjoint(f, v)
    elif args.naive:
        g = apply_hv_naive(f, v)
    else:
        g = apply_hv(f, v)
    _emit(g.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_opnorm(args) -> int:
    v = _load_field(args)
    p = args.p[0] if args.p else 2.0
    if args.exact:
        est = opnorm_exact(v)
    elif p == 2.0:
        est = opnorm_l2(v, args.maxiter, args.tol, args.seed)
    else:
        est = opnorm_lp_lower(v, p, args.trials or 4, args.seed)
    _emit(_estimate_text(est, args.format), args.out)
    return EXIT_OK


def cmd_adversary(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    est, v = adversarial_selection_norm(args.n, args.trials or 4, args.seed)
    if args.field_out:
        write_atomic(args.field_out, v.to_json() + "\n")
    _emit(_estimate_text(est, args.format), args.out)
    return EXIT_OK


def build_config(args) -> RunConfig:
    doc = RunConfig().to_dict()
    if args.config:
        doc.update(json.loads(_read(args.config)))
    if args.n:
        doc["resolutions"] = args.n
    if args.p:
        doc["p_values"] = args.p
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.seed_given:
        doc["seed"] = args.seed
    if args.out:
        doc["output_path"] = args.out
    if args.adversarial:
        doc["adversarial"] = True
    return RunConfig.from_dict(doc)


def cmd_growth(args) -> int:
    config = build_config(args)
    report = run_growth(config, jobs=args.jobs)
    text = report.to_json() if args.format == "json" else report.to_csv()
    _emit(text, config.output_path)
    return EXIT_OK


def cmd_verify(args) -> int:
    v = _load_field(args)
    p = args.p[0] if args.p else 2.0
    report = run_verifiers(v, args.trials or 1, args.seed, p)
    _emit(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_haar(args) -> int:
    if not args.f:
        raise UsageError("--f is required")
    f = GridFunction.from_json(_read(args.f))
    c = forward_haar_2d(f)
    back = inverse_haar_2d(c)
    err = float(np.abs(back.values - f.values).max())
    energy = f.inner(f)
    gap = abs(c.energy() - energy) / energy if energy else abs(c.energy())
    print(f"roundtrip_max_abs={fmt(err)}")
    print(f"parseval_rel_gap={fmt(gap)}")
    if args.out:
        write_atomic(args.out, json.dumps({"n": c.n, "packed": c.packed.ravel().tolist()}) + "\n")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (default 0)")
    p.add_argument("--n", type=int, action="append", help="resolution exponent")
    p.add_argument("--p", type=float, action="append", help="Lebesgue exponent")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON run configuration")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--field", default=None, help="direction field JSON file")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dyadic-hilbert", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("gen-field", help="generate an admissible direction field")
    _common(p)
    p.add_argument("--mode", choices=("random", "constant"), default="random")
    p.add_argument("--k", type=int, default=0, help="exponent for --mode constant")
    p.add_argument("--pmax", type=float, default=0.5, help="subdivision probability")
    p.add_argument("--depth", type=int, default=None, help="subdivision depth cap")
    p.set_defaults(func=cmd_gen_field)

    p = sub.add_parser("validate-field", help="check the dyadic Lipschitz condition")
    _common(p)
    p.add_argument("path", nargs="?", default=None)
    p.set_defaults(func=cmd_validate_field)

    p = sub.add_parser("apply", help="apply the transform to a grid function file")
    _common(p)
    p.add_argument("--f", default=None, help="grid function JSON file")
    p.add_argument("--adjoint", action="store_true")
    p.add_argument("--naive", action="store_true", help="use the brute-force evaluator")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("opnorm", help="estimate the operator norm for one field")
    _common(p)
    p.add_argument("--pmax", type=float, default=0.5)
    p.add_argument("--maxiter", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--exact", action="store_true", help="dense SVD, n <= 3")
    p.set_defaults(func=cmd_opnorm)

    p = sub.add_parser("adversary", help="unconstrained lacunary selection norm")
    _common(p)
    p.add_argument("--field-out", default=None, help="write the greedy field here")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("growth", help="norm estimates across resolutions",
                       description=GROWTH_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p)
    p.add_argument("--adversarial", action="store_true", help="add adversarial-selection rows")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("verify", help="brute-force checks of the proof steps")
    _common(p)
    p.add_argument("--pmax", type=float, default=0.5)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("haar", help="Haar round trip on a grid function file")
    _common(p)
    p.add_argument("--f", default=None)
    p.set_defaults(func=cmd_haar)
    return parser


def run(argv: Optional[list] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    if args.command != "growth":
        if args.n and len(args.n) > 1:
            print("error: --n given more than once", file=sys.stderr)
            return EXIT_USAGE
        args.n = args.n[0] if args.n else None
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
