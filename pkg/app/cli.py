"""
Command-line front end.

    qtel jones --p 1 --n 2
    qtel recursion --p -2 --format json
    qtel verify --p -1 --nmax 8
    qtel genfun-check --p 1

Exit codes: 0 success (or a reported search exhaustion for p without
published data), 1 verification failure, 2 usage error.
"""
import argparse
import json
import logging
import sys
from typing import Optional, Sequence

from app.core.config import settings
from app.core.errors import DomainError, FixtureError, ParseError, QtelError, SearchExhaustedError, UnsupportedKnotError
from app.core.expressions import format_expr, format_latex, format_operator_latex
from app.core.genfun import genfun_report
from app.core.twistknot import MODES, colored_jones, derive, jhat, specialize_q1, verify

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
USAGE_ERRORS = (DomainError, ParseError, UnsupportedKnotError, FixtureError)


def build_parser() -> argparse.ArgumentParser:
    # accepted before or after the subcommand
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for every randomized check")
    shared.add_argument("--fixture-dir", default=argparse.SUPPRESS, help="fixture directory (overrides QTEL_FIXTURES)")
    shared.add_argument("--log-level", default=argparse.SUPPRESS, help="logging level")

    parser = argparse.ArgumentParser(prog="qtel", description="q-holonomic machinery for twist knots.", parents=[shared])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_mode=False):
        p.add_argument("--p", type=int, required=True, help="twist parameter, nonzero")
        p.add_argument("--format", choices=("text", "latex", "json"), default="text")
        if with_mode:
            p.add_argument("--mode", choices=MODES, default="auto")
            p.add_argument("--max-order", type=int, default=None)
            p.add_argument("--max-numdeg", type=int, default=None)

    for name in ("jones", "jhat"):
        p = sub.add_parser(name, parents=[shared], help=f"print {'J_p(n)' if name == 'jones' else 'Jhat_p(n)'}")
        common(p)
        p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("recursion", parents=[shared], help="print the inhomogeneous recursion (A^nh_p, B_p)")
    common(p, with_mode=True)

    p = sub.add_parser("verify", parents=[shared], help="fixture comparison, annihilation and AJ checks")
    common(p, with_mode=True)
    p.add_argument("--nmax", type=int, default=None)

    p = sub.add_parser("specialize", parents=[shared], help="the recursion at q = 1")
    common(p, with_mode=True)

    p = sub.add_parser("genfun-check", parents=[shared], help="generating function identities")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _emit(payload, fmt: str, text: str):
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _cmd_sequence(args) -> int:
    if args.n < 0:
        raise DomainError("--n must be non-negative")
    value = colored_jones(args.p, args.n) if args.command == "jones" else jhat(args.p, args.n)
    if args.format == "latex":
        print(format_latex(value.to_ratfun()))
    else:
        _emit({"p": args.p, "n": args.n, "value": str(value)}, args.format, str(value))
    return EXIT_OK


def _cmd_recursion(args) -> int:
    result = derive(args.p, args.mode, args.max_order, args.max_numdeg)
    rec = result.rec
    if args.format == "latex":
        print(f"{format_operator_latex(rec.op.coeffs)} = {format_latex(rec.rhs)}")
        return EXIT_OK
    payload = result.to_json()
    payload.update({"p": args.p, "mode": "pointwise" if result.pointwise else "symbolic"})
    _emit(payload, args.format, f"order {rec.order}\nA = {rec.op.to_text()}\nB = {format_expr(rec.rhs)}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify(args.p, args.nmax, args.mode)
    data = report.to_dict()
    lines = [f"p = {args.p}, order {report.order} ({report.mode}): {report.status}"]
    if report.annihilation:
        failing = report.annihilation.failing_n
        lines.append(f"annihilation: {'ok' if report.annihilation.passed else 'FAILED at n=' + str(failing)}")
        if report.annihilation.skipped_n:
            lines.append(f"not checked at n={report.annihilation.skipped_n} (coefficient poles)")
    if report.fixture:
        lines.append(f"fixture:      {'ok' if report.fixture.passed else 'FAILED'} ({report.fixture.method})")
    if report.aj:
        lines.append(f"AJ:           {'ok' if report.aj.passed else 'FAILED'} (F_p = {format_expr(report.aj.quotient)})")
    if report.search_exhausted:
        lines.append(f"search exhausted: {report.search_exhausted['message']}")
    lines += [f"skipped: {name}" for name in report.skipped] + [f"error: {e}" for e in report.errors]
    _emit(data, "json" if args.format == "json" else "text", "\n".join(lines))
    return EXIT_FAILED if report.status == "failed" else EXIT_OK


def _cmd_specialize(args) -> int:
    shadow = specialize_q1(derive(args.p, args.mode, args.max_order, args.max_numdeg).rec)
    if args.format == "latex":
        print(f"{format_latex(shadow.operator)} = {format_latex(shadow.rhs)}")
        return EXIT_OK
    data = shadow.to_dict()
    text = f"A(L, Q, 1) = {data['operator']}\nB(Q, 1) = {data['rhs']}\nL-degree drop: {data['degree_drop']}"
    _emit(data, args.format, text)
    return EXIT_FAILED if shadow.degree_drop else EXIT_OK


def _cmd_genfun(args) -> int:
    report = genfun_report(args.p, args.k_max, args.n)
    data = report.to_dict()
    text = "\n".join(f"{key}: {data[key]}" for key in sorted(data))
    _emit(data, args.format, text)
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "jones": _cmd_sequence,
    "jhat": _cmd_sequence,
    "recursion": _cmd_recursion,
    "verify": _cmd_verify,
    "specialize": _cmd_specialize,
    "genfun-check": _cmd_genfun,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    seed = getattr(args, "seed", None)
    fixture_dir = getattr(args, "fixture_dir", None)
    logging.basicConfig(level=getattr(args, "log_level", settings.LOG_LEVEL).upper())
    if seed is not None:
        if not 0 <= seed < 2 ** 64:
            print("error: --seed must be a 64-bit unsigned integer", file=sys.stderr)
            return EXIT_USAGE
        settings.SEED = seed
    if fixture_dir is not None:
        settings.QTEL_FIXTURES = fixture_dir

    try:
        return COMMANDS[args.command](args)
    except USAGE_ERRORS as e:
        print(f"error: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except SearchExhaustedError as e:
        logger.error(f"search exhausted: {e.message}")
        print(json.dumps({"error": e.message, "attempts": e.attempts}, default=str), file=sys.stderr)
        return EXIT_FAILED
    except QtelError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        print(f"error: {e.message}", file=sys.stderr)
        return EXIT_FAILED


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
