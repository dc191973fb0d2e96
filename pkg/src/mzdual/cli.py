"""Command-line interface: compute series values, apply word operators,
and run verification suites.

Exit codes: 0 success (verify: all checks passed), 1 verify found a
failing identity, 2 argument/parse/validation error, 3 the evaluator hit
max_n before reaching the requested tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys

from .evaluators import Params, eval_Hstar, eval_Z, eval_Zstar, eval_hurwitz
from .nested_sum import EvalConfig, InvalidParamsError, KernelError, NonConvergentError
from .verifier import DEFAULT_GRID, SUITE_NAMES, SuiteConfig, run_suite
from .words import LinComb, WordError, dual, parse_word, sigma_b1, sigma_b2, sigma_eps

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_USAGE = 2
EXIT_NO_TOLERANCE = 3


def parse_complex(text: str) -> complex:
    """Accept '1.5' or '1.5+0.3i' (also 'i' spelled 'j')."""
    cleaned = text.strip().replace("i", "j")
    try:
        value = complex(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    return value


def parse_rvector(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad r-vector: {text!r}")


def parse_grid(text: str) -> tuple[tuple[complex, complex], ...]:
    """'default', a value list forming a square grid, or ';'-separated
    'a:b' pairs."""
    if text == "default":
        return DEFAULT_GRID
    if ":" in text:
        pairs = []
        for chunk in text.split(";"):
            a, _, b = chunk.partition(":")
            pairs.append((parse_complex(a), parse_complex(b)))
        return tuple(pairs)
    values = [parse_complex(v) for v in text.split(",")]
    return tuple((a, b) for a in values for b in values)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="mzdual",
        description="parametrized multiple series: evaluation, word duality, identity verification",
    )
    sub = top.add_subparsers(dest="command", required=True)

    comp = sub.add_parser("compute", help="evaluate one series value")
    comp.add_argument("--family", choices=["Z", "Zstar", "zeta", "Hstar"], required=True)
    comp.add_argument("--word", required=True)
    comp.add_argument("--alpha", type=parse_complex, required=True)
    comp.add_argument("--beta", type=parse_complex, default=None)
    comp.add_argument("--r-vector", type=parse_rvector, default=None,
                      help="comma-separated non-negative integers (starred families)")
    comp.add_argument("--rel-tol", type=float, default=1e-10)
    comp.add_argument("--max-n", type=int, default=10**8)
    comp.add_argument("--output", choices=["table", "json"], default="table")

    du = sub.add_parser("dual", help="print the dual of a word")
    du.add_argument("--word", required=True)
    du.add_argument("--output", choices=["table", "json"], default="table")

    sg = sub.add_parser("sigma", help="apply a weight-raising operator")
    sg.add_argument("--op", choices=["b1", "eps", "b2"], required=True)
    sg.add_argument("--word", required=True)
    sg.add_argument("--r", type=int, required=True)
    sg.add_argument("--output", choices=["table", "json"], default="json")

    ver = sub.add_parser("verify", help="run an identity verification suite")
    ver.add_argument("--suite", choices=list(SUITE_NAMES), required=True)
    ver.add_argument("--weight-max", type=int, default=4)
    ver.add_argument("--depth-max", type=int, default=None)
    ver.add_argument("--r-max", type=int, default=2)
    ver.add_argument("--grid", type=parse_grid, default=DEFAULT_GRID,
                     help="'default', value list (square grid), or 'a:b;a:b' pairs")
    ver.add_argument("--tol", type=float, default=1e-6)
    ver.add_argument("--even-only", action="store_true",
                     help="restrict to even r (the even-r equivalence mode)")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--workers", type=int, default=1)
    ver.add_argument("--output", choices=["table", "json", "csv"], default="table")
    ver.add_argument("--no-timestamp", action="store_true")
    return top


def _cmd_compute(args) -> int:
    try:
        word = parse_word(args.word)
        p = Params(args.alpha, args.beta)
        cfg = EvalConfig(rel_tol=args.rel_tol, max_n=args.max_n)
        rv = args.r_vector
        if args.family == "Z":
            res = eval_Z(word, p, cfg)
        elif args.family == "zeta":
            res = eval_hurwitz(word, p.alpha, cfg)
        elif args.family == "Zstar":
            res = eval_Zstar(word, rv if rv is not None else (0,) * word.depth, p, cfg)
        else:
            res = eval_Hstar(
                word, rv if rv is not None else (0,) * word.depth, p.alpha, cfg
            )
    except (WordError, InvalidParamsError, NonConvergentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    value = complex(res.value)
    if args.output == "json":
        print(
            json.dumps(
                {
                    "value": [value.real, value.imag],
                    "err_estimate": res.err_estimate,
                    "n_used": res.n_used,
                    "converged": res.converged,
                },
                sort_keys=True,
            )
        )
    else:
        shown = f"{value.real:.12g}" if value.imag == 0 else f"{value.real:.12g}{value.imag:+.12g}i"
        print(f"value        = {shown}")
        print(f"err_estimate = {res.err_estimate:.3e}")
        print(f"n_used       = {res.n_used}")
    if not res.converged:
        print("warning: tolerance not reached (max_n hit)", file=sys.stderr)
        return EXIT_NO_TOLERANCE
    return EXIT_OK


def _cmd_dual(args) -> int:
    try:
        word = parse_word(args.word)
    except WordError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    image = dual(word)
    if args.output == "json":
        print(
            json.dumps(
                {"word": str(word), "dual": str(image), "dual_letters": image.letters()},
                sort_keys=True,
            )
        )
    else:
        print(f"{image}  (letters: {image.letters()})")
    return EXIT_OK


def _cmd_sigma(args) -> int:
    ops = {"b1": sigma_b1, "eps": sigma_eps, "b2": sigma_b2}
    try:
        word = parse_word(args.word)
        if args.r < 0:
            raise ValueError("r must be >= 0")
        image = ops[args.op](word, args.r)
    except (WordError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output == "json":
        print(json.dumps(image.to_json(), sort_keys=True))
    else:
        print(repr(image) if len(image) else "0")
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        sc = SuiteConfig(
            weight_max=args.weight_max,
            depth_max=args.depth_max,
            r_max=args.r_max,
            params_grid=args.grid,
            tol=args.tol,
            even_r_only=args.even_only,
            rng_seed=args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run_suite(args.suite, sc, workers=args.workers)
    if args.output == "json":
        print(json.dumps(report.to_json(include_timestamp=not args.no_timestamp), sort_keys=True))
    elif args.output == "csv":
        sys.stdout.write(report.to_csv())
    else:
        print(report.to_table())
    return EXIT_OK if report.passed else EXIT_FAILED_CHECK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "compute":
        return _cmd_compute(args)
    if args.command == "dual":
        return _cmd_dual(args)
    if args.command == "sigma":
        return _cmd_sigma(args)
    return _cmd_verify(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
