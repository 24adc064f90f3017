"""Command line front end.

Exit status: 0 when everything requested passed, 1 for usage errors, 2 when
a bound check fails and 3 for file errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .catalog import CONSTRUCTIONS, Params, get_construction
from .errors import ShapeError
from .network import load, save
from .verify import SweepCellError, sweep, verify

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    parts = [s.strip() for s in text.split(",")]
    if not text.strip() or any(not s for s in parts):
        raise UsageError(f"expected a comma separated list of numbers, got {text!r}")
    try:
        return [float(s) for s in parts]
    except ValueError:
        raise UsageError(f"not a list of numbers: {text!r}") from None


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise UsageError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _matrix(text: str) -> tuple[tuple[float, ...], ...]:
    rows = [tuple(_floats(r)) for r in text.split(";")]
    if len({len(r) for r in rows}) != 1:
        raise UsageError("matrix rows must have equal length")
    return tuple(rows)


def _add_param_flags(p: argparse.ArgumentParser, lists: bool = False) -> None:
    grid = " (comma separated list)" if lists else ""
    p.add_argument("--d", help="dimension" + grid)
    p.add_argument("--R", help="radius of the input box" + grid)
    p.add_argument("--eps", help="accuracy" + grid)
    p.add_argument("--n", help="number of coordinates (clip)")
    p.add_argument("--k", help="tree depth (prod_pow2)")
    p.add_argument("--u", help="lower clip bound")
    p.add_argument("--v", help="upper clip bound")
    p.add_argument("--fn", help="scalar function(s): sin, cos, tanh, relu, square, clip, clip:<u>:<v>, const:<v>")
    p.add_argument("--pipeline", help="steps such as 'cw:sin|rmax|rprod'")
    p.add_argument("--knots", help="interpolation knots")
    p.add_argument("--values", help="interpolation values")
    p.add_argument("--weights", help="matrix rows separated by ';', entries by ','")
    p.add_argument("--bias", help="bias vector")


def _one(text, conv):
    if text is None:
        return None
    vals = conv(text)
    if len(vals) != 1:
        raise UsageError(f"expected a single value, got {text!r}")
    return vals[0]


def _params(args, skip: Sequence[str] = ()) -> Params:
    def get(name, conv):
        return None if name in skip else _one(getattr(args, name), conv)

    return Params(
        d=get("d", _ints),
        R=get("R", _floats),
        eps=get("eps", _floats),
        n=get("n", _ints),
        k=get("k", _ints),
        u=get("u", _floats),
        v=get("v", _floats),
        fn=args.fn,
        pipeline=args.pipeline,
        knots=tuple(_floats(args.knots)) if args.knots is not None else None,
        values=tuple(_floats(args.values)) if args.values is not None else None,
        weights=_matrix(args.weights) if args.weights is not None else None,
        bias=tuple(_floats(args.bias)) if args.bias is not None else None,
    )


def _construction(name: str):
    try:
        return get_construction(name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None


def _build(c, p: Params):
    try:
        c.validate(p)
        return c.build(p)
    except ValueError as exc:
        raise UsageError(f"{c.name}: {exc}") from None


def _load(path: str):
    try:
        return load(path)
    except ShapeError as exc:
        raise OSError(f"{path}: not a valid network file ({exc})") from None


def cmd_build(args) -> int:
    c = _construction(args.construction)
    net = _build(c, _params(args))
    if args.output:
        save(net, args.output)
    dims = "(" + ",".join(map(str, net.dims)) + ")"
    print(f"dims={dims} params={net.param_count}")
    return EXIT_OK


def cmd_eval(args) -> int:
    net = _load(args.network)
    text = args.x if args.x is not None else args.point
    if text is None:
        raise UsageError("eval needs a point, e.g. --x=1,-2,3")
    x = np.array(_floats(text))
    if x.size != net.input_dim:
        raise UsageError(f"network expects {net.input_dim} inputs, got {x.size}")
    y = net(x)
    print(",".join(f"{v:.17g}" for v in y))
    return EXIT_OK


def cmd_info(args) -> int:
    net = _load(args.network)
    print(f"dims=({','.join(map(str, net.dims))})")
    print(f"length={net.length}")
    print(f"params={net.param_count}")
    return EXIT_OK


def cmd_verify(args) -> int:
    c = _construction(args.construction)
    p = _params(args)
    net = _build(c, p)
    try:
        report = verify(net, c.oracle(p), c.domain(p), c.claims(p), args.samples, args.pairs, args.seed)
    except ValueError as exc:
        raise UsageError(f"{c.name}: {exc}") from None
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_sweep(args) -> int:
    c = _construction(args.construction)
    if args.d is None:
        raise UsageError("sweep needs --d")
    ds = _ints(args.d)
    Rs = _floats(args.R) if args.R is not None else [1.0]
    epss = _floats(args.eps) if args.eps is not None else [0.1]
    base = _params(args, skip=("d", "R", "eps"))
    try:
        result = sweep(c.cell_factory(base), ds, Rs, epss, args.seed, args.samples, args.pairs, args.workers)
    except SweepCellError as exc:
        if isinstance(exc.__cause__, ValueError):
            raise UsageError(str(exc)) from None
        print(str(exc), file=sys.stderr)
        return EXIT_CHECK
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = result.to_csv()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="\n")
        out = sys.stdout
    else:
        sys.stdout.write(text)
        out = sys.stderr
    for label, fit in (("d", result.d_fit), ("1/eps", result.eps_fit)):
        if fit is not None:
            print(f"exponent vs {label}: {fit.slope:.4f} (residual {fit.residual:.4f})", file=out)
    for r in result.rows:
        if not r.passed:
            print(f"cell d={r.d} R={r.R} eps={r.eps} failed: {'; '.join(r.failures)}", file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    names = ", ".join(CONSTRUCTIONS)
    parser = _Parser(prog="relucalc", description="Build, evaluate and check explicit ReLU networks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="build a named construction", description=f"constructions: {names}")
    b.add_argument("construction")
    _add_param_flags(b)
    b.add_argument("-o", "--output", help="write the network as JSON")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("eval", help="evaluate a saved network at one point")
    e.add_argument("network")
    e.add_argument("point", nargs="?", help="comma separated input")
    e.add_argument("--x", help="comma separated input (use --x=-1,2 for a leading minus)")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="check a construction against its bounds", description=f"constructions: {names}")
    v.add_argument("construction")
    _add_param_flags(v)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--samples", type=int, default=10_000)
    v.add_argument("--pairs", type=int, default=10_000, help="pairs for the Lipschitz estimate")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="verify a construction over a parameter grid", description=f"constructions: {names}")
    s.add_argument("construction")
    _add_param_flags(s, lists=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--samples", type=int, default=2_000)
    s.add_argument("--pairs", type=int, default=2_000)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-o", "--output", help="CSV file (default: standard output)")
    s.set_defaults(func=cmd_sweep)

    i = sub.add_parser("info", help="print the size of a saved network")
    i.add_argument("network")
    i.set_defaults(func=cmd_info)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"relucalc: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
