"""Command-line driver: ``run`` a program file or ``bench`` a workload."""

import argparse
import sys

from ..errors import EngineError
from ..tabling import Engine, format_statistics
from .reader import PrologSyntaxError

MODES = ("none", "hashcons", "enhanced")
FLAVORS = ("full", "prefix3")


def _sizes(text):
    try:
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not out or any(n < 1 for n in out):
        raise argparse.ArgumentTypeError("sizes must be positive integers")
    return out


def build_parser():
    from ..bench import DEFAULT_SIZES

    p = argparse.ArgumentParser(prog="hctabling", description="Tabled logic programs with a hash-consed table area.")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="answer a query against a program file")
    r.add_argument("file")
    r.add_argument("-q", "--query", required=True)
    r.add_argument("--mode", choices=MODES, default="enhanced")
    r.add_argument("--hash", choices=FLAVORS, default="full")
    r.add_argument("--stats", action="store_true", help="print table statistics after the answers")

    b = sub.add_parser("bench", help="run a scaling benchmark")
    b.add_argument("name", choices=sorted(DEFAULT_SIZES))
    b.add_argument("--sizes", type=_sizes, help="comma-separated instance sizes")
    b.add_argument("--mode", choices=MODES, default="enhanced")
    b.add_argument("--hash", choices=FLAVORS, default="full")
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--csv", help="write rows to this file instead of stdout")
    return p


def format_solution(sol):
    """One answer line: ``X = t, Y = s``, or ``yes`` when nothing is shown."""
    if not sol:
        return "yes"
    return ", ".join(f"{k} = {v}" for k, v in sol.items())


def _run(args, out):
    with open(args.file, encoding="utf-8") as f:
        text = f.read()
    eng = Engine(text, mode=args.mode, hash_flavor=args.hash)
    any_answer = False
    ground = None
    for sol in eng.solve(args.query):
        any_answer = True
        if not sol:
            ground = True
            break
        print(format_solution(sol), file=out)
    if ground:
        print("yes", file=out)
    elif not any_answer:
        print("no", file=out)
    if args.stats:
        print(format_statistics(eng.table_statistics()), file=out)
    return 0


def _bench(args, out):
    from ..bench import run_benchmark, write_csv, CSV_HEADER

    rows = run_benchmark(args.name, args.sizes, args.mode, args.hash, args.seed)
    if args.csv:
        write_csv(rows, args.csv)
    else:
        print(",".join(CSV_HEADER), file=out)
        for row in rows:
            print(",".join(str(getattr(row, k)) for k in CSV_HEADER), file=out)
    return 0


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args, out) if args.cmd == "run" else _bench(args, out)
    except (OSError, PrologSyntaxError, EngineError, ValueError) as exc:
        print(f"hctabling: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
