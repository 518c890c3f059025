"""Command-line front end.

Exit codes: 0 success, 1 input error (parse, class, I/O), 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .datagen import GenerationError, GenSpec, gen_dataset, header, read_dataset, table3_specs
from .expr import check_width, node_count, render
from .oracle import DEFAULT_SEED, exhaustive_equiv, matrix_equiv, random_equiv
from .parser import ParseError, parse
from .semilinear import simplify
from .signature import NotSemiLinear

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2
CSV_COLUMNS = ["input", "output", "in_nodes", "out_nodes", "gt_nodes", "runtime_us", "verified"]


class InputError(Exception):
    pass


@dataclass
class BenchRow:
    input: str
    output: str
    input_nodes: int
    output_nodes: int
    ground_truth_nodes: int | None
    runtime_microseconds: float
    verified: bool

    def csv_row(self) -> list:
        gt = "" if self.ground_truth_nodes is None else self.ground_truth_nodes
        return [self.input, self.output, self.input_nodes, self.output_nodes, gt,
                f"{self.runtime_microseconds:.1f}", str(self.verified).lower()]


def _parse(text: str, width: int, label: str = "expression"):
    try:
        return parse(text, width)
    except ParseError as exc:
        raise InputError(f"cannot parse {label}: {exc.message} at offset {exc.position}\n  {text}\n  {' ' * exc.position}^") from None


def _simplify_one(text: str, gt: str | None, width: int) -> BenchRow:
    e = _parse(text, width)
    t0 = time.perf_counter()
    try:
        out = simplify(e, width)
    except NotSemiLinear as exc:
        raise InputError(f"{exc} (input: {text})") from None
    elapsed = (time.perf_counter() - t0) * 1e6
    verified = matrix_equiv(e, out, width).equivalent
    gt_nodes = node_count(_parse(gt, width, "ground truth")) if gt else None
    return BenchRow(text, render(out, width), node_count(e), node_count(out), gt_nodes, elapsed, verified)


def _job(args):
    return _simplify_one(*args)


def _run_rows(rows, width: int, jobs: int) -> list[BenchRow]:
    tasks = [(obf, gt, width) for obf, gt in rows]
    if jobs <= 1 or len(tasks) < 2:
        return [_job(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_job, tasks, chunksize=16))


# -- commands -------------------------------------------------------------------------

def cmd_simplify(args) -> int:
    if args.dataset:
        width, _, rows = read_dataset(args.dataset)
        if args.width is not None:
            width = check_width(args.width)
    else:
        width = check_width(args.width or 64)
        rows = [(args.expr, None)]
    failed = 0
    for row in _run_rows(rows, width, args.jobs):
        line = row.output
        if args.check:
            line += "" if row.verified else "    # NOT VERIFIED"
            failed += not row.verified
        print(line)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_check(args) -> int:
    width = check_width(args.width)
    a = _parse(args.expr, width, "first expression")
    b = _parse(args.other, width, "second expression")
    if args.method == "exhaustive":
        report = exhaustive_equiv(a, b, width)
    elif args.method == "random":
        report = random_equiv(a, b, width, args.samples, args.seed)
    else:
        report = matrix_equiv(a, b, width)
    print(report)
    return EXIT_OK if report.equivalent else EXIT_VERIFY


def cmd_gen(args) -> int:
    width = check_width(args.width)
    try:
        if args.table3:
            args.out = args.out or "."
            os.makedirs(args.out, exist_ok=True)
            for name, spec in table3_specs(args.vars, width, args.steps, args.seed).items():
                path = os.path.join(args.out, f"{name}_t{args.vars}.txt")
                gen_dataset(args.count, spec, path,
                            comments=[f"stand-in class {name}: {render(spec.ground_truth, width)}", f"seed={args.seed}"])
                print(path)
            return EXIT_OK
        if not args.truth:
            raise InputError("gen needs --truth or --table3")
        truth = _parse(args.truth, width, "ground truth")
        spec = GenSpec(truth, width, max(args.vars, 1), args.steps, args.seed)
        records = gen_dataset(args.count, spec, args.out, comments=[f"seed={args.seed}"])
    except (ValueError, GenerationError) as exc:
        raise InputError(str(exc)) from None
    if args.out is None:
        print(header(width, max((r.t for r in records), default=spec.vars)))
        for r in records:
            print(r.line())
    else:
        print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    width, _, rows = read_dataset(args.dataset)
    results = _run_rows(rows, width, args.jobs)
    try:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in results:
                writer.writerow(r.csv_row())
            if results:
                writer.writerow(_footer(results))
    except OSError as exc:
        raise InputError(f"cannot write {args.csv!r}: {exc.strerror or exc}") from None
    bad = [r for r in results if not r.verified]
    if results:
        print(_footer(results)[1], f"nodes (out / truth), mean runtime {_footer(results)[5]} us")
    for r in bad:
        print(f"NOT VERIFIED: {r.input}", file=sys.stderr)
    return EXIT_VERIFY if bad else EXIT_OK


def _footer(results: Sequence[BenchRow]) -> list:
    n = len(results)
    mean_in = sum(r.input_nodes for r in results) / n
    mean_out = sum(r.output_nodes for r in results) / n
    gts = [r.ground_truth_nodes for r in results if r.ground_truth_nodes is not None]
    mean_gt = sum(gts) / len(gts) if gts else None
    ratio = f"{mean_out:.2f} / {mean_gt:.2f}" if mean_gt is not None else f"{mean_out:.2f} / -"
    runtime = sum(r.runtime_microseconds for r in results) / n
    return ["# mean", ratio, f"{mean_in:.2f}", f"{mean_out:.2f}",
            "" if mean_gt is None else f"{mean_gt:.2f}", f"{runtime:.1f}",
            str(all(r.verified for r in results)).lower()]


# -- argument parsing ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mbasimp", description="Simplify linear and semi-linear MBA expressions.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simplify", help="simplify an expression or every record of a dataset")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("-e", "--expr", help="expression text")
    src.add_argument("--dataset", help="dataset file (obfuscated,ground_truth per line)")
    s.add_argument("-b", "--width", type=int, default=None, help="word width in bits (default 64, or the dataset header)")
    s.add_argument("--check", action="store_true", help="verify each result; exit 2 on a mismatch")
    s.add_argument("-j", "--jobs", type=int, default=1)
    s.set_defaults(func=cmd_simplify)

    c = sub.add_parser("check", help="test two expressions for equivalence")
    c.add_argument("-e", "--expr", required=True)
    c.add_argument("-f", "--other", required=True)
    c.add_argument("-b", "--width", type=int, default=64)
    c.add_argument("--method", choices=("matrix", "random", "exhaustive"), default="matrix")
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random-method seed (default %(default)s)")
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("gen", help="generate an obfuscated dataset")
    g.add_argument("--truth", help="ground-truth expression")
    g.add_argument("--table3", action="store_true", help="emit the five stand-in classes")
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--steps", type=int, default=3)
    g.add_argument("--seed", type=int, default=7)
    g.add_argument("--vars", type=int, default=2)
    g.add_argument("-b", "--width", type=int, default=64)
    g.add_argument("--out", default=None, help="output file (directory with --table3); stdout if omitted")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", help="simplify a dataset and write a CSV report")
    b.add_argument("--dataset", required=True)
    b.add_argument("--csv", required=True)
    b.add_argument("-j", "--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
