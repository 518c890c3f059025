"""Seeded generation of semi-linear MBA datasets.

An expression is held as a constant plus a list of ``(coeff, bitwise)``
items. Each rewrite replaces one item (or a pair) by an equal sum:

mask split
    ``B -> (B & m) + (B & ~m)``
xor split
    ``A + B -> (A ^ B) + 2*(A & B)`` (or ``A | B -> (A ^ B) + (A & B)``), then a mask split
xor expansion
    ``K ^ B -> K + (~K & B) - (K & B)`` and, for any ``B``, ``B -> K + (~K & B) - (K & ~B)``
coefficient inflation
    ``c*(m & B) -> (c + r*2**(w - s))*(m & B)`` where ``2**s`` is the lowest bit of ``m``
zero injection
    ``+ c*((a|b) - (a^b) - (a&b))``, either with ``b`` a random constant or
    with two variables (this is also how extra variables are introduced)

Every record is checked with :func:`mbasimp.oracle.random_equiv` before it is
written; a failing record is regenerated from the next seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .boolfunc import BoolFunc, default_names, depends_on, minimal_expr
from .expr import (
    BITWISE_OPS,
    Binary,
    Const,
    Expr,
    MbaClass,
    Unary,
    Var,
    classify,
    mask_of,
    node_count,
    render,
    variables,
)
from .linear import build_sum
from .oracle import random_equiv
from .parser import parse

GATE_SAMPLES = 1000
MAX_RETRIES = 20

# Stand-ins for the five benchmark classes; only their sizes (3, 1, 5, 7, 4 nodes) are known.
TABLE3_TRUTHS = {
    "e1": "x+y",
    "e2": "x",
    "e3": "(x&y)|z",
    "e4": "(x^y)+(x&z)",
    "e5": "~(x|y)",
}


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GenSpec:
    ground_truth: Expr
    width: int = 64
    vars: int = 2
    steps: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not 1 <= self.vars <= 4:
            raise ValueError("vars must be between 1 and 4")


@dataclass(frozen=True)
class DatasetRecord:
    obfuscated: str
    ground_truth: str
    width: int
    t: int
    retries: int = field(default=0, compare=False)

    def line(self) -> str:
        return f"{self.obfuscated},{self.ground_truth}"


# -- sum-of-items view ---------------------------------------------------------------------

def _is_bitwise(e: Expr) -> bool:
    if isinstance(e, (Var, Const)):
        return True
    if isinstance(e, Unary):
        return e.op == "~" and _is_bitwise(e.operand)
    return e.op in BITWISE_OPS and _is_bitwise(e.left) and _is_bitwise(e.right)


def _items(e: Expr, coeff: int, m: int, out: list, const: list) -> None:
    if isinstance(e, Const):
        const[0] = (const[0] + coeff * e.value) & m
    elif _is_bitwise(e):
        out.append((coeff & m, e))
    elif isinstance(e, Unary) and e.op == "-":
        _items(e.operand, -coeff, m, out, const)
    elif isinstance(e, Binary) and e.op in "+-":
        _items(e.left, coeff, m, out, const)
        _items(e.right, coeff if e.op == "+" else -coeff, m, out, const)
    elif isinstance(e, Binary) and e.op == "*" and isinstance(e.left, Const):
        _items(e.right, coeff * e.left.value, m, out, const)
    elif isinstance(e, Binary) and e.op == "*" and isinstance(e.right, Const):
        _items(e.left, coeff * e.right.value, m, out, const)
    else:
        raise ValueError(f"cannot split {render(e)} into linear items")


def split_items(e: Expr, width: int) -> tuple[int, list[tuple[int, Expr]]]:
    m = mask_of(width)
    out: list = []
    const = [0]
    _items(e, 1, m, out, const)
    return const[0], out


class _Rewriter:
    def __init__(self, rng: np.random.Generator, width: int, names: Sequence[str]):
        self.rng = rng
        self.w = width
        self.m = mask_of(width)
        self.names = list(names)

    def word(self) -> int:
        """Uniform word other than 0 and all-ones."""
        while True:
            v = int(self.rng.integers(0, 1 << 63)) << 1 | int(self.rng.integers(0, 2))
            v &= self.m
            if v not in (0, self.m):
                return v

    def pick(self, seq):
        return seq[int(self.rng.integers(0, len(seq)))]

    def var(self) -> Expr:
        return Var(self.pick(self.names))

    # each rule: (constant, items) -> (constant, items) or None if not applicable

    def mask_split(self, k, items):
        if not items:
            return None
        i = int(self.rng.integers(0, len(items)))
        c, b = items[i]
        mask = self.word()
        new = [(c, Binary("&", b, Const(mask))), (c, Binary("&", b, Const(~mask & self.m)))]
        return k, items[:i] + new + items[i + 1:]

    def xor_split(self, k, items):
        pairs = [(i, j) for i in range(len(items)) for j in range(i + 1, len(items))
                 if items[i][0] == items[j][0]]
        ors = [i for i, (_, b) in enumerate(items) if isinstance(b, Binary) and b.op == "|"]
        if not pairs and not ors:
            return None
        if pairs and (not ors or self.rng.integers(0, 2)):
            i, j = self.pick(pairs)
            c, a = items[i]
            _, b = items[j]
            new = [(c, Binary("^", a, b)), ((2 * c) & self.m, Binary("&", a, b))]
            rest = [it for n, it in enumerate(items) if n not in (i, j)]
        else:
            i = self.pick(ors)
            c, b = items[i]
            new = [(c, Binary("^", b.left, b.right)), (c, Binary("&", b.left, b.right))]
            rest = items[:i] + items[i + 1:]
        return self.mask_split(k, rest + new)

    def xor_expand(self, k, items):
        if not items:
            return None
        i = int(self.rng.integers(0, len(items)))
        c, b = items[i]
        if isinstance(b, Binary) and b.op == "^" and isinstance(b.left, Const):
            key, inner = b.left.value, b.right
            other = Binary("&", Const(key), inner)
        elif isinstance(b, Binary) and b.op == "^" and isinstance(b.right, Const):
            key, inner = b.right.value, b.left
            other = Binary("&", Const(key), inner)
        else:
            key, inner = self.word(), b
            other = Binary("&", Const(key), Unary("~", b))
        new = [(c, Binary("&", Const(~key & self.m), inner)), ((-c) & self.m, other)]
        return (k + c * key) & self.m, items[:i] + new + items[i + 1:]

    def inflate(self, k, items):
        options = []
        for i, (c, b) in enumerate(items):
            if isinstance(b, Binary) and b.op == "&":
                for side in (b.left, b.right):
                    if isinstance(side, Const) and side.value & 1 == 0 and side.value:
                        options.append((i, side.value))
        if not options:
            return None
        i, mask = self.pick(options)
        c, b = items[i]
        low = (mask & -mask).bit_length() - 1
        r = int(self.rng.integers(1, 1 << 16))
        new_c = (c + (r << (self.w - low))) & self.m
        return k, items[:i] + [(new_c, b)] + items[i + 1:]

    def zero(self, k, items, fresh: str | None = None):
        a = Var(fresh) if fresh else self.var()
        others = [n for n in self.names if n != a.name]
        if others and (fresh or self.rng.integers(0, 2)):
            b: Expr = Var(self.pick(others))
        else:
            b = Const(self.word())
        c = int(self.rng.integers(1, 8))
        new = [(c, Binary("|", a, b)), ((-c) & self.m, Binary("^", a, b)), ((-c) & self.m, Binary("&", a, b))]
        return k, items + new


def _assemble(k: int, items: list[tuple[int, Expr]], rng: np.random.Generator, width: int) -> Expr:
    order = rng.permutation(len(items))
    return build_sum([items[i] for i in order], k, width)


def obfuscate(spec: GenSpec) -> DatasetRecord:
    """Apply ``spec.steps`` random rewrites and gate the result with the oracle."""
    cls = classify(spec.ground_truth, spec.width)
    if cls is MbaClass.NONLINEAR:
        raise ValueError("ground truth must be linear or semi-linear")
    truth_vars = variables(spec.ground_truth)
    t = max(spec.vars, len(truth_vars))
    names = truth_vars + [n for n in default_names(4) if n not in truth_vars][: t - len(truth_vars)]
    for attempt in range(MAX_RETRIES):
        rng = np.random.default_rng([spec.seed, attempt])
        e = _obfuscate_once(spec, names, truth_vars, rng)
        report = random_equiv(e, spec.ground_truth, spec.width, GATE_SAMPLES, seed=spec.seed + attempt)
        if report.equivalent and node_count(e) > node_count(spec.ground_truth):
            return DatasetRecord(render(e, spec.width), render(spec.ground_truth, spec.width),
                                 spec.width, t, retries=attempt)
    raise GenerationError(f"no verified obfuscation of {render(spec.ground_truth)} after {MAX_RETRIES} seeds")


def _obfuscate_once(spec: GenSpec, names, truth_vars, rng) -> Expr:
    w = spec.width
    rw = _Rewriter(rng, w, names)
    k, items = split_items(spec.ground_truth, w)
    for fresh in names[len(truth_vars):]:
        k, items = rw.zero(k, items, fresh=fresh)
    rules = (rw.mask_split, rw.xor_split, rw.xor_expand, rw.inflate, rw.zero)
    done = 0
    while done < spec.steps:
        applicable = []
        for rule in rules:
            res = rule(k, items)
            if res is not None:
                applicable.append(res)
        k, items = applicable[int(rng.integers(0, len(applicable)))]
        done += 1
    # at least one nontrivial constant keeps the output semi-linear
    if not any(_has_mask(b, rw.m) for _, b in items):
        k, items = rw.mask_split(k, items)
    return _assemble(k, items, rng, w)


def _has_mask(e: Expr, m: int) -> bool:
    if isinstance(e, Const):
        return e.value not in (0, m)
    if isinstance(e, Unary):
        return _has_mask(e.operand, m)
    if isinstance(e, Binary):
        return _has_mask(e.left, m) or _has_mask(e.right, m)
    return False


# -- datasets --------------------------------------------------------------------------------

def header(width: int, t: int) -> str:
    return f"# width={width} vars={t}"


def write_dataset(records: Sequence[DatasetRecord], path: str | os.PathLike, width: int, t: int,
                  comments: Iterable[str] = ()) -> None:
    lines = [header(width, t)] + [f"# {c}" for c in comments] + [r.line() for r in records]
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write dataset {os.fspath(path)!r}: {exc.strerror or exc}") from exc


def gen_dataset(count: int, template: GenSpec | Sequence[GenSpec], path: str | os.PathLike | None = None,
                comments: Iterable[str] = ()) -> list[DatasetRecord]:
    """``count`` records; record ``i`` uses seed ``(template.seed, i)``.

    ``template`` may be a sequence of specs, used round-robin.
    """
    specs = [template] if isinstance(template, GenSpec) else list(template)
    if count and not specs:
        raise ValueError("no template given")
    records = []
    for i in range(count):
        base = specs[i % len(specs)]
        seed = int(np.random.SeedSequence([base.seed, i]).generate_state(1)[0])
        records.append(obfuscate(replace(base, seed=seed)))
    if path is not None:
        first = specs[0] if specs else None
        width = first.width if first else 64
        t = max((r.t for r in records), default=first.vars if first else 0)
        write_dataset(records, path, width, t, comments)
    return records


def read_dataset(path: str | os.PathLike) -> tuple[int, int, list[tuple[str, str | None]]]:
    """Parse a dataset file into ``(width, vars, [(obfuscated, ground_truth), ...])``."""
    width, t = 64, 0
    rows: list[tuple[str, str | None]] = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read dataset {os.fspath(path)!r}: {exc.strerror or exc}") from exc
    for line in lines:
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].split():
                key, _, val = tok.partition("=")
                if key == "width" and val.isdigit():
                    width = int(val)
                elif key == "vars" and val.isdigit():
                    t = int(val)
            continue
        obf, sep, gt = line.partition(",")
        rows.append((obf.strip(), gt.strip() if sep else None))
    return width, t, rows


def table3_specs(t: int, width: int = 64, steps: int = 3, seed: int = 7) -> dict[str, GenSpec]:
    """Specs for the five stand-in classes; classes needing more variables than ``t`` use their own count."""
    out = {}
    for idx, (name, text) in enumerate(TABLE3_TRUTHS.items()):
        truth = parse(text, width)
        out[name] = GenSpec(truth, width, max(t, len(variables(truth))), steps, seed * 1000 + idx * 10 + t)
    return out


# -- synthetic ground truths -----------------------------------------------------------------------

def random_truth(rng: np.random.Generator, width: int = 64, names: Sequence[str] = ("x", "y", "z"),
                 masked: float = 0.35) -> Expr:
    """A small linear or semi-linear expression: one to three terms ``c * f``,
    with ``f`` a minimal boolean function of one to three variables, sometimes masked."""
    m = mask_of(width)
    terms = []
    n_terms = int(rng.choice([1, 2, 2, 3]))
    for _ in range(n_terms):
        k = int(rng.choice([1, 2, 2, 3])) if len(names) >= 3 else int(rng.integers(1, len(names) + 1))
        picked = sorted(rng.choice(len(names), size=k, replace=False).tolist())
        sub = [names[i] for i in picked]
        while True:
            tab = int(rng.integers(1, (1 << (1 << k)) - 1))
            if all(depends_on(tab, k, v) for v in range(k)):
                break
        e = minimal_expr(BoolFunc(tab, k), sub, width)
        if rng.random() < masked:
            mask = int(rng.integers(1, 1 << 16)) * (2 if rng.random() < 0.3 else 1)
            e = Binary("&", e, Const(mask & m))
        c = int(rng.choice([1, 1, 1, 1, 2, 3, -1, -1, -2, 5]))
        terms.append((c & m, e))
    const = int(rng.choice([0, 0, 0, 0, 1, -1]))
    return build_sum(terms, const, width)


def obf_style_specs(count: int, width: int = 64, steps: int = 2, seed: int = 11) -> list[GenSpec]:
    """Ground truths of mixed size for the larger corpus, with three variables."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        truth = random_truth(rng, width)
        out.append(GenSpec(truth, width, max(2, len(variables(truth))), steps, seed * 100_000 + i))
    return out
