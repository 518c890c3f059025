"""Boolean functions as truth tables, and their minimisation.

A function over ``t`` variables is an integer of ``2**t`` bits; bit ``j`` is
the value at the point where variable ``k`` takes bit ``k`` of ``j``. This is
the column layout used by signature vectors, so column 1 is ``x & ~y`` and
column 3 is ``x & y`` for two variables.

Minimisation works on *recipes*, small nested tuples over local variable
indices, which are turned into :mod:`mbasimp.expr` trees only at the end:

* ``("var", k)``, ``("const", 0)``, ``("const", 1)``
* ``("~", r)``
* ``(op, r1, r2)`` with ``op`` in ``& | ^``
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .expr import Binary, Const, Expr, Unary, Var, mask_of

MAX_QMC_VARS = 4
MAX_SYNTH_VARS = 8
EXACT_COVER_LIMIT = 16


@dataclass(frozen=True, slots=True)
class BoolFunc:
    table: int
    nvars: int

    def __post_init__(self):
        if not 0 <= self.table <= full_table(self.nvars):
            raise ValueError(f"table {self.table:#x} does not fit {self.nvars} variables")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BoolFunc":
        n = len(bits)
        t = n.bit_length() - 1
        if n != 1 << t:
            raise ValueError("truth table length must be a power of two")
        return cls(sum(1 << j for j, b in enumerate(bits) if b), t)

    def bits(self) -> list[int]:
        return [(self.table >> j) & 1 for j in range(1 << self.nvars)]

    def __call__(self, point: int) -> int:
        return (self.table >> point) & 1


def full_table(t: int) -> int:
    return (1 << (1 << t)) - 1


@lru_cache(maxsize=None)
def var_table(k: int, t: int) -> int:
    return sum(1 << j for j in range(1 << t) if (j >> k) & 1)


def cofactor(table: int, t: int, k: int, value: int) -> int:
    """Fix variable ``k`` to ``value``; the result still ranges over ``t`` variables."""
    out = 0
    for j in range(1 << t):
        src = (j | (1 << k)) if value else (j & ~(1 << k))
        if (table >> src) & 1:
            out |= 1 << j
    return out


def depends_on(table: int, t: int, k: int) -> bool:
    return cofactor(table, t, k, 0) != cofactor(table, t, k, 1)


def project(table: int, t: int, keep: Sequence[int]) -> int:
    """Re-index a table that only depends on ``keep`` onto ``len(keep)`` variables."""
    out = 0
    for j in range(1 << len(keep)):
        src = 0
        for pos, k in enumerate(keep):
            if (j >> pos) & 1:
                src |= 1 << k
        if (table >> src) & 1:
            out |= 1 << j
    return out


def embed(table: int, t: int, keep: Sequence[int], total: int) -> int:
    """Inverse of :func:`project`: lift a table over ``keep`` to ``total`` variables."""
    out = 0
    for j in range(1 << total):
        src = 0
        for pos, k in enumerate(keep):
            if (j >> k) & 1:
                src |= 1 << pos
        if (table >> src) & 1:
            out |= 1 << j
    return out


def essential_vars(table: int, t: int) -> list[int]:
    return [k for k in range(t) if depends_on(table, t, k)]


# -- recipes -------------------------------------------------------------------

def recipe_size(r) -> int:
    if r[0] in ("var", "const"):
        return 1
    if r[0] == "~":
        return 1 + recipe_size(r[1])
    return 1 + recipe_size(r[1]) + recipe_size(r[2])


def remap(r, mapping: Sequence[int]):
    if r[0] == "var":
        return ("var", mapping[r[1]])
    if r[0] == "const":
        return r
    if r[0] == "~":
        return ("~", remap(r[1], mapping))
    return (r[0], remap(r[1], mapping), remap(r[2], mapping))


def recipe_table(r, t: int) -> int:
    full = full_table(t)
    if r[0] == "var":
        return var_table(r[1], t)
    if r[0] == "const":
        return full if r[1] else 0
    if r[0] == "~":
        return full ^ recipe_table(r[1], t)
    a, b = recipe_table(r[1], t), recipe_table(r[2], t)
    return a & b if r[0] == "&" else a | b if r[0] == "|" else a ^ b


def to_expr(r, names: Sequence[str], width: int) -> Expr:
    if r[0] == "var":
        return Var(names[r[1]])
    if r[0] == "const":
        return Const(mask_of(width) if r[1] else 0)
    if r[0] == "~":
        return Unary("~", to_expr(r[1], names, width))
    return Binary(r[0], to_expr(r[1], names, width), to_expr(r[2], names, width))


# -- exact minimum for up to three variables -------------------------------------

@lru_cache(maxsize=1)
def _optimal3() -> dict[int, tuple]:
    """Smallest recipe (by node count) for each of the 256 functions of 3 variables."""
    t = 3
    full = full_table(t)
    best: dict[int, tuple] = {}
    levels: list[list[int]] = [[], []]
    for r in (("var", 0), ("var", 1), ("var", 2), ("const", 0), ("const", 1)):
        tab = recipe_table(r, t)
        if tab not in best:
            best[tab] = r
            levels[1].append(tab)
    size = 1
    while len(best) < 256:
        size += 1
        found: dict[int, tuple] = {}
        for tab in levels[size - 1]:
            neg = full ^ tab
            if neg not in best and neg not in found:
                found[neg] = ("~", best[tab])
        for a in range(1, size - 1):
            b = size - 1 - a
            if a > b:
                break
            for ta in levels[a]:
                for tb in levels[b]:
                    for op, val in (("&", ta & tb), ("|", ta | tb), ("^", ta ^ tb)):
                        if val not in best and val not in found:
                            found[val] = (op, best[ta], best[tb])
        for tab in sorted(found):
            best[tab] = found[tab]
        levels.append(sorted(found))
    return best


# -- Quine-McCluskey ------------------------------------------------------------

def prime_implicants(table: int, t: int) -> list[tuple[int, int]]:
    """Prime implicants as ``(value, care)`` pairs: a point ``j`` is covered
    when ``j & care == value``."""
    full_care = (1 << t) - 1
    current = {(j, full_care) for j in range(1 << t) if (table >> j) & 1}
    primes: set[tuple[int, int]] = set()
    while current:
        merged = set()
        used = set()
        by_care: dict[int, list[int]] = {}
        for value, care in current:
            by_care.setdefault(care, []).append(value)
        for care, values in by_care.items():
            vals = set(values)
            for value in values:
                for k in range(t):
                    bit = 1 << k
                    if care & bit and not value & bit and (value | bit) in vals:
                        merged.add((value, care & ~bit))
                        used.add((value, care))
                        used.add((value | bit, care))
        primes |= current - used
        current = merged
    return sorted(primes, key=lambda p: (-bin(p[1]).count("1"), p))


def _covered(imp: tuple[int, int], t: int) -> frozenset[int]:
    value, care = imp
    return frozenset(j for j in range(1 << t) if j & care == value)


def _literal_count(imp: tuple[int, int]) -> int:
    return bin(imp[1]).count("1")


def minimum_cover(table: int, t: int, primes: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Exact minimum set cover (fewest implicants, then fewest literals)."""
    minterms = frozenset(j for j in range(1 << t) if (table >> j) & 1)
    if not minterms:
        return []
    cover = {p: _covered(p, t) & minterms for p in primes}
    chosen: list[tuple[int, int]] = []
    remaining = set(minterms)
    # essential primes
    for m in sorted(minterms):
        owners = [p for p in primes if m in cover[p]]
        if len(owners) == 1 and owners[0] not in chosen:
            chosen.append(owners[0])
    for p in chosen:
        remaining -= cover[p]
    candidates = [p for p in primes if p not in chosen and cover[p] & remaining]
    if not remaining:
        return chosen
    if len(candidates) > EXACT_COVER_LIMIT:
        # greedy: most new minterms, then fewest literals
        while remaining:
            p = max(candidates, key=lambda p: (len(cover[p] & remaining), -_literal_count(p)))
            chosen.append(p)
            remaining -= cover[p]
        return chosen
    best_extra = None
    for size in range(1, len(candidates) + 1):
        for combo in itertools.combinations(candidates, size):
            covered = set()
            for p in combo:
                covered |= cover[p]
            if remaining <= covered:
                lits = sum(_literal_count(p) for p in combo)
                if best_extra is None or lits < best_extra[0]:
                    best_extra = (lits, list(combo))
        if best_extra is not None:
            break
    return chosen + best_extra[1]


def _implicant_recipe(imp: tuple[int, int], t: int):
    value, care = imp
    lits = []
    for k in range(t):
        if care >> k & 1:
            lits.append(("var", k) if value >> k & 1 else ("~", ("var", k)))
    if not lits:
        return ("const", 1)
    r = lits[0]
    for lit in lits[1:]:
        r = ("&", r, lit)
    return r


def sop_recipe(table: int, t: int):
    """Sum-of-products recipe with a minimum number of prime implicants."""
    if table == 0:
        return ("const", 0)
    if table == full_table(t):
        return ("const", 1)
    cover = minimum_cover(table, t, prime_implicants(table, t))
    terms = sorted(cover, key=lambda p: (-p[1] & ((1 << t) - 1), p))
    # order implicants by their lowest variable for readable output
    terms.sort(key=lambda p: [((p[1] >> k) & 1) ^ 1 for k in range(t)])
    r = _implicant_recipe(terms[0], t)
    for imp in terms[1:]:
        r = ("|", r, _implicant_recipe(imp, t))
    return r


def quine_mccluskey(f: BoolFunc, names: Sequence[str] | None = None, width: int = 64) -> Expr:
    """Minimal sum-of-products expression for ``f`` (``nvars <= 4``)."""
    if f.nvars > MAX_QMC_VARS:
        raise ValueError(f"quine_mccluskey supports at most {MAX_QMC_VARS} variables")
    names = list(names) if names is not None else default_names(f.nvars)
    return to_expr(sop_recipe(f.table, f.nvars), names, width)


def default_names(t: int) -> list[str]:
    base = ["x", "y", "z", "w"]
    return base[:t] if t <= 4 else [f"x{k}" for k in range(t)]


# -- general minimisation --------------------------------------------------------

def _decompositions(table: int, t: int):
    """Yield ``(recipe_size_lower_bound, builder)`` style candidates from
    single-literal and two-block disjoint decompositions."""
    full = full_table(t)
    for k in range(t):
        xk = var_table(k, t)
        c0 = cofactor(table, t, k, 0)
        c1 = cofactor(table, t, k, 1)
        g = table ^ xk
        if not depends_on(g, t, k):
            yield ("^", g, ("var", k))
        if table & ~xk & full == 0:
            yield ("&", c1, ("var", k))
        if table & xk == 0:
            yield ("&", c0, ("~", ("var", k)))
        if table & xk == xk:
            yield ("|", c0, ("var", k))
        if table | xk == full:
            yield ("|", c1, ("~", ("var", k)))
    # two disjoint variable blocks
    for size in range(2, t // 2 + 1):
        for block in itertools.combinations(range(t), size):
            if size * 2 == t and 0 not in block:
                continue
            rest = [k for k in range(t) if k not in block]
            yield from _block_split(table, t, list(block), rest)


def _block_split(table: int, t: int, a: list[int], b: list[int]):
    na, nb = 1 << len(a), 1 << len(b)
    pts_a = [sum(1 << k for pos, k in enumerate(a) if pa >> pos & 1) for pa in range(na)]
    pts_b = [sum(1 << k for pos, k in enumerate(b) if pb >> pos & 1) for pb in range(nb)]
    grid = [[(table >> (ja | jb)) & 1 for jb in pts_b] for ja in pts_a]
    ga_or = [int(any(row)) for row in grid]
    gb_or = [int(any(grid[pa][pb] for pa in range(na))) for pb in range(nb)]
    ga_and = [int(all(row)) for row in grid]
    gb_and = [int(all(grid[pa][pb] for pa in range(na))) for pb in range(nb)]
    ga_x = [grid[pa][0] for pa in range(na)]
    gb_x = [grid[0][pb] ^ grid[0][0] for pb in range(nb)]
    checks = (
        ("&", ga_or, gb_or, lambda u, v: u & v),
        ("|", ga_and, gb_and, lambda u, v: u | v),
        ("^", ga_x, gb_x, lambda u, v: u ^ v),
    )
    for op, ga, gb, fn in checks:
        if all(grid[pa][pb] == fn(ga[pa], gb[pb]) for pa in range(na) for pb in range(nb)):
            ta = sum(1 << pa for pa in range(na) if ga[pa])
            tb = sum(1 << pb for pb in range(nb) if gb[pb])
            yield ("block", op, (ta, a), (tb, b))


@lru_cache(maxsize=1 << 16)
def minimal_recipe(table: int, t: int):
    """A small recipe for ``table`` over ``t`` variables.

    Exact for three or fewer essential variables; above that, the smallest of
    the minimum sum-of-products, its complemented dual, and recursive
    single-literal / disjoint-block decompositions.
    """
    full = full_table(t)
    if table == 0:
        return ("const", 0)
    if table == full:
        return ("const", 1)
    keep = essential_vars(table, t)
    if len(keep) < t:
        inner = minimal_recipe(project(table, t, keep), len(keep))
        return remap(inner, keep)
    if t <= 3:
        lifted = embed(table, t, list(range(t)), 3)
        return _optimal3()[lifted]
    options = []
    if t <= MAX_SYNTH_VARS:
        options.append(sop_recipe(table, t))
        options.append(("~", sop_recipe(full ^ table, t)))
    for cand in _decompositions(table, t):
        if cand[0] == "block":
            _, op, (ta, a), (tb, b) = cand
            ra = remap(minimal_recipe(ta, len(a)), a)
            rb = remap(minimal_recipe(tb, len(b)), b)
            options.append((op, ra, rb))
        else:
            op, g, lit = cand
            options.append((op, minimal_recipe(g, t), lit))
    return min(options, key=recipe_size)


def minimal_expr(f: BoolFunc, names: Sequence[str], width: int) -> Expr:
    return to_expr(minimal_recipe(f.table, f.nvars), names, width)


@lru_cache(maxsize=1 << 16)
def minimal_size(table: int, t: int) -> int:
    return recipe_size(minimal_recipe(table, t))
