"""Semi-linear MBA simplification.

The adjusted signature matrix is solved one bit row at a time, which yields a
sum of masked terms ``c * (mask & F)``. That raw form is then tidied in three
passes:

* :func:`merge_terms` fuses terms sharing a boolean function, using the fact
  that a coefficient (or a mask bit) only matters modulo ``2**w``;
* :func:`recover_structure` rebuilds XORs and pulls out unmasked terms;
* :func:`substitute_and_solve_1bit` treats the masks as extra variables and
  hands the result to the linear solver.

:func:`simplify` runs all of this, checks every candidate against the input's
matrix and keeps the cheapest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .boolfunc import BoolFunc, minimal_expr
from .expr import (
    BITWISE_OPS,
    Binary,
    Const,
    Expr,
    MbaClass,
    Unary,
    Var,
    classify,
    fold_constants,
    mask_of,
    node_count,
    render,
    variables,
)
from .linear import LinComb, build_sum, find_linear_combination, simplify_linear
from .signature import (
    NotSemiLinear,
    SignatureMatrix,
    adjusted_matrix,
    linear_signature,
    reconstruct_conjunctions,
    rows_consistent_with_row0,
    row0_vector,
)

MAX_MASK_VARS = 6
MAX_TOTAL_VARS = 8


@dataclass(frozen=True)
class MaskedTerm:
    """``coeff * ((mask & F) ^ xmask)``.

    ``xmask`` is 0 for the ordinary masked form; XOR recovery sets it, e.g.
    ``10 * (98 ^ x)`` is ``MaskedTerm(10, 2**w - 1, x, 98)``.
    """

    coeff: int
    mask: int
    func: BoolFunc
    xmask: int = 0


@dataclass(frozen=True)
class ExprTerm:
    coeff: int
    expr: Expr


Term = Union[MaskedTerm, ExprTerm]


@dataclass(frozen=True)
class MaskedSum:
    constant: int
    terms: tuple[Term, ...]
    variables: tuple[str, ...]
    width: int

    def sorted(self) -> "MaskedSum":
        return MaskedSum(self.constant & mask_of(self.width), _sort_terms(self.terms),
                         self.variables, self.width)


def _sort_terms(terms: Iterable[Term]) -> tuple[Term, ...]:
    def key(t: Term):
        if isinstance(t, MaskedTerm):
            return (0, t.func.table, t.mask, t.xmask, t.coeff, "")
        return (1, 0, 0, 0, t.coeff, render(t.expr))
    return tuple(sorted(terms, key=key))


# -- the two modular checks --------------------------------------------------------

def _lowbit(x: int) -> int:
    return x & -x


def can_change_coefficient_to(old: int, new: int, mask: int, width: int = 64) -> bool:
    """Whether ``old * (mask & v) == new * (mask & v)`` for every ``v``.

    Checking bit by bit reduces to the lowest set bit of ``mask``: every
    higher bit multiplies the same difference by a larger power of two.
    """
    m = mask_of(width)
    return ((old - new) * _lowbit(mask & m)) & m == 0


def can_change_mask_to(coeff: int, old_mask: int, new_mask: int, width: int = 64) -> bool:
    """Whether ``coeff * (old_mask & v) == coeff * (new_mask & v)`` for every ``v``."""
    m = mask_of(width)
    return (coeff * _lowbit((old_mask ^ new_mask) & m)) & m == 0


def dont_care_bits(coeff: int, width: int) -> int:
    """Mask bits whose value cannot affect ``coeff * (mask & v)``."""
    m = mask_of(width)
    c = coeff & m
    if c == 0:
        return m
    tz = (c & -c).bit_length() - 1
    return m & ~mask_of(width - tz)


def sign_extend(value: int, bits: int, width: int) -> int:
    """Lift a residue modulo ``2**bits`` to a word, preferring small magnitude."""
    value &= mask_of(bits)
    if bits < width and value > 1 << (bits - 1):
        value -= 1 << bits
    return value & mask_of(width)


# -- materialisation -----------------------------------------------------------------

def term_expr(term: Term, names: Sequence[str], width: int) -> Expr:
    """The bitwise part of a term (without its coefficient)."""
    if isinstance(term, ExprTerm):
        return term.expr
    m = mask_of(width)
    f = minimal_expr(term.func, names, width)
    e = f if term.mask == m else Binary("&", Const(term.mask), f)
    if term.xmask:
        e = Binary("^", Const(term.xmask), e)
    return fold_constants(e, width)


def _complement(e: Expr, width: int) -> Expr:
    if isinstance(e, Unary) and e.op == "~":
        return e.operand
    if isinstance(e, Binary) and e.op == "^" and isinstance(e.left, Const):
        return Binary("^", Const(~e.left.value & mask_of(width)), e.right)
    return fold_constants(Unary("~", e), width)


def sum_expr(constant: int, items: list[tuple[int, Expr]], width: int) -> Expr:
    """``constant + sum(c * e)``, absorbing ``K + K*e`` into ``(-K) * ~e`` when shorter."""
    m = mask_of(width)
    options = [build_sum(items, constant, width)]
    k = constant & m
    if k:
        for idx, (c, e) in enumerate(items):
            if c & m == k:
                rest = items[:idx] + [((-k) & m, _complement(e, width))] + items[idx + 1:]
                options.append(build_sum(rest, 0, width))
    return fold_constants(min(options, key=node_count), width)


def _small_coeff(t: Term, width: int) -> int:
    """Smallest-magnitude coefficient with the same effect on the term's bits."""
    if not isinstance(t, MaskedTerm):
        return t.coeff
    low = _lowbit((t.mask | t.xmask) & mask_of(width))
    if not low:
        return t.coeff
    bits = width - (low.bit_length() - 1)
    return sign_extend(t.coeff, bits, width)


def to_expr(s: MaskedSum) -> Expr:
    items = [(_small_coeff(t, s.width), term_expr(t, s.variables, s.width)) for t in s.terms]
    return sum_expr(s.constant, items, s.width)


# -- cost -----------------------------------------------------------------------------

def _summands(e: Expr) -> int:
    if isinstance(e, Binary) and e.op in "+-":
        return _summands(e.left) + _summands(e.right)
    if isinstance(e, Unary) and e.op == "-":
        return _summands(e.operand)
    return 1


def _nontrivial_constants(e: Expr, width: int) -> set[int]:
    m = mask_of(width)
    out: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Const):
            if node.value & m not in (0, m):
                out.add(node.value & m)
        elif isinstance(node, Unary):
            stack.append(node.operand)
        elif isinstance(node, Binary):
            stack.extend((node.left, node.right))
    return out


def cost(e: Expr, width: int = 64) -> tuple[int, int, int]:
    """Lexicographic score: nodes, then additive terms, then distinct nontrivial constants."""
    return (node_count(e), _summands(e), len(_nontrivial_constants(e, width)))


# -- per-bit solution -----------------------------------------------------------------

@lru_cache(maxsize=4096)
def _solve_row(row: tuple[int, ...], bits: int) -> LinComb:
    return find_linear_combination(row, bits)


def _add_bit(groups: dict, func: BoolFunc, coeff: int, i: int, width: int) -> None:
    """Put bit ``i`` into a group of ``func`` whose coefficient agrees modulo ``2**(w-i)``."""
    bits = width - i
    mod = mask_of(bits)
    for key in groups:
        c, f = key
        if f == func and (c - coeff) & mod == 0:
            groups[key] |= 1 << i
            return
    groups[(sign_extend(coeff, bits, width), func)] = 1 << i


def _as_sum(groups: dict, offset: int, names, width: int) -> MaskedSum:
    terms = [MaskedTerm(c, mask, f) for (c, f), mask in groups.items()]
    return MaskedSum(offset, tuple(terms), tuple(names), width).sorted()


def per_bit_solution(adj: SignatureMatrix) -> MaskedSum:
    """One linear combination per matrix row, coalesced across bits.

    A row is first checked against the combinations already found for lower
    rows; only if none fits is the linear search run again.
    """
    w, t = adj.width, adj.nvars
    groups: dict = {}
    found: list[LinComb] = []
    for i, row in enumerate(adj.rows):
        bits = w - i
        row = tuple(v & mask_of(bits) for v in row)
        if not any(row):
            continue
        lc = next((c for c in reversed(found) if tuple(c.signature(bits, t)) == row), None)
        if lc is None:
            lc = _solve_row(row, bits)
            found.append(lc)
        for c, f in lc.terms:
            _add_bit(groups, f, c, i, w)
    return _as_sum(groups, adj.offset, adj.variables, w)


def conjunction_solution(adj: SignatureMatrix) -> MaskedSum:
    """The matrix read off directly in the conjunction basis, one term per
    (column, compatible coefficient) with the bits gathered into a mask."""
    w, t = adj.width, adj.nvars
    groups: dict = {}
    for j in range(1, 1 << t):
        func = BoolFunc(1 << j, t)
        for i, row in enumerate(adj.rows):
            v = row[j] & mask_of(w - i)
            if v:
                _add_bit(groups, func, v, i, w)
    return _as_sum(groups, adj.offset, adj.variables, w)


# -- merging ----------------------------------------------------------------------------

def _disjoint(c: int, keep: int, other: int, width: int) -> tuple[int, int] | None:
    """Masks with equal coefficient ``c`` made disjoint by dropping don't-care overlap."""
    overlap = keep & other
    if not overlap:
        return keep, other
    if can_change_mask_to(c, other, other & ~keep, width):
        return keep, other & ~keep
    if can_change_mask_to(c, keep, keep & ~other, width):
        return keep & ~other, other
    return None


def _merge_pair(a: MaskedTerm, b: MaskedTerm, width: int, change: bool) -> MaskedTerm | None:
    for p, q in ((a, b), (b, a)):
        if p.coeff != q.coeff and not (change and can_change_coefficient_to(q.coeff, p.coeff, q.mask, width)):
            continue
        masks = _disjoint(p.coeff, p.mask, q.mask, width)
        if masks is not None:
            return MaskedTerm(p.coeff, masks[0] | masks[1], p.func)
    return None


def _rule_pairs(terms: list[MaskedTerm], width: int, change: bool):
    for x, y in itertools.combinations(range(len(terms)), 2):
        merged = _merge_pair(terms[x], terms[y], width, change)
        if merged is not None:
            return [t for k, t in enumerate(terms) if k not in (x, y)] + [merged]
    return None


def _rule_drop_zero(terms: list[MaskedTerm], width: int):
    keep = [t for t in terms if not can_change_coefficient_to(t.coeff, 0, t.mask, width)]
    return keep if len(keep) < len(terms) else None


def _rule_minus_one(terms: list[MaskedTerm], width: int):
    m = mask_of(width)
    for x, t in enumerate(terms):
        if t.coeff == m or not can_change_coefficient_to(t.coeff, m, t.mask, width):
            continue
        trial = terms[:x] + [MaskedTerm(m, t.mask, t.func)] + terms[x + 1:]
        if _rule_pairs(trial, width, change=False) is not None:
            return trial
    return None


def _rule_three(terms: list[MaskedTerm], width: int):
    m = mask_of(width)
    for trio in itertools.combinations(range(len(terms)), 3):
        for ia, ib, ic in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            a, b, c = (terms[trio[k]] for k in (ia, ib, ic))
            if c.mask & (a.mask | b.mask):
                continue
            if not can_change_coefficient_to(c.coeff, (a.coeff + b.coeff) & m, c.mask, width):
                continue
            rest = [t for k, t in enumerate(terms) if k not in trio]
            return rest + [MaskedTerm(a.coeff, a.mask | c.mask, a.func),
                           MaskedTerm(b.coeff, b.mask | c.mask, b.func)]
    return None


def _merge_group(terms: list[MaskedTerm], width: int) -> list[MaskedTerm]:
    rules = (
        lambda ts: _rule_pairs(ts, width, change=False),
        lambda ts: _rule_pairs(ts, width, change=True),
        lambda ts: _rule_drop_zero(ts, width),
        lambda ts: _rule_minus_one(ts, width),
        lambda ts: _rule_three(ts, width),
    )
    terms = sorted(terms, key=lambda t: (t.mask, t.coeff))
    progress = True
    while progress:
        progress = False
        for rule in rules:
            new = rule(terms)
            if new is not None:
                terms = sorted(new, key=lambda t: (t.mask, t.coeff))
                progress = True
                break
    return terms


def _by_func(terms: Iterable[Term]):
    groups: dict[BoolFunc, list[MaskedTerm]] = {}
    others: list[Term] = []
    for t in terms:
        if isinstance(t, MaskedTerm) and not t.xmask:
            groups.setdefault(t.func, []).append(t)
        else:
            others.append(t)
    return groups, others


def merge_terms(s: MaskedSum, width: int | None = None) -> MaskedSum:
    """Fuse terms that share a boolean function until nothing changes."""
    width = s.width if width is None else width
    groups, others = _by_func(s.terms)
    terms: list[Term] = list(others)
    for func in sorted(groups, key=lambda f: f.table):
        terms.extend(_merge_group(groups[func], width))
    return MaskedSum(s.constant, tuple(terms), s.variables, width).sorted()


# -- structure recovery ---------------------------------------------------------------------

def _xor_options(p: MaskedTerm, q: MaskedTerm, width: int):
    """``a(m1&F) - a(m2&F) = a(((m1|m2)&F) ^ m2) - a*m2`` for disjoint masks."""
    m = mask_of(width)
    a = p.coeff
    if not can_change_coefficient_to(q.coeff, (-a) & m, q.mask, width):
        return None
    masks = _disjoint(a, p.mask, q.mask, width)
    if masks is None:
        return None
    m1, m2 = masks
    union = m1 | m2
    if can_change_mask_to(a, union, m, width):
        union = m
    # bits of the xor mask that the coefficient annihilates are free
    m2 &= ~dont_care_bits(a, width)
    return MaskedTerm(a, union, p.func, m2), (-a * m2) & m


def _single_mask_options(p: MaskedTerm, q: MaskedTerm, width: int):
    """``c1(m1&F) + c2(m2&F) = (c1-c2)(m1&F) + c2*F`` when ``m1|m2`` may become all-ones."""
    m = mask_of(width)
    masks = _disjoint(p.coeff, p.mask, q.mask, width) if p.coeff == q.coeff else (
        (p.mask, q.mask) if not p.mask & q.mask else None)
    if masks is None:
        return None
    m1, m2 = masks
    if not can_change_mask_to(q.coeff, m1 | m2, m, width):
        return None
    out = []
    if (p.coeff - q.coeff) & m:
        out.append(MaskedTerm((p.coeff - q.coeff) & m, m1, p.func))
    out.append(MaskedTerm(q.coeff, m, p.func))
    return out


def _pair_rewrite(s: MaskedSum, kind: str) -> MaskedSum | None:
    w = s.width
    best = None
    base = (cost(to_expr(s), w), 0)
    terms = list(s.terms)
    for x, y in itertools.permutations(range(len(terms)), 2):
        p, q = terms[x], terms[y]
        if not (isinstance(p, MaskedTerm) and isinstance(q, MaskedTerm)):
            continue
        if p.xmask or q.xmask or p.func != q.func:
            continue
        rest = [t for k, t in enumerate(terms) if k not in (x, y)]
        if kind == "xor":
            opt = _xor_options(p, q, w)
            if opt is None:
                continue
            new = MaskedSum(s.constant + opt[1], tuple(rest + [opt[0]]), s.variables, w)
        else:
            opt = _single_mask_options(p, q, w)
            if opt is None:
                continue
            new = MaskedSum(s.constant, tuple(rest + opt), s.variables, w)
        new = new.sorted()
        ex = to_expr(new)
        c = (cost(ex, w), len(render(ex, w)))
        if c < base and (best is None or c < best[0]):
            best = (c, new)
    return None if best is None else best[1]


def _group_rewrite(s: MaskedSum) -> MaskedSum | None:
    w = s.width
    groups: dict[BoolFunc, list[int]] = {}
    for k, t in enumerate(s.terms):
        if isinstance(t, MaskedTerm):
            groups.setdefault(t.func, []).append(k)
    for func in sorted(groups, key=lambda f: f.table):
        idx = groups[func]
        if len(idx) < 2:
            continue
        part = MaskedSum(0, tuple(s.terms[k] for k in idx), s.variables, w)
        before = to_expr(part)
        solved = substitute_and_solve_1bit(part, w)
        if solved is None or cost(solved, w) >= cost(before, w):
            continue
        rest = [t for k, t in enumerate(s.terms) if k not in idx]
        return MaskedSum(s.constant, tuple(rest + [ExprTerm(1, solved)]), s.variables, w).sorted()
    return None


def _repeat(s: MaskedSum, step) -> MaskedSum:
    while (nxt := step(s)) is not None:
        s = nxt
    return s


def recover_structure(s: MaskedSum, width: int | None = None) -> MaskedSum:
    """XOR recovery, single-mask rewrite, then per-function linear re-solving.

    Each rewrite is taken only if it lowers :func:`cost`, so the node count
    never grows, and the sequence is repeated until it stops changing.
    """
    if width is not None and width != s.width:
        s = MaskedSum(s.constant, s.terms, s.variables, width)
    s = s.sorted()
    steps = (
        lambda v: _pair_rewrite(v, "xor"),
        lambda v: _pair_rewrite(v, "single"),
        lambda v: _pair_rewrite(v, "xor"),
        _group_rewrite,
        lambda v: _pair_rewrite(v, "xor"),
    )
    while True:
        before = s
        for step in steps:
            s = _repeat(s, step)
        if s == before:
            return s


# -- mask substitution ------------------------------------------------------------------------

def _normalise_masks(s: MaskedSum) -> MaskedSum:
    """Use don't-care bits to make masks coincide with (complements of) other masks."""
    w = s.width
    m = mask_of(w)
    pool: list[int] = []
    for t in s.terms:
        if isinstance(t, MaskedTerm):
            pool.extend(x for x in (t.mask, t.xmask) if x not in (0, m))
    targets = [m] + sorted(set(pool)) + sorted({~x & m for x in pool})
    out: list[Term] = []
    for t in s.terms:
        if isinstance(t, MaskedTerm) and not t.xmask:
            dc = dont_care_bits(t.coeff, w)
            if dc:
                new = next((g for g in targets if (g ^ t.mask) & ~dc & m == 0), t.mask)
                t = MaskedTerm(t.coeff, new, t.func)
        out.append(t)
    return MaskedSum(s.constant, tuple(out), s.variables, w)


def _bitwise_constants(e: Expr, width: int) -> list[int]:
    m = mask_of(width)
    out: list[int] = []

    def walk(node: Expr, bitwise: bool) -> None:
        if isinstance(node, Const):
            if bitwise and node.value not in (0, m):
                out.append(node.value)
        elif isinstance(node, Unary):
            walk(node.operand, bitwise or node.op == "~")
        elif isinstance(node, Binary):
            inner = node.op in BITWISE_OPS
            walk(node.left, bitwise or inner)
            walk(node.right, bitwise or inner)

    walk(e, False)
    return list(dict.fromkeys(out))


def _relate(masks: list[int], width: int) -> tuple[list[int], dict[int, tuple]]:
    """Split masks into a base set and masks derived from two base masks."""
    m = mask_of(width)
    base: list[int] = []
    derived: dict[int, tuple] = {}
    for c in sorted(masks, key=lambda v: (bin(v).count("1"), v)):
        rel = None
        for b in base:
            if ~b & m == c:
                rel = ("~", b)
                break
        if rel is None:
            for b1, b2 in itertools.combinations(base, 2):
                for op, val in (("|", b1 | b2), ("&", b1 & b2), ("^", b1 ^ b2)):
                    if val == c:
                        rel = (op, b1, b2)
                        break
                if rel:
                    break
        if rel is None:
            base.append(c)
        else:
            derived[c] = rel
    return base, derived


def _replace_constants(e: Expr, table: dict[int, Expr]) -> Expr:
    def go(node: Expr, bitwise: bool) -> Expr:
        if isinstance(node, Const):
            return table.get(node.value, node) if bitwise else node
        if isinstance(node, Unary):
            return Unary(node.op, go(node.operand, bitwise or node.op == "~"))
        if isinstance(node, Binary):
            inner = bitwise or node.op in BITWISE_OPS
            return Binary(node.op, go(node.left, inner), go(node.right, inner))
        return node
    return go(e, False)


def _back_substitute(e: Expr, values: dict[str, int]) -> Expr:
    if isinstance(e, Var):
        return Const(values[e.name]) if e.name in values else e
    if isinstance(e, Unary):
        return Unary(e.op, _back_substitute(e.operand, values))
    if isinstance(e, Binary):
        return Binary(e.op, _back_substitute(e.left, values), _back_substitute(e.right, values))
    return e


def substitute_and_solve_1bit(s: MaskedSum | Expr, width: int = 64,
                              var_order: Sequence[str] | None = None) -> Expr | None:
    """Replace masks by fresh variables, solve the linear problem, substitute back.

    Returns ``None`` when the substituted expression is not linear or the
    variable budget is exceeded.
    """
    if isinstance(s, MaskedSum):
        width = s.width
        names = list(s.variables)
        e = fold_constants(to_expr(_normalise_masks(s)), width)
    else:
        e = fold_constants(s, width)
        names = list(var_order) if var_order is not None else variables(e)
    base, derived = _relate(_bitwise_constants(e, width), width)
    if len(base) > MAX_MASK_VARS or len(names) + len(base) > MAX_TOTAL_VARS:
        return None
    fresh = {}
    k = 0
    for c in base:
        while f"_m{k}" in names:
            k += 1
        fresh[c] = f"_m{k}"
        k += 1
    table: dict[int, Expr] = {c: Var(n) for c, n in fresh.items()}
    for c, rel in derived.items():
        if rel[0] == "~":
            table[c] = Unary("~", table[rel[1]])
        else:
            table[c] = Binary(rel[0], table[rel[1]], table[rel[2]])
    sub = _replace_constants(e, table)
    if classify(sub, width) is not MbaClass.LINEAR:
        return None
    order = names + list(fresh.values())
    solved = simplify_linear(linear_signature(sub, width, order, check=False))
    return _merge_additive_constants(
        fold_constants(_back_substitute(solved, {n: c for c, n in fresh.items()}), width), width)


def _flatten_sum(e: Expr, sign: int, out: list) -> None:
    if isinstance(e, Binary) and e.op in "+-":
        _flatten_sum(e.left, sign, out)
        _flatten_sum(e.right, sign if e.op == "+" else -sign, out)
    elif isinstance(e, Unary) and e.op == "-":
        _flatten_sum(e.operand, -sign, out)
    else:
        out.append((sign, e))


def _merge_additive_constants(e: Expr, width: int) -> Expr:
    """Collect the constant summands of a top-level sum into one."""
    items: list = []
    _flatten_sum(e, 1, items)
    consts = [(sg, x) for sg, x in items if isinstance(x, Const)]
    if len(consts) < 2:
        return e
    total = sum(sg * x.value for sg, x in consts)
    rest = []
    for sg, x in items:
        if isinstance(x, Const):
            continue
        if isinstance(x, Binary) and x.op == "*" and isinstance(x.left, Const):
            rest.append((sg * x.left.value, x.right))
        else:
            rest.append((sg, x))
    return sum_expr(total, rest, width)


# -- driver -----------------------------------------------------------------------------------

def _influential(adj: SignatureMatrix) -> list[int]:
    keep = []
    for k in range(adj.nvars):
        bit = 1 << k
        if any(row[j] != row[j | bit] for row in adj.rows for j in range(len(row)) if not j & bit):
            keep.append(k)
    return keep


def _project(adj: SignatureMatrix, keep: list[int]) -> SignatureMatrix:
    def src(j: int) -> int:
        return sum(1 << k for pos, k in enumerate(keep) if j >> pos & 1)
    rows = tuple(tuple(row[src(j)] for j in range(1 << len(keep))) for row in adj.rows)
    names = tuple(adj.variables[k] for k in keep)
    return SignatureMatrix(rows, adj.offset, names, adj.width, adjusted=True)


def _verified(cand: Expr | None, adj: SignatureMatrix) -> bool:
    if cand is None:
        return False
    if any(v not in adj.variables for v in variables(cand)):
        return False
    got = adjusted_matrix(cand, adj.width, adj.variables, check=False)
    return got.key() == adj.key()


def simplify(e: Expr, width: int = 64) -> Expr:
    """Simplify a linear or semi-linear MBA; raises :class:`NotSemiLinear` otherwise."""
    cls = classify(e, width)
    if cls is MbaClass.NONLINEAR:
        raise NotSemiLinear(cls)
    adj = adjusted_matrix(e, width, check=False)
    keep = _influential(adj)
    if len(keep) < adj.nvars:
        adj = _project(adj, keep)
    if not adj.variables or not any(any(row) for row in adj.rows):
        return Const(adj.offset)
    if rows_consistent_with_row0(adj):
        return simplify_linear(row0_vector(adj, adj.offset))

    merged = merge_terms(per_bit_solution(adj))
    recovered = recover_structure(merged)
    conj = merge_terms(conjunction_solution(adj))
    candidates = [
        substitute_and_solve_1bit(e, width, variables(e)),
        to_expr(recovered),
        substitute_and_solve_1bit(recovered),
        substitute_and_solve_1bit(merged),
        substitute_and_solve_1bit(conj),
        to_expr(recover_structure(conj)),
    ]
    good = [c for c in candidates if _verified(c, adj)]
    if not good:
        good = [reconstruct_conjunctions(adj, adj.offset)]
    # ties go to the shorter text, which prefers masks without stray don't-care bits
    return min(good, key=lambda c: (cost(c, width), len(render(c, width))))
