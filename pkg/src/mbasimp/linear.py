"""Linear MBA simplification from signature vectors.

The search for a linear combination runs in stages and returns the first
that succeeds:

a. a single term ``c * f``;
b. an arithmetic combination of plain variables ``a*x + b*y + ...``;
c. the cheapest combination of two arbitrary terms;
d/e. one term per distinct value, or the conjunction basis
     ``x, y, x&y, ...`` (whichever is cheaper). The latter always succeeds.

:func:`refine` then tries variable partitioning and whole-expression
negation, and every boolean function is rendered by the minimiser in
:mod:`mbasimp.boolfunc`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np

from .boolfunc import BoolFunc, depends_on, embed, full_table, minimal_expr, minimal_size, var_table
from .expr import Binary, Const, Expr, Unary, mask_of, node_count
from .signature import SignatureVector, subtract_offset


@dataclass(frozen=True)
class LinComb:
    """``constant + sum(coeff * f)``, complemented as a whole if ``negated``."""

    constant: int
    terms: tuple[tuple[int, BoolFunc], ...]
    negated: bool = False

    def signature(self, width: int, nvars: int) -> list[int]:
        m = mask_of(width)
        out = []
        for j in range(1 << nvars):
            v = self.constant
            for c, f in self.terms:
                if f(j):
                    v += c
            v &= m
            out.append((~v) & m if self.negated else v)
        return out


def _nvars(n: int) -> int:
    t = n.bit_length() - 1
    if n != 1 << t:
        raise ValueError("signature length must be a power of two")
    return t


def indicator(values: Sequence[int], pred) -> BoolFunc:
    return BoolFunc.from_bits([1 if pred(v) else 0 for v in values])


def mobius(v: Sequence[int], width: int) -> list[int]:
    """Coefficients of the conjunction basis: entry S is the coefficient of the
    AND of the variables in bit set S."""
    m = mask_of(width)
    c = [x & m for x in v]
    n = len(c)
    step = 1
    while step < n:
        for j in range(n):
            if j & step:
                c[j] = (c[j] - c[j ^ step]) & m
        step <<= 1
    return c


def term_cost(coeff: int, table: int, t: int, width: int) -> int:
    m = mask_of(width)
    extra = 0 if coeff == 1 else 1 if coeff == m else 2
    return minimal_size(table, t) + extra


def _combo_cost(terms, t: int, width: int) -> int:
    return sum(term_cost(c, f.table, t, width) for c, f in terms) + max(0, len(terms) - 1)


@lru_cache(maxsize=8)
def _table_matrix(t: int):
    n = 1 << t
    tabs = [tab for tab in range(2, 1 << n, 2)]
    bits = np.array([[(tab >> j) & 1 for j in range(n)] for tab in tabs], dtype=np.uint64)
    return tabs, bits


def _two_terms_exhaustive(v: list[int], width: int, t: int):
    m = mask_of(width)
    n = 1 << t
    tabs, F = _table_matrix(t)
    vals = np.array(v, dtype=np.uint64)
    weights = np.array([1 << j for j in range(n)], dtype=np.uint64)
    nonzero = sorted(set(v) - {0})
    coeffs = set(nonzero)
    for a, b in itertools.permutations([0] + nonzero, 2):
        coeffs.add((a - b) & m)
    coeffs.discard(0)
    best = None
    for a in sorted(coeffs):
        R = (vals[None, :] - np.uint64(a) * F) & np.uint64(m)
        nz = R != 0
        hi = R.max(axis=1)
        ok = ((R == hi[:, None]) | ~nz).all(axis=1) & nz.any(axis=1)
        for idx in np.nonzero(ok)[0]:
            b = int(hi[idx])
            g = int((nz[idx].astype(np.uint64) * weights).sum())
            terms = ((a, BoolFunc(tabs[idx], t)), (b, BoolFunc(g, t)))
            key = (_combo_cost(terms, t, width), tabs[idx], a)
            if best is None or key < best[0]:
                best = (key, terms)
    return None if best is None else best[1]


def _two_terms_by_value(v: list[int], width: int, t: int):
    m = mask_of(width)
    uniq = sorted(set(v) - {0})
    options = []
    if len(uniq) == 2:
        p, q = uniq
        options.append(((p, indicator(v, lambda x: x == p)), (q, indicator(v, lambda x: x == q))))
        options.append(((p, indicator(v, lambda x: x != 0)), ((q - p) & m, indicator(v, lambda x: x == q))))
        options.append(((q, indicator(v, lambda x: x != 0)), ((p - q) & m, indicator(v, lambda x: x == p))))
    elif len(uniq) == 3:
        for p, q, r in itertools.permutations(uniq):
            if (p + q) & m == r and p < q:
                options.append(((p, indicator(v, lambda x: x in (p, r))), (q, indicator(v, lambda x: x in (q, r)))))
    if not options:
        return None
    return min(options, key=lambda o: _combo_cost(o, t, width))


def find_linear_combination(v: Sequence[int], width: int = 64) -> LinComb:
    """Staged search for an offset-free vector (``v[0] == 0``)."""
    v = [x & mask_of(width) for x in v]
    if v[0] != 0:
        raise ValueError("vector must be offset-adjusted (v[0] == 0)")
    t = _nvars(len(v))
    nonzero = set(v) - {0}
    if not nonzero:
        return LinComb(0, ())
    # (a) one term
    if len(nonzero) == 1:
        c = nonzero.pop()
        return LinComb(0, ((c, indicator(v, bool)),))
    mob = mobius(v, width)
    # (b) arithmetic: only single-variable conjunctions
    if all(c == 0 or bin(s).count("1") == 1 for s, c in enumerate(mob)):
        return LinComb(0, tuple((c, BoolFunc(var_table(k, t), t))
                                for k in range(t) if (c := mob[1 << k])))
    # (c) two arbitrary terms
    two = _two_terms_exhaustive(v, width, t) if t <= 3 else _two_terms_by_value(v, width, t)
    if two is not None:
        return LinComb(0, tuple(two))
    # (d) one term per distinct value, (e) conjunction basis
    per_value = tuple((u, indicator(v, lambda x, u=u: x == u)) for u in sorted(nonzero))
    basis = tuple((c, BoolFunc(_and_table(s, t), t)) for s, c in enumerate(mob) if s and c)
    return LinComb(0, min((per_value, basis), key=lambda o: (_combo_cost(o, t, width), len(o))))


@lru_cache(maxsize=1 << 14)
def _cached_combination(v: tuple[int, ...], width: int) -> LinComb:
    return find_linear_combination(v, width)


def _and_table(s: int, t: int) -> int:
    tab = full_table(t)
    for k in range(t):
        if s >> k & 1:
            tab &= var_table(k, t)
    return tab


# -- materialisation --------------------------------------------------------------

def build_sum(items: list[tuple[int, Expr]], constant: int, width: int) -> Expr:
    """Sum of ``coeff * expr`` items plus ``constant``, using subtraction for
    coefficients in the upper half of the word range."""
    m = mask_of(width)
    half = 1 << (width - 1)
    pos: list[Expr] = []
    negs: list[Expr] = []
    for c, e in items:
        c &= m
        if c == 0:
            continue
        if c > half:
            mag = (-c) & m
            negs.append(e if mag == 1 else Binary("*", Const(mag), e))
        else:
            pos.append(e if c == 1 else Binary("*", Const(c), e))
    constant &= m
    if constant and constant <= half:
        pos.append(Const(constant))
    elif constant:
        if pos:
            negs.append(Const((-constant) & m))
        else:
            pos.append(Const(constant))
    if pos:
        acc = pos[0]
        for e in pos[1:]:
            acc = Binary("+", acc, e)
    elif negs:
        acc = Unary("-", negs.pop(0))
    else:
        return Const(0)
    for e in negs:
        acc = Binary("-", acc, e)
    return acc


def materialize(lc: LinComb, names: Sequence[str], width: int) -> Expr:
    """Render a combination, absorbing ``K + K*f`` into ``(-K) * ~f`` when shorter."""
    m = mask_of(width)
    t = len(names)
    items = [(c, minimal_expr(f, names, width)) for c, f in lc.terms]
    options = [build_sum(items, lc.constant, width)]
    k = lc.constant & m
    if k:
        for idx, (c, f) in enumerate(lc.terms):
            if c & m == k:
                comp = minimal_expr(BoolFunc(full_table(t) ^ f.table, t), names, width)
                rest = items[:idx] + [((-k) & m, comp)] + items[idx + 1:]
                options.append(build_sum(rest, 0, width))
                break
    e = min(options, key=node_count)
    if lc.negated:
        e = e.operand if isinstance(e, Unary) and e.op == "~" else Unary("~", e)
    return e


# -- refinement ----------------------------------------------------------------

def influence_components(v: Sequence[int], width: int) -> tuple[list[list[int]], list[int]]:
    """Group variables that interact in the conjunction basis; also return
    variables with no influence at all."""
    t = _nvars(len(v))
    mob = mobius(v, width)
    parent = list(range(t))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    used = set()
    for s, c in enumerate(mob):
        if not s or not c:
            continue
        ks = [k for k in range(t) if s >> k & 1]
        used.update(ks)
        for k in ks[1:]:
            parent[find(k)] = find(ks[0])
    groups: dict[int, list[int]] = {}
    for k in sorted(used):
        groups.setdefault(find(k), []).append(k)
    return list(groups.values()), [k for k in range(t) if k not in used]


def _restrict(v: Sequence[int], keep: list[int]) -> list[int]:
    out = []
    for j in range(1 << len(keep)):
        src = 0
        for pos, k in enumerate(keep):
            if j >> pos & 1:
                src |= 1 << k
        out.append(v[src])
    return out


def _lift(f: BoolFunc, keep: list[int], t: int) -> BoolFunc:
    return BoolFunc(embed(f.table, f.nvars, keep, t), t)


def _partitioned(adj: list[int], width: int) -> LinComb | None:
    t = _nvars(len(adj))
    groups, unused = influence_components(adj, width)
    if len(groups) <= 1 and not unused:
        return None
    terms = []
    for keep in groups:
        sub = find_linear_combination(_restrict(adj, keep), width)
        terms.extend((c, _lift(f, keep, t)) for c, f in sub.terms)
    return LinComb(0, tuple(terms))


MAX_ASSIGNMENTS = 64


def _vector_of(mob: dict[int, int], keep: list[int], width: int) -> list[int]:
    """Signature over ``keep`` of the conjunction-basis terms in ``mob``."""
    m = mask_of(width)
    out = []
    for j in range(1 << len(keep)):
        point = sum(1 << k for pos, k in enumerate(keep) if j >> pos & 1)
        out.append(sum(c for s, c in mob.items() if s & point == s) & m)
    return out


def _hyperedge_split(adj: list[int], width: int) -> LinComb | None:
    """Split the conjunction-basis terms among maximal variable sets.

    Every nonzero basis coefficient belongs to some maximal support set; the
    ones contained in several are assigned in every possible way (up to a
    cap) and each group is solved on its own variables. This generalises
    partitioning to groups that share variables, e.g. ``(x^y) + (x&z)``.
    """
    t = _nvars(len(adj))
    mob = {s: c for s, c in enumerate(mobius(adj, width)) if s and c}
    supports = sorted(mob, key=lambda s: (-bin(s).count("1"), s))
    maximal = [s for s in supports if not any(o != s and o & s == s for o in supports)]
    if len(maximal) < 2:
        return None
    choices = [[g for g, mx in enumerate(maximal) if mx & s == s] for s in supports]
    n_assign = 1
    for ch in choices:
        n_assign *= len(ch)
    combos = itertools.product(*choices) if n_assign <= MAX_ASSIGNMENTS else [tuple(ch[0] for ch in choices)]
    best = None
    for assign in combos:
        terms = []
        for g, mx in enumerate(maximal):
            part = {s: mob[s] for s, a in zip(supports, assign) if a == g}
            keep = [k for k in range(t) if mx >> k & 1]
            sub = find_linear_combination(_vector_of(part, keep, width), width)
            terms.extend((c, _lift(f, keep, t)) for c, f in sub.terms)
        key = _combo_cost(terms, t, width)
        if best is None or key < best[0]:
            best = (key, tuple(terms))
    return LinComb(0, best[1])


MAX_GROUP_VARS = 3
GROUP_CANDIDATES = 4


@lru_cache(maxsize=8)
def _local_functions(k: int) -> list[tuple[int, list[int]]]:
    """Tables over ``k`` variables that vanish at 0 and depend on every
    variable, with their (signed) conjunction-basis coefficients."""
    out = []
    n = 1 << k
    for tab in range(2, 1 << n, 2):
        if any(not depends_on(tab, k, v) for v in range(k)):
            continue
        mob = [(tab >> j) & 1 for j in range(n)]
        step = 1
        while step < n:
            for j in range(n):
                if j & step:
                    mob[j] -= mob[j ^ step]
            step <<= 1
        out.append((tab, mob))
    return out


def _signed(v: int, width: int) -> int:
    return v - (1 << width) if v >> (width - 1) else v


def _group_candidates(mob: dict[int, int], keep: list[int], shared: set[int], width: int, t: int):
    """Terms ``c * f`` over ``keep`` reproducing every coefficient private to the group."""
    m = mask_of(width)
    k = len(keep)
    local = [sum(1 << k_ for pos, k_ in enumerate(keep) if s >> pos & 1) for s in range(1 << k)]
    top = mob.get(local[-1], 0)
    out = []
    for tab, fm in _local_functions(k):
        lead = fm[-1]
        if lead % 2:
            c = (top * pow(lead, -1, 1 << width)) & m
        elif lead and _signed(top, width) % lead == 0:
            c = (_signed(top, width) // lead) & m
        else:
            continue
        if all((c * fm[s] - mob.get(local[s], 0)) & m == 0
               for s in range(1, 1 << k) if local[s] not in shared):
            f = _lift(BoolFunc(tab, k), keep, t)
            out.append((term_cost(c, f.table, t, width), c, f, fm))
    out.sort(key=lambda o: (o[0], o[2].table))
    return out[:GROUP_CANDIDATES]


def _term_search(adj: list[int], width: int) -> LinComb | None:
    """One term per maximal variable set; what the chosen terms leave over
    must be a plain arithmetic combination of variables."""
    m = mask_of(width)
    t = _nvars(len(adj))
    mob = {s: c for s, c in enumerate(mobius(adj, width)) if s and c}
    supports = sorted(mob, key=lambda s: (-bin(s).count("1"), s))
    maximal = [s for s in supports if not any(o != s and o & s == s for o in supports)]
    if len(maximal) < 2 or any(bin(s).count("1") > MAX_GROUP_VARS for s in maximal):
        return None
    shared = {s for s in range(1, 1 << t) if sum(1 for mx in maximal if mx & s == s) >= 2}
    per_group = []
    for mx in maximal:
        keep = [k for k in range(t) if mx >> k & 1]
        if len(keep) == 1:
            continue
        cands = _group_candidates(mob, keep, shared, width, t)
        if not cands:
            return None
        per_group.append(cands)
    best = None
    for combo in itertools.islice(itertools.product(*per_group), MAX_ASSIGNMENTS):
        if best is not None and sum(o[0] for o in combo) >= best[0]:
            continue
        residual = list(adj)
        for _, c, f, _ in combo:
            tab = f.table
            residual = [(r - c) & m if tab >> j & 1 else r for j, r in enumerate(residual)]
        # only an arithmetic remainder a*x + b*y + ... is accepted
        rmob = mobius(residual, width)
        if any(c and bin(sub).count("1") > 1 for sub, c in enumerate(rmob)):
            continue
        rest = tuple((c, BoolFunc(var_table(k, t), t)) for k in range(t) if (c := rmob[1 << k]))
        terms = tuple((c, f) for _, c, f, _ in combo) + rest
        key = _combo_cost(terms, t, width)
        if best is None or key < best[0]:
            best = (key, terms)
    return None if best is None else LinComb(0, best[1])


def _solutions(entries: Sequence[int], width: int) -> list[LinComb]:
    m = mask_of(width)
    off = entries[0] & m
    adj = [(x - off) & m for x in entries]
    out = [replace(find_linear_combination(adj, width), constant=off)]
    for alt in (_partitioned(adj, width), _hyperedge_split(adj, width), _term_search(adj, width)):
        if alt is not None:
            out.append(replace(alt, constant=off))
    return out


def refine(lc: LinComb, v: SignatureVector) -> LinComb:
    """Try variable partitioning and negation; keep whatever renders smallest."""
    names, w = v.variables, v.width
    m = mask_of(w)
    candidates = []
    negated = [(~x) & m for x in v.entries]
    if len(set(negated)) > 1:
        # listed first so that ties render as ~(...) rather than with a folded -1
        candidates += [replace(c, negated=True) for c in _solutions(negated, w)]
    candidates.append(lc)
    candidates += _solutions(v.entries, w)
    return min(candidates, key=lambda c: (node_count(materialize(c, names, w)), len(c.terms)))


def simplify_linear(v: SignatureVector) -> Expr:
    """Smallest expression found whose linear signature is ``v``."""
    return _simplify_cached(v)


@lru_cache(maxsize=1 << 14)
def _simplify_cached(v: SignatureVector) -> Expr:
    w = v.width
    if len(set(v.entries)) == 1:
        return Const(v.entries[0])
    offset, adj = subtract_offset(v)
    lc = replace(find_linear_combination(adj.entries, w), constant=offset)
    return materialize(refine(lc, v), v.variables, w)


def solve_vector(entries: Sequence[int], names: Sequence[str], width: int) -> Expr:
    return simplify_linear(SignatureVector(tuple(x & mask_of(width) for x in entries), tuple(names), width))
