"""Signature vectors and per-bit signature matrices.

A linear MBA is determined by its values on the 2**t corner points where each
variable is 0 or 1. A semi-linear MBA needs one such row per bit ``i``: the
values at points where each variable is 0 or ``2**i``, shifted down by ``i``.
Row ``i`` is only meaningful modulo ``2**(w - i)`` because its entries
multiply ``2**i``; the canonical form reduces it accordingly, after which two
semi-linear expressions are equivalent iff their offsets and canonical rows
agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .boolfunc import BoolFunc
from .expr import (
    Binary,
    Const,
    Expr,
    MbaClass,
    Unary,
    Var,
    check_width,
    classify,
    compile_expr,
    mask_of,
    variables,
)

MAX_VARS = 8


class NotSemiLinear(ValueError):
    def __init__(self, cls: MbaClass):
        super().__init__(f"expression is {cls.value}; only linear and semi-linear MBAs are supported")
        self.cls = cls


@dataclass(frozen=True)
class SignatureVector:
    entries: tuple[int, ...]
    variables: tuple[str, ...]
    width: int

    @property
    def nvars(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class SignatureMatrix:
    """Per-bit rows. ``adjusted`` marks a matrix with the offset removed."""

    rows: tuple[tuple[int, ...], ...]
    offset: int
    variables: tuple[str, ...]
    width: int
    adjusted: bool = False

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def canonical(self) -> "SignatureMatrix":
        w = self.width
        rows = tuple(tuple(v & mask_of(w - i) for v in row) for i, row in enumerate(self.rows))
        return SignatureMatrix(rows, self.offset, self.variables, w, self.adjusted)

    def key(self) -> tuple:
        """Hashable identity of the function (for adjusted canonical matrices)."""
        return (self.offset, self.rows)


def _resolve_vars(e: Expr, var_order: Sequence[str] | None) -> tuple[str, ...]:
    order = tuple(var_order) if var_order is not None else tuple(variables(e))
    if len(order) > MAX_VARS:
        raise ValueError(f"{len(order)} variables exceed the supported maximum of {MAX_VARS}")
    return order


def _require(e: Expr, width: int, allowed: tuple[MbaClass, ...]) -> None:
    cls = classify(e, width)
    if cls not in allowed:
        raise NotSemiLinear(cls)


def corner_points(t: int, scale: int = 1) -> np.ndarray:
    """Array of shape (t, 2**t): variable k at column j is ``scale * bit_k(j)``."""
    j = np.arange(1 << t, dtype=np.uint64)
    return np.stack([((j >> np.uint64(k)) & np.uint64(1)) * np.uint64(scale) for k in range(t)]) if t else np.zeros((0, 1), np.uint64)


def linear_signature(e: Expr, width: int = 64, var_order: Sequence[str] | None = None,
                     check: bool = True) -> SignatureVector:
    check_width(width)
    if check:
        _require(e, width, (MbaClass.LINEAR,))
    order = _resolve_vars(e, var_order)
    fn = compile_expr(e, order, width)
    pts = corner_points(len(order))
    vals = fn(*pts) if order else fn()
    vals = np.broadcast_to(np.asarray(vals, dtype=np.uint64), (1 << len(order),))
    return SignatureVector(tuple(int(v) for v in vals), order, width)


def _raw_values(e: Expr, width: int, order: tuple[str, ...]) -> tuple[int, np.ndarray]:
    """Offset and (w, 2**t) array of unshifted evaluations at scaled corners."""
    t = len(order)
    fn = compile_expr(e, order, width)
    n = 1 << t
    j = np.arange(n, dtype=np.uint64)
    shifts = np.repeat(np.arange(width, dtype=np.uint64), n)
    cols = np.tile(j, width)
    args = [((cols >> np.uint64(k)) & np.uint64(1)) << shifts for k in range(t)]
    vals = fn(*args) if t else fn()
    vals = np.broadcast_to(np.asarray(vals, dtype=np.uint64), (width * n,)).reshape(width, n)
    offset = int(fn(*([0] * t)))
    return offset, vals


def semilinear_matrix(e: Expr, width: int = 64, var_order: Sequence[str] | None = None,
                      check: bool = True) -> SignatureMatrix:
    """Rows ``e(point_{i,j}) >> i`` (not yet reduced modulo ``2**(w-i)``)."""
    check_width(width)
    if check:
        _require(e, width, (MbaClass.LINEAR, MbaClass.SEMILINEAR))
    order = _resolve_vars(e, var_order)
    offset, vals = _raw_values(e, width, order)
    rows = []
    for i in range(width):
        row = vals[i]
        low = (1 << i) - 1
        assert all((int(v) ^ offset) & low == 0 for v in row), "shift soundness violated"
        rows.append(tuple(int(v) >> i for v in row))
    return SignatureMatrix(tuple(rows), offset, order, width)


def adjusted_matrix(e: Expr, width: int = 64, var_order: Sequence[str] | None = None,
                    check: bool = True) -> SignatureMatrix:
    """Canonical offset-free matrix, computed in one vectorised pass."""
    check_width(width)
    if check:
        _require(e, width, (MbaClass.LINEAR, MbaClass.SEMILINEAR))
    order = _resolve_vars(e, var_order)
    offset, vals = _raw_values(e, width, order)
    diff = (vals - np.uint64(offset)) & np.uint64(mask_of(width))
    rows = []
    for i in range(width):
        shifted = diff[i] >> np.uint64(i)
        rows.append(tuple(int(v) for v in shifted))
    return SignatureMatrix(tuple(rows), offset, order, width, adjusted=True)


def subtract_offset(sig):
    """Split a signature into ``(offset, adjusted)``.

    Vectors: entries minus entry 0 modulo ``2**w``. Matrices: row ``i`` minus
    ``offset >> i`` modulo ``2**(w-i)``.
    """
    if isinstance(sig, SignatureVector):
        m = mask_of(sig.width)
        off = sig.entries[0]
        adj = tuple((v - off) & m for v in sig.entries)
        return off, SignatureVector(adj, sig.variables, sig.width)
    w = sig.width
    off = sig.offset
    rows = []
    for i, row in enumerate(sig.rows):
        m = mask_of(w - i)
        base = off >> i
        rows.append(tuple((v - base) & m for v in row))
    return off, SignatureMatrix(tuple(rows), off, sig.variables, w, adjusted=True)


def conjunction(j: int, names: Sequence[str]) -> Expr:
    """Basis expression for column ``j``: variable k plain if bit k of j is set."""
    lits = [Var(n) if (j >> k) & 1 else Unary("~", Var(n)) for k, n in enumerate(names)]
    e = lits[0]
    for lit in lits[1:]:
        e = Binary("&", e, lit)
    return e


def _sum(terms: list[Expr]) -> Expr:
    if not terms:
        return Const(0)
    e = terms[0]
    for t in terms[1:]:
        e = Binary("+", e, t)
    return e


def reconstruct_conjunctions(adj: SignatureMatrix, offset: int) -> Expr:
    """``offset + sum_i sum_{j>=1} adj[i][j] * (2**i & B_j)`` with zero terms dropped."""
    names = adj.variables
    terms: list[Expr] = []
    if offset:
        terms.append(Const(offset))
    for i, row in enumerate(adj.rows):
        m = mask_of(adj.width - i)
        for j in range(1, len(row)):
            c = row[j] & m
            if c == 0:
                continue
            t = Binary("&", Const(1 << i), conjunction(j, names))
            terms.append(t if c == 1 else Binary("*", Const(c), t))
    return _sum(terms)


def rows_consistent_with_row0(adj: SignatureMatrix) -> bool:
    """True iff every row is row 0 reduced modulo its own modulus, i.e. the
    function behaves identically on each bit, as a linear MBA does."""
    row0 = adj.rows[0]
    for i, row in enumerate(adj.rows):
        m = mask_of(adj.width - i)
        if any((a - b) & m for a, b in zip(row, row0)):
            return False
    return True


def linear_candidate(adj: SignatureMatrix, offset: int) -> Expr:
    """``offset + sum_{j>=1} row0[j] * B_j`` with full-width basis terms."""
    names = adj.variables
    terms: list[Expr] = []
    if offset:
        terms.append(Const(offset))
    for j, c in enumerate(adj.rows[0]):
        if j == 0 or c == 0:
            continue
        b = conjunction(j, names)
        terms.append(b if c == 1 else Binary("*", Const(c), b))
    return _sum(terms)


def shortcut_linear_candidate(e: Expr, width: int = 64,
                              var_order: Sequence[str] | None = None) -> Expr | None:
    """Return the 1-bit-space candidate if it has the same canonical matrix as ``e``."""
    adj = adjusted_matrix(e, width, var_order)
    cand = linear_candidate(adj, adj.offset)
    if not adj.variables:
        return cand
    cand_adj = adjusted_matrix(cand, width, adj.variables, check=False)
    if cand_adj.key() == adj.key():
        return cand
    return None


def row0_vector(adj: SignatureMatrix, offset: int) -> SignatureVector:
    m = mask_of(adj.width)
    return SignatureVector(tuple((v + offset) & m for v in adj.rows[0]), adj.variables, adj.width)


def column_func(values: Sequence[int]) -> BoolFunc:
    return BoolFunc.from_bits([1 if v else 0 for v in values])
