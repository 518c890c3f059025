"""Independent equivalence checks.

Three methods with different trade-offs:

* exhaustive: every assignment, definitive, only for ``t * w <= 24``;
* random: seeded samples plus corner values, can only refute;
* matrix: compares canonical adjusted signature matrices, definitive for
  linear and semi-linear inputs.

Any reported counterexample is re-evaluated with the tree walker before it is
returned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .expr import (
    Expr,
    MbaClass,
    check_width,
    classify,
    compile_expr,
    constants,
    evaluate,
    mask_of,
    merge_variables,
)
from .signature import adjusted_matrix

EXHAUSTIVE_BUDGET = 24
DEFAULT_SEED = 20240501
DEFAULT_SAMPLES = 10_000
_CHUNK = 1 << 18


class Verdict(enum.Enum):
    EQUIVALENT = "equivalent"
    COUNTEREXAMPLE = "counterexample"
    INCONCLUSIVE = "inconclusive"


class Method(enum.Enum):
    EXHAUSTIVE = "exhaustive"
    RANDOM = "random"
    MATRIX = "matrix"


@dataclass(frozen=True)
class EquivReport:
    verdict: Verdict
    method: Method
    samples: int
    counterexample: dict[str, int] | None = None
    note: str = ""

    @property
    def equivalent(self) -> bool:
        return self.verdict is Verdict.EQUIVALENT

    def __str__(self) -> str:
        text = f"{self.verdict.value} ({self.method.value}, {self.samples} samples)"
        if self.counterexample is not None:
            text += f" at {self.counterexample}"
        if self.note:
            text += f": {self.note}"
        return text


def _confirm(e1: Expr, e2: Expr, point: dict[str, int], width: int) -> bool:
    return evaluate(e1, point, width) != evaluate(e2, point, width)


def _counterexample(e1, e2, names, rows: np.ndarray, width: int, method: Method, samples: int):
    for row in rows:
        point = {n: int(v) for n, v in zip(names, row)}
        if _confirm(e1, e2, point, width):
            return EquivReport(Verdict.COUNTEREXAMPLE, method, samples, point)
    # the vectorised path disagreed with the tree walker; refuse to guess
    return EquivReport(Verdict.INCONCLUSIVE, method, samples, note="mismatch not reproducible")


def _compare(e1: Expr, e2: Expr, names: list[str], cols: np.ndarray, width: int):
    """Indices of rows in ``cols`` (shape (t, n)) where the two differ."""
    f1 = compile_expr(e1, names, width)
    f2 = compile_expr(e2, names, width)
    args = list(cols)
    n = cols.shape[1]
    v1 = np.broadcast_to(np.asarray(f1(*args), dtype=np.uint64), (n,))
    v2 = np.broadcast_to(np.asarray(f2(*args), dtype=np.uint64), (n,))
    return np.nonzero(v1 != v2)[0]


def exhaustive_equiv(e1: Expr, e2: Expr, width: int, var_order: Sequence[str] | None = None) -> EquivReport:
    check_width(width)
    names = list(var_order) if var_order is not None else merge_variables(e1, e2)
    t = len(names)
    if t * width > EXHAUSTIVE_BUDGET:
        return EquivReport(Verdict.INCONCLUSIVE, Method.EXHAUSTIVE, 0,
                           note=f"{t} variables x {width} bits exceeds the budget of {EXHAUSTIVE_BUDGET}")
    total = 1 << (t * width)
    m = np.uint64(mask_of(width))
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.uint64)
        cols = np.stack([(idx >> np.uint64(k * width)) & m for k in range(t)]) if t else np.zeros((0, len(idx)), np.uint64)
        bad = _compare(e1, e2, names, cols, width)
        if len(bad):
            return _counterexample(e1, e2, names, cols[:, bad[:8]].T, width, Method.EXHAUSTIVE, total)
    return EquivReport(Verdict.EQUIVALENT, Method.EXHAUSTIVE, total)


def corner_values(width: int, exprs: Sequence[Expr] = ()) -> list[int]:
    """0, 1, all-ones, every power of two, and every constant (and its complement) in ``exprs``."""
    m = mask_of(width)
    vals = {0, 1, m}
    vals.update(1 << i for i in range(width))
    for e in exprs:
        for c in constants(e):
            vals.add(c & m)
            vals.add(~c & m)
    return sorted(vals)


def random_equiv(e1: Expr, e2: Expr, width: int = 64, samples: int = DEFAULT_SAMPLES,
                 seed: int = DEFAULT_SEED, var_order: Sequence[str] | None = None) -> EquivReport:
    check_width(width)
    if samples < 1:
        raise ValueError("samples must be at least 1")
    names = list(var_order) if var_order is not None else merge_variables(e1, e2)
    t = len(names)
    rng = np.random.default_rng(seed)
    m = mask_of(width)
    corners = np.array(corner_values(width, (e1, e2)), dtype=np.uint64)
    blocks = [rng.integers(0, 1 << 64, size=(t, samples), dtype=np.uint64, endpoint=False) & np.uint64(m)]
    if t:
        # every variable set to the same corner, and each variable alone at a corner
        blocks.append(np.tile(corners, (t, 1)))
        for k in range(t):
            block = rng.integers(0, 1 << 64, size=(t, len(corners)), dtype=np.uint64) & np.uint64(m)
            block[k] = corners
            blocks.append(block)
    cols = np.concatenate(blocks, axis=1) if t else np.zeros((0, 1), np.uint64)
    n = cols.shape[1]
    bad = _compare(e1, e2, names, cols, width)
    if len(bad):
        return _counterexample(e1, e2, names, cols[:, bad[:8]].T, width, Method.RANDOM, n)
    return EquivReport(Verdict.EQUIVALENT, Method.RANDOM, n)


def matrix_equiv(e1: Expr, e2: Expr, width: int = 64, var_order: Sequence[str] | None = None) -> EquivReport:
    check_width(width)
    for e in (e1, e2):
        if classify(e, width) is MbaClass.NONLINEAR:
            return EquivReport(Verdict.INCONCLUSIVE, Method.MATRIX, 0, note="nonlinear input")
    names = list(var_order) if var_order is not None else merge_variables(e1, e2)
    a = adjusted_matrix(e1, width, names, check=False)
    b = adjusted_matrix(e2, width, names, check=False)
    n = len(a.rows) * (1 << len(names))
    if a.key() == b.key():
        return EquivReport(Verdict.EQUIVALENT, Method.MATRIX, n)
    points = []
    if a.offset != b.offset:
        points.append([0] * len(names))
    for i, (ra, rb) in enumerate(zip(a.rows, b.rows)):
        for j, (va, vb) in enumerate(zip(ra, rb)):
            if va != vb:
                points.append([((j >> k) & 1) << i for k in range(len(names))])
    return _counterexample(e1, e2, names, np.array(points[:8], dtype=object), width, Method.MATRIX, n)
