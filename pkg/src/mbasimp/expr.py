"""Expression trees over w-bit words.

Nodes are immutable dataclasses. ``Var`` and ``Const`` are leaves, ``Unary``
covers arithmetic negation (``-``) and bitwise complement (``~``), and
``Binary`` covers ``+ - * & | ^``. Every operation is interpreted modulo
``2**width``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

import numpy as np

MAX_WIDTH = 64

ARITH_OPS = frozenset("+-*")
BITWISE_OPS = frozenset("&|^")
COMMUTATIVE_OPS = frozenset("+*&|^")


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Const:
    value: int


@dataclass(frozen=True, slots=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True, slots=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Var, Const, Unary, Binary]


class MbaClass(enum.Enum):
    LINEAR = "linear"
    SEMILINEAR = "semi-linear"
    NONLINEAR = "nonlinear"


class UnassignedVariable(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self):
        return f"variable {self.name!r} has no assigned value"


def check_width(width: int) -> int:
    if not 1 <= width <= MAX_WIDTH:
        raise ValueError(f"width must be in [1, {MAX_WIDTH}], got {width}")
    return width


def mask_of(width: int) -> int:
    return (1 << width) - 1


# Convenience constructors, mostly used by tests and the solvers.

def add(a: Expr, b: Expr) -> Expr:
    return Binary("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    return Binary("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    return Binary("*", a, b)


def and_(a: Expr, b: Expr) -> Expr:
    return Binary("&", a, b)


def or_(a: Expr, b: Expr) -> Expr:
    return Binary("|", a, b)


def xor(a: Expr, b: Expr) -> Expr:
    return Binary("^", a, b)


def neg(a: Expr) -> Expr:
    return Unary("-", a)


def not_(a: Expr) -> Expr:
    return Unary("~", a)


def children(e: Expr) -> tuple:
    if isinstance(e, Binary):
        return (e.left, e.right)
    if isinstance(e, Unary):
        return (e.operand,)
    return ()


def variables(e: Expr) -> list[str]:
    """Distinct variable names in first-appearance (left-to-right) order."""
    seen: dict[str, None] = {}
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            seen.setdefault(node.name, None)
        else:
            stack.extend(reversed(children(node)))
    return list(seen)


def merge_variables(*exprs: Expr) -> list[str]:
    seen: dict[str, None] = {}
    for e in exprs:
        for name in variables(e):
            seen.setdefault(name, None)
    return list(seen)


def has_vars(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    return any(has_vars(c) for c in children(e))


def constants(e: Expr) -> list[int]:
    out = []
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Const):
            out.append(node.value)
        else:
            stack.extend(children(node))
    return out


def node_count(e: Expr) -> int:
    if isinstance(e, Binary):
        return 1 + node_count(e.left) + node_count(e.right)
    if isinstance(e, Unary):
        return 1 + node_count(e.operand)
    return 1


# -- evaluation ---------------------------------------------------------------

def _apply(op: str, a: int, b: int, m: int) -> int:
    if op == "+":
        return (a + b) & m
    if op == "-":
        return (a - b) & m
    if op == "*":
        return (a * b) & m
    if op == "&":
        return a & b
    if op == "|":
        return a | b
    if op == "^":
        return a ^ b
    raise ValueError(f"unknown operator {op!r}")


def evaluate(e: Expr, assignment: Mapping[str, int], width: int = 64) -> int:
    """Evaluate ``e`` with every intermediate result reduced modulo 2**width."""
    m = mask_of(check_width(width))

    def go(node: Expr) -> int:
        if isinstance(node, Const):
            return node.value & m
        if isinstance(node, Var):
            try:
                return assignment[node.name] & m
            except KeyError:
                raise UnassignedVariable(node.name) from None
        if isinstance(node, Unary):
            v = go(node.operand)
            return (-v) & m if node.op == "-" else (~v) & m
        return _apply(node.op, go(node.left), go(node.right), m)

    return go(e)


_PY_LEVEL = {"|": 1, "^": 2, "&": 3, "+": 4, "-": 4, "*": 5}


def _py_source(e: Expr, names: Mapping[str, str], width: int) -> tuple[str, bool]:
    """Python source for ``e`` plus whether it mentions a variable.

    Variable-free subtrees become non-negative literals (a negative Python
    int cannot be combined with a uint64 array). A left operand at the same
    precedence level is left unparenthesised, which keeps long sums inside
    the parser's nesting limit; Python's precedence order matches ours.
    """
    if isinstance(e, Const):
        return str(e.value & mask_of(width)), False
    if isinstance(e, Var):
        return names[e.name], True
    if isinstance(e, Unary):
        inner, live = _py_source(e.operand, names, width)
        if not live:
            return str(evaluate(e, {}, width)), False
        return f"({e.op}{inner})", True
    left, lv = _py_source(e.left, names, width)
    right, rv = _py_source(e.right, names, width)
    if not (lv or rv):
        return str(evaluate(e, {}, width)), False
    if lv and isinstance(e.left, Binary) and _PY_LEVEL[e.left.op] == _PY_LEVEL[e.op] and left.startswith("("):
        left = left[1:-1]
    return f"({left}{e.op}{right})", True


def compile_expr(e: Expr, var_order: Iterable[str], width: int = 64) -> Callable:
    """Compile ``e`` into a function of positional arguments in ``var_order``.

    The result works on Python ints and on ``numpy.uint64`` arrays alike.
    Every operator used here has the property that the low ``width`` bits of
    its result depend only on the low ``width`` bits of its operands, so a
    single mask at the end is enough (uint64 arrays wrap mod 2**64 natively).
    """
    order = list(var_order)
    missing = [v for v in variables(e) if v not in order]
    if missing:
        raise UnassignedVariable(missing[0])
    names = {v: f"v{i}" for i, v in enumerate(order)}
    params = ", ".join(names[v] for v in order)
    src = f"lambda {params}: ({_py_source(e, names, check_width(width))[0]}) & {mask_of(width)}"
    return eval(src, {"__builtins__": {}})  # noqa: S307 - source is generated from the tree


def evaluate_batch(e: Expr, columns: Mapping[str, np.ndarray], width: int = 64) -> np.ndarray:
    """Vectorised evaluation; ``columns`` maps variable name to a uint64 array."""
    order = list(columns)
    fn = compile_expr(e, order, width)
    if not order:
        n = 1
    else:
        n = len(next(iter(columns.values())))
    args = [np.asarray(columns[v], dtype=np.uint64) for v in order]
    out = fn(*args)
    if not isinstance(out, np.ndarray):
        out = np.full(n, out, dtype=np.uint64)
    return out.astype(np.uint64, copy=False)


# -- rendering ----------------------------------------------------------------

def _const_text(value: int, width: int | None) -> str:
    if width is not None and value > (1 << (width - 1)):
        neg = f"-{(1 << width) - value}"
        if len(neg) <= len(str(value)):
            return neg
    return str(value)


def render(e: Expr, width: int | None = None) -> str:
    """Fully parenthesised text.

    With ``width`` given, constants in the upper half of the word range are
    printed as negative literals when that is no longer (``-1112`` rather
    than ``18446744073709550504``);
    the parser folds a minus sign glued to a literal back into the same word.
    """
    if isinstance(e, Const):
        return _const_text(e.value, width)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        inner = render(e.operand, width)
        if e.op == "-" and isinstance(e.operand, Const):
            # keep Neg(Const) distinct from a folded negative literal
            inner = f"({inner})"
        elif inner.startswith(e.op) or (e.op == "-" and inner.startswith("-")):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    return f"({render(e.left, width)}{e.op}{render(e.right, width)})"


def canonical(e: Expr) -> Expr:
    """Order operands of commutative operators deterministically."""
    if isinstance(e, Unary):
        return Unary(e.op, canonical(e.operand))
    if isinstance(e, Binary):
        left, right = canonical(e.left), canonical(e.right)
        if e.op in COMMUTATIVE_OPS and render(right) < render(left):
            left, right = right, left
        return Binary(e.op, left, right)
    return e


# -- classification -------------------------------------------------------------

_RANK = {MbaClass.LINEAR: 0, MbaClass.SEMILINEAR: 1, MbaClass.NONLINEAR: 2}


def _worst(*classes: MbaClass) -> MbaClass:
    return max(classes, key=_RANK.__getitem__)


def classify(e: Expr, width: int = 64) -> MbaClass:
    """Syntactic class of ``e``.

    Variable-free subtrees count as constants. Inside bitwise operators only
    variables, constants, ``~`` and further bitwise operators may appear; a
    constant there other than 0 or all-ones makes the expression semi-linear.
    Anything else (products of variables, arithmetic under a bitwise
    operator) is nonlinear.
    """
    m = mask_of(check_width(width))

    def bitwise(node: Expr) -> MbaClass:
        if not has_vars(node):
            v = evaluate(node, {}, width)
            return MbaClass.LINEAR if v in (0, m) else MbaClass.SEMILINEAR
        if isinstance(node, Var):
            return MbaClass.LINEAR
        if isinstance(node, Unary) and node.op == "~":
            return bitwise(node.operand)
        if isinstance(node, Binary) and node.op in BITWISE_OPS:
            return _worst(bitwise(node.left), bitwise(node.right))
        return MbaClass.NONLINEAR

    def arith(node: Expr) -> MbaClass:
        if not has_vars(node) or isinstance(node, Var):
            return MbaClass.LINEAR
        if isinstance(node, Unary):
            return arith(node.operand)
        if node.op in BITWISE_OPS:
            return bitwise(node)
        if node.op == "*":
            if not has_vars(node.left):
                return arith(node.right)
            if not has_vars(node.right):
                return arith(node.left)
            return MbaClass.NONLINEAR
        return _worst(arith(node.left), arith(node.right))

    return arith(e)


# -- constant folding -------------------------------------------------------------

def fold_constants(e: Expr, width: int = 64) -> Expr:
    """Evaluate variable-free subtrees and drop neutral elements."""
    m = mask_of(check_width(width))

    def go(node: Expr) -> Expr:
        if isinstance(node, (Var, Const)):
            return Const(node.value & m) if isinstance(node, Const) else node
        if isinstance(node, Unary):
            a = go(node.operand)
            if isinstance(a, Const):
                return Const(evaluate(Unary(node.op, a), {}, width))
            if isinstance(a, Unary) and a.op == node.op:
                return a.operand
            return Unary(node.op, a)
        a, b = go(node.left), go(node.right)
        op = node.op
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(_apply(op, a.value, b.value, m))
        ca = a.value if isinstance(a, Const) else None
        cb = b.value if isinstance(b, Const) else None
        if op == "+":
            if ca == 0:
                return b
            if cb == 0:
                return a
        elif op == "-":
            if cb == 0:
                return a
            if ca == 0:
                return go(Unary("-", b))
        elif op == "*":
            if ca == 0 or cb == 0:
                return Const(0)
            if ca == 1:
                return b
            if cb == 1:
                return a
            if ca is not None and isinstance(b, Binary) and b.op == "*" and isinstance(b.left, Const):
                return go(Binary("*", Const((ca * b.left.value) & m), b.right))
        elif op == "&":
            if ca == 0 or cb == 0:
                return Const(0)
            if ca == m:
                return b
            if cb == m:
                return a
        elif op == "|":
            if ca == m or cb == m:
                return Const(m)
            if ca == 0:
                return b
            if cb == 0:
                return a
        elif op == "^":
            if ca == 0:
                return b
            if cb == 0:
                return a
            if ca == m:
                return go(Unary("~", b))
            if cb == m:
                return go(Unary("~", a))
        return Binary(op, a, b)

    return go(e)
