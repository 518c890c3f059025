"""Shared helpers: an independent reference evaluator and random expression builders.

The reference evaluator below deliberately does not reuse the package's
evaluator or its compiled numpy path, so it can serve as an oracle.
"""

from __future__ import annotations

import itertools
import random

import pytest

from mbasimp.expr import Binary, Const, Expr, Unary, Var


def ref_eval(e: Expr, env: dict[str, int], width: int) -> int:
    m = (1 << width) - 1
    if isinstance(e, Const):
        return e.value & m
    if isinstance(e, Var):
        return env[e.name] & m
    if isinstance(e, Unary):
        v = ref_eval(e.operand, env, width)
        return (m - v) if e.op == "~" else (-v) % (1 << width)
    a = ref_eval(e.left, env, width)
    b = ref_eval(e.right, env, width)
    return {
        "+": lambda: (a + b) % (1 << width),
        "-": lambda: (a - b) % (1 << width),
        "*": lambda: (a * b) % (1 << width),
        "&": lambda: a & b,
        "|": lambda: a | b,
        "^": lambda: a ^ b,
    }[e.op]()


def all_assignments(names, width):
    for vals in itertools.product(range(1 << width), repeat=len(names)):
        yield dict(zip(names, vals))


def ref_equal_exhaustive(a: Expr, b: Expr, names, width) -> bool:
    return all(ref_eval(a, env, width) == ref_eval(b, env, width) for env in all_assignments(names, width))


def ref_equal_random(a: Expr, b: Expr, names, width, samples=10_000, seed=0) -> bool:
    rng = random.Random(seed)
    for _ in range(samples):
        env = {n: rng.getrandbits(width) for n in names}
        if ref_eval(a, env, width) != ref_eval(b, env, width):
            return False
    return True


NAMES = ("x", "y", "z", "w")


def random_bitwise(rng: random.Random, names, width: int, depth: int, masked: bool) -> Expr:
    """Random pure-bitwise tree; ``masked`` allows nontrivial constants."""
    if depth == 0 or rng.random() < 0.3:
        if masked and rng.random() < 0.3:
            return Const(rng.getrandbits(width))
        return Var(rng.choice(names))
    if rng.random() < 0.2:
        return Unary("~", random_bitwise(rng, names, width, depth - 1, masked))
    op = rng.choice("&|^")
    return Binary(op, random_bitwise(rng, names, width, depth - 1, masked),
                  random_bitwise(rng, names, width, depth - 1, masked))


def random_semilinear(rng: random.Random, t: int, width: int, masked: bool = True) -> Expr:
    """``k + sum(c_i * b_i)`` with every variable among the first ``t`` names appearing."""
    names = NAMES[:t]
    terms = [random_bitwise(rng, names, width, 2, masked) for _ in range(rng.randint(1, 3))]
    # make sure all t variables occur so the configuration really has t variables
    for n in names:
        terms.append(Binary("&", Const(rng.getrandbits(width)), Var(n)) if masked else Var(n))
    e: Expr = Const(rng.getrandbits(width) if rng.random() < 0.5 else 0)
    for b in terms:
        c = rng.choice([1, -1, 2, 3, rng.getrandbits(width)]) % (1 << width)
        e = Binary("+", e, b if c == 1 else Binary("*", Const(c), b))
    return e


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
