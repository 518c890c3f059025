import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbasimp.expr import (
    Binary,
    Const,
    MbaClass,
    UnassignedVariable,
    Unary,
    Var,
    classify,
    evaluate,
    fold_constants,
    node_count,
    render,
)
from mbasimp.parser import parse

from conftest import random_semilinear, ref_eval

M64 = (1 << 64) - 1


class TestEvaluate:
    def test_sum_at_corner(self):
        assert evaluate(parse("x+y"), {"x": 1, "y": 1}, 64) == 2

    def test_not_wraps_to_all_ones(self):
        assert evaluate(parse("~(x+y)"), {"x": 0, "y": 0}, 64) == M64

    def test_masked_sum_at_width3(self):
        assert evaluate(parse("(x&5)+(y&3)", 3), {"x": 4, "y": 4}, 3) == 4

    def test_neg_is_twos_complement(self):
        assert evaluate(Unary("-", Var("x")), {"x": 3}, 8) == 253

    def test_unassigned_names_variable(self):
        with pytest.raises(UnassignedVariable) as err:
            evaluate(parse("x+q"), {"x": 1}, 64)
        assert "q" in str(err.value)


class TestNodeCount:
    @pytest.mark.parametrize("text,count", [("x", 1), ("x+y", 3), ("2*(x&5)+2*(y&3)", 11), ("~(x|y)", 4)])
    def test_counts(self, text, count):
        assert node_count(parse(text)) == count


class TestRender:
    def test_binary(self):
        assert render(Binary("+", Var("x"), Var("y"))) == "(x+y)"

    def test_xor_with_constant(self):
        assert render(Binary("*", Const(10), Binary("^", Const(98), Var("x")))) == "(10*(98^x))"

    def test_zero(self):
        assert render(Const(0)) == "0"

    def test_negative_literal_only_when_shorter(self):
        assert render(Const((1 << 64) - 1112), 64) == "-1112"
        assert render(Const(200), 8) == "-56"
        assert render(Const(130), 8) == "130"


class TestClassify:
    @pytest.mark.parametrize("text,cls", [
        ("x+2*y", MbaClass.LINEAR),
        ("(x&5)+(y&3)", MbaClass.SEMILINEAR),
        ("x*y", MbaClass.NONLINEAR),
        ("3*(x&-1)+~y", MbaClass.LINEAR),
        ("(x&y)*(x|y)", MbaClass.NONLINEAR),
        ("(x+1)&y", MbaClass.NONLINEAR),
    ])
    def test_classes(self, text, cls):
        assert classify(parse(text)) is cls


class TestFold:
    def test_or_of_constants(self):
        assert fold_constants(parse("(529682|24772)")) == Const(554454)
        assert fold_constants(parse("(23429673|24772)")) == Const(23454445)

    def test_zero_plus(self):
        assert fold_constants(parse("0+x")) == Var("x")

    def test_idempotent_and_shrinking(self, rng):
        for _ in range(300):
            e = random_semilinear(rng, rng.randint(1, 3), 8)
            f = fold_constants(e, 8)
            assert fold_constants(f, 8) == f
            assert node_count(f) <= node_count(e)

    def test_semantics_exhaustive_w4(self, rng):
        for _ in range(100):
            e = random_semilinear(rng, 2, 4)
            f = fold_constants(e, 4)
            for x in range(16):
                for y in range(16):
                    env = {"x": x, "y": y}
                    assert ref_eval(f, env, 4) == ref_eval(e, env, 4)

    def test_semantics_random_w64(self, rng):
        for _ in range(100):
            e = random_semilinear(rng, 3, 64)
            f = fold_constants(e, 64)
            for _ in range(50):
                env = {n: rng.getrandbits(64) for n in "xyz"}
                assert evaluate(f, env, 64) == ref_eval(e, env, 64)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.integers(1, 4), width=st.sampled_from([1, 4, 8, 64]))
def test_round_trip_and_class_stability(seed, t, width):
    e = random_semilinear(random.Random(seed), t, width)
    text = render(e)
    back = parse(text, width)
    assert back == e
    assert classify(back, width) is classify(e, width)
    assert parse(render(e, width), width) == e


def test_compiled_evaluator_handles_complemented_constants():
    import numpy as np
    from mbasimp.expr import compile_expr

    e = parse("(~8&x)+-(3)*x", 4)
    fn = compile_expr(e, ["x"], 4)
    xs = np.arange(16, dtype=np.uint64)
    assert [int(v) for v in fn(xs)] == [ref_eval(e, {"x": int(x)}, 4) for x in xs]


def test_compiled_evaluator_handles_long_left_deep_sums():
    from mbasimp.oracle import random_equiv

    e = Var("x")
    for k in range(600):
        e = Binary("+" if k % 3 else "-", e, Binary("&", Const(k + 1), Var("y")))
    assert random_equiv(e, e, 64, samples=10).equivalent
    env = {"x": 12345, "y": 2**64 - 7}
    assert evaluate(e, env, 64) == ref_eval(e, env, 64)
