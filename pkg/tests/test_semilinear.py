import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbasimp.boolfunc import BoolFunc
from mbasimp.expr import Const, canonical, fold_constants, node_count, variables
from mbasimp.oracle import exhaustive_equiv, matrix_equiv, random_equiv
from mbasimp.parser import parse
from mbasimp.semilinear import (
    MaskedSum,
    MaskedTerm,
    can_change_coefficient_to,
    can_change_mask_to,
    cost,
    merge_terms,
    per_bit_solution,
    recover_structure,
    simplify,
    substitute_and_solve_1bit,
    to_expr,
)
from mbasimp.signature import NotSemiLinear, adjusted_matrix

from conftest import random_semilinear, ref_equal_exhaustive, ref_equal_random

M64 = (1 << 64) - 1
X = BoolFunc(0b10, 1)


def same(expr, text, width=64):
    return canonical(fold_constants(expr, width)) == canonical(fold_constants(parse(text, width), width))


def msum(constant, terms, width=64, names=("x",)):
    m = (1 << width) - 1
    return MaskedSum(constant & m, tuple(MaskedTerm(c & m, k & m, f) for c, k, f in terms), names, width)


class TestModularChecks:
    def test_coefficient_examples(self):
        assert can_change_coefficient_to(64, 192, 2, 8)
        assert not can_change_coefficient_to(64, 0, 2, 8)
        assert can_change_coefficient_to(12345, 12345, 0xF0F0, 64)

    def test_mask_examples(self):
        assert can_change_mask_to(64, 130, 2, 8)
        assert not can_change_mask_to(1, 130, 2, 8)
        assert can_change_mask_to(7, 99, 99, 64)

    @settings(max_examples=300, deadline=None)
    @given(width=st.integers(1, 16), data=st.data())
    def test_coefficient_check_holds_for_all_values(self, width, data):
        m = (1 << width) - 1
        old, new, mask = (data.draw(st.integers(0, m)) for _ in range(3))
        if not can_change_coefficient_to(old, new, mask, width):
            # a witness bit must exist
            assert any((old * (mask & (1 << i))) & m != (new * (mask & (1 << i))) & m for i in range(width))
            return
        for v in data.draw(st.lists(st.integers(0, m), min_size=1, max_size=20)):
            assert (old * (v & mask)) & m == (new * (v & mask)) & m

    @settings(max_examples=300, deadline=None)
    @given(width=st.integers(1, 16), data=st.data())
    def test_mask_check_holds_for_all_values(self, width, data):
        m = (1 << width) - 1
        coeff, a, b = (data.draw(st.integers(0, m)) for _ in range(3))
        ok = can_change_mask_to(coeff, a, b, width)
        per_bit = all((coeff * (a & (1 << i))) & m == (coeff * (b & (1 << i))) & m for i in range(width))
        assert ok == per_bit
        if ok:
            for v in data.draw(st.lists(st.integers(0, m), min_size=1, max_size=20)):
                assert (coeff * (v & a)) & m == (coeff * (v & b)) & m


class TestPerBit:
    def test_scaled_masked_sum(self):
        e = parse("2*(x&5)+2*(y&3)", 3)
        s = per_bit_solution(adjusted_matrix(e, 3))
        assert ref_equal_exhaustive(to_expr(s), e, ["x", "y"], 3)
        # the bit-2 x term has coefficient 0 modulo 2 and must be gone
        assert all(t.mask & 4 == 0 or t.func.table != 0b1010 for t in s.terms)

    def test_zero(self):
        s = per_bit_solution(adjusted_matrix(Const(0), 8, ["x"]))
        assert s.terms == () and s.constant == 0

    def test_masked_sum_coalesces(self):
        e = parse("(x&5)+(y&3)", 3)
        s = per_bit_solution(adjusted_matrix(e, 3))
        assert exhaustive_equiv(to_expr(s), e, 3).equivalent
        assert len(s.terms) == 2


class TestMerge:
    def test_equal_coefficients(self):
        out = merge_terms(msum(0, [(64, 130, X), (64, 192, X)], 8))
        assert same(to_expr(out), "64*(194&x)", 8)

    def test_three_term_split(self):
        s = msum(0, [(1, 529682, X), (7676756576, 23429673, X), (7676756577, 24772, X)])
        assert same(to_expr(merge_terms(s)), "(554454&x)+7676756576*(23454445&x)")

    def test_zero_coefficient_dropped(self):
        out = merge_terms(msum(0, [(0, 5, X), (3, 7, X)], 8))
        assert out.terms == (MaskedTerm(3, 7, X),)

    def test_annihilated_coefficient_dropped(self):
        # 128 * (2 & x) is zero at w=8
        out = merge_terms(msum(0, [(128, 2, X), (3, 7, X)], 8))
        assert len(out.terms) == 1


class TestRecover:
    def test_xor(self):
        s = msum(980, [(-10, 98, X), (10, -99, X)])
        assert same(to_expr(recover_structure(s)), "10*(98^x)")

    def test_single_mask(self):
        s = msum(0, [(7, 1111, X), (2, -1112, X)])
        assert same(to_expr(recover_structure(s)), "5*(1111&x)+2*x")

    def test_single_term_unchanged(self):
        s = msum(0, [(3, 77, X)])
        assert recover_structure(s) == s.sorted()


class TestSubstitution:
    def test_disjoint_masks(self):
        e = parse("((1111&(x&~y))|(2222&(~x&y)))|(3327&(x&y))")
        assert same(substitute_and_solve_1bit(e, 64, ["x", "y"]), "(x&1111)|(y&2222)")

    def test_single_mask(self):
        out = substitute_and_solve_1bit(msum(0, [(1, 77, X)]))
        assert same(out, "77&x")

    def test_derived_mask_uses_two_variables(self):
        from mbasimp.semilinear import _relate

        base, derived = _relate([0xF0, 0x0F, 0xFF], 64)
        assert base == [0x0F, 0xF0] and derived[0xFF][0] in "|^"

    def test_budget(self):
        text = "+".join(f"({c}&x)*{i + 2}" for i, c in enumerate([3, 5, 9, 17, 33, 65, 129]))
        assert substitute_and_solve_1bit(parse(text), 64, ["x"]) is None


class TestCost:
    def test_examples(self):
        assert cost(parse("x")) < cost(parse("(x&1111)+(x&-1112)"))
        assert cost(parse("10*(98^x)")) < cost(parse("980+(-10*(98&x))+(10*(-99&x))"))
        e = parse("3*(x&5)+y")
        assert cost(e) == cost(parse("3*(x&5)+y"))

    def test_components(self):
        assert cost(parse("(x&5)+(y&5)+(z&6)")) == (11, 3, 2)


class TestSimplify:
    @pytest.mark.parametrize("text,width,expected", [
        ("((22079729|(5368709120&x))+(5368709207^(5368709120&x)))-5390788936", 64, "0"),
        ("(x&1111)+(x&-1112)", 64, "x"),
        ("x+y", 64, "x+y"),
        ("980+(-10*(98&x))+(10*(-99&x))", 64, "10*(98^x)"),
        ("7*(1111&x)+2*(-1112&x)", 64, "5*(1111&x)+2*x"),
        ("((1111&(x&~y))|(2222&(~x&y)))|(3327&(x&y))", 64, "(x&1111)|(y&2222)"),
        ("(529682&x)+7676756576*(23429673&x)+7676756577*(24772&x)", 64, "(554454&x)+7676756576*(23454445&x)"),
    ])
    def test_exact(self, text, width, expected):
        assert same(simplify(parse(text, width), width), expected, width)

    def test_scaled_masked_sum(self):
        e = parse("2*(x&5)+2*(y&3)", 3)
        out = simplify(e, 3)
        assert node_count(out) <= 11
        assert exhaustive_equiv(e, out, 3).equivalent

    def test_rejects_nonlinear(self):
        with pytest.raises(NotSemiLinear):
            simplify(parse("x*y"))

    def test_drops_dead_variable(self):
        assert "y" not in variables(simplify(parse("(x&5)+(y&0)"), 8))

    def test_not_worse_than_per_bit(self, rng):
        for _ in range(40):
            e = random_semilinear(rng, 2, 16)
            out = simplify(e, 16)
            base = to_expr(per_bit_solution(adjusted_matrix(e, 16)))
            assert cost(out, 16) <= cost(base, 16)


@pytest.mark.parametrize("width", [4, 64])
def test_every_stage_preserves_semantics(width):
    rng = random.Random(width)
    names = ["x", "y"]
    for _ in range(60):
        e = random_semilinear(rng, 2, width)
        adj = adjusted_matrix(e, width, names)
        stages = [per_bit_solution(adj)]
        stages.append(merge_terms(stages[-1]))
        stages.append(recover_structure(stages[-1]))
        exprs = [to_expr(s) for s in stages]
        sub = substitute_and_solve_1bit(stages[-1])
        if sub is not None:
            exprs.append(sub)
        exprs.append(simplify(e, width))
        for out in exprs:
            if width == 4:
                assert ref_equal_exhaustive(out, e, names, 4)
            else:
                assert ref_equal_random(out, e, names, 64, samples=2000)


def test_merge_and_recover_are_fixpoint_stable():
    rng = random.Random(77)
    for _ in range(60):
        e = random_semilinear(rng, 2, 16)
        s = per_bit_solution(adjusted_matrix(e, 16))
        once = merge_terms(s)
        assert merge_terms(once) == once
        rec = recover_structure(once)
        assert recover_structure(rec) == rec


def test_outputs_match_input_matrix():
    rng = random.Random(5)
    for _ in range(100):
        t = rng.randint(1, 3)
        e = random_semilinear(rng, t, 64)
        out = simplify(e)
        assert matrix_equiv(e, out, 64, variables(e)).equivalent
        assert random_equiv(e, out, 64, samples=500).equivalent
