import pytest

from mbasimp.expr import Binary, Const, Unary, Var, evaluate
from mbasimp.parser import ParseError, parse

INTRO = "((22079729|(5368709120&x))+(5368709207^(5368709120&x)))-5390788936"


def test_intro_expression_is_zero_at_origin():
    assert evaluate(parse(INTRO), {"x": 0}, 64) == 0


def test_negative_mask_folds_to_word():
    e = parse("(x&1111)+(x&-1112)")
    assert isinstance(e, Binary) and e.op == "+"
    assert e.left.op == "&" and e.right.op == "&"
    assert Const((1 << 64) - 1112) in (e.right.left, e.right.right)


def test_negative_literal_respects_width():
    assert parse("-1", 8) == Const(255)


@pytest.mark.parametrize("text,pos", [("x+*y", 2), ("(x+y", 4), ("x+y)", 3), ("x $ y", 2), ("", 0)])
def test_errors_carry_offset(text, pos):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.position == pos


def test_precedence_and_binds_looser_than_plus():
    assert parse("1&x+y") == Binary("&", Const(1), Binary("+", Var("x"), Var("y")))


def test_precedence_xor_tighter_than_or():
    assert parse("x^y|z") == Binary("|", Binary("^", Var("x"), Var("y")), Var("z"))


def test_precedence_and_tighter_than_xor():
    assert parse("x^y&z") == Binary("^", Var("x"), Binary("&", Var("y"), Var("z")))


def test_mul_tighter_than_plus_and_left_assoc():
    assert parse("a-b-2*c") == Binary("-", Binary("-", Var("a"), Var("b")), Binary("*", Const(2), Var("c")))


def test_unary_ops():
    assert parse("~-x") == Unary("~", Unary("-", Var("x")))


def test_hex_and_identifiers():
    assert parse("0xff&_v1", 64) == Binary("&", Const(255), Var("_v1"))


def test_literal_reduced_to_width():
    assert parse("257", 8) == Const(1)
