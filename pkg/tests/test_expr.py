import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracbvp.errors import ExprDomainError, ExprSyntaxError
from fracbvp.expr import BinOp, Call, Neg, Num, Var, compile_expr, evaluate, parse_expr, to_text


class TestParse:
    def test_power_node(self):
        tree = parse_expr("u^2", "u")
        assert tree == BinOp("^", Var("u"), Num(2.0))
        assert evaluate(tree, 3.0) == 9.0

    def test_call(self):
        tree = parse_expr("sqrt(u)", "u")
        assert isinstance(tree, Call) and evaluate(tree, 4.0) == 2.0

    def test_precedence(self):
        assert evaluate(parse_expr("1 + 2*t^2", "t"), 2.0) == 9.0

    def test_right_associative(self):
        assert evaluate(parse_expr("2^3^2", "u"), 0.0) == 512.0

    def test_unary_below_power(self):
        assert evaluate(parse_expr("-u^2", "u"), 3.0) == -9.0
        assert evaluate(parse_expr("2^-1", "u"), 0.0) == 0.5

    def test_left_associative(self):
        assert evaluate(parse_expr("8 / 4 / 2", "u"), 0.0) == 1.0
        assert evaluate(parse_expr("1 - 2 - 3", "u"), 0.0) == -4.0

    def test_functions(self):
        tree = parse_expr("exp(ln(u)) + abs(-u)", "u")
        assert evaluate(tree, 2.5) == pytest.approx(5.0)

    def test_scientific(self):
        assert evaluate(parse_expr("1.5e2 * .5", "u"), 0.0) == 75.0

    def test_vectorized(self):
        np.testing.assert_array_equal(evaluate(parse_expr("u*u + 1", "u"), np.arange(3.0)), [1, 2, 5])


class TestErrors:
    @pytest.mark.parametrize(
        "text, offset",
        [("u+", 2), ("(u", 2), ("u)", 1), ("2 u", 2), ("sqrt u", 5), ("u ** 2", 3), ("", 0), ("  ", 0)],
    )
    def test_offsets(self, text, offset):
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr(text, "u")
        assert info.value.offset == offset
        assert info.value.expected

    def test_byte_offset(self):
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("ü + x", "u")
        assert info.value.offset == 0
        with pytest.raises(ExprSyntaxError) as info:
            parse_expr("u + é", "u")
        assert info.value.offset == 4

    @pytest.mark.parametrize("text", ["t + 1", "u * x", "sin(u)", "__import__", "uu"])
    def test_foreign_variables(self, text):
        with pytest.raises(ExprSyntaxError, match="unknown identifier"):
            parse_expr(text, "u")

    def test_overflow_literal(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("1e999", "u")

    @pytest.mark.parametrize(
        "text, value, tag",
        [("sqrt(u)", -1.0, "sqrt"), ("ln(u)", 0.0, "ln"), ("1/u", 0.0, "div"), ("u^0.5", -2.0, "pow"), ("u^-1", 0.0, "pow")],
    )
    def test_domain(self, text, value, tag):
        with pytest.raises(ExprDomainError) as info:
            evaluate(parse_expr(text, "u"), value)
        assert info.value.tag == tag

    def test_integer_power_of_negative(self):
        assert evaluate(parse_expr("u^3", "u"), -2.0) == -8.0

    def test_compiled_names_point(self):
        f = compile_expr("sqrt(u - 1)", "u")
        with pytest.raises(ExprDomainError, match="u = 0.5"):
            f(np.array([2.0, 0.5]))


names = st.sampled_from(["u", "2", "0.5", "3.25", "1e-3"])


def trees(depth=3):
    leaf = names.map(lambda s: Var("u") if s == "u" else Num(float(s)))
    return st.recursive(
        leaf,
        lambda sub: st.one_of(
            st.builds(Neg, sub),
            st.builds(BinOp, st.sampled_from("+-*/^"), sub, sub),
            st.builds(Call, st.sampled_from(["sqrt", "exp", "ln", "abs"]), sub),
        ),
        max_leaves=8,
    )


class TestRoundTrip:
    @given(trees())
    def test_print_parse(self, tree):
        assert parse_expr(to_text(tree), "u") == tree

    @given(st.floats(0.1, 10.0))
    def test_matches_python(self, x):
        text = "(1 + 2*u)^2 / sqrt(u) - ln(u + 1)"
        ref = (1 + 2 * x) ** 2 / math.sqrt(x) - math.log(x + 1)
        assert evaluate(parse_expr(text, "u"), x) == pytest.approx(ref, rel=1e-14)
