import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errlens.minilang import (Assign, BinOp, CallStmt, For, MiniLangError,
                              Num, Print, Var, anchor_for, anchor_function,
                              anchor_line, classify_expression,
                              fold_constants, free_variables, parse_program,
                              walk_statements)


def classify(expr_src: str, var: str = "n"):
    prog = parse_program(f"func f(n, m) {{ y = {expr_src}; }}")
    return classify_expression(prog.functions[0].body[0].expr, var)


class TestParsing:
    def test_single_assignment(self):
        prog = parse_program("func f(n) { h = 8 * n; }")
        assert [f.name for f in prog.functions] == ["f"]
        func = prog.functions[0]
        assert func.params == ("n",)
        stmt = func.body[0]
        assert isinstance(stmt, Assign)
        assert stmt.target == "h"
        assert isinstance(stmt.expr, BinOp) and stmt.expr.op == "*"
        assert isinstance(stmt.expr.left, Num) and stmt.expr.left.value == 8
        assert isinstance(stmt.expr.right, Var) and stmt.expr.right.name == "n"

    def test_empty_source_is_empty_program(self):
        assert parse_program("").functions == []
        assert parse_program("  \n# only a comment\n").functions == []

    def test_fixture_program(self, jiong_program):
        names = [f.name for f in jiong_program.functions]
        assert names == ["draw_jiong", "main"]
        body = jiong_program.function("draw_jiong").body
        assert isinstance(body[0], Assign)
        loops = [s for s in walk_statements(body) if isinstance(s, For)]
        assert loops, "fixture has a for loop"

    def test_statement_spans_stay_inside_source(self, jiong_program):
        lines = jiong_program.source.splitlines()
        for func in jiong_program.functions:
            for stmt in walk_statements(func.body):
                sp = stmt.span
                assert 1 <= sp.line <= sp.end_line <= len(lines)
                assert sp.column >= 1
                assert sp.end_column <= len(lines[sp.end_line - 1]) + 1

    def test_source_map_covers_every_statement_and_function(self, jiong_program):
        smap = jiong_program.source_map()
        total = sum(len(list(walk_statements(f.body)))
                    for f in jiong_program.functions)
        assert len(smap) == total + len(jiong_program.functions)
        for anchor in smap:
            assert anchor_function(anchor) in ("draw_jiong", "main")

    def test_nested_blocks(self):
        prog = parse_program(
            "func g(n) { for i = 1 to n { if (i) { print(i); } else "
            "{ while (i) { call(i); } } } }")
        stmts = list(walk_statements(prog.functions[0].body))
        kinds = {type(s).__name__ for s in stmts}
        assert {"For", "If", "Print", "While", "CallStmt"} <= kinds

    def test_call_statement(self):
        prog = parse_program("func m() { helper(1, 2); }")
        stmt = prog.functions[0].body[0]
        assert isinstance(stmt, CallStmt)
        assert stmt.call.name == "helper"
        assert len(stmt.call.args) == 2


class TestParseErrors:
    def test_malformed_header(self):
        with pytest.raises(MiniLangError) as exc:
            parse_program("func f( {")
        assert exc.value.line == 1
        assert exc.value.column == 9

    def test_duplicate_function_name(self):
        with pytest.raises(MiniLangError, match="duplicate function"):
            parse_program("func a() { }\nfunc a() { }")

    def test_unterminated_string(self):
        with pytest.raises(MiniLangError, match="unterminated"):
            parse_program('func a() { x = "oops; }')

    def test_missing_semicolon(self):
        with pytest.raises(MiniLangError):
            parse_program("func a() { x = 1 }")

    def test_error_positions_are_one_based(self):
        for bad in ["func", "func f() { x = ; }", "func f() { @ }"]:
            with pytest.raises(MiniLangError) as exc:
                parse_program(bad)
            assert exc.value.line >= 1 and exc.value.column >= 1


class TestAnchors:
    def test_anchor_round_trip(self):
        prog = parse_program("func f(n) { h = 8 * n; }")
        stmt = prog.functions[0].body[0]
        anchor = anchor_for("f", stmt)
        assert anchor == "f@1:13"
        assert anchor_function(anchor) == "f"
        assert anchor_line(anchor) == 1

    def test_bare_name_has_no_line(self):
        assert anchor_function("draw_jiong") == "draw_jiong"
        assert anchor_line("draw_jiong") is None

    def test_fixture_assignment_anchor(self, jiong_program):
        stmt = jiong_program.function("draw_jiong").body[0]
        assert anchor_for("draw_jiong", stmt) == "draw_jiong@4:3"


class TestClassification:
    @pytest.mark.parametrize("src,family,coeffs", [
        ("8 * n", "linear", {"a": 8.0, "b": 0.0}),
        ("n / 2", "linear", {"a": 0.5, "b": 0.0}),
        ("10 - n", "linear", {"a": -1.0, "b": 10.0}),
        ("n + n + n", "linear", {"a": 3.0, "b": 0.0}),
        ("(4 + 4) * n", "linear", {"a": 8.0, "b": 0.0}),
        ("5 * n + 1 - n", "linear", {"a": 4.0, "b": 1.0}),
        ("2 * n ** 2", "polynomial", {"degree": 2, "a": 2.0, "b": 0.0}),
        ("n * n", "polynomial", {"degree": 2, "a": 1.0, "b": 0.0}),
        ("n ** 2 * 3 + 5", "polynomial", {"degree": 2, "a": 3.0, "b": 5.0}),
        ("7", "constant", {"value": 7.0}),
        ("2 ** 3 ** 2", "constant", {"value": 512.0}),
        ("n - n", "constant", {"value": 0.0}),
    ])
    def test_families(self, src, family, coeffs):
        form = classify(src)
        assert form.family == family
        assert form.coefficients == coeffs

    @pytest.mark.parametrize("src,a,d", [
        ("2 ** n", 1.0, 2.0),
        ("3 * 2 ** n", 3.0, 2.0),
    ])
    def test_exponential(self, src, a, d):
        form = classify(src)
        assert form.family == "exponential"
        assert form.coefficients == {"a": a, "d": d}
        assert form.variable_operand == "exponent"

    @pytest.mark.parametrize("src", ["n * m", "2 ** (n + 1)", "g(n)"])
    def test_unclassifiable_is_other(self, src):
        assert classify(src).family == "other"

    def test_total_on_other_variable(self):
        assert classify("8 * n", var="m").family == "other"

    def test_label_renders_integers_plainly(self):
        assert classify("8 * n").label() == "linear{a=8, b=0}"
        assert classify("2 * n ** 2").label() == "polynomial{degree=2, a=2}"

    def test_to_json_shape(self):
        js = classify("2 ** n").to_json()
        assert js == {"variable": "n", "family": "exponential",
                      "coefficients": {"a": 1.0, "d": 2.0},
                      "variable_operand": "exponent"}


class TestFolding:
    def test_fold_reduces_literal_subtrees(self):
        prog = parse_program("func f(n) { y = (2 + 3) * n; }")
        folded = fold_constants(prog.functions[0].body[0].expr)
        assert isinstance(folded, BinOp)
        assert isinstance(folded.left, Num) and folded.left.value == 5.0

    def test_free_variables(self):
        prog = parse_program("func f(n) { y = n * m + k; }")
        assert free_variables(prog.functions[0].body[0].expr) == {"n", "m", "k"}

    def test_division_by_zero_is_left_unfolded(self):
        form = classify("n + 1 / 0")
        assert form.family == "other"


def _rewrite(src: str, rng: random.Random) -> str:
    """Meaning-preserving surface tweaks: spacing and commuted products."""
    out = src
    if rng.random() < 0.5:
        out = out.replace(" ", "  ")
    if rng.random() < 0.5:
        out = f"({out})"
    return out


@settings(max_examples=100)
@given(st.integers(1, 9), st.integers(0, 9), st.integers(0, 10 ** 6))
def test_linear_forms_recovered_regardless_of_spelling(a, b, seed):
    rng = random.Random(seed)
    spellings = [f"{a} * n + {b}", f"n * {a} + {b}", f"{b} + {a} * n",
                 f"{b} + n * {a}"]
    src = _rewrite(rng.choice(spellings), rng)
    form = classify(src)
    assert form.family == "linear"
    assert form.coefficients["a"] == pytest.approx(a)
    assert form.coefficients["b"] == pytest.approx(b)


@settings(max_examples=60)
@given(st.integers(2, 5), st.integers(1, 9))
def test_power_towers_fold_to_constants(base, exp):
    form = classify(f"{base} ** {exp}")
    assert form.family == "constant"
    assert form.coefficients["value"] == pytest.approx(float(base ** exp))
