"""
Unit tests for chc_parser_module.py: lexer, parser, canonical printer.
"""

import logging
import random
from fractions import Fraction

import pytest

from chc_model_module import FALSE, INT, App, Benchmark, Clause, Num, PredApp, PredicateDecl, Var
from chc_parser_module import (
    TokenKind, alpha_equivalent, alpha_rename, format_symbol, parse_benchmark, print_canonical, read_benchmark_file,
    tokenize,
)

random.seed(20190406)


def parse_ok(text):
    benchmark, diagnostics = parse_benchmark(text)
    assert benchmark is not None, [str(d) for d in diagnostics]
    return benchmark, diagnostics


def errors_of(text):
    benchmark, diagnostics = parse_benchmark(text)
    assert benchmark is None
    return [d for d in diagnostics if d.severity == "error"]


def test_tokenize_positions():
    tokens = tokenize("(assert\n  ; comment\n  |a b| 12 3.50 :named)")
    kinds = [t.kind for t in tokens]
    assert kinds == [TokenKind.LPAREN, TokenKind.SYMBOL, TokenKind.SYMBOL, TokenKind.NUMERAL,
                     TokenKind.DECIMAL, TokenKind.KEYWORD, TokenKind.RPAREN, TokenKind.EOF]
    quoted = tokens[2]
    assert (quoted.text, quoted.line, quoted.col) == ("a b", 3, 3)
    assert (tokens[4].text, tokens[4].col) == ("3.50", 12)


def test_parse_sample_benchmarks(benchmarks):
    for name, text in benchmarks.items():
        benchmark, diagnostics = parse_ok(text)
        assert not [d for d in diagnostics if d.severity == "error"], name
        assert benchmark.logic_name == "HORN"
    three, _ = parse_ok(benchmarks["three_queries"])
    assert len(three.clauses) == 5
    assert len(three.queries()) == 3


def test_body_partition():
    benchmark, _ = parse_ok("""
(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (forall ((x Int) (y Int)) (=> (and (inv x) (< x 10) (= y (+ x 1))) (inv y))))
(check-sat)
""")
    clause = benchmark.clauses[0]
    assert clause.vars == (("x", INT), ("y", INT))
    assert clause.body_atoms == (PredApp("inv", (Var("x"),)),)
    assert clause.constraint == App("and", (App("<", (Var("x"), Num(Fraction(10)))),
                                            App("=", (Var("y"), App("+", (Var("x"), Num(Fraction(1))))))))
    assert clause.head == PredApp("inv", (Var("y"),))


def test_let_and_named_annotations_are_expanded():
    benchmark, _ = parse_ok("""
(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (! (forall ((x Int)) (let ((y (+ x 1))) (=> (inv x) (inv y)))) :named step))
(check-sat)
""")
    clause = benchmark.clauses[0]
    assert clause.head == PredApp("inv", (App("+", (Var("x"), Num(Fraction(1)))),))


def test_quoted_symbols_and_real_division():
    benchmark, _ = parse_ok("""
(set-logic HORN)
(declare-fun |inv state| (Real) Bool)
(assert (forall ((x Real)) (=> (= x (/ 1.0 3.0)) (|inv state| x))))
(assert (forall ((x Real)) (=> (and (|inv state| x) (< x 0.0)) false)))
(check-sat)
""")
    assert benchmark.decls[0].name == "inv state"
    assert "(declare-fun |inv state| (Real) Bool)" in print_canonical(benchmark)


def test_ignored_commands_warn(caplog):
    caplog.set_level(logging.DEBUG, logger="chc_parser_module")
    benchmark, diagnostics = parse_ok("""
(set-info :status sat)
(set-option :produce-models true)
(set-logic HORN)
(declare-fun p () Bool)
(assert (=> p false))
(check-sat)
(get-model)
(exit)
""")
    warnings = [d.message for d in diagnostics if d.severity == "warning"]
    assert "ignoring command set-info" in warnings
    assert "ignoring command get-model" in warnings
    assert benchmark.clauses[0].head == FALSE
    assert benchmark.positions == ((6, 1),)
    assert any("ignoring set-option at 3:1" in r.getMessage() for r in caplog.records)


def test_missing_check_sat_is_a_warning():
    _, diagnostics = parse_ok("(set-logic HORN)\n(declare-fun p () Bool)\n(assert (=> p false))\n")
    assert [d.message for d in diagnostics] == ["missing (check-sat)"]


@pytest.mark.parametrize("body, message", [
    ("(exists ((y Int)) (=> (inv y) (inv x)))", "existential"),
    ("(not (and (inv x) (> x 1)))", "run normalizer first"),
    ("(=> (inv x) (> x 1))", "head is neither"),
    ("(=> (and (inv x) (or (inv x) (> x 0))) false)", "nested inside a constraint"),
    ("(=> (inv x x) false)", "expects 1 arguments"),
    ("(=> (inv z) false)", "unbound variable z"),
])
def test_rejected_clauses(body, message):
    errors = errors_of(f"""(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (forall ((x Int)) {body}))
(check-sat)
""")
    assert len(errors) == 1
    assert message in errors[0].message
    assert errors[0].line == 3


@pytest.mark.parametrize("text, message", [
    ("(set-logic HORN)\n(assert |open", "unterminated quoted symbol"),
    ("(set-logic HORN))", "unexpected ')'"),
    ("(set-logic HORN)\n(declare-fun p () Bool", "missing ')'"),
    ("(set-logic HORN)\n(define-fun f () Int 1)", "unsupported command define-fun"),
    ("(set-logic HORN)\n(declare-fun p (String) Bool)", "unsupported sort String"),
    ("(set-logic HORN)\n(declare-fun p (Int) Int)", "result sort Bool"),
])
def test_malformed_inputs(text, message):
    errors = errors_of(text)
    assert any(message in e.message for e in errors)


def test_read_benchmark_file(tmp_path):
    path = tmp_path / "bad.smt2"
    path.write_bytes(b"(set-logic HORN)\xff\xfe")
    benchmark, diagnostics = read_benchmark_file(str(path))
    assert benchmark is None
    assert "invalid UTF-8" in diagnostics[0].message
    assert (diagnostics[0].line, diagnostics[0].col) == (1, 17)
    with pytest.raises(FileNotFoundError):
        read_benchmark_file(str(tmp_path / "missing.smt2"))


def test_canonical_print_is_a_fixpoint(benchmarks):
    for name, text in benchmarks.items():
        benchmark, _ = parse_ok(text)
        printed = print_canonical(benchmark)
        reparsed, diagnostics = parse_benchmark(printed)
        assert reparsed is not None, name
        assert not diagnostics, name
        assert print_canonical(reparsed) == printed, name


def test_bound_variable_names_do_not_matter():
    a, _ = parse_ok("""(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (forall ((x Int)) (=> (= x 0) (inv x))))
(assert (forall ((x Int)) (=> (and (inv x) (> x 5)) false)))
(check-sat)""")
    b, _ = parse_ok("""; renamed and reformatted
(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (forall ((counter Int))
    (=> (= counter 0)
        (inv counter))))
(assert (forall ((k Int)) (=> (and (inv k) (> k 5)) false)))
(check-sat)""")
    assert alpha_equivalent(a, b)
    assert "(assert (forall ((v0 Int)) (=> (= v0 0) (inv v0))))" in print_canonical(a)


@pytest.mark.parametrize("name, expected", [
    ("inv", "inv"),
    ("inv state", "|inv state|"),
    ("and", "|and|"),
    ("1st", "|1st|"),
    ("x!1", "x!1"),
])
def test_format_symbol(name, expected):
    assert format_symbol(name) == expected


def test_deep_nesting_is_a_diagnostic():
    depth = 20000
    text = "(set-logic HORN)\n(declare-fun p () Bool)\n(assert " + "(and " * depth + "p" + ")" * depth + ")\n"
    benchmark, diagnostics = parse_benchmark(text)
    assert benchmark is None
    assert diagnostics and diagnostics[0].severity == "error"


FUZZ_FRAGMENTS = ["(", ")", "(", ")", "assert", "forall", "exists", "let", "=>", "and", "not", "declare-fun",
                  "set-logic", "HORN", "check-sat", "Int", "Real", "Bool", "Array", "x", "y", "p", "0", "1.5",
                  "|q r|", "\"s\"", ":named", "!", "+", "*", "select", "false", "true", ";c\n", " ", "\n"]


def fuzz_inputs(count):
    rng = random.Random(7)
    for i in range(count):
        if i % 2:
            raw = bytes(rng.randrange(256) for _ in range(rng.randrange(1, 120)))
            yield raw.decode("latin-1")
        else:
            yield "".join(rng.choice(FUZZ_FRAGMENTS) + " " for _ in range(rng.randrange(1, 60)))


def test_fuzzed_inputs_never_raise():
    for text in fuzz_inputs(10000):
        benchmark, diagnostics = parse_benchmark(text)
        if benchmark is None:
            assert any(d.severity == "error" for d in diagnostics)
        else:
            reparsed, _ = parse_benchmark(print_canonical(benchmark))
            assert reparsed is not None, text
            renamed = alpha_rename(benchmark)
            assert (reparsed.logic_name, reparsed.decls, reparsed.clauses) == \
                (renamed.logic_name, renamed.decls, renamed.clauses), text


REAL_FACT = """(set-logic HORN)
(declare-fun inv (Real) Bool)
(assert (forall ((x Real)) (=> (= x {}) (inv x))))
(assert (forall ((x Real)) (=> (and (inv x) (< x 0.0)) false)))
(check-sat)
"""


@pytest.mark.parametrize("literal", [
    "1.00000000000000000000000000001",
    "1.00000000000000000000000000002",
    "123456789012345678901234567890.000000000000000000000000000000000000001",
    "0.5",
    "7.0",
])
def test_long_decimals_print_exactly(literal):
    benchmark, _ = parse_ok(REAL_FACT.format(literal))
    printed = print_canonical(benchmark)
    assert f"(= v0 {literal})" in printed
    reparsed, _ = parse_ok(printed)
    assert reparsed.clauses == alpha_rename(benchmark).clauses


def test_decimals_differing_past_28_digits_print_differently():
    a, _ = parse_ok(REAL_FACT.format("1.00000000000000000000000000001"))
    b, _ = parse_ok(REAL_FACT.format("1.00000000000000000000000000002"))
    assert print_canonical(a) != print_canonical(b)
    assert not alpha_equivalent(a, b)


def test_non_terminating_and_negative_decimals():
    third = Num(Fraction(1, 3), decimal=True)
    assert "(/ 1.0 3.0)" in print_canonical(Benchmark("HORN", (), (Clause((), (), App("=", (third, third)), FALSE),)))
    negative = Num(Fraction(-5, 4), decimal=True)
    printed = print_canonical(Benchmark("HORN", (), (Clause((), (), App("<", (negative, negative)), FALSE),)))
    assert "(< (- 1.25) (- 1.25))" in printed


def test_deeply_nested_terms_print_without_recursion():
    depth = 5000
    term = App(">", (Var("x"), Num(Fraction(0))))
    for _ in range(depth):
        term = App("not", (term,))
    inv = PredicateDecl("inv", (INT,))
    clause = Clause((("x", INT),), (PredApp("inv", (Var("x"),)),), term, FALSE)
    printed = print_canonical(Benchmark("HORN", (inv,), (clause,)))
    assert printed.count("(not ") == depth
    assert "(> v0 0)" + ")" * depth in printed


def test_moderately_deep_terms_round_trip():
    depth = 350
    body = "(not " * depth + "(> x 0)" + ")" * depth
    text = f"""(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (forall ((x Int)) (=> (and (inv x) {body}) false)))
(check-sat)
"""
    benchmark, _ = parse_ok(text)
    printed = print_canonical(benchmark)
    reparsed, _ = parse_ok(printed)
    assert print_canonical(reparsed) == printed


def test_empty_applications_print_parenthesised():
    clause = Clause((), (), App("and", (App("or"), FALSE)), FALSE)
    printed = print_canonical(Benchmark("HORN", (), (clause,)))
    assert "(=> (and (or) false) false)" in printed


def test_alpha_rename_orders_variables_by_first_use():
    benchmark, _ = parse_ok("""(set-logic HORN)
(declare-fun inv (Int Int) Bool)
(assert (forall ((a Int) (b Int) (unused Int)) (=> (= b a) (inv b a))))
(check-sat)
""")
    clause = alpha_rename(benchmark).clauses[0]
    assert [name for name, _ in clause.vars] == ["v0", "v1", "v2"]
    assert clause.constraint == App("=", (Var("v0"), Var("v1")))
    assert clause.head == PredApp("inv", (Var("v0"), Var("v1")))
