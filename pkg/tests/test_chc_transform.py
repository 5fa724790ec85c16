"""
Unit tests for chc_transform_module.py: query merging/splitting, checksums, deduplication.
"""

import logging
import os
import random

import pytest

import chc_transform_module
from chc_model_module import FALSE, TRUE, Benchmark, Clause, PredApp, PredicateDecl
from chc_parser_module import parse_benchmark, print_canonical
from chc_transform_module import (
    MERGED_QUERY_PREDICATE, NothingToMergeError,
    checksum, dedup, derives_false, merge_queries, run_dedup_module, run_normalize_module, split_queries,
    with_checksum,
)

random.seed(3317)


def parsed(text, origin=""):
    benchmark, diagnostics = parse_benchmark(text, origin)
    assert benchmark is not None, [str(d) for d in diagnostics]
    return benchmark


def test_merge_three_queries(benchmarks):
    original = parsed(benchmarks["three_queries"])
    merged = merge_queries(original)
    assert len(merged.queries()) == 1
    assert len(merged.clauses) == len(original.clauses) + 1
    assert merged.decls[-1] == PredicateDecl(MERGED_QUERY_PREDICATE, ())
    redirected = [c for c in merged.clauses if c.head == PredApp(MERGED_QUERY_PREDICATE)]
    assert len(redirected) == 3
    assert merged.queries()[0].body_atoms == (PredApp(MERGED_QUERY_PREDICATE),)


def test_merge_picks_fresh_name():
    text = f"""(set-logic HORN)
(declare-fun {MERGED_QUERY_PREDICATE} () Bool)
(declare-fun {MERGED_QUERY_PREDICATE}_1 () Bool)
(assert {MERGED_QUERY_PREDICATE})
(assert (=> {MERGED_QUERY_PREDICATE} false))
(assert (=> {MERGED_QUERY_PREDICATE}_1 false))
(check-sat)"""
    merged = merge_queries(parsed(text))
    assert merged.decls[-1].name == f"{MERGED_QUERY_PREDICATE}_2"


def test_single_query_is_unchanged(benchmarks):
    original = parsed(benchmarks["lia_lin"])
    assert merge_queries(original) == original
    assert split_queries(original) == [original]
    assert print_canonical(merge_queries(original)) == print_canonical(original)


def test_no_query_raises(benchmarks):
    original = parsed(benchmarks["no_query"])
    with pytest.raises(NothingToMergeError):
        merge_queries(original)
    with pytest.raises(NothingToMergeError):
        split_queries(original)


def test_split_three_queries(benchmarks):
    original = parsed(benchmarks["three_queries"], origin="multi")
    parts = split_queries(original)
    assert [p.origin for p in parts] == ["multi_q0", "multi_q1", "multi_q2"]
    for i, part in enumerate(parts):
        assert len(part.queries()) == 1
        assert part.queries()[0] == original.queries()[i]
        assert len(part.clauses) == 3
        assert part.decls == original.decls


def random_boolean_system(rng):
    """Finite Boolean CHC system: nullary predicates, ground true/false constraints."""
    names = [f"P{i}" for i in range(rng.randint(1, 6))]
    clauses = []
    for _ in range(rng.randint(1, 11)):
        body = tuple(PredApp(n) for n in rng.sample(names, rng.randint(0, min(3, len(names)))))
        constraint = TRUE if rng.random() < 0.85 else FALSE
        head = FALSE if rng.random() < 0.3 else PredApp(rng.choice(names))
        clauses.append(Clause((), body, constraint, head))
    if not any(c.is_query() for c in clauses):
        body = (PredApp(rng.choice(names)),)
        clauses.append(Clause((), body, TRUE, FALSE))
    return Benchmark("HORN", tuple(PredicateDecl(n) for n in names), tuple(clauses))


def test_merge_and_split_preserve_status():
    rng = random.Random(1000)
    statuses = set()
    for _ in range(1000):
        original = random_boolean_system(rng)
        assert len(original.clauses) <= 12
        unsat = derives_false(original)
        statuses.add(unsat)
        merged = merge_queries(original)
        assert derives_false(merged) == unsat
        assert any(derives_false(part) for part in split_queries(original)) == unsat
        reparsed = parsed(print_canonical(merged))
        assert derives_false(reparsed) == unsat
    assert statuses == {True, False}


def test_derives_false_simple_chain():
    decls = (PredicateDecl("a"), PredicateDecl("b"))
    chain = (
        Clause((), (), TRUE, PredApp("a")),
        Clause((), (PredApp("a"),), TRUE, PredApp("b")),
        Clause((), (PredApp("b"),), TRUE, FALSE),
    )
    assert derives_false(Benchmark("HORN", decls, chain))
    blocked = chain[:1] + (Clause((), (PredApp("a"),), FALSE, PredApp("b")),) + chain[2:]
    assert not derives_false(Benchmark("HORN", decls, blocked))


def test_derives_false_rejects_arguments(benchmarks):
    with pytest.raises(ValueError):
        derives_false(parsed(benchmarks["lia_lin"]))


BASE = """(set-logic HORN)
(declare-fun inv (Int Int) Bool)
(assert (forall ((x Int) (y Int)) (=> (and (= x 0) (= y 1)) (inv x y))))
(assert (forall ((x Int) (y Int)) (=> (and (inv x y) (> x 7)) false)))
(check-sat)
"""


@pytest.mark.parametrize("variant", [
    BASE.replace(" (=> (and", "\n   (=>   (and"),
    "; a comment\n" + BASE.replace("(check-sat)", "; trailing\n(check-sat)"),
    BASE.replace("(x Int) (y Int)", "(a Int) (b Int)").replace("(= x 0) (= y 1)", "(= a 0) (= b 1)")
        .replace("(inv x y))))", "(inv a b))))", 1).replace("(inv x y) (> x 7)", "(inv a b) (> a 7)"),
])
def test_checksum_ignores_layout_and_bound_names(variant):
    assert checksum(parsed(variant)) == checksum(parsed(BASE))


@pytest.mark.parametrize("variant", [
    BASE.replace("(> x 7)", "(> x 8)"),
    BASE.replace("inv", "inv2"),
    BASE.replace("(= x 0) (= y 1)", "(= y 1) (= x 0)"),
])
def test_checksum_separates_real_changes(variant):
    assert checksum(parsed(variant)) != checksum(parsed(BASE))


def test_checksum_is_sha256_of_canonical_text():
    digest = checksum(parsed(BASE))
    assert digest.algorithm == "sha256"
    assert len(digest.hex()) == 64
    assert str(digest) == digest.hex()


def test_dedup_keeps_first():
    a = with_checksum(parsed(BASE, "a.smt2"))
    b = with_checksum(parsed(BASE.replace("x", "z"), "b.smt2"))
    c = with_checksum(parsed(BASE.replace("7", "9"), "c.smt2"))
    unique, dropped = dedup([a, b, c])
    assert [u.origin for u in unique] == ["a.smt2", "c.smt2"]
    assert dropped == [("b.smt2", "a.smt2")]


def test_run_normalize_split_and_merge(bench_dir, tmp_path):
    multi = str(bench_dir / "three_queries.smt2")
    single = str(bench_dir / "lia_lin.smt2")
    split_dir = tmp_path / "split"
    assert run_normalize_module([multi, single], "split", str(split_dir), show_progress=False) == 0
    assert sorted(os.listdir(split_dir)) == ["lia_lin.smt2", "three_queries_q0.smt2",
                                             "three_queries_q1.smt2", "three_queries_q2.smt2"]

    merge_dir = tmp_path / "merge"
    assert run_normalize_module([multi], "merge", str(merge_dir), show_progress=False) == 0
    merged = parsed((merge_dir / "three_queries.smt2").read_text())
    assert len(merged.queries()) == 1


def test_run_normalize_continues_after_failure(bench_dir, tmp_path):
    paths = [str(bench_dir / "no_query.smt2"), str(bench_dir / "three_queries.smt2")]
    out_dir = tmp_path / "out"
    assert run_normalize_module(paths, "merge", str(out_dir), show_progress=False) == 1
    assert os.listdir(out_dir) == ["three_queries.smt2"]


def test_run_dedup_manifests(tmp_path):
    (tmp_path / "a.smt2").write_text(BASE)
    (tmp_path / "b.smt2").write_text("; copy\n" + BASE.replace("x", "w"))
    (tmp_path / "c.smt2").write_text(BASE.replace("7", "70"))
    paths = [str(tmp_path / n) for n in ("a.smt2", "b.smt2", "c.smt2")]
    out_dir = tmp_path / "manifests"
    assert run_dedup_module(paths, str(out_dir), show_progress=False) == 0
    unique = (out_dir / "unique.txt").read_text().splitlines()
    assert [line.split()[1] for line in unique] == [paths[0], paths[2]]
    assert (out_dir / "duplicates.txt").read_text() == f"{paths[1]} {paths[0]}\n"


def test_run_dedup_parallel_matches_sequential(tmp_path):
    for i, constant in enumerate(["7", "7", "8", "7"]):
        (tmp_path / f"b{i}.smt2").write_text(BASE.replace("7", constant))
    paths = [str(tmp_path / f"b{i}.smt2") for i in range(4)]
    assert run_dedup_module(paths, str(tmp_path / "seq"), show_progress=False) == 0
    assert run_dedup_module(paths, str(tmp_path / "par"), show_progress=False, jobs=2) == 0
    for name in ("unique.txt", "duplicates.txt"):
        assert (tmp_path / "par" / name).read_text() == (tmp_path / "seq" / name).read_text()
    assert len((tmp_path / "par" / "duplicates.txt").read_text().splitlines()) == 2


def nested_benchmark(depth, innermost="(> x 7)"):
    body = "(not " * depth + innermost + ")" * depth
    return BASE.replace("(> x 7)", body)


def test_run_dedup_handles_deeply_nested_constraints(tmp_path):
    (tmp_path / "a.smt2").write_text(nested_benchmark(350))
    (tmp_path / "b.smt2").write_text(nested_benchmark(350).replace("x", "q"))
    (tmp_path / "c.smt2").write_text(nested_benchmark(351))
    paths = [str(tmp_path / n) for n in ("a.smt2", "b.smt2", "c.smt2")]
    assert run_dedup_module(paths, str(tmp_path / "out"), show_progress=False) == 0
    assert (tmp_path / "out" / "duplicates.txt").read_text() == f"{paths[1]} {paths[0]}\n"


def test_too_deep_inputs_are_per_file_failures(tmp_path, monkeypatch, caplog):
    (tmp_path / "deep.smt2").write_text(BASE)
    (tmp_path / "ok.smt2").write_text(BASE)
    paths = [str(tmp_path / "deep.smt2"), str(tmp_path / "ok.smt2")]
    real_read = chc_transform_module.read_benchmark_file

    def read(file_path, origin=None):
        if file_path.endswith("deep.smt2"):
            raise RecursionError("maximum recursion depth exceeded")
        return real_read(file_path, origin)

    monkeypatch.setattr(chc_transform_module, "read_benchmark_file", read)
    with caplog.at_level(logging.WARNING, logger="chc_transform_module"):
        assert run_dedup_module(paths, str(tmp_path / "dedup"), show_progress=False) == 1
    assert "too deep" in caplog.text
    assert (tmp_path / "dedup" / "unique.txt").read_text().split()[1] == paths[1]

    assert run_normalize_module(paths, "merge", str(tmp_path / "norm"), show_progress=False) == 1
    assert os.listdir(tmp_path / "norm") == ["ok.smt2"]
