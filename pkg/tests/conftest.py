"""
Shared fixtures: puts src/ on the import path and provides small CHC benchmarks.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

SAMPLE_BENCHMARKS = {
    "lia_lin": """\
(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (forall ((x Int)) (=> (= x 0) (inv x))))
(assert (forall ((x Int) (y Int)) (=> (and (inv x) (< x 10) (= y (+ x 1))) (inv y))))
(assert (forall ((x Int)) (=> (and (inv x) (> x 10)) false)))
(check-sat)
""",
    "lia_nonlin": """\
(set-logic HORN)
(declare-fun p (Int) Bool)
(declare-fun q (Int) Bool)
(assert (forall ((x Int)) (=> (= x 0) (p x))))
(assert (forall ((x Int)) (=> (= x 1) (q x))))
(assert (forall ((x Int) (y Int)) (=> (and (p x) (q y) (> (+ x y) 5)) false)))
(check-sat)
""",
    "lia_lin_arrays": """\
(set-logic HORN)
(declare-fun inv ((Array Int Int) Int) Bool)
(assert (forall ((a (Array Int Int)) (i Int)) (=> (= i 0) (inv a i))))
(assert (forall ((a (Array Int Int)) (i Int) (b (Array Int Int)) (j Int))
  (=> (and (inv a i) (= b (store a i 0)) (= j (+ i 1))) (inv b j))))
(assert (forall ((a (Array Int Int)) (i Int))
  (=> (and (inv a i) (> i 0) (not (= (select a (- i 1)) 0))) false)))
(check-sat)
""",
    "lra_ts": """\
(set-logic HORN)
(declare-fun inv (Real Real) Bool)
(assert (forall ((x Real) (y Real)) (=> (and (= x 0.0) (= y 1.0)) (inv x y))))
(assert (forall ((x Real) (y Real) (x1 Real) (y1 Real))
  (=> (and (inv x y) (= x1 (+ x y)) (= y1 (+ y 0.5))) (inv x1 y1))))
(assert (forall ((x Real) (y Real)) (=> (and (inv x y) (< x 0.0)) false)))
(check-sat)
""",
    "three_queries": """\
(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (forall ((x Int)) (=> (= x 0) (inv x))))
(assert (forall ((x Int) (y Int)) (=> (and (inv x) (= y (+ x 2))) (inv y))))
(assert (forall ((x Int)) (=> (and (inv x) (= x 1)) false)))
(assert (forall ((x Int)) (=> (and (inv x) (= x 3)) false)))
(assert (forall ((x Int)) (=> (and (inv x) (< x 0)) false)))
(check-sat)
""",
    "no_query": """\
(set-logic HORN)
(declare-fun inv (Int) Bool)
(assert (forall ((x Int)) (=> (= x 0) (inv x))))
(check-sat)
""",
}


@pytest.fixture
def benchmarks():
    return dict(SAMPLE_BENCHMARKS)


@pytest.fixture
def bench_dir(tmp_path):
    """Every sample benchmark written to `<name>.smt2`."""
    directory = tmp_path / "bench"
    directory.mkdir()
    for name, text in SAMPLE_BENCHMARKS.items():
        (directory / f"{name}.smt2").write_text(text, encoding="utf-8")
    return directory
