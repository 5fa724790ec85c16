"""
CHC-COMP Toolkit - Format Checker Module
Checks conformance with the CHC-COMP fragment and sorts benchmarks into tracks.
"""

import sys
from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Set, Tuple

from chc_config_module import map_files
from chc_model_module import (
    INT, REAL,
    App, Benchmark, Clause, Num, Sort, TrackCategory,
    is_constant, iter_subterms, well_formedness_violations,
)
from chc_parser_module import ParseDiagnostic, read_benchmark_file

THEORY_INT = "Int"
THEORY_REAL = "Real"
THEORY_ARRAY = "Array"


@dataclass(frozen=True)
class CheckStats:
    num_clauses: int
    num_predicates: int
    num_queries: int
    used_sorts: Tuple[str, ...]


@dataclass(frozen=True)
class CheckReport:
    conformant: bool
    violations: Tuple[ParseDiagnostic, ...]
    track: TrackCategory
    stats: Optional[CheckStats] = None


def _sort_theories(sort: Sort, out: Set[str]):
    if sort == INT:
        out.add(THEORY_INT)
    elif sort == REAL:
        out.add(THEORY_REAL)
    elif sort.is_array:
        out.add(THEORY_ARRAY)
        _sort_theories(sort.index, out)
        _sort_theories(sort.element, out)


def _clause_theories(clause: Clause) -> Set[str]:
    out: Set[str] = set()
    for _, sort in clause.vars:
        _sort_theories(sort, out)
    for t in clause.terms():
        for sub in iter_subterms(t):
            if isinstance(sub, Num):
                out.add(THEORY_REAL if sub.decimal else THEORY_INT)
            elif isinstance(sub, App) and sub.op in ("select", "store"):
                out.add(THEORY_ARRAY)
    return out


def theory_of(benchmark: Benchmark) -> FrozenSet[str]:
    """Theories (Int, Real, Array) whose sorts or operators occur anywhere; Bool is not reported."""
    out: Set[str] = set()
    for decl in benchmark.decls:
        for sort in decl.arg_sorts:
            _sort_theories(sort, out)
    for clause in benchmark.clauses:
        out |= _clause_theories(clause)
    return frozenset(out)


def used_sorts(benchmark: Benchmark) -> Tuple[str, ...]:
    sorts = {str(s) for d in benchmark.decls for s in d.arg_sorts}
    sorts |= {str(s) for c in benchmark.clauses for _, s in c.vars}
    return tuple(sorted(sorts))


def nonlinear_terms(clause: Clause) -> List[str]:
    """Describe every non-linear arithmetic application of a clause."""
    problems = []
    for t in clause.terms():
        for sub in iter_subterms(t):
            if not isinstance(sub, App):
                continue
            if sub.op == "*" and sum(1 for a in sub.args if not is_constant(a)) > 1:
                problems.append("multiplication of two non-constant terms")
            elif sub.op in ("div", "mod", "/") and len(sub.args) == 2 and not is_constant(sub.args[1]):
                problems.append(f"{sub.op} by a non-constant term")
    return problems


def _lra_ts_shape(benchmark: Benchmark) -> bool:
    if len(benchmark.decls) != 1 or len(benchmark.clauses) != 3:
        return False
    pred = benchmark.decls[0].name
    facts = [c for c in benchmark.clauses if not c.body_atoms and not c.is_query()
             and c.head.name == pred]
    transitions = [c for c in benchmark.clauses if not c.is_query()
                   and len(c.body_atoms) == 1 and c.body_atoms[0].name == pred and c.head.name == pred]
    queries = [c for c in benchmark.clauses if c.is_query()
               and len(c.body_atoms) == 1 and c.body_atoms[0].name == pred]
    return len(facts) == 1 and len(transitions) == 1 and len(queries) == 1


def classify_track(benchmark: Benchmark) -> TrackCategory:
    """Map a (conformant) benchmark to its competition track."""
    theories = theory_of(benchmark)
    linear = all(c.is_linear() for c in benchmark.clauses)
    if theories <= {THEORY_INT}:
        return TrackCategory.LIA_LIN if linear else TrackCategory.LIA_NONLIN
    if theories == {THEORY_INT, THEORY_ARRAY}:
        return TrackCategory.LIA_LIN_ARRAYS if linear else TrackCategory.UNCLASSIFIED
    if theories == {THEORY_REAL} and _lra_ts_shape(benchmark):
        return TrackCategory.LRA_TS
    return TrackCategory.UNCLASSIFIED


def _violation(benchmark: Benchmark, clause_no: Optional[int], message: str) -> ParseDiagnostic:
    """Error placed at the clause's assert when the source position is known."""
    if clause_no is None:
        return ParseDiagnostic("error", message)
    message = f"clause {clause_no}: {message}"
    if clause_no <= len(benchmark.positions):
        line, col = benchmark.positions[clause_no - 1]
        return ParseDiagnostic("error", message, line, col)
    return ParseDiagnostic("error", message)


def check_fragment(benchmark: Benchmark) -> CheckReport:
    """Check a parsed benchmark against the CHC-COMP fragment; failures are reported, not raised."""
    problems: List[Tuple[Optional[int], str]] = list(well_formedness_violations(benchmark))

    query_numbers = [i for i, c in enumerate(benchmark.clauses, 1) if c.is_query()]
    num_queries = len(query_numbers)
    if num_queries == 0:
        problems.append((None, "no query"))
    elif num_queries > 1:
        problems.append((query_numbers[1], f"multiple queries ({num_queries})"))

    mixed = False
    for i, clause in enumerate(benchmark.clauses, 1):
        if {THEORY_INT, THEORY_REAL} <= _clause_theories(clause):
            mixed = True
            problems.append((i, "mixes Int and Real"))
        problems.extend((i, msg) for msg in nonlinear_terms(clause))

    theories = theory_of(benchmark)
    if THEORY_REAL in theories and THEORY_ARRAY in theories:
        problems.append((None, "arrays over Real are outside the supported theories"))
    elif {THEORY_INT, THEORY_REAL} <= theories and not mixed:
        problems.append((None, "benchmark mixes Int and Real"))

    violations = tuple(_violation(benchmark, i, msg) for i, msg in problems)
    conformant = not violations
    stats = CheckStats(
        num_clauses=len(benchmark.clauses),
        num_predicates=len(benchmark.decls),
        num_queries=num_queries,
        used_sorts=used_sorts(benchmark),
    )
    track = classify_track(benchmark) if conformant else TrackCategory.UNCLASSIFIED
    return CheckReport(conformant, violations, track, stats)


def check_file(file_path: str) -> CheckReport:
    """Parse and check one file; parse errors become violations, OSError propagates."""
    benchmark, diagnostics = read_benchmark_file(file_path)
    if benchmark is None:
        errors = tuple(d for d in diagnostics if d.severity == "error")
        return CheckReport(False, errors, TrackCategory.UNCLASSIFIED)
    return check_fragment(benchmark)


def format_check_record(file_path: str, report: CheckReport) -> str:
    return f"{file_path} {'ok' if report.conformant else 'fail'} {report.track}"


def _check_one(file_path: str) -> Tuple[CheckReport, Optional[str]]:
    try:
        return check_file(file_path), None
    except OSError as e:
        return CheckReport(False, (ParseDiagnostic("error", str(e)),), TrackCategory.UNCLASSIFIED), str(e)
    except RecursionError:
        return CheckReport(False, (ParseDiagnostic("error", "term nesting too deep"),), TrackCategory.UNCLASSIFIED), None


def run_check_module(paths: List[str], show_progress: bool = True, verbose: bool = False, jobs: int = 1) -> int:
    """Run the format checker over files; prints one record per file and returns the exit code."""
    print("\n" + "=" * 60, file=sys.stderr)
    print("🔍 FORMAT CHECK MODULE", file=sys.stderr)
    print("=" * 60, file=sys.stderr)

    failed = 0
    unreadable = 0
    tracks = {}
    results = map_files(_check_one, paths, jobs, desc="Checking", show_progress=show_progress)
    for file_path, (report, read_error) in zip(paths, results):
        if read_error is not None:
            unreadable += 1
            print(f"❌ Cannot read {file_path}: {read_error}", file=sys.stderr)
        print(format_check_record(file_path, report))
        if not report.conformant:
            failed += 1
            if verbose:
                for v in report.violations:
                    sep = ":" if v.line is not None else ": "
                    print(f"  - {file_path}{sep}{v}", file=sys.stderr)
        tracks[report.track] = tracks.get(report.track, 0) + 1

    print(f"\n📊 Check Summary:", file=sys.stderr)
    print(f"✅ Conformant: {len(paths) - failed}", file=sys.stderr)
    print(f"❌ Failed: {failed}", file=sys.stderr)
    for track, count in sorted(tracks.items(), key=lambda kv: kv[0].value):
        print(f"  - {track}: {count}", file=sys.stderr)
    if unreadable:
        return 2
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(run_check_module(sys.argv[1:]))
