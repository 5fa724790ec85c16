"""
CHC-COMP Toolkit - Transform Module
Merges or splits multiple queries, computes canonical checksums and drops duplicates.
"""

import hashlib
import logging
import os
import sys
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Set, Tuple

from chc_config_module import map_files
from chc_model_module import (
    FALSE, TRUE,
    Benchmark, ChcCompError, Clause, PredApp, PredicateDecl,
    evaluate_ground, free_vars,
)
from chc_parser_module import print_canonical, read_benchmark_file

logger = logging.getLogger(__name__)

MERGED_QUERY_PREDICATE = "CHC_COMP_MERGED_QUERY"
DIGEST_ALGORITHM = "sha256"


class NothingToMergeError(ChcCompError):
    """Raised when a benchmark without queries is merged or split."""


@dataclass(frozen=True)
class Digest:
    algorithm: str
    bytes: bytes

    def hex(self) -> str:
        return self.bytes.hex()

    def __str__(self) -> str:
        return self.hex()


# === QUERY NORMALIZATION ===

def fresh_predicate_name(benchmark: Benchmark, base: str = MERGED_QUERY_PREDICATE) -> str:
    taken = {d.name for d in benchmark.decls}
    if base not in taken:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def merge_queries(benchmark: Benchmark) -> Benchmark:
    """Fold all queries into one through a fresh nullary predicate."""
    queries = benchmark.queries()
    if not queries:
        raise NothingToMergeError(f"nothing to merge: {benchmark.origin or 'benchmark'} has no query")
    if len(queries) == 1:
        return benchmark

    aux = PredApp(fresh_predicate_name(benchmark))
    clauses = [replace(c, head=aux) if c.is_query() else c for c in benchmark.clauses]
    clauses.append(Clause((), (aux,), TRUE, FALSE))
    decls = list(benchmark.decls) + [PredicateDecl(aux.name, ())]
    return benchmark.with_clauses(clauses, decls=decls)


def split_queries(benchmark: Benchmark) -> List[Benchmark]:
    """One benchmark per query, each keeping every non-query clause."""
    if not benchmark.queries():
        raise NothingToMergeError(f"nothing to split: {benchmark.origin or 'benchmark'} has no query")
    if len(benchmark.queries()) == 1:
        return [benchmark]

    query_positions = [k for k, c in enumerate(benchmark.clauses) if c.is_query()]
    outputs = []
    for i, position in enumerate(query_positions):
        clauses = [c for k, c in enumerate(benchmark.clauses) if not c.is_query() or k == position]
        origin = f"{benchmark.origin}_q{i}" if benchmark.origin else f"q{i}"
        outputs.append(benchmark.with_clauses(clauses, origin=origin))
    return outputs


def derives_false(benchmark: Benchmark) -> bool:
    """Least-fixpoint check for benchmarks over nullary predicates with ground constraints.

    Returns True when false is derivable, i.e. the benchmark is unsat.
    """
    for clause in benchmark.clauses:
        if any(a.args for a in clause.body_atoms) or (not clause.is_query() and clause.head.args):
            raise ValueError("derives_false only handles nullary predicates")
        if free_vars(clause.constraint):
            raise ValueError("derives_false only handles ground constraints")

    enabled = [c for c in benchmark.clauses if evaluate_ground(c.constraint) is True]
    derived: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for clause in enabled:
            if all(a.name in derived for a in clause.body_atoms):
                if clause.is_query():
                    return True
                if clause.head.name not in derived:
                    derived.add(clause.head.name)
                    changed = True
    return False


# === CHECKSUMS AND DEDUPLICATION ===

def checksum(benchmark: Benchmark) -> Digest:
    """SHA-256 of the canonical print of the benchmark."""
    canonical = print_canonical(benchmark).encode("utf-8")
    return Digest(DIGEST_ALGORITHM, hashlib.sha256(canonical).digest())


def with_checksum(benchmark: Benchmark) -> Benchmark:
    return replace(benchmark, checksum=checksum(benchmark))


def dedup(benchmarks: List[Benchmark]) -> Tuple[List[Benchmark], List[Tuple[str, str]]]:
    """Keep the first benchmark per digest; report later copies as (duplicate, kept) origins."""
    kept_by_digest: Dict[bytes, Benchmark] = {}
    unique: List[Benchmark] = []
    dropped: List[Tuple[str, str]] = []
    for benchmark in benchmarks:
        digest = benchmark.checksum if isinstance(benchmark.checksum, Digest) else checksum(benchmark)
        kept = kept_by_digest.get(digest.bytes)
        if kept is None:
            kept_by_digest[digest.bytes] = benchmark
            unique.append(benchmark)
        else:
            dropped.append((benchmark.origin, kept.origin))
    return unique, dropped


# === FILE-LEVEL WRAPPERS ===

def output_name(file_path: str, suffix: str = "") -> str:
    base = os.path.basename(file_path)
    stem = base[:-len(".smt2")] if base.endswith(".smt2") else base
    return f"{stem}{suffix}.smt2"


def write_benchmark(benchmark: Benchmark, out_path: str):
    with open(out_path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(print_canonical(benchmark))


def normalize_file(file_path: str, mode: str, out_dir: str) -> List[str]:
    """Merge or split one file into out_dir; returns the written paths."""
    benchmark, diagnostics = read_benchmark_file(file_path)
    if benchmark is None:
        first = next(d for d in diagnostics if d.severity == "error")
        raise ChcCompError(f"parse error at {first}")
    written = []
    if mode == "merge":
        out_path = os.path.join(out_dir, output_name(file_path))
        write_benchmark(merge_queries(benchmark), out_path)
        written.append(out_path)
    elif mode == "split":
        parts = split_queries(benchmark)
        for i, part in enumerate(parts):
            suffix = f"_q{i}" if len(parts) > 1 else ""
            out_path = os.path.join(out_dir, output_name(file_path, suffix))
            write_benchmark(part, out_path)
            written.append(out_path)
    else:
        raise ValueError(f"Invalid normalize mode: {mode}. Must be one of: merge, split")
    return written


def _normalize_one(job: Tuple[str, str, str]) -> Tuple[List[str], Optional[str], bool]:
    """(written paths, error, error is I/O) for one (file, mode, out_dir) job."""
    file_path, mode, out_dir = job
    try:
        return normalize_file(file_path, mode, out_dir), None, False
    except OSError as e:
        return [], str(e), True
    except ChcCompError as e:
        return [], str(e), False
    except RecursionError:
        return [], "term nesting too deep", False


def run_normalize_module(paths: List[str], mode: str, out_dir: str, show_progress: bool = True,
                         jobs: int = 1) -> int:
    """Run query normalization over files; per-file errors do not stop the batch."""
    print("\n" + "=" * 60, file=sys.stderr)
    print(f"🔧 NORMALIZE MODULE ({mode})", file=sys.stderr)
    print("=" * 60, file=sys.stderr)

    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        print(f"❌ Cannot create output directory {out_dir}: {e}", file=sys.stderr)
        return 2

    written: List[str] = []
    failed: List[Tuple[str, str]] = []
    io_error = False
    job_list = [(file_path, mode, out_dir) for file_path in paths]
    results = map_files(_normalize_one, job_list, jobs, desc="Normalizing", show_progress=show_progress)
    for file_path, (outputs, error, is_io) in zip(paths, results):
        written.extend(outputs)
        if error is not None:
            io_error = io_error or is_io
            failed.append((file_path, error))

    print(f"\n📊 Normalize Summary:", file=sys.stderr)
    print(f"✅ Files written: {len(written)}", file=sys.stderr)
    print(f"❌ Failed inputs: {len(failed)}", file=sys.stderr)
    for file_path, reason in failed:
        print(f"  - {file_path}: {reason}", file=sys.stderr)
    if io_error:
        return 2
    return 1 if failed else 0


def _hash_one(file_path: str) -> Tuple[Optional[Benchmark], Optional[str]]:
    try:
        benchmark, _ = read_benchmark_file(file_path)
        return (with_checksum(benchmark) if benchmark is not None else None), None
    except OSError as e:
        return None, str(e)
    except RecursionError:
        logger.warning("%s: term nesting too deep to hash", file_path)
        return None, None


def run_dedup_module(paths: List[str], out_dir: str, show_progress: bool = True, jobs: int = 1) -> int:
    """Hash every file canonically and write the unique/duplicate manifests."""
    print("\n" + "=" * 60, file=sys.stderr)
    print("🧬 DEDUP MODULE", file=sys.stderr)
    print("=" * 60, file=sys.stderr)

    benchmarks = []
    rejected = []
    results = map_files(_hash_one, paths, jobs, desc="Hashing", show_progress=show_progress)
    for file_path, (benchmark, read_error) in zip(paths, results):
        if read_error is not None:
            print(f"❌ Cannot read {file_path}: {read_error}", file=sys.stderr)
            return 2
        if benchmark is None:
            rejected.append(file_path)
            continue
        benchmarks.append(benchmark)

    unique, dropped = dedup(benchmarks)

    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "unique.txt"), 'w', encoding='utf-8', newline='\n') as f:
            for b in unique:
                f.write(f"{b.checksum} {b.origin}\n")
        with open(os.path.join(out_dir, "duplicates.txt"), 'w', encoding='utf-8', newline='\n') as f:
            for duplicate, kept in dropped:
                f.write(f"{duplicate} {kept}\n")
    except OSError as e:
        print(f"❌ Cannot write manifests to {out_dir}: {e}", file=sys.stderr)
        return 2

    print(f"\n📊 Dedup Summary:", file=sys.stderr)
    print(f"✅ Unique: {len(unique)}", file=sys.stderr)
    print(f"♻️  Duplicates dropped: {len(dropped)}", file=sys.stderr)
    if rejected:
        print(f"❌ Unparseable (skipped): {len(rejected)}", file=sys.stderr)
        for file_path in rejected:
            print(f"  - {file_path}", file=sys.stderr)
    return 1 if rejected else 0
