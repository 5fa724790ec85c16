"""
CHC-COMP Toolkit - Rating & Selection Module
Rates benchmarks A/B/C from two probe solvers and draws per-repository quota samples.

Membership inside each rating pool is drawn with a Mersenne Twister
(`random.Random`) seeded from SHA-256(seed | repository | rating) and a
shuffle of the sorted pool, so the same seed always gives the same manifest.
"""

import csv
import hashlib
import os
import random
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from chc_config_module import ConfigError, InputFormatError, read_csv_rows, read_quota_file
from chc_model_module import ChcCompError

# wall-clock budget (s) of each probe solver, recorded in the ratings header
PROBE_BUDGETS = {"Eldarica": 5, "Ultimate Unihorn": 8}
MAX_SEED = 2 ** 64 - 1
COUNTS_COLUMNS = ["repository", "quota", "taken_a", "taken_b", "taken_c", "selected"]


class ProbeMismatchError(ChcCompError):
    """Raised when probe outcomes do not describe one benchmark with two solvers."""


class MissingQuotaError(ChcCompError):
    """Raised when a repository has no N_r in the selection policy."""


class Rating(Enum):
    A = "A"
    B = "B"
    C = "C"

    def __lt__(self, other: "Rating") -> bool:
        return self.value < other.value

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class ProbeOutcome:
    benchmark_id: str
    solver_name: str
    solved: bool


@dataclass(frozen=True)
class RatedPools:
    a: Tuple[str, ...] = ()
    b: Tuple[str, ...] = ()
    c: Tuple[str, ...] = ()

    def pool(self, rating: Rating) -> Tuple[str, ...]:
        return {Rating.A: self.a, Rating.B: self.b, Rating.C: self.c}[rating]

    def sizes(self) -> Tuple[int, int, int]:
        return len(self.a), len(self.b), len(self.c)


@dataclass(frozen=True)
class SelectionPolicy:
    per_repo_quota: Mapping[str, int]
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= MAX_SEED:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for repo, quota in self.per_repo_quota.items():
            if quota < 1:
                raise ValueError(f"quota for {repo} must be positive, got {quota}")


@dataclass
class SelectionResult:
    chosen: Dict[str, List[str]] = field(default_factory=dict)
    counts: Dict[str, Tuple[int, int, int]] = field(default_factory=dict)

    def total(self) -> int:
        return sum(len(ids) for ids in self.chosen.values())


# === RATING ===

def rate(probe1: ProbeOutcome, probe2: ProbeOutcome) -> Rating:
    """A if both probes solved the benchmark, B if exactly one did, C if neither."""
    if probe1.benchmark_id != probe2.benchmark_id:
        raise ProbeMismatchError(
            f"probe outcomes refer to different benchmarks: {probe1.benchmark_id} vs {probe2.benchmark_id}")
    solved = int(probe1.solved) + int(probe2.solved)
    return {2: Rating.A, 1: Rating.B, 0: Rating.C}[solved]


def rate_all(outcomes: Iterable[ProbeOutcome]) -> Dict[str, Rating]:
    """Rate every benchmark; each must carry outcomes from exactly two distinct solvers."""
    grouped: Dict[str, List[ProbeOutcome]] = {}
    for outcome in outcomes:
        grouped.setdefault(outcome.benchmark_id, []).append(outcome)
    errors = []
    ratings: Dict[str, Rating] = {}
    for benchmark_id, probes in grouped.items():
        if len(probes) != 2 or probes[0].solver_name == probes[1].solver_name:
            errors.append(f"{benchmark_id}: expected two probe solvers, got "
                          f"{', '.join(p.solver_name for p in probes)}")
            continue
        ratings[benchmark_id] = rate(probes[0], probes[1])
    if errors:
        raise ProbeMismatchError("; ".join(errors))
    return ratings


# === SELECTION ===

def cascade_counts(sizes: Tuple[int, int, int], quota: int) -> Tuple[int, int, int]:
    """How many benchmarks to take per rating; unfilled quota carries to the next-harder rating."""
    taken = []
    carry = 0
    for size in sizes:
        target = quota + carry
        take = min(target, size)
        carry = target - take
        taken.append(take)
    return taken[0], taken[1], taken[2]


def derive_stream(seed: int, repository: str, rating: Rating) -> random.Random:
    material = f"{seed}|{repository}|{rating.value}".encode("utf-8")
    return random.Random(int.from_bytes(hashlib.sha256(material).digest()[:8], "big"))


def draw(pool: Sequence[str], count: int, rng: random.Random) -> List[str]:
    """Choose `count` members uniformly without replacement; result independent of pool order."""
    members = sorted(pool)
    rng.shuffle(members)
    return sorted(members[:count])


def select_from_repository(pools: RatedPools, quota: int, seed: int = 0, repository: str = ""
                           ) -> Tuple[List[str], List[str], List[str]]:
    """Cascade quota selection for one repository, drawing each pool from its own substream."""
    if quota < 1:
        raise ValueError(f"quota must be positive, got {quota}")
    counts = cascade_counts(pools.sizes(), quota)
    taken = [draw(pools.pool(r), n, derive_stream(seed, repository, r))
             for r, n in zip((Rating.A, Rating.B, Rating.C), counts)]
    return taken[0], taken[1], taken[2]


def select_all(rated: Mapping[str, RatedPools], policy: SelectionPolicy) -> SelectionResult:
    """Apply the cascade selection to every repository, in sorted repository order."""
    missing = sorted(repo for repo in rated if repo not in policy.per_repo_quota)
    if missing:
        raise MissingQuotaError(f"missing quota for repositories: {', '.join(missing)}")
    result = SelectionResult()
    for repo in sorted(rated):
        a, b, c = select_from_repository(rated[repo], policy.per_repo_quota[repo], policy.seed, repo)
        result.chosen[repo] = a + b + c
        result.counts[repo] = (len(a), len(b), len(c))
    return result


def select_whole_track(benchmarks: Sequence) -> list:
    """Tracks small enough to be used completely."""
    return list(benchmarks)


# === FILE FORMATS ===

def probe_header(outcomes: Iterable[ProbeOutcome]) -> str:
    solvers = sorted({o.solver_name for o in outcomes})
    labels = [f"{s} ({PROBE_BUDGETS[s]}s)" if s in PROBE_BUDGETS else s for s in solvers]
    return "# probes: " + ", ".join(labels)


def parse_probe_rows(rows: List[Tuple[int, Dict[str, str]]], file_path: str
                     ) -> Tuple[List[ProbeOutcome], Dict[str, str]]:
    """Probe CSV rows -> outcomes plus benchmark -> repository map."""
    outcomes = []
    repos: Dict[str, str] = {}
    for line_no, row in rows:
        result = row["result"].strip().lower()
        if result not in ("sat", "unsat", "unknown"):
            raise InputFormatError(file_path, line_no, f"invalid result {row['result']!r}")
        benchmark, repo = row["benchmark"].strip(), row["repository"].strip()
        if repos.setdefault(benchmark, repo) != repo:
            raise InputFormatError(file_path, line_no, f"benchmark {benchmark} listed under two repositories")
        outcomes.append(ProbeOutcome(benchmark, row["solver"].strip(), result != "unknown"))
    return outcomes, repos


def read_ratings_file(file_path: str) -> Dict[str, Dict[Rating, List[str]]]:
    """Read `<digest> <repository> <A|B|C>` records into repository -> rating -> ids."""
    pools: Dict[str, Dict[Rating, List[str]]] = {}
    seen = set()
    try:
        with open(file_path, 'r', encoding='utf-8') as f:
            lines = f.readlines()
    except FileNotFoundError:
        raise FileNotFoundError(f"Ratings file not found: {file_path}")
    for line_no, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2] not in ("A", "B", "C"):
            raise InputFormatError(file_path, line_no, "expected '<digest> <repository> <A|B|C>'")
        benchmark, repo, letter = parts
        if benchmark in seen:
            raise InputFormatError(file_path, line_no, f"benchmark {benchmark} rated twice")
        seen.add(benchmark)
        pools.setdefault(repo, {r: [] for r in Rating})[Rating(letter)].append(benchmark)
    return pools


def to_rated_pools(pools: Mapping[str, Mapping[Rating, List[str]]]) -> Dict[str, RatedPools]:
    return {repo: RatedPools(tuple(p[Rating.A]), tuple(p[Rating.B]), tuple(p[Rating.C]))
            for repo, p in pools.items()}


def run_rate_module(probe_csv: str, out_dir: str) -> int:
    """Turn probe outcomes into a ratings file."""
    print("\n" + "=" * 60, file=sys.stderr)
    print("⭐ RATING MODULE", file=sys.stderr)
    print("=" * 60, file=sys.stderr)

    try:
        rows = read_csv_rows(probe_csv, ["benchmark", "repository", "solver", "result"])
        outcomes, repos = parse_probe_rows(rows, probe_csv)
        ratings = rate_all(outcomes)
    except InputFormatError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except ProbeMismatchError as e:
        print(f"❌ Probe mismatch: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"❌ Error reading probe outcomes: {e}", file=sys.stderr)
        return 2

    out_path = os.path.join(out_dir, "ratings.txt")
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(out_path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(probe_header(outcomes) + "\n")
            for benchmark in sorted(ratings, key=lambda b: (repos[b], b)):
                f.write(f"{benchmark} {repos[benchmark]} {ratings[benchmark]}\n")
    except OSError as e:
        print(f"❌ Cannot write {out_path}: {e}", file=sys.stderr)
        return 2

    per_rating = {r: sum(1 for v in ratings.values() if v is r) for r in Rating}
    print(f"✅ Rated {len(ratings)} benchmarks: "
          + ", ".join(f"{r}={per_rating[r]}" for r in Rating), file=sys.stderr)
    print(f"📁 Ratings written to: {out_path}", file=sys.stderr)
    return 0


def run_select_module(ratings_file: str, quotas_file: str, seed: int, out_dir: str,
                      whole_track: bool = False) -> int:
    """Select benchmarks from a ratings file and write the manifest and counts."""
    print("\n" + "=" * 60, file=sys.stderr)
    print("🎯 SELECTION MODULE", file=sys.stderr)
    print("=" * 60, file=sys.stderr)

    try:
        pools = read_ratings_file(ratings_file)
        if whole_track:
            result = SelectionResult()
            for repo in sorted(pools):
                p = pools[repo]
                result.chosen[repo] = sorted(select_whole_track(p[Rating.A] + p[Rating.B] + p[Rating.C]))
                result.counts[repo] = (len(p[Rating.A]), len(p[Rating.B]), len(p[Rating.C]))
            quotas: Dict[str, int] = {}
        else:
            quotas = read_quota_file(quotas_file)
            result = select_all(to_rated_pools(pools), SelectionPolicy(quotas, seed))
    except (InputFormatError, ConfigError, MissingQuotaError, ValueError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2

    manifest_path = os.path.join(out_dir, "selection.txt")
    counts_path = os.path.join(out_dir, "selection_counts.csv")
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(manifest_path, 'w', encoding='utf-8', newline='\n') as f:
            for repo in sorted(result.chosen):
                for benchmark in result.chosen[repo]:
                    f.write(f"{repo} {benchmark}\n")
        with open(counts_path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(COUNTS_COLUMNS)
            for repo in sorted(result.counts):
                a, b, c = result.counts[repo]
                writer.writerow([repo, quotas.get(repo, ""), a, b, c, a + b + c])
    except OSError as e:
        print(f"❌ Cannot write selection output: {e}", file=sys.stderr)
        return 2

    for repo in sorted(result.counts):
        a, b, c = result.counts[repo]
        print(f"  - {repo}: A={a} B={b} C={c} total={a + b + c}", file=sys.stderr)
    print(f"✅ Selected {result.total()} benchmarks", file=sys.stderr)
    print(f"📁 Manifest written to: {manifest_path}", file=sys.stderr)
    return 0
