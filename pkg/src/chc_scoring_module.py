"""
CHC-COMP Toolkit - Scoring Module
Ingests solver run records, removes inconsistent benchmarks and computes the scoreboard.

All averages are exact fractions; rounding happens only when rendering.
"""

import csv
import logging
import math
import os
import sys
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from chc_config_module import InputFormatError, read_csv_rows
from chc_model_module import ChcCompError

logger = logging.getLogger(__name__)

RUN_COLUMNS = ["solver", "config", "benchmark", "result", "cpu_seconds", "wall_seconds"]
MEMORY_COLUMN = "memory_gb"


class DuplicateRunError(ChcCompError):
    """Raised when a (solver, config, benchmark) triple occurs more than once."""


class InconsistentResultsError(ChcCompError):
    """Raised under the abort policy when solvers disagree on a benchmark."""

    def __init__(self, message: str, report: "ConsistencyReport"):
        super().__init__(message)
        self.report = report


class Result(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"

    @property
    def solved(self) -> bool:
        return self is not Result.UNKNOWN


@dataclass(frozen=True)
class RunRecord:
    solver: str
    config: str
    benchmark: str
    result: Result
    cpu_seconds: Fraction
    wall_seconds: Fraction
    memory_gb: Optional[Fraction] = None

    @property
    def solved(self) -> bool:
        return self.result.solved


@dataclass(frozen=True)
class ConsistencyReport:
    conflicted: Tuple[Tuple[str, Tuple[str, ...], Tuple[str, ...]], ...] = ()
    excluded: FrozenSet[str] = frozenset()


@dataclass(frozen=True)
class ScoreCard:
    solver: str
    score: int
    num_sat: int
    num_unsat: int
    mean_cpu: Optional[Fraction]
    mean_wall: Optional[Fraction]
    speedup: Optional[Fraction]
    sotac: Optional[Fraction] = None
    rank: Optional[int] = None
    tied: bool = False
    hors_concours: bool = False
    place: Optional[int] = None


@dataclass(frozen=True)
class VirtualBest:
    score: int
    num_sat: int
    num_unsat: int


# === INGEST ===

def parse_quantity(text: str) -> Fraction:
    value = Fraction(Decimal(text.strip()))
    if value < 0:
        raise ValueError("negative quantity")
    return value


def parse_run_rows(rows: Iterable[Tuple[int, Dict[str, str]]], file_path: str) -> List[RunRecord]:
    runs = []
    for line_no, row in rows:
        try:
            result = Result(row["result"].strip().lower())
        except ValueError:
            raise InputFormatError(file_path, line_no, f"invalid result {row['result']!r}")
        try:
            cpu = parse_quantity(row["cpu_seconds"])
            wall = parse_quantity(row["wall_seconds"])
        except (InvalidOperation, ValueError, OverflowError):
            raise InputFormatError(file_path, line_no, "times must be non-negative decimal seconds")
        memory_text = (row.get(MEMORY_COLUMN) or "").strip()
        try:
            memory = parse_quantity(memory_text) if memory_text else None
        except (InvalidOperation, ValueError, OverflowError):
            raise InputFormatError(file_path, line_no, "memory must be non-negative decimal gigabytes")
        runs.append(RunRecord(row["solver"].strip(), row["config"].strip(), row["benchmark"].strip(),
                              result, cpu, wall, memory))
    return runs


def read_runs_file(file_path: str) -> List[RunRecord]:
    """Read `solver,config,benchmark,result,cpu_seconds,wall_seconds[,memory_gb]` rows."""
    return parse_run_rows(read_csv_rows(file_path, RUN_COLUMNS), file_path)


def validate_budgets(runs: Iterable[RunRecord], cpu_budget: float, wall_budget: float,
                     memory_budget_gb: Optional[float] = None) -> List[str]:
    """Flag records whose times exceed the configured budgets."""
    errors = []
    for r in runs:
        if r.cpu_seconds > Fraction(str(cpu_budget)):
            errors.append(f"{r.solver}/{r.benchmark}: cpu {float(r.cpu_seconds)}s exceeds budget {cpu_budget}s")
        if r.wall_seconds > Fraction(str(wall_budget)):
            errors.append(f"{r.solver}/{r.benchmark}: wall {float(r.wall_seconds)}s exceeds budget {wall_budget}s")
        if (memory_budget_gb is not None and r.memory_gb is not None
                and r.memory_gb > Fraction(str(memory_budget_gb))):
            errors.append(f"{r.solver}/{r.benchmark}: memory {float(r.memory_gb)}GB exceeds budget {memory_budget_gb}GB")
    return errors


def group_by_entrant(runs: Iterable[RunRecord]) -> Dict[str, List[RunRecord]]:
    """Group runs by competing entrant; solvers with several configs become `<solver>-<config>`."""
    runs = list(runs)
    configs: Dict[str, Set[str]] = {}
    for r in runs:
        configs.setdefault(r.solver, set()).add(r.config)
    grouped: Dict[str, List[RunRecord]] = {}
    for r in runs:
        name = r.solver if len(configs[r.solver]) == 1 else f"{r.solver}-{r.config}"
        grouped.setdefault(name, []).append(r)
    return grouped


# === CONSISTENCY ===

def validate_consistency(runs: Sequence[RunRecord]) -> ConsistencyReport:
    """Find benchmarks claimed sat by one entrant and unsat by another; they are excluded."""
    seen: Set[Tuple[str, str, str]] = set()
    duplicates = []
    for r in runs:
        key = (r.solver, r.config, r.benchmark)
        if key in seen:
            duplicates.append(f"{r.solver}/{r.config}/{r.benchmark}")
        seen.add(key)
    if duplicates:
        raise DuplicateRunError(f"duplicate run records: {', '.join(sorted(set(duplicates)))}")

    claims: Dict[str, Dict[Result, Set[str]]] = {}
    for name, entrant_runs in group_by_entrant(runs).items():
        for r in entrant_runs:
            if r.solved:
                claims.setdefault(r.benchmark, {Result.SAT: set(), Result.UNSAT: set()})[r.result].add(name)
    conflicted = []
    for benchmark in sorted(claims):
        sat, unsat = claims[benchmark][Result.SAT], claims[benchmark][Result.UNSAT]
        if sat and unsat:
            conflicted.append((benchmark, tuple(sorted(sat)), tuple(sorted(unsat))))
    return ConsistencyReport(tuple(conflicted), frozenset(b for b, _, _ in conflicted))


def enforce_consistency(runs: Sequence[RunRecord], policy: str = "exclude") -> ConsistencyReport:
    report = validate_consistency(runs)
    if report.conflicted and policy == "abort":
        names = ", ".join(b for b, _, _ in report.conflicted)
        raise InconsistentResultsError(f"inconsistent results on: {names}", report)
    for benchmark, sat, unsat in report.conflicted:
        logger.warning("excluding %s: sat claimed by %s, unsat by %s",
                       benchmark, ", ".join(sat), ", ".join(unsat))
    return report


# === SCORING ===

def score_solver(solver: str, runs: Iterable[RunRecord], excluded: FrozenSet[str] = frozenset()) -> ScoreCard:
    """Score and mean times over solved, non-excluded runs; rank and SotAC unset."""
    solved = [r for r in runs if r.solved and r.benchmark not in excluded]
    num_sat = sum(1 for r in solved if r.result is Result.SAT)
    score = len(solved)
    if score == 0:
        return ScoreCard(solver, 0, 0, 0, None, None, None)
    mean_cpu = sum((r.cpu_seconds for r in solved), Fraction(0)) / score
    mean_wall = sum((r.wall_seconds for r in solved), Fraction(0)) / score
    speedup = mean_cpu / mean_wall if mean_wall > 0 else None
    return ScoreCard(solver, score, num_sat, score - num_sat, mean_cpu, mean_wall, speedup)


def sotac(runs: Iterable[RunRecord], excluded: FrozenSet[str] = frozenset()) -> Dict[str, Optional[Fraction]]:
    """State-of-the-art contribution: mean over solved benchmarks of 1/(number of solvers solving it)."""
    grouped = group_by_entrant(runs)
    solved_by: Dict[str, Set[str]] = {}
    for name, entrant_runs in grouped.items():
        for r in entrant_runs:
            if r.solved and r.benchmark not in excluded:
                solved_by.setdefault(name, set()).add(r.benchmark)
    solvers_per_benchmark: Dict[str, int] = {}
    for benchmarks in solved_by.values():
        for b in benchmarks:
            solvers_per_benchmark[b] = solvers_per_benchmark.get(b, 0) + 1
    out: Dict[str, Optional[Fraction]] = {}
    for name in grouped:
        benchmarks = solved_by.get(name)
        if not benchmarks:
            out[name] = None
            continue
        total = sum((Fraction(1, solvers_per_benchmark[b]) for b in benchmarks), Fraction(0))
        out[name] = total / len(benchmarks)
    return out


def virtual_best(runs: Iterable[RunRecord], excluded: FrozenSet[str] = frozenset()) -> VirtualBest:
    """The "Any solver" row: benchmarks solved by at least one entrant."""
    status: Dict[str, Result] = {}
    for r in runs:
        if r.solved and r.benchmark not in excluded:
            status.setdefault(r.benchmark, r.result)
    num_sat = sum(1 for s in status.values() if s is Result.SAT)
    return VirtualBest(len(status), num_sat, len(status) - num_sat)


def _rank_key(card: ScoreCard):
    return (-card.score, card.mean_cpu if card.mean_cpu is not None else Fraction(10 ** 18))


def rank(cards: Iterable[ScoreCard]) -> List[ScoreCard]:
    """Order by descending score then ascending mean CPU time; full ties share a rank and are flagged."""
    ordered = sorted(cards, key=lambda c: (_rank_key(c), c.solver))
    ranked: List[ScoreCard] = []
    for i, card in enumerate(ordered):
        tied_prev = i > 0 and _rank_key(ordered[i - 1]) == _rank_key(card)
        tied_next = i + 1 < len(ordered) and _rank_key(ordered[i + 1]) == _rank_key(card)
        position = ranked[-1].rank if tied_prev else i + 1
        ranked.append(replace(card, rank=position, tied=tied_prev or tied_next))
    return ranked


def mark_hors_concours(cards: Sequence[ScoreCard], flagged: Iterable[str]) -> List[ScoreCard]:
    """Keep metrics of Hors-Concours entrants but skip them when handing out places."""
    flagged = set(flagged)
    out: List[ScoreCard] = []
    place = 0
    previous: Optional[ScoreCard] = None
    for card in sorted(cards, key=lambda c: (c.rank if c.rank is not None else 0)):
        if card.solver in flagged:
            out.append(replace(card, hors_concours=True, place=None))
            continue
        if previous is not None and previous.rank == card.rank:
            current = previous.place
        else:
            current = place + 1
        place += 1
        card = replace(card, hors_concours=False, place=current)
        previous = card
        out.append(card)
    return out


def places(cards: Iterable[ScoreCard], podium: int = 3) -> List[Tuple[int, List[str]]]:
    """Winners table: place -> entrants holding it, for the first `podium` places."""
    table: Dict[int, List[str]] = {}
    for card in cards:
        if card.place is not None and card.place <= podium:
            table.setdefault(card.place, []).append(card.solver)
    return sorted(table.items())


def compare_cards(before: ScoreCard, after: ScoreCard) -> Dict[str, int]:
    """Difference in #sat/#unsat/score between two runs of one solver (e.g. after a bug fix)."""
    return {
        "num_sat": after.num_sat - before.num_sat,
        "num_unsat": after.num_unsat - before.num_unsat,
        "score": after.score - before.score,
    }


def scoreboard(runs: Sequence[RunRecord], excluded: FrozenSet[str] = frozenset(),
               hors_concours: Iterable[str] = ()) -> List[ScoreCard]:
    """Full pipeline: per-entrant cards, SotAC, ranking and places."""
    values = sotac(runs, excluded)
    cards = [replace(score_solver(name, entrant_runs, excluded), sotac=values[name])
             for name, entrant_runs in group_by_entrant(runs).items()]
    return mark_hors_concours(rank(cards), hors_concours)


# === OUTPUT ===

def round_half_up(value: Fraction, digits: int = 2) -> str:
    scale = 10 ** digits
    scaled = math.floor(value * scale + Fraction(1, 2))
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    return f"{sign}{scaled // scale}.{scaled % scale:0{digits}d}"


def format_optional(value: Optional[Fraction], digits: int = 2) -> str:
    return "" if value is None else round_half_up(value, digits)


SCORE_COLUMNS = ["rank", "place", "solver", "hors_concours", "score", "num_sat", "num_unsat",
                 "cpu_time", "wall_time", "speedup", "sotac", "tied"]


def write_scorecards_csv(cards: Sequence[ScoreCard], out_path: str):
    with open(out_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(SCORE_COLUMNS)
        for c in cards:
            writer.writerow([
                c.rank, "" if c.place is None else c.place, c.solver, str(c.hors_concours).lower(),
                c.score, c.num_sat, c.num_unsat,
                format_optional(c.mean_cpu), format_optional(c.mean_wall),
                format_optional(c.speedup), format_optional(c.sotac), str(c.tied).lower(),
            ])


def write_consistency_report(report: ConsistencyReport, budget_errors: Sequence[str], out_path: str):
    with open(out_path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(["kind", "benchmark", "sat_claimers", "unsat_claimers", "detail"])
        for benchmark, sat, unsat in report.conflicted:
            writer.writerow(["excluded", benchmark, " ".join(sat), " ".join(unsat), "conflicting sat/unsat claims"])
        for message in budget_errors:
            writer.writerow(["budget", "", "", "", message])


def run_score_module(runs_file: str, out_dir: str, conflict_policy: str = "exclude",
                     cpu_budget: float = 1800, wall_budget: float = 1800,
                     hors_concours: Sequence[str] = (), memory_budget_gb: Optional[float] = None) -> int:
    """Score a run-record file and write scorecards plus the consistency report."""
    print("\n" + "=" * 60, file=sys.stderr)
    print("🏆 SCORING MODULE", file=sys.stderr)
    print("=" * 60, file=sys.stderr)

    aborted: Optional[InconsistentResultsError] = None
    try:
        runs = read_runs_file(runs_file)
        try:
            report = enforce_consistency(runs, conflict_policy)
        except InconsistentResultsError as e:
            report, aborted = e.report, e
    except (InputFormatError, DuplicateRunError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"❌ Error reading run records: {e}", file=sys.stderr)
        return 2
    print(f"✅ Loaded {len(runs)} run records from: {runs_file}", file=sys.stderr)

    budget_errors = validate_budgets(runs, cpu_budget, wall_budget, memory_budget_gb)
    for message in budget_errors:
        logger.warning("budget violation: %s", message)

    try:
        os.makedirs(out_dir, exist_ok=True)
        write_consistency_report(report, budget_errors, os.path.join(out_dir, "consistency.csv"))
    except OSError as e:
        print(f"❌ Cannot write consistency report: {e}", file=sys.stderr)
        return 2

    if aborted is not None:
        print(f"❌ Aborting: {aborted}", file=sys.stderr)
        return 1
    if report.excluded:
        print(f"🗑️  Excluded {len(report.excluded)} benchmark(s)", file=sys.stderr)

    cards = scoreboard(runs, report.excluded, hors_concours)
    out_path = os.path.join(out_dir, "scorecards.csv")
    try:
        write_scorecards_csv(cards, out_path)
    except OSError as e:
        print(f"❌ Cannot write scorecards: {e}", file=sys.stderr)
        return 2

    for place, names in places(cards):
        print(f"🥇 Place {place}: {', '.join(names)}", file=sys.stderr)
    print(f"📁 Scorecards written to: {out_path}", file=sys.stderr)
    return 0
