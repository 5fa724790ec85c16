"""
CHC-COMP Toolkit - Report Module
Renders scoreboards as markdown tables and emits cactus-plot data as CSV and standalone SVG.
"""

import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape, quoteattr

from chc_scoring_module import (
    DuplicateRunError, InconsistentResultsError, RunRecord, ScoreCard, VirtualBest,
    enforce_consistency, format_optional, group_by_entrant, read_runs_file, round_half_up, scoreboard, virtual_best,
)
from chc_config_module import InputFormatError
from chc_model_module import exact_decimal

logger = logging.getLogger(__name__)

TABLE_HEADER = ["Solver", "Score", "#sat", "#unsat", "CPU time (s)", "Wall-clock (s)", "Speedup", "SotAC"]
CACTUS_COLUMNS = ["solver", "solved_count", "time_seconds"]
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf"]


@dataclass(frozen=True)
class CactusSeries:
    solver: str
    points: Tuple[Tuple[int, Fraction], ...]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class CactusAxis:
    log_scale: bool = False
    epsilon: float = 0.01
    width: int = 720
    height: int = 450
    margin: int = 60
    legend_width: int = 200


# === CACTUS DATA ===

def cactus(solver: str, runs: Iterable[RunRecord], time_kind: str = "cpu",
           excluded: FrozenSet[str] = frozenset()) -> CactusSeries:
    """k-th point is (k, k-th smallest time) over the solver's solved, non-excluded runs."""
    if time_kind not in ("cpu", "wall"):
        raise ValueError(f"Invalid time kind: {time_kind}. Must be one of: cpu, wall")
    times = sorted(r.cpu_seconds if time_kind == "cpu" else r.wall_seconds
                   for r in runs if r.solved and r.benchmark not in excluded)
    return CactusSeries(solver, tuple((i, t) for i, t in enumerate(times, 1)))


def cactus_all(runs: Sequence[RunRecord], time_kind: str = "cpu",
               excluded: FrozenSet[str] = frozenset()) -> List[CactusSeries]:
    return [cactus(name, entrant_runs, time_kind, excluded)
            for name, entrant_runs in sorted(group_by_entrant(runs).items())]


def _exact_seconds(seconds: Fraction) -> str:
    # times read from decimal text always terminate; other rationals get microseconds
    return exact_decimal(seconds) or round_half_up(seconds, 6)


def render_cactus_csv(series: Sequence[CactusSeries]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    writer.writerow(CACTUS_COLUMNS)
    for s in series:
        for count, seconds in s.points:
            writer.writerow([s.solver, count, _exact_seconds(seconds)])
    return out.getvalue()


# === TABLE ===

def _display_name(card: ScoreCard) -> str:
    return f"{card.solver} (HC)" if card.hors_concours else card.solver


def _cell(value: Optional[Fraction]) -> str:
    return format_optional(value) or "-"


def render_table(cards: Sequence[ScoreCard], any_solver: Optional[VirtualBest] = None) -> str:
    """Markdown scoreboard in rank order, with an optional closing "Any solver" row."""
    lines = [
        "| " + " | ".join(TABLE_HEADER) + " |",
        "|" + "|".join(["---"] + ["---:"] * (len(TABLE_HEADER) - 1)) + "|",
    ]
    for card in cards:
        cells = [_display_name(card).replace("|", "\\|"), str(card.score), str(card.num_sat), str(card.num_unsat),
                 _cell(card.mean_cpu), _cell(card.mean_wall), _cell(card.speedup), _cell(card.sotac)]
        lines.append("| " + " | ".join(cells) + " |")
    if cards and any_solver is not None:
        cells = ["Any solver", str(any_solver.score), str(any_solver.num_sat), str(any_solver.num_unsat)]
        lines.append("| " + " | ".join(cells + [""] * 4) + " |")
    return "\n".join(lines) + "\n"


# === SVG ===

def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _TimeScale:
    def __init__(self, axis: CactusAxis, max_time: float):
        self.axis = axis
        self.top = max(max_time, axis.epsilon * 10) if axis.log_scale else max(max_time, 1.0)
        self.plot_height = axis.height - 2 * axis.margin

    def y(self, seconds: float) -> float:
        if self.axis.log_scale:
            low = math.log10(self.axis.epsilon)
            value = math.log10(max(seconds, self.axis.epsilon))
            frac = (value - low) / (math.log10(self.top) - low)
        else:
            frac = seconds / self.top
        return self.axis.height - self.axis.margin - frac * self.plot_height

    def ticks(self) -> List[float]:
        if self.axis.log_scale:
            first = math.ceil(math.log10(self.axis.epsilon))
            last = math.floor(math.log10(self.top))
            return [10.0 ** e for e in range(first, last + 1)]
        step = self.top / 5
        return [step * i for i in range(6)]


def _tick_label(seconds: float) -> str:
    return f"{seconds:g}"


def render_cactus_svg(series: Sequence[CactusSeries], axis: CactusAxis = CactusAxis()) -> str:
    """Standalone SVG with one step polyline per solver and a legend."""
    drawn = []
    for s in series:
        if not s.points:
            logger.warning("skipping empty cactus series for %s", s.solver)
            continue
        drawn.append(s)

    max_count = max((len(s) for s in drawn), default=0)
    max_time = max((float(s.points[-1][1]) for s in drawn), default=0.0)
    scale = _TimeScale(axis, max_time)
    left, bottom = axis.margin, axis.height - axis.margin
    right = axis.width - axis.legend_width
    plot_width = right - left
    x_top = max(max_count, 1)

    def x(count: int) -> float:
        return left + count / x_top * plot_width

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{axis.width}" height="{axis.height}" '
        f'viewBox="0 0 {axis.width} {axis.height}">',
        f'<rect x="0" y="0" width="{axis.width}" height="{axis.height}" fill="white"/>',
        f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{bottom}" x2="{left}" y2="{axis.margin}" stroke="black"/>',
    ]

    x_step = max(1, math.ceil(x_top / 10))
    for count in range(0, x_top + 1, x_step):
        px = _fmt(x(count))
        out.append(f'<line x1="{px}" y1="{bottom}" x2="{px}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{px}" y="{bottom + 18}" font-size="11" text-anchor="middle">{count}</text>')
    for seconds in scale.ticks():
        py = _fmt(scale.y(seconds))
        out.append(f'<line x1="{left - 5}" y1="{py}" x2="{right}" y2="{py}" stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{py}" font-size="11" text-anchor="end" '
                   f'dominant-baseline="middle">{_tick_label(seconds)}</text>')
    out.append(f'<text x="{_fmt((left + right) / 2)}" y="{axis.height - 15}" font-size="12" '
               f'text-anchor="middle">Number of solved benchmarks</text>')
    scale_name = "log" if axis.log_scale else "linear"
    out.append(f'<text x="15" y="{_fmt(axis.height / 2)}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 15 {_fmt(axis.height / 2)})">Time (s, {scale_name})</text>')

    for i, s in enumerate(drawn):
        color = PALETTE[i % len(PALETTE)]
        coords = [(x(0), scale.y(float(s.points[0][1])))]
        previous_y = coords[0][1]
        for count, seconds in s.points:
            py = scale.y(float(seconds))
            coords.append((x(count), previous_y))
            coords.append((x(count), py))
            previous_y = py
        points = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in coords)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                   f'data-solver={quoteattr(s.solver)} points="{points}"/>')
        ly = axis.margin + 18 * i
        out.append(f'<line x1="{right + 15}" y1="{ly}" x2="{right + 40}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{right + 46}" y="{ly}" font-size="11" dominant-baseline="middle">'
                   f'{escape(s.solver)}</text>')

    out.append('</svg>')
    return "\n".join(out) + "\n"


# === MODULE ENTRY ===

def run_report_module(runs_file: str, out_dir: str, conflict_policy: str = "exclude",
                      hors_concours: Sequence[str] = (), cactus_axis: str = "linear",
                      log_epsilon: float = 0.01, time_kind: str = "cpu") -> int:
    """Recompute the scoreboard from run records and write results.md, cactus.csv and cactus.svg."""
    print("\n" + "=" * 60, file=sys.stderr)
    print("📈 REPORT MODULE", file=sys.stderr)
    print("=" * 60, file=sys.stderr)

    try:
        runs = read_runs_file(runs_file)
        report = enforce_consistency(runs, conflict_policy)
    except (InputFormatError, DuplicateRunError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except InconsistentResultsError as e:
        print(f"❌ Aborting: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"❌ Error reading run records: {e}", file=sys.stderr)
        return 2

    cards = scoreboard(runs, report.excluded, hors_concours)
    table = render_table(cards, virtual_best(runs, report.excluded))
    series = cactus_all(runs, time_kind, report.excluded)
    axis = CactusAxis(log_scale=cactus_axis == "log", epsilon=log_epsilon)

    try:
        os.makedirs(out_dir, exist_ok=True)
        outputs = {
            "results.md": table,
            "cactus.csv": render_cactus_csv(series),
            "cactus.svg": render_cactus_svg(series, axis),
        }
        for name, text in outputs.items():
            with open(os.path.join(out_dir, name), 'w', encoding='utf-8', newline='') as f:
                f.write(text)
    except OSError as e:
        print(f"❌ Cannot write report to {out_dir}: {e}", file=sys.stderr)
        return 2

    print(f"✅ Rendered {len(cards)} solver(s), {sum(len(s) for s in series)} cactus point(s)", file=sys.stderr)
    print(f"📁 Report written to: {out_dir}", file=sys.stderr)
    return 0
