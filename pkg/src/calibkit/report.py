"""File artifacts: reliability diagrams, confidence histograms, sweep curves, tables.

Diagrams are emitted as standalone SVG 1.1 text so golden-file tests can
compare bytes. All numbers are formatted with fixed precision and no
timestamps are embedded, so identical inputs yield identical files.

Color scheme (fixed so golden files stay stable):
  accuracy bars      #3b6fb6 (blue)
  overconfidence gap #f2a2c0 (pink, bin confidence above accuracy)
  underconfidence gap #9673c1 (purple, bin confidence below accuracy)
  histogram bars     #6e9bd1
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from calibkit.errors import IoError, RangeError, ShapeError
from calibkit.metrics import EvalReport

ACCURACY_BLUE = "#3b6fb6"
OVERCONFIDENCE_PINK = "#f2a2c0"
UNDERCONFIDENCE_PURPLE = "#9673c1"
HISTOGRAM_BLUE = "#6e9bd1"

_PLOT = 400.0
_LEFT = 70.0
_TOP = 70.0
_WIDTH = 500
_HEIGHT = 530
_FONT = "Helvetica, Arial, sans-serif"


@dataclass(eq=False)
class DiagramSpec:
    """Everything a diagram needs: per-bin accuracy bars, gaps, and counts."""

    title: str
    ece_annotation: float
    bars: list[tuple[float, float]]
    histogram: list[int]

    def __post_init__(self):
        if len(self.bars) != len(self.histogram):
            raise ShapeError("bars and histogram must have one entry per bin")


def diagram_spec(report: EvalReport, title: str = "") -> DiagramSpec:
    table = report.table
    bars = [
        (float(a), float(c - a))
        for a, c in zip(table.accuracy, table.mean_confidence)
    ]
    return DiagramSpec(
        title=title,
        ece_annotation=report.ece,
        bars=bars,
        histogram=[int(v) for v in table.counts],
    )


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _x(v: float) -> float:
    return _LEFT + v * _PLOT


def _y(v: float) -> float:
    return _TOP + (1.0 - v) * _PLOT


def _axes(x_label: str, y_label: str) -> list[str]:
    parts = [
        f'<rect x="0" y="0" width="{_WIDTH}" height="{_HEIGHT}" fill="#ffffff"/>',
        f'<rect x="{_fmt(_LEFT)}" y="{_fmt(_TOP)}" width="{_fmt(_PLOT)}" height="{_fmt(_PLOT)}" '
        'fill="none" stroke="#444444" stroke-width="1"/>',
    ]
    for i in range(6):
        v = i / 5.0
        parts.append(
            f'<text x="{_fmt(_x(v))}" y="{_fmt(_TOP + _PLOT + 20)}" font-family="{_FONT}" '
            f'font-size="12" text-anchor="middle" fill="#333333">{v:.1f}</text>'
        )
        parts.append(
            f'<text x="{_fmt(_LEFT - 8)}" y="{_fmt(_y(v) + 4)}" font-family="{_FONT}" '
            f'font-size="12" text-anchor="end" fill="#333333">{v:.1f}</text>'
        )
        parts.append(
            f'<line x1="{_fmt(_x(v))}" y1="{_fmt(_TOP + _PLOT)}" x2="{_fmt(_x(v))}" '
            f'y2="{_fmt(_TOP + _PLOT + 4)}" stroke="#444444" stroke-width="1"/>'
        )
        parts.append(
            f'<line x1="{_fmt(_LEFT - 4)}" y1="{_fmt(_y(v))}" x2="{_fmt(_LEFT)}" '
            f'y2="{_fmt(_y(v))}" stroke="#444444" stroke-width="1"/>'
        )
    parts.append(
        f'<text x="{_fmt(_LEFT + _PLOT / 2)}" y="{_fmt(_TOP + _PLOT + 45)}" font-family="{_FONT}" '
        f'font-size="14" text-anchor="middle" fill="#333333">{x_label}</text>'
    )
    parts.append(
        f'<text x="20" y="{_fmt(_TOP + _PLOT / 2)}" font-family="{_FONT}" font-size="14" '
        f'text-anchor="middle" fill="#333333" '
        f'transform="rotate(-90 20 {_fmt(_TOP + _PLOT / 2)})">{y_label}</text>'
    )
    return parts


def _document(parts: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">'
    )
    return head + "\n" + "\n".join(parts) + "\n</svg>\n"


def _write_text(text: str, path: str | Path) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _title_and_ece(spec: DiagramSpec) -> list[str]:
    parts = []
    if spec.title:
        parts.append(
            f'<text x="{_fmt(_WIDTH / 2)}" y="30" font-family="{_FONT}" font-size="16" '
            f'text-anchor="middle" fill="#111111">{_escape(spec.title)}</text>'
        )
    parts.append(
        f'<text x="{_fmt(_LEFT + 10)}" y="{_fmt(_TOP + 22)}" font-family="{_FONT}" '
        f'font-size="14" fill="#111111">ECE = {100.0 * spec.ece_annotation:.2f}%</text>'
    )
    return parts


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_reliability_svg(report: EvalReport, path: str | Path, title: str = "") -> None:
    """Reliability diagram: accuracy bars, signed gap segments, identity line."""
    spec = diagram_spec(report, title)
    m = len(spec.bars)
    parts = _axes("confidence", "accuracy")
    width = _PLOT / m
    for i, ((acc, gap), count) in enumerate(zip(spec.bars, spec.histogram)):
        x0 = _LEFT + i * width
        if acc > 0:
            parts.append(
                f'<rect x="{_fmt(x0)}" y="{_fmt(_y(acc))}" width="{_fmt(width)}" '
                f'height="{_fmt(acc * _PLOT)}" fill="{ACCURACY_BLUE}" '
                'stroke="#2a4f80" stroke-width="0.5"/>'
            )
        if count > 0 and gap != 0.0:
            color = OVERCONFIDENCE_PINK if gap > 0 else UNDERCONFIDENCE_PURPLE
            top = max(acc, acc + gap)
            parts.append(
                f'<rect x="{_fmt(x0)}" y="{_fmt(_y(top))}" width="{_fmt(width)}" '
                f'height="{_fmt(abs(gap) * _PLOT)}" fill="{color}" fill-opacity="0.85" '
                'stroke="#777777" stroke-width="0.5"/>'
            )
    parts.append(
        f'<line x1="{_fmt(_x(0.0))}" y1="{_fmt(_y(0.0))}" x2="{_fmt(_x(1.0))}" '
        f'y2="{_fmt(_y(1.0))}" stroke="#333333" stroke-width="1.5" stroke-dasharray="6,4"/>'
    )
    parts.extend(_title_and_ece(spec))
    _write_text(_document(parts), path)


def render_histogram_svg(report: EvalReport, path: str | Path, title: str = "") -> None:
    """Confidence histogram: per-bin sample fractions, N annotation."""
    spec = diagram_spec(report, title)
    m = len(spec.histogram)
    n = sum(spec.histogram)
    parts = _axes("confidence", "fraction of samples")
    width = _PLOT / m
    for i, count in enumerate(spec.histogram):
        if count == 0:
            continue
        frac = count / n
        x0 = _LEFT + i * width
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(_y(frac))}" width="{_fmt(width)}" '
            f'height="{_fmt(frac * _PLOT)}" fill="{HISTOGRAM_BLUE}" '
            'stroke="#2a4f80" stroke-width="0.5"/>'
        )
    if spec.title:
        parts.append(
            f'<text x="{_fmt(_WIDTH / 2)}" y="30" font-family="{_FONT}" font-size="16" '
            f'text-anchor="middle" fill="#111111">{_escape(spec.title)}</text>'
        )
    parts.append(
        f'<text x="{_fmt(_LEFT + 10)}" y="{_fmt(_TOP + 22)}" font-family="{_FONT}" '
        f'font-size="14" fill="#111111">N = {n}</text>'
    )
    _write_text(_document(parts), path)


def render_sweep_csv(trace: list[tuple[float, float, float]], path: str | Path) -> None:
    """CSV of (temperature, ece, nll) rows, ascending in T, LF line endings.

    Values carry nine digits after the decimal point, so a parse-back
    reproduces them to 1e-9.
    """
    if not trace:
        raise RangeError("sweep trace must be non-empty")
    lines = ["temperature,ece,nll"]
    for t, e, v in sorted(trace, key=lambda row: row[0]):
        lines.append(f"{t:.9f},{e:.9f},{v:.9f}")
    _write_text("\n".join(lines) + "\n", path)


def render_comparison_table(
    rows: list[tuple[str, float | None, float | None, float | None]],
    path_prefix: str | Path,
) -> tuple[Path, Path]:
    """Aligned text table plus CSV of per-model ECE percentages.

    Each row is (model identity "arch/pretrain", uncalibrated ECE,
    zero-shot-enabled TS ECE, supervised TS ECE), already in percent.
    Missing entries render as "-". Writes <prefix>.txt and <prefix>.csv.
    """
    if not rows:
        raise RangeError("comparison table needs at least one row")
    header = ["Architecture", "Pre-Train Data", "CLIP", "CLIP + 0-Shot-Enabled TS", "CLIP + TS"]
    cells = []
    for identity, ece_uncal, ece_zsts, ece_ts in rows:
        arch, _, pretrain = identity.partition("/")
        cells.append(
            [
                arch,
                pretrain or "-",
                _pct(ece_uncal),
                _pct(ece_zsts),
                _pct(ece_ts),
            ]
        )

    widths = [max(len(header[j]), *(len(r[j]) for r in cells)) for j in range(5)]

    def line(row: list[str]) -> str:
        left = [row[0].ljust(widths[0]), row[1].ljust(widths[1])]
        right = [row[j].rjust(widths[j]) for j in range(2, 5)]
        return "  ".join(left + right).rstrip()

    text_lines = [line(header), "-" * (sum(widths) + 2 * 4)]
    text_lines.extend(line(r) for r in cells)

    prefix = Path(path_prefix)
    txt_path = prefix.with_name(prefix.name + ".txt")
    csv_path = prefix.with_name(prefix.name + ".csv")
    _write_text("\n".join(text_lines) + "\n", txt_path)
    try:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(
                ["architecture", "pretrain_dataset", "clip", "clip_zero_shot_enabled_ts", "clip_ts"]
            )
            writer.writerows(cells)
    except OSError as exc:
        raise IoError(f"cannot write {csv_path}: {exc}") from exc
    return txt_path, csv_path


def _pct(v: float | None) -> str:
    return "-" if v is None else f"{v:.2f}"
