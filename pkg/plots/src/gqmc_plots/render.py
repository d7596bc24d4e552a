"""Log-log figure rendering with reference slope guides.

fig1: worst-case integration error vs n (designs large, random draws small,
expected random-error lines, guides at slopes -1/2 and -7/8). fig2: covering
radius vs n (guide at slope -1/4 and the 2 n^(-1/4) log(n)^(1/4) curve).
Rendering is a pure function of the CSV bytes and the spec; no timestamps are
embedded, so reruns are byte-identical.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .records import Row, read_rows

KERNEL_MARKERS = {"K1": "o", "K2": "^"}
KERNEL_COLORS = {"K1": "tab:blue", "K2": "tab:orange"}

Anchor = "tuple[float, float] | str"


class EmptySeriesWarning(UserWarning):
    """A requested series has no rows; the element is skipped."""


@dataclass(frozen=True)
class PlotSpec:
    """What to read, what to draw, where to write."""

    inputs: tuple[Path, ...]
    output: Path
    which: str  # "fig1" | "fig2"
    guides: tuple[tuple[float, "Anchor", str], ...]

    @classmethod
    def fig1(cls, csv_path: str | Path, output: str | Path) -> "PlotSpec":
        return cls(
            inputs=(Path(csv_path),),
            output=Path(output),
            which="fig1",
            guides=(
                (-0.875, "design:K1", "slope -7/8"),
                (-0.5, "draw:K1", "slope -1/2"),
            ),
        )

    @classmethod
    def fig2(cls, csv_path: str | Path, output: str | Path) -> "PlotSpec":
        return cls(
            inputs=(Path(csv_path),),
            output=Path(output),
            which="fig2",
            guides=((-0.25, "design:", "slope -1/4"),),
        )


def expected_covering_curve(n):
    """Expected covering radius of n uniform random points on G(2,4)."""
    n = np.asarray(n, dtype=float)
    return 2.0 * n**-0.25 * np.log(n) ** 0.25


def median_anchor(pairs: list[tuple[float, float]]) -> tuple[float, float]:
    """The series' median point (by n); guides are anchored here."""
    ordered = sorted(pairs)
    return ordered[len(ordered) // 2]


def guide_alignment(pairs: list[tuple[float, float]], slope: float) -> float:
    """Largest endpoint gap, in log space, between the least-squares line of a
    series and the slope guide anchored at its median, relative to the fitted
    span. Exact power laws give 0; the automated chart check asks for < 1%."""
    x = np.log([p[0] for p in pairs])
    y = np.log([p[1] for p in pairs])
    fit_slope, fit_intercept = np.polyfit(x, y, 1)
    anchor_n, anchor_value = median_anchor(pairs)
    guide = lambda t: math.log(anchor_value) + slope * (t - math.log(anchor_n))
    ends = np.array([x.min(), x.max()])
    gaps = np.abs((fit_slope * ends + fit_intercept) - np.array([guide(t) for t in ends]))
    span = abs(fit_slope * (ends[1] - ends[0]))
    return float(gaps.max() / max(span, 1e-300))


def _series_key(row: Row) -> str:
    return f"{row.series}:{row.kernel}"


def _collect(rows: list[Row], experiment: str) -> dict[str, list[tuple[float, float]]]:
    table: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        if row.experiment != experiment:
            continue
        table.setdefault(_series_key(row), []).append((float(row.n), row.value))
    return {key: sorted(pairs) for key, pairs in table.items()}


def _draw_guides(ax, spec: PlotSpec, table, n_range) -> None:
    lo, hi = n_range
    grid = np.geomspace(lo, hi, 64)
    for slope, anchor, label in spec.guides:
        if isinstance(anchor, str):
            pairs = table.get(anchor, [])
            if not pairs:
                warnings.warn(f"no rows for guide anchor {anchor!r}", EmptySeriesWarning)
                continue
            anchor_n, anchor_value = median_anchor(pairs)
        else:
            anchor_n, anchor_value = anchor
        values = anchor_value * (grid / anchor_n) ** slope
        ax.plot(grid, values, linestyle="--", linewidth=1.0, color="0.3", zorder=1)
        ax.annotate(label, (grid[-1], values[-1]), fontsize=8, color="0.3")


def _scatter(ax, pairs, *, marker, color, size, label, filled=True):
    if not pairs:
        return
    n = [p[0] for p in pairs]
    v = [p[1] for p in pairs]
    ax.scatter(
        n,
        v,
        marker=marker,
        s=size,
        label=label,
        facecolors=color if filled else "none",
        edgecolors=color,
        linewidths=0.8,
        zorder=3 if filled else 2,
    )


def render(spec: PlotSpec) -> Path:
    """Render one figure from the experiment CSVs named in the spec."""
    rows: list[Row] = []
    for path in spec.inputs:
        rows.extend(read_rows(path))
    experiment = "wce" if spec.which == "fig1" else "covering"
    table = _collect(rows, experiment)
    if not any(table.values()):
        warnings.warn(f"no {experiment} rows in {spec.inputs}", EmptySeriesWarning)

    all_n = [n for pairs in table.values() for n, _ in pairs]
    n_range = (min(all_n), max(all_n)) if all_n else (1.0, 10.0)

    fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=150)
    ax.set_xscale("log")
    ax.set_yscale("log")
    if spec.which == "fig1":
        for kernel, marker in KERNEL_MARKERS.items():
            color = KERNEL_COLORS[kernel]
            _scatter(ax, table.get(f"design:{kernel}", []), marker=marker, color=color,
                     size=55, label=f"design / {kernel}")
            _scatter(ax, table.get(f"draw:{kernel}", []), marker=marker, color=color,
                     size=8, label=f"random / {kernel}", filled=False)
            expected = table.get(f"expected:{kernel}", [])
            if expected:
                ax.plot(*zip(*expected), color="black", linewidth=1.0,
                        label=f"expected random / {kernel}" if kernel == "K1" else None,
                        zorder=1)
        ax.set_ylabel("worst-case integration error")
        ax.set_title("Integration error: designs vs random points")
    else:
        _scatter(ax, table.get("design:", []), marker="o", color="tab:blue",
                 size=55, label="design")
        _scatter(ax, table.get("draw:", []), marker="o", color="tab:blue",
                 size=8, label="random", filled=False)
        grid = np.geomspace(*n_range, 128)
        ax.plot(grid, expected_covering_curve(grid), color="black", linewidth=1.2,
                label="2 n^(-1/4) log(n)^(1/4)", zorder=1)
        ax.set_ylabel("covering radius estimate")
        ax.set_title("Covering radius: designs vs random points")
    _draw_guides(ax, spec, table, n_range)
    ax.set_xlabel("number of points n")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(fontsize=8, loc="lower left")
    fig.tight_layout()
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, metadata={"Software": None})
    plt.close(fig)
    return spec.output
