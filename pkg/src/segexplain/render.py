"""Static SVG rendering of an explain result: overall trend, cut markers,
and each segment's top-explanation trendlines."""

from __future__ import annotations

from datetime import date

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .pipeline import EvolvingExplanations

_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def render_svg(result: EvolvingExplanations, path: str) -> None:
    cube = result.cube
    stamps = cube.timestamps
    xs = list(range(cube.n))
    fig, ax = plt.subplots(figsize=(11, 4.5))
    ax.plot(xs, cube.overall_values, color="#222222", linewidth=1.8, label="overall")

    color_of: dict[str, str] = {}
    for seg, top in zip(result.scheme.segments(), result.per_segment):
        span = list(range(seg.start, seg.end + 1))
        for scored in top.ranked:
            label = scored.explanation.label()
            if label not in color_of:
                color_of[label] = _COLORS[len(color_of) % len(_COLORS)]
            row = cube.index_of(scored.explanation)
            ax.plot(
                span,
                cube.values[row, seg.start : seg.end + 1],
                color=color_of[label],
                linewidth=1.2,
                label=f"{label} ({scored.tau})",
            )
    for cut in result.scheme.interior:
        ax.axvline(cut, color="#999999", linestyle="--", linewidth=0.8)

    ticks = result.scheme.cuts
    ax.set_xticks(list(ticks))
    ax.set_xticklabels([_fmt(stamps[c]) for c in ticks], rotation=30, fontsize=8)
    ax.set_title(f"evolving explanations ({result.chosen_k} segments)")
    handles, labels = ax.get_legend_handles_labels()
    dedup = dict(zip(labels, handles))
    ax.legend(dedup.values(), dedup.keys(), fontsize=7, ncol=2, loc="upper left")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _fmt(stamp) -> str:
    return stamp.isoformat() if isinstance(stamp, date) else str(stamp)
