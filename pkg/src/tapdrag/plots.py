"""Figure rendering for study statistics.

The stats report can be written as a figure next to its CSV: completion
times as box plots whose whiskers sit at the lowest and highest
measured value (no outlier clipping), with per-condition failure rates
as a bar panel underneath.
"""
from __future__ import annotations


def _label(stats) -> str:
    if not stats.key:
        return "all"
    return "\n".join(v for _, v in stats.key)


def render_condition_stats(stats_list, path, *, title: str | None = None) -> None:
    """Render a list of ConditionStats to an image file."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not stats_list:
        raise ValueError("nothing to plot")

    boxes = [
        {
            "label": _label(s),
            "whislo": s.five_number.min,
            "q1": s.five_number.q1,
            "med": s.five_number.median,
            "q3": s.five_number.q3,
            "whishi": s.five_number.max,
            "mean": s.mean_time_s,
            "fliers": [],
        }
        for s in stats_list
    ]
    fig, (ax_time, ax_fail) = plt.subplots(
        2, 1, figsize=(max(6.0, 1.2 * len(boxes) + 2.0), 7.0), height_ratios=[3, 1], sharex=True
    )
    ax_time.bxp(boxes, showmeans=True, meanline=True, whiskerprops={"linestyle": "-"})
    ax_time.set_ylabel("completion time (s)")
    ax_time.grid(axis="y", alpha=0.3)
    if title:
        ax_time.set_title(title)

    xs = range(1, len(stats_list) + 1)
    ax_fail.bar(xs, [s.failure_rate for s in stats_list], width=0.6, color="#b44")
    ax_fail.set_ylabel("failure rate")
    ax_fail.set_ylim(0.0, max(0.12, max(s.failure_rate for s in stats_list) * 1.3))
    ax_fail.grid(axis="y", alpha=0.3)
    ax_fail.set_xticks(list(xs))
    ax_fail.set_xticklabels([_label(s) for s in stats_list])

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
