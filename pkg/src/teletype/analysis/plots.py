"""Static SVG renderings of metric tables."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from teletype.analysis.tables import Table, format_cell  # noqa: E402

MODE_COLORS = {"nocheck": "tab:gray", "nonstrict": "tab:blue", "strict": "tab:red"}


def _numeric(cell):
    try:
        return float(format_cell(cell))
    except ValueError:
        return None


def _density_scatter(table: Table, ax):
    modes = table.column("mode")
    xs = table.column("t_rel_s")
    ys = table.column("delta_density")
    for mode, color in MODE_COLORS.items():
        pts = [(float(x), float(y)) for m, x, y in zip(modes, xs, ys) if m == mode]
        if pts:
            ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=6, color=color, label=mode)
    ax.set_xlabel("seconds since first session record")
    ax.set_ylabel("change in errors per line")
    if table.rows:
        ax.legend()


def _bars(table: Table, ax):
    label_cols = [c for c in table.columns if all(isinstance(v, str) for v in table.column(c))]
    value_cols = [
        c for c in table.columns
        if c not in label_cols and not c.endswith("pct") and c != "rank"
        and any(_numeric(v) is not None for v in table.column(c))
    ]
    labels = ["/".join(str(row[table.columns.index(c)]) for c in label_cols) for row in table.rows]
    width = 0.8 / max(1, len(value_cols))
    for j, col in enumerate(value_cols):
        vals = [_numeric(v) or 0.0 for v in table.column(col)]
        ax.bar([i + j * width for i in range(len(vals))], vals, width=width, label=col)
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(labels))])
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    if value_cols and table.rows:
        ax.legend(fontsize=7)


def plot_table(table: Table, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if table.name == "density_deltas":
        _density_scatter(table, ax)
    else:
        _bars(table, ax)
    ax.set_title(table.name.replace("_", " "))
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
