"""Static SVG figures for sweep and comparison outputs."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed element ids and no timestamp, so reruns write identical files
_SVG_META = {"Date": None, "Creator": "goldenfa"}


def _save(fig, path, manifest_name: str):
    plt.rcParams["svg.hashsalt"] = "goldenfa"
    fig.savefig(path, format="svg", metadata={**_SVG_META, "Description": f"manifest: {manifest_name}"})
    plt.close(fig)


def plot_sweep(cells, path, manifest_name: str = "manifest.json", loglog: bool = False):
    """Mean +/- std discovery time against cluster diameter (or swarm size when
    only one diameter was swept)."""
    deltas = sorted({c.key.delta for c in cells})
    by_delta = len(deltas) > 1
    fig, ax = plt.subplots(figsize=(6, 4))
    groups: dict = {}
    for c in cells:
        series = (c.key.scheduler, c.key.n) if by_delta else (c.key.scheduler, c.key.delta)
        x = c.key.delta if by_delta else c.key.n
        st = c.stats
        groups.setdefault(series, []).append((x, st.mean, st.std))
    for (sched, other), pts in groups.items():
        pts.sort()
        label = f"{sched}, N={other}" if by_delta else f"{sched}, delta={other:g} m"
        ax.errorbar([p[0] for p in pts], [p[1] for p in pts], yerr=[p[2] for p in pts],
                    marker="o", capsize=3, label=label)
    ax.set_xlabel("cluster diameter (m)" if by_delta else "searchers")
    ax.set_ylabel("time to discovery (s)")
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.legend(fontsize="small")
    fig.tight_layout()
    _save(fig, path, manifest_name)


def plot_comparison(report, path, manifest_name: str = "manifest.json"):
    """Side-by-side box plots per cluster diameter, means marked with triangles."""
    first, second = report.schedulers
    fig, ax = plt.subplots(figsize=(7, 4))
    by_key = {c.key: c for c in report.cells}
    data, positions, ticks, labels = [], [], [], []
    for i, row in enumerate(report.rows):
        for off, sched in ((-0.2, first), (0.2, second)):
            cell = next(c for k, c in by_key.items()
                        if k.scheduler == sched and k.delta == row.delta and k.n == row.n)
            data.append(cell.times)
            positions.append(i + off)
        ticks.append(i)
        labels.append(f"{row.delta:g} m\nN={row.n}")
    ax.boxplot(data, positions=positions, widths=0.35, showmeans=True,
               meanprops={"marker": "^", "markerfacecolor": "black", "markeredgecolor": "black"})
    ax.set_xticks(ticks, labels)
    ax.set_ylabel("time to discovery (s)")
    ax.set_title(f"{first} (left) vs {second} (right)")
    fig.tight_layout()
    _save(fig, path, manifest_name)
