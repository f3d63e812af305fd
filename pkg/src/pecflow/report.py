"""Figure rendering for fitted models, written next to the delimited output."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_components", "render_effect_curves", "render_proportions"]

_COMP_COLORS = ["tab:red", "tab:blue", "tab:green", "tab:purple"]


def _hours(grid):
    return np.asarray(grid, dtype=float) / 60.0


def render_components(model, grid, path):
    """Loadings of every component over the day."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    hours = _hours(grid)
    for idx, comp in enumerate(model.components):
        color = _COMP_COLORS[idx % len(_COMP_COLORS)]
        ax.plot(hours, comp.direction, color=color, label=f"component {comp.order}")
    ax.axhline(0.0, color="0.7", lw=0.8)
    ax.set_xlabel("hour of day")
    ax.set_ylabel("loading")
    ax.set_title(f"Principal expectile components, tau={model.tau:g}")
    ax.set_xlim(0, 24)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_effect_curves(curves_by_k, grid, path):
    """Center curve with +/- component multiples, one panel per component."""
    n = len(curves_by_k)
    fig, axes = plt.subplots(n, 1, figsize=(8, 2.4 * n), sharex=True, squeeze=False)
    hours = _hours(grid)
    for idx, ec in enumerate(curves_by_k):
        ax = axes[idx, 0]
        color = _COMP_COLORS[idx % len(_COMP_COLORS)]
        ax.plot(hours, ec.center, color="black", lw=1.2, label="center")
        ax.plot(hours, ec.plus, color=color, lw=1.0, label="++")
        ax.plot(hours, ec.minus, color=color, lw=1.0, ls="--", label="--")
        ax.set_ylabel(f"k={ec.order}\nveh/h", fontsize=8)
        ax.legend(fontsize=7, loc="upper right")
    axes[-1, 0].set_xlabel("hour of day")
    axes[-1, 0].set_xlim(0, 24)
    fig.suptitle(f"Effect curves, tau={curves_by_k[0].tau:g}", fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_proportions(rows, path, title="Plus-set membership by group"):
    """Stacked plus/minus shares per group, one bar cluster per component."""
    groups = sorted({str(r.group) for r in rows})
    orders = sorted({r.order for r in rows})
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(groups) * len(orders)), 4))
    width = 0.8 / max(1, len(orders))
    x = np.arange(len(groups))
    lookup = {(str(r.group), r.order): r for r in rows}
    for j, order in enumerate(orders):
        color = _COMP_COLORS[(order - 1) % len(_COMP_COLORS)]
        shares = [lookup[(g, order)].plus_share if (g, order) in lookup else 0.0 for g in groups]
        ax.bar(x + j * width, shares, width=width, color=color, label=f"k={order}")
    ax.set_xticks(x + 0.4 - width / 2)
    ax.set_xticklabels(groups, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("share of profiles in plus set")
    ax.set_ylim(0, 1)
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
