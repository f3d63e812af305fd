"""Post-fit analytics: extreme labeling, membership proportions, effect
curves, and raw-count summary tables, plus their CSV/JSON emitters."""

import csv
import json
from dataclasses import dataclass

import numpy as np

from .preprocess import hourly_equivalent

__all__ = [
    "ExtremeLabel",
    "ProportionRow",
    "EffectCurves",
    "label_extremes",
    "membership_proportions",
    "effect_curves",
    "summary_table",
    "write_labels_csv",
    "write_proportions_csv",
    "write_summary_csv",
    "write_effects_json",
]

DAY_NAMES = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"]
BLOCK_LABELS = [
    "00:00-03:59",
    "04:00-07:59",
    "08:00-11:59",
    "12:00-15:59",
    "16:00-19:59",
    "20:00-23:59",
]


@dataclass
class ExtremeLabel:
    """Membership of one profile in one component's weight partition.

    `is_extreme` marks membership in the high-weight tail set: the plus set
    for tau >= 0.5, the minus set for tau < 0.5. At tau = 0.5 neither side is
    a tail; the plus side is reported as a descriptive convention.
    """

    profile_id: object
    order: int
    tau: float
    side: str  # "plus" | "minus"
    is_extreme: bool


def label_extremes(model):
    """One label per (profile, component) from the stored weight partitions."""
    labels = []
    for comp in model.components:
        mask = comp.partition.mask(model.n)
        for i, pid in enumerate(model.column_ids):
            side = "plus" if mask[i] else "minus"
            if model.tau >= 0.5:
                extreme = side == "plus"
            else:
                extreme = side == "minus"
            labels.append(
                ExtremeLabel(
                    profile_id=pid,
                    order=comp.order,
                    tau=model.tau,
                    side=side,
                    is_extreme=extreme,
                )
            )
    return labels


@dataclass
class ProportionRow:
    group: object
    order: int
    tau: float
    plus_share: float
    minus_share: float
    count: int


def membership_proportions(labels, groups):
    """Per-group plus/minus membership shares for each (component, tau).

    `groups` maps profile id to a group key (location, day of week, ...).
    Unknown profile ids raise ValueError.
    """
    counts = {}
    for lab in labels:
        if lab.profile_id not in groups:
            raise ValueError(f"no group for profile {lab.profile_id!r}")
        key = (groups[lab.profile_id], lab.order, lab.tau)
        plus, total = counts.get(key, (0, 0))
        counts[key] = (plus + (lab.side == "plus"), total + 1)
    rows = []
    for (group, order, tau), (plus, total) in sorted(
        counts.items(), key=lambda kv: (str(kv[0][0]), kv[0][1], kv[0][2])
    ):
        rows.append(
            ProportionRow(
                group=group,
                order=order,
                tau=tau,
                plus_share=plus / total,
                minus_share=(total - plus) / total,
                count=total,
            )
        )
    return rows


@dataclass
class EffectCurves:
    """Center curve bracketed by +/- a scaled multiple of one component."""

    center: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    scale: float
    order: int
    tau: float


def effect_curves(model, k, c=None):
    """Plus/minus effect of component k around its centering curve.

    Defaults the scale to twice the standard deviation of the component's
    scores so the curves bracket the typical score range.
    """
    if not 1 <= k <= model.k:
        raise ValueError(f"k must be in 1..{model.k}")
    comp = model.components[k - 1]
    if c is None:
        c = 2.0 * float(np.std(comp.scores))
    c = float(c)
    if c < 0:
        raise ValueError("scale must be non-negative")
    offset = c * comp.direction
    return EffectCurves(
        center=comp.center.copy(),
        plus=comp.center + offset,
        minus=comp.center - offset,
        scale=c,
        order=k,
        tau=model.tau,
    )


def summary_table(series_list, interval_seconds=60):
    """Day-of-week x 4-hour-block means and SDs of hourly-equivalent counts.

    Returns (means, sds), each a 7 x 6 array ordered Mon..Sun and by time
    block; cells with no data are NaN.
    """
    buckets = [[[] for _ in range(6)] for _ in range(7)]
    for series in series_list:
        dow = series.day_id.weekday()
        flow = hourly_equivalent(series.counts, interval_seconds)
        for block in range(6):
            chunk = flow[block * 240 : (block + 1) * 240]
            buckets[dow][block].append(chunk[np.isfinite(chunk)])
    means = np.full((7, 6), np.nan)
    sds = np.full((7, 6), np.nan)
    for d in range(7):
        for b in range(6):
            if buckets[d][b]:
                vals = np.concatenate(buckets[d][b])
                if vals.size:
                    means[d, b] = vals.mean()
                    sds[d, b] = vals.std()
    return means, sds


def _fmt_id(pid):
    if isinstance(pid, tuple):
        return [str(part) for part in pid]
    return [str(pid), ""]


def write_labels_csv(labels, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "location", "component", "tau", "side", "is_extreme"])
        for lab in labels:
            writer.writerow(
                _fmt_id(lab.profile_id)
                + [lab.order, repr(lab.tau), lab.side, str(lab.is_extreme).lower()]
            )


def write_proportions_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group", "component", "tau", "plus_share", "minus_share", "count"])
        for row in rows:
            writer.writerow(
                [row.group, row.order, repr(row.tau),
                 repr(row.plus_share), repr(row.minus_share), row.count]
            )


def write_summary_csv(means, sds, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day"] + BLOCK_LABELS)
        for d, name in enumerate(DAY_NAMES):
            cells = []
            for b in range(6):
                if np.isnan(means[d, b]):
                    cells.append("")
                else:
                    cells.append(f"{means[d, b]:.1f}({sds[d, b]:.1f})")
            writer.writerow([name] + cells)


def write_effects_json(curves_by_k, grid, path):
    payload = {
        "grid_minutes": [float(g) for g in grid],
        "components": [
            {
                "component": ec.order,
                "tau": ec.tau,
                "scale": ec.scale,
                "center": ec.center.tolist(),
                "plus": ec.plus.tolist(),
                "minus": ec.minus.tolist(),
            }
            for ec in curves_by_k
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")
