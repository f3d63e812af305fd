"""Raw per-minute counts to smoothed flow-profile matrix.

Pipeline: validate the CSV of minute counts, drop detector-days with long
zero runs or too many missing minutes, convert counts to vehicles/hour,
smooth with a non-negative M-spline fit, and evaluate on a coarse time grid.
"""

import csv
import datetime as dt
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .errors import InsufficientDataError, SchemaError
from .pec import ProfileMatrix
from .splines import SplineBasis, mspline_basis, uniform_knots

__all__ = [
    "MINUTES_PER_DAY",
    "RawCountSeries",
    "FlowProfile",
    "hourly_equivalent",
    "longest_zero_run",
    "filter_zero_runs",
    "smooth_profile",
    "build_matrix",
    "load_counts_csv",
    "write_counts_csv",
    "default_basis",
    "profiles_from_series",
]

MINUTES_PER_DAY = 1440
CSV_HEADER = ["date", "location", "minute", "count"]


@dataclass
class RawCountSeries:
    """One detector-day of per-minute vehicle counts; NaN marks missing."""

    day_id: dt.date
    location_id: str
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.shape != (MINUTES_PER_DAY,):
            raise ValueError(f"counts must have length {MINUTES_PER_DAY}")
        present = self.counts[np.isfinite(self.counts)]
        if np.any(present < 0):
            raise ValueError("counts must be non-negative")

    @property
    def profile_id(self):
        return (self.day_id, self.location_id)


@dataclass
class FlowProfile:
    """Smoothed hourly-equivalent flow curve on the coarse grid."""

    values: np.ndarray
    grid: np.ndarray
    day_id: dt.date
    location_id: str

    @property
    def profile_id(self):
        return (self.day_id, self.location_id)


def hourly_equivalent(count, interval_seconds=60):
    """Rescale a count over an aggregation interval to vehicles per hour."""
    if interval_seconds <= 0:
        raise ValueError("interval_seconds must be positive")
    return count * 3600.0 / interval_seconds


def longest_zero_run(counts):
    """Length of the longest run of consecutive zero counts (missing breaks a run)."""
    run = best = 0
    for c in np.asarray(counts, dtype=float):
        if c == 0.0:
            run += 1
            best = max(best, run)
        else:
            run = 0
    return best


def filter_zero_runs(series, max_zero_minutes=360):
    """True if the series should be kept.

    Drops a detector-day only when some zero run strictly exceeds the
    threshold (a run of exactly six hours is kept).
    """
    return longest_zero_run(series.counts) <= max_zero_minutes


def default_basis(knot_minutes=60, degree=3):
    """Cubic M-spline basis on uniform knots over the day, evaluated per minute."""
    knots = uniform_knots(MINUTES_PER_DAY, knot_minutes)
    minutes = np.arange(MINUTES_PER_DAY, dtype=float)
    return mspline_basis(knots, degree=degree, eval_points=minutes)


def smooth_profile(values, basis, ridge=1e-6, grid=None, day_id=None, location_id=None):
    """Fit a non-negative spline to hourly-equivalent minute values.

    Solves min ||y - B b||^2 + ridge_eff ||b||^2 with b >= 0 over the present
    minutes, where ridge_eff scales the nominal ridge by the mean diagonal of
    B^T B so the penalty is unit-free. The fitted curve is evaluated on
    `grid` (default: 10-minute left edges).
    """
    y = np.asarray(values, dtype=float)
    if y.shape != (MINUTES_PER_DAY,):
        raise ValueError(f"values must have length {MINUTES_PER_DAY}")
    present = np.isfinite(y)
    if np.any(y[present] < 0):
        raise ValueError("flow values must be non-negative")
    if present.mean() < 0.5:
        raise InsufficientDataError(
            f"only {int(present.sum())} of {MINUTES_PER_DAY} minutes present"
        )
    if grid is None:
        grid = np.arange(0, MINUTES_PER_DAY, 10, dtype=float)
    grid = np.asarray(grid, dtype=float)

    if isinstance(basis, SplineBasis) and basis.basis_matrix.shape[0] == MINUTES_PER_DAY:
        B_full = basis.basis_matrix
    else:
        B_full = basis.design(np.arange(MINUTES_PER_DAY, dtype=float))
    B = B_full[present]
    m = B.shape[1]
    if ridge > 0:
        lam = ridge * np.einsum("ij,ij->", B, B) / m
        A = np.vstack([B, np.sqrt(lam) * np.eye(m)])
        b = np.concatenate([y[present], np.zeros(m)])
    else:
        A, b = B, y[present]
    beta, _ = nnls(A, b, maxiter=10 * m)
    fitted = basis.design(grid) @ beta
    return FlowProfile(values=fitted, grid=grid, day_id=day_id, location_id=location_id)


def build_matrix(profiles):
    """Stack flow profiles column-wise into a ProfileMatrix."""
    if not profiles:
        raise ValueError("need at least one profile")
    grid = profiles[0].grid
    for prof in profiles[1:]:
        if prof.grid.shape != grid.shape or not np.array_equal(prof.grid, grid):
            raise ValueError("profiles are on inconsistent grids")
    data = np.column_stack([prof.values for prof in profiles])
    ids = [prof.profile_id for prof in profiles]
    return ProfileMatrix(data, row_grid=grid, column_ids=ids)


def load_counts_csv(path):
    """Read the per-minute counts CSV into RawCountSeries, in file order.

    Schema: header `date,location,minute,count`; `minute` in 0..1439; `count`
    a non-negative integer or empty for missing. Violations raise SchemaError
    carrying the offending 1-based line number.
    """
    table = {}
    seen = {}
    order = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}:1: empty file, expected header "
                              f"{','.join(CSV_HEADER)}", line=1)
        if [h.strip() for h in header] != CSV_HEADER:
            raise SchemaError(
                f"{path}:1: bad header {header!r}, expected {CSV_HEADER}", line=1
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise SchemaError(f"{path}:{lineno}: expected 4 fields, got {len(row)}",
                                  line=lineno)
            date_s, loc, minute_s, count_s = (f.strip() for f in row)
            try:
                day = dt.date.fromisoformat(date_s)
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: bad date {date_s!r}", line=lineno)
            if not loc:
                raise SchemaError(f"{path}:{lineno}: empty location", line=lineno)
            try:
                minute = int(minute_s)
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: bad minute {minute_s!r}", line=lineno)
            if not 0 <= minute < MINUTES_PER_DAY:
                raise SchemaError(f"{path}:{lineno}: minute {minute} out of range 0..1439",
                                  line=lineno)
            if count_s == "":
                count = np.nan
            else:
                try:
                    count = int(count_s)
                except ValueError:
                    raise SchemaError(f"{path}:{lineno}: bad count {count_s!r}", line=lineno)
                if count < 0:
                    raise SchemaError(f"{path}:{lineno}: negative count {count}", line=lineno)
            key = (day, loc)
            if key not in table:
                table[key] = np.full(MINUTES_PER_DAY, np.nan)
                seen[key] = set()
                order.append(key)
            if minute in seen[key]:
                raise SchemaError(
                    f"{path}:{lineno}: duplicate entry for {day} {loc} minute {minute}",
                    line=lineno,
                )
            seen[key].add(minute)
            table[key][minute] = count
    if not order:
        raise SchemaError(f"{path}: no data rows", line=None)
    return [RawCountSeries(day_id=d, location_id=l, counts=table[(d, l)]) for d, l in order]


def write_counts_csv(series_list, path):
    """Write RawCountSeries back out in the canonical CSV schema."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for series in series_list:
            day = series.day_id.isoformat()
            for minute, count in enumerate(series.counts):
                field = "" if not np.isfinite(count) else str(int(count))
                writer.writerow([day, series.location_id, minute, field])


def profiles_from_series(
    series_list,
    *,
    zero_run_min=360,
    knot_min=60,
    degree=3,
    ridge=1e-6,
    grid_min=10,
    interval_seconds=60,
):
    """Full preprocessing: filter, convert to veh/h, smooth, and report drops.

    Returns (profiles, dropped) where dropped maps profile ids to the reason
    they were excluded.
    """
    basis = default_basis(knot_minutes=knot_min, degree=degree)
    grid = np.arange(0, MINUTES_PER_DAY, grid_min, dtype=float)
    profiles = []
    dropped = {}
    for series in series_list:
        if not filter_zero_runs(series, max_zero_minutes=zero_run_min):
            dropped[series.profile_id] = "zero-run"
            continue
        flow = hourly_equivalent(series.counts, interval_seconds)
        try:
            prof = smooth_profile(
                flow,
                basis,
                ridge=ridge,
                grid=grid,
                day_id=series.day_id,
                location_id=series.location_id,
            )
        except InsufficientDataError:
            dropped[series.profile_id] = "missing-data"
            continue
        profiles.append(prof)
    return profiles, dropped
