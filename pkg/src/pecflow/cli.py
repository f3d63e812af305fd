"""Batch pipeline: ingest counts, fit PECs over a tau grid, emit artifacts.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
failure.
"""

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    DAY_NAMES,
    effect_curves,
    label_extremes,
    membership_proportions,
    summary_table,
    write_effects_json,
    write_labels_csv,
    write_proportions_csv,
    write_summary_csv,
)
from .datagen import generate, load_spec, write_ground_truth_csv
from .errors import DegenerateDataError, InsufficientDataError, PecflowError, SchemaError
from .pec import FitOptions, fit
from .preprocess import build_matrix, load_counts_csv, profiles_from_series, write_counts_csv

DEFAULT_TAUS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95)


@dataclass
class RunConfig:
    input: str = None
    out: str = "pecflow-out"
    taus: tuple = DEFAULT_TAUS
    k: int = 4
    grid_min: int = 10
    zero_run_min: int = 360
    knot_min: int = 60
    ridge: float = 1e-6
    restarts: int = 8
    seed: int = 0
    deflation: str = "paper"
    synth: str = None
    figures: bool = False

    def validate(self):
        if self.input is None and self.synth is None:
            raise ValueError("either --input or --synth is required")
        for tau in self.taus:
            if not 0.0 < tau < 1.0:
                raise ValueError(f"tau must lie in (0, 1), got {tau}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.deflation not in ("paper", "projection-only"):
            raise ValueError(f"unknown deflation mode {self.deflation!r}")
        if self.grid_min <= 0 or 1440 % self.grid_min:
            raise ValueError("grid-min must divide 1440")


def _tau_tag(tau):
    return f"tau_{tau:g}"


def _sha256(path):
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def _write_components_csv(model, grid, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["minute"] + [f"phi{c.order}" for c in model.components])
        for i, minute in enumerate(grid):
            writer.writerow([int(minute)] + [repr(float(c.direction[i])) for c in model.components])


def _write_scores_csv(model, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "location"] + [f"score{c.order}" for c in model.components])
        for i, pid in enumerate(model.column_ids):
            day, loc = pid
            writer.writerow(
                [day.isoformat(), loc]
                + [repr(float(c.scores[i])) for c in model.components]
            )


def run(config):
    """Execute the full pipeline; returns the process exit code."""
    try:
        config.validate()
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1

    out = Path(config.out)
    artifacts = []
    warnings = []

    try:
        if config.synth:
            spec = load_spec(config.synth)
            series_list, truth = generate(spec)
            out.mkdir(parents=True, exist_ok=True)
            counts_path = out / "counts.csv"
            write_counts_csv(series_list, counts_path)
            write_ground_truth_csv(truth, out / "ground_truth.csv")
            artifacts += ["counts.csv", "ground_truth.csv"]
            input_path = counts_path
        else:
            input_path = Path(config.input)
        series_list = load_counts_csv(input_path)
    except (SchemaError, OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as err:
        print(f"error: invalid synth spec: {err}", file=sys.stderr)
        return 1

    profiles, dropped = profiles_from_series(
        series_list,
        zero_run_min=config.zero_run_min,
        knot_min=config.knot_min,
        ridge=config.ridge,
        grid_min=config.grid_min,
    )
    if not profiles:
        print("error: no profiles survived preprocessing", file=sys.stderr)
        return 2
    Q = build_matrix(profiles)
    out.mkdir(parents=True, exist_ok=True)

    means, sds = summary_table(series_list)
    write_summary_csv(means, sds, out / "summary.csv")
    artifacts.append("summary.csv")

    location_of = {prof.profile_id: prof.location_id for prof in profiles}
    daytype_of = {prof.profile_id: DAY_NAMES[prof.day_id.weekday()] for prof in profiles}

    opts = FitOptions(
        restarts=config.restarts,
        seed=config.seed,
        deflation=config.deflation,
        on_nonconverged="keep",
    )
    try:
        for tau in config.taus:
            model = fit(Q, tau, config.k, opts)
            tag = _tau_tag(tau)
            tdir = out / tag
            tdir.mkdir(exist_ok=True)
            for comp in model.components:
                if not comp.converged:
                    warnings.append(
                        f"{tag}: component {comp.order} did not converge; best iterate kept"
                    )

            _write_components_csv(model, Q.row_grid, tdir / "components.csv")
            _write_scores_csv(model, tdir / "scores.csv")
            labels = label_extremes(model)
            write_labels_csv(labels, tdir / "labels.csv")
            write_proportions_csv(
                membership_proportions(labels, location_of),
                tdir / "proportions_location.csv",
            )
            write_proportions_csv(
                membership_proportions(labels, daytype_of),
                tdir / "proportions_daytype.csv",
            )
            curves = [effect_curves(model, k) for k in range(1, model.k + 1)]
            write_effects_json(curves, Q.row_grid, tdir / "effects.json")
            with open(tdir / "model.json", "w", encoding="utf-8") as fh:
                json.dump(model.to_dict(), fh, sort_keys=True, indent=1)
                fh.write("\n")
            artifacts += [
                f"{tag}/components.csv",
                f"{tag}/scores.csv",
                f"{tag}/labels.csv",
                f"{tag}/proportions_location.csv",
                f"{tag}/proportions_daytype.csv",
                f"{tag}/effects.json",
                f"{tag}/model.json",
            ]

            if config.figures:
                from . import report

                fdir = out / "figures"
                fdir.mkdir(exist_ok=True)
                report.render_components(model, Q.row_grid, fdir / f"components_{tag}.png")
                report.render_effect_curves(curves, Q.row_grid, fdir / f"effects_{tag}.png")
                report.render_proportions(
                    membership_proportions(labels, location_of),
                    fdir / f"proportions_{tag}.png",
                    title=f"Plus-set membership by location, {tag}",
                )
                artifacts += [
                    f"figures/components_{tag}.png",
                    f"figures/effects_{tag}.png",
                    f"figures/proportions_{tag}.png",
                ]
    except (DegenerateDataError, InsufficientDataError, np.linalg.LinAlgError, PecflowError) as err:
        print(f"error: numerical failure: {err}", file=sys.stderr)
        return 3

    manifest = {
        "version": __version__,
        "config": {
            "input": str(input_path),
            "out": str(out),
            "taus": list(config.taus),
            "k": config.k,
            "grid_min": config.grid_min,
            "zero_run_min": config.zero_run_min,
            "knot_min": config.knot_min,
            "ridge": config.ridge,
            "restarts": config.restarts,
            "seed": config.seed,
            "deflation": config.deflation,
            "synth": config.synth,
            "figures": config.figures,
        },
        "rows": {
            "series": len(series_list),
            "profiles": Q.n,
            "grid_points": Q.p,
            "dropped": {f"{d.isoformat()}/{l}": why for (d, l), why in sorted(
                dropped.items(), key=lambda kv: (kv[0][0].isoformat(), kv[0][1])
            )},
        },
        "warnings": warnings,
        "artifacts": {name: _sha256(out / name) for name in sorted(artifacts)},
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")
    if warnings:
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser():
    parser = _Parser(
        prog="pecflow",
        description="Principal expectile components of daily traffic-flow profiles.",
    )
    parser.add_argument("--input", help="counts CSV (date,location,minute,count)")
    parser.add_argument("--out", default="pecflow-out", help="output directory")
    parser.add_argument(
        "--tau", action="append", type=float, dest="taus",
        help="expectile level, repeatable (default: standard grid)",
    )
    parser.add_argument("--k", type=int, default=4, help="number of components")
    parser.add_argument("--grid-min", type=int, default=10, help="output grid spacing, minutes")
    parser.add_argument("--zero-run-min", type=int, default=360,
                        help="drop days with a zero run longer than this")
    parser.add_argument("--knot-min", type=int, default=60, help="spline knot spacing, minutes")
    parser.add_argument("--ridge", type=float, default=1e-6, help="smoothing ridge penalty")
    parser.add_argument("--restarts", type=int, default=8, help="random fixed-point restarts")
    parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--deflation", choices=["paper", "projection-only"], default="paper")
    parser.add_argument("--synth", help="generate input from a JSON synth spec file")
    parser.add_argument("--figures", action="store_true", help="also render PNG figures")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    config = RunConfig(
        input=args.input,
        out=args.out,
        taus=tuple(args.taus) if args.taus else DEFAULT_TAUS,
        k=args.k,
        grid_min=args.grid_min,
        zero_run_min=args.zero_run_min,
        knot_min=args.knot_min,
        ridge=args.ridge,
        restarts=args.restarts,
        seed=args.seed,
        deflation=args.deflation,
        synth=args.synth,
        figures=args.figures,
    )
    raise SystemExit(run(config))


if __name__ == "__main__":
    main()
