import json

import numpy as np
import pytest

from pecflow.cli import RunConfig, build_parser, run
from pecflow.datagen import SynthSpec, generate
from pecflow.preprocess import write_counts_csv


@pytest.fixture(scope="module")
def counts_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "counts.csv"
    series, _ = generate(SynthSpec(n_days=12, n_locations=4, seed=21))
    write_counts_csv(series, path)
    return path


def read_manifest(out):
    return json.loads((out / "manifest.json").read_text())


class TestArgumentHandling:
    def test_parser_defaults(self):
        args = build_parser().parse_args(["--input", "x.csv"])
        assert args.k == 4 and args.deflation == "paper"

    def test_usage_error_exit_code(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            build_parser().parse_args(["--k", "not-an-int"])
        assert excinfo.value.code == 1

    def test_bad_tau_config(self, counts_csv, tmp_path):
        config = RunConfig(input=str(counts_csv), out=str(tmp_path / "o"), taus=(1.5,))
        assert run(config) == 1

    def test_missing_input(self, tmp_path):
        config = RunConfig(out=str(tmp_path / "o"))
        assert run(config) == 1


class TestRun:
    def test_full_artifact_set(self, counts_csv, tmp_path):
        out = tmp_path / "out"
        config = RunConfig(
            input=str(counts_csv), out=str(out), taus=(0.05, 0.5, 0.95), k=2, seed=1
        )
        assert run(config) == 0
        for tau in ("tau_0.05", "tau_0.5", "tau_0.95"):
            for name in (
                "components.csv",
                "scores.csv",
                "labels.csv",
                "proportions_location.csv",
                "proportions_daytype.csv",
                "effects.json",
                "model.json",
            ):
                assert (out / tau / name).is_file()
        manifest = read_manifest(out)
        assert manifest["rows"]["profiles"] == 48
        assert manifest["rows"]["grid_points"] == 144
        # every artifact is listed with a content hash
        for name, digest in manifest["artifacts"].items():
            assert (out / name).is_file()
            assert len(digest) == 64

    def test_empty_input_no_artifacts(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        out = tmp_path / "out-empty"
        config = RunConfig(input=str(empty), out=str(out), taus=(0.5,))
        assert run(config) == 2
        assert not out.exists()

    def test_pca_oracle_k1_tau_half(self, counts_csv, tmp_path):
        import csv

        from pecflow.preprocess import build_matrix, load_counts_csv, profiles_from_series

        out = tmp_path / "out-pca"
        config = RunConfig(input=str(counts_csv), out=str(out), taus=(0.5,), k=1, seed=0)
        assert run(config) == 0
        with open(out / "tau_0.5" / "components.csv") as fh:
            rows = list(csv.reader(fh))
        phi = np.array([float(r[1]) for r in rows[1:]])

        series = load_counts_csv(counts_csv)
        profiles, _ = profiles_from_series(series)
        Q = build_matrix(profiles)
        Yc = Q.data - Q.data.mean(axis=1, keepdims=True)
        _, V = np.linalg.eigh(Yc @ Yc.T / Q.n)
        assert abs(phi @ V[:, -1]) >= 1 - 1e-8

    def test_synth_mode(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text('{"n_days": 6, "n_locations": 2, "seed": 4, "extreme_fraction": 0.2}')
        out = tmp_path / "out-synth"
        config = RunConfig(synth=str(spec), out=str(out), taus=(0.5,), k=1)
        assert run(config) == 0
        assert (out / "counts.csv").is_file()
        assert (out / "ground_truth.csv").is_file()

    def test_determinism(self, counts_csv, tmp_path):
        out = tmp_path / "det"
        config = RunConfig(input=str(counts_csv), out=str(out), taus=(0.2, 0.8), k=2, seed=5)
        assert run(config) == 0
        first = {
            name: (out / name).read_bytes()
            for name in read_manifest(out)["artifacts"]
        }
        first_manifest = (out / "manifest.json").read_bytes()
        assert run(config) == 0
        for name, blob in first.items():
            assert (out / name).read_bytes() == blob
        assert (out / "manifest.json").read_bytes() == first_manifest

    def test_figures_flag(self, counts_csv, tmp_path):
        out = tmp_path / "figs"
        config = RunConfig(
            input=str(counts_csv), out=str(out), taus=(0.9,), k=2, figures=True
        )
        assert run(config) == 0
        for name in ("components_tau_0.9.png", "effects_tau_0.9.png", "proportions_tau_0.9.png"):
            assert (out / "figures" / name).stat().st_size > 0
