import math

import numpy as np
import pytest

from pecflow.datagen import Bump, SynthSpec, generate, load_spec


def test_deterministic_for_fixed_seed():
    spec = SynthSpec(n_days=5, n_locations=3, seed=11, extreme_fraction=0.2)
    a, truth_a = generate(spec)
    b, truth_b = generate(spec)
    assert truth_a == truth_b
    assert len(a) == len(b) == 15
    for sa, sb in zip(a, b):
        assert sa.profile_id == sb.profile_id
        assert np.array_equal(sa.counts, sb.counts)


def test_counts_are_nonnegative_integers():
    series, _ = generate(SynthSpec(n_days=3, n_locations=2, seed=0))
    for s in series:
        assert np.all(s.counts >= 0)
        assert np.all(s.counts == np.rint(s.counts))


def test_zero_noise_peaks_at_bump_center():
    spec = SynthSpec(
        n_days=1,
        n_locations=1,
        seed=0,
        noise=0.0,
        base_level_vph=0.0,
        bumps=[Bump(600.0, 60.0, 1200.0)],
    )
    series, _ = generate(spec)
    counts = series[0].counts
    # rounding flattens the top, so assert the center attains the max
    assert counts[600] == counts.max() > 0
    assert counts[0] == counts[-1] == 0


def test_ground_truth_counts_per_location():
    spec = SynthSpec(n_days=40, n_locations=4, seed=2, extreme_fraction=0.05)
    _, truth = generate(spec)
    expected = math.ceil(0.05 * 40)
    per_loc = {}
    for _, loc, pattern in truth:
        assert pattern == "evening-peak"
        per_loc[loc] = per_loc.get(loc, 0) + 1
    assert per_loc == {f"L{i}": expected for i in range(1, 5)}


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        SynthSpec(extreme_fraction=1.5)
    with pytest.raises(ValueError):
        SynthSpec(extreme_pattern="sideways")
    with pytest.raises(ValueError):
        SynthSpec(n_locations=2, amplitudes=[1.0])


def test_load_spec(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(
        '{"n_days": 4, "n_locations": 2, "seed": 9, "bumps": [[480, 60, 500]],'
        ' "extreme_fraction": 0.25, "extreme_pattern": "flat-high"}'
    )
    spec = load_spec(path)
    assert spec.n_days == 4
    assert spec.bumps[0].height_vph == 500
    series, truth = generate(spec)
    assert len(series) == 8
    assert len(truth) == 2
