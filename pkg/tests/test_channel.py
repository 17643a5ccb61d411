import numpy as np
import pytest

from ceapsk.channel import (Annulus, ChannelRealization, CsitModel, LinkBudget,
                            annulus_arrays, compute_annulus, load_channels_csv,
                            load_channels_json, mmse_estimate, ratio_cdf_m2,
                            sample_rayleigh, write_annulus_stats_csv)


def test_annulus_equal_gains():
    ann = compute_annulus(ChannelRealization(np.array([1.0, 1.0])), 2.0)
    assert ann.inner == 0.0
    assert ann.outer == pytest.approx(2.0)


def test_annulus_unequal_gains():
    ann = compute_annulus(ChannelRealization(np.array([3.0, 1.0])), 2.0)
    assert ann.inner == pytest.approx(2.0)
    assert ann.outer == pytest.approx(4.0)
    assert ann.ratio == pytest.approx(0.5)


def test_annulus_single_antenna():
    ann = compute_annulus(ChannelRealization(np.array([1.0])), 1.0)
    assert ann.inner == pytest.approx(1.0)
    assert ann.outer == pytest.approx(1.0)
    assert ann.ratio == pytest.approx(1.0)


def test_annulus_zero_channel_degenerate():
    ann = compute_annulus(ChannelRealization(np.array([0.0, 0.0])), 1.0)
    assert ann.degenerate
    assert ann.outer == 0.0
    assert ann.ratio == 0.0


def test_annulus_scale_covariance():
    rng = np.random.default_rng(7)
    h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    a = compute_annulus(ChannelRealization(h), 1.0)
    b = compute_annulus(ChannelRealization(3.0 * h), 1.0)
    assert b.outer == pytest.approx(3.0 * a.outer)
    assert b.inner == pytest.approx(3.0 * a.inner)
    assert b.ratio == pytest.approx(a.ratio)


def test_annulus_invariants_random():
    h = sample_rayleigh(3, 1.0, 11, trials=1000)
    inner, outer = annulus_arrays(h, 2.0)
    assert np.all(inner >= 0)
    assert np.all(inner <= outer)
    # r>0 only when one magnitude dominates the sum of the others
    mags = np.abs(h)
    dominant = 2 * mags.max(axis=1) > mags.sum(axis=1)
    assert np.all((inner > 0) == dominant)


def test_sample_rayleigh_deterministic():
    a = sample_rayleigh(2, 1.0, 42, trials=10)
    b = sample_rayleigh(2, 1.0, 42, trials=10)
    np.testing.assert_array_equal(a, b)
    c = sample_rayleigh(2, 1.0, 43, trials=10)
    assert not np.array_equal(a, c)


def test_sample_rayleigh_moments():
    h = sample_rayleigh(2, 1.0, 5, trials=10 ** 6)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.01)


def test_ratio_cdf_values():
    assert ratio_cdf_m2(1.0 / 3.0) == pytest.approx(0.6)
    assert ratio_cdf_m2(0.0) == 0.0
    assert ratio_cdf_m2(1.0) == 1.0


def test_ratio_cdf_domain_error():
    with pytest.raises(ValueError):
        ratio_cdf_m2(-0.1)
    with pytest.raises(ValueError):
        ratio_cdf_m2(1.5)


def test_ratio_cdf_ks_distance():
    h = sample_rayleigh(2, 1.0, 3, trials=10 ** 6)
    inner, outer = annulus_arrays(h, 1.0)
    ratio = np.sort(inner / outer)
    grid = np.linspace(0.0, 1.0, 401)
    emp = np.searchsorted(ratio, grid, side="right") / ratio.size
    assert np.abs(emp - ratio_cdf_m2(grid)).max() < 0.005


def test_mmse_estimate_high_training_snr():
    h = sample_rayleigh(2, 1.0, 1, trials=100)
    hh = mmse_estimate(h, CsitModel(training_snr=1e14, path_loss=1.0), 9)
    assert np.max(np.abs(hh - h) / np.abs(h)) < 1e-5


def test_mmse_estimate_error_variance():
    h = sample_rayleigh(2, 1.0, 1, trials=10 ** 6)
    csit = CsitModel(training_snr=1.0, path_loss=1.0)
    assert csit.error_variance == pytest.approx(0.5)
    hh = mmse_estimate(h, csit, 9)
    assert np.mean(np.abs(h - hh) ** 2) == pytest.approx(0.5, rel=0.01)


def test_mmse_estimate_reproducible():
    h = sample_rayleigh(2, 1.0, 1, trials=10)
    csit = CsitModel(training_snr=10.0, path_loss=1.0)
    np.testing.assert_array_equal(mmse_estimate(h, csit, 4),
                                  mmse_estimate(h, csit, 4))


def test_link_budget_snr():
    lb = LinkBudget(total_power=2.0, path_loss=1e-9, noise_power=1e-12)
    assert lb.snr == pytest.approx(2000.0)
    with pytest.raises(ValueError):
        LinkBudget(total_power=0.0, path_loss=1.0, noise_power=1.0)


def test_annulus_type_validation():
    with pytest.raises(ValueError):
        Annulus(inner=2.0, outer=1.0)


def test_channel_file_roundtrip(tmp_path):
    h = sample_rayleigh(3, 1.0, 2, trials=5)
    csv_path = tmp_path / "h.csv"
    with open(csv_path, "w") as f:
        for row in h:
            f.write(",".join(f"{v.real},{v.imag}" for v in row) + "\n")
    loaded = load_channels_csv(csv_path)
    np.testing.assert_allclose(loaded, h, rtol=1e-12)

    json_path = tmp_path / "h.json"
    import json
    rows = [[x for v in row for x in (v.real, v.imag)] for row in h]
    json_path.write_text(json.dumps(rows))
    np.testing.assert_allclose(load_channels_json(json_path), h, rtol=1e-12)


def test_annulus_stats_csv(tmp_path):
    h = sample_rayleigh(2, 1.0, 2, trials=4)
    path = tmp_path / "ann.csv"
    write_annulus_stats_csv(path, h, 1.0)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "ratio,r,R"
    assert len(lines) == 5
