"""Running observation whitening: Welford accuracy, guards, call counters."""

import numpy as np

from pbvf.harness.normalizer import RunningNormalizer, normalizer_update_apply


def test_moments_match_large_sample():
    rng = np.random.default_rng(0)
    data = rng.normal(5.0, 2.0, size=(10_000, 3))
    norm = RunningNormalizer(3)
    for row in data:
        norm.update(row)
    assert np.all(np.abs(norm.mean - 5.0) < 0.1)
    assert np.all(np.abs(norm.std - 2.0) < 0.1)


def test_welford_matches_numpy_exactly_enough():
    rng = np.random.default_rng(1)
    data = rng.uniform(-3, 9, size=(257, 4))
    norm = RunningNormalizer(4)
    for row in data:
        norm.update(row)
    assert np.allclose(norm.mean, data.mean(axis=0), atol=1e-9)
    assert np.allclose(norm.std, data.std(axis=0), atol=1e-9)


def test_apply_before_any_update_returns_zeros():
    norm = RunningNormalizer(2)
    out = norm.apply(np.array([3.0, -1.0]))
    assert np.array_equal(out, np.zeros(2))


def test_zero_variance_coordinate_is_guarded():
    norm = RunningNormalizer(2)
    for _ in range(5):
        norm.update(np.array([2.0, 2.0]))
    out = norm.apply(np.array([2.0, 4.0]))
    # constant coordinate maps to 0; the other is (4-2)/max(0, floor)
    assert out[0] == 0.0
    assert np.isfinite(out[1])


def test_apply_batch_matches_apply_rowwise():
    rng = np.random.default_rng(2)
    norm = RunningNormalizer(3)
    for row in rng.normal(size=(50, 3)):
        norm.update(row)
    batch = rng.normal(size=(6, 3))
    got = norm.apply_batch(batch)
    want = np.stack([norm.apply(row) for row in batch])
    assert np.allclose(got, want, atol=0)


def test_call_counters():
    norm = RunningNormalizer(1)
    assert norm.update_calls == 0 and norm.apply_calls == 0
    normalizer_update_apply(norm, np.array([1.0]))
    assert norm.update_calls == 1
    assert norm.apply_calls == 1
    norm.apply(np.array([1.0]))
    assert norm.apply_calls == 2


def test_update_then_apply_order():
    # the combined hook must include the new observation in the stats it applies
    norm = RunningNormalizer(1)
    out = normalizer_update_apply(norm, np.array([10.0]))
    # single observation: mean == obs, std == 0, so whitened value is 0
    assert out[0] == 0.0
    assert norm.count == 1
    assert norm.mean[0] == 10.0
