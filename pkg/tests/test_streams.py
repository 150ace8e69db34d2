import numpy as np
import pytest

from hybridstream import streams
from hybridstream.numerics import make_rng


def test_led_digit_seven_segments():
    # noise-free: digit 7 lights exactly segments a, b, c
    assert np.array_equal(streams.LED_SEGMENTS[7], [1, 1, 1, 0, 0, 0, 0])


def test_led_segments_distinct():
    rows = {tuple(r) for r in streams.LED_SEGMENTS}
    assert len(rows) == 10


def test_led_noise_free_decodable():
    cfg = streams.StreamConfig(kind="led", noise_fraction=0.0,
                               drift_attr_count=0)
    stream = streams.make_stream(cfg, make_rng(0))
    batch = stream.next_batch(10_000)
    # nearest-segment decoding is exact without noise
    seg = batch.features[:, :7]
    dists = np.abs(seg[:, None, :] - streams.LED_SEGMENTS[None]).sum(axis=2)
    assert np.array_equal(np.argmin(dists, axis=1), batch.labels)


def test_led_feature_space():
    cfg = streams.StreamConfig(kind="led")
    batch = streams.make_stream(cfg, make_rng(1)).next_batch(100)
    assert batch.features.shape == (100, 24)
    assert set(np.unique(batch.features)) <= {0.0, 1.0}
    assert batch.labels.min() >= 0 and batch.labels.max() <= 9


def test_led_noise_rate():
    cfg = streams.StreamConfig(kind="led", noise_fraction=0.1,
                               drift_attr_count=0)
    stream = streams.make_stream(cfg, make_rng(2))
    clean_cfg = streams.StreamConfig(kind="led", noise_fraction=0.0,
                                     drift_attr_count=0)
    clean = streams.make_stream(clean_cfg, make_rng(2))
    noisy_b = stream.next_batch(5000)
    clean_b = clean.next_batch(5000)
    flips = np.mean(noisy_b.features[:, :7] != clean_b.features[:, :7])
    assert abs(flips - 0.1) < 3 * np.sqrt(0.1 * 0.9 / (5000 * 7))


def test_waveform_bases_shape_and_peaks():
    assert streams.WAVEFORM_BASES.shape == (3, 21)
    assert [int(np.argmax(b)) + 1 for b in streams.WAVEFORM_BASES] == [7, 15, 11]
    assert streams.WAVEFORM_BASES.max() == 6.0


def test_waveform_features_unit_interval():
    cfg = streams.StreamConfig(kind="waveform")
    batch = streams.make_stream(cfg, make_rng(3)).next_batch(500)
    assert batch.features.shape == (500, 40)
    assert batch.features.min() >= 0.0
    assert batch.features.max() <= 1.0
    assert set(np.unique(batch.labels)) <= {0, 1, 2}


def test_waveform_instance_pure_function():
    u = 0.3
    eps_s = np.zeros(21)
    eps_n = np.zeros(19)
    raw = streams.waveform_instance(0, u, eps_s, eps_n)
    expect = u * streams.WAVEFORM_BASES[0] + (1 - u) * streams.WAVEFORM_BASES[1]
    assert np.allclose(raw[:21], expect)
    assert np.array_equal(raw[21:], eps_n)


def test_waveform_normalize_clamps():
    assert streams.waveform_normalize(np.array([-10.0]))[0] == 0.0
    assert streams.waveform_normalize(np.array([20.0]))[0] == 1.0
    assert streams.waveform_normalize(np.array([3.0]))[0] == pytest.approx(0.5)


def test_drift_rotates_attributes():
    cfg = streams.StreamConfig(kind="led", noise_fraction=0.0,
                               drift_attr_count=4, drift_interval=100)
    stream = streams.make_stream(cfg, make_rng(4))
    stream.next_batch(100)
    perm = stream._current_perm()
    assert list(perm[:4]) == [3, 0, 1, 2]
    assert list(perm[4:]) == list(range(4, 24))
    # a full cycle restores the identity
    stream.next_batch(300)
    assert list(stream._current_perm()) == list(range(24))


def test_drift_boundary_split_within_batch():
    cfg = streams.StreamConfig(kind="led", noise_fraction=0.0,
                               drift_attr_count=4, drift_interval=10)
    stream = streams.make_stream(cfg, make_rng(5))
    batch = stream.next_batch(25)  # spans two boundaries
    assert len(batch) == 25
    assert stream.instances == 25


def test_mask_labels_rate_and_values():
    cfg = streams.StreamConfig(kind="led")
    batch = streams.make_stream(cfg, make_rng(6)).next_batch(10_000)
    masked = streams.mask_labels(batch, 0.1, make_rng(7))
    frac = np.mean(masked.labels >= 0)
    assert abs(frac - 0.1) < 3 * np.sqrt(0.1 * 0.9 / 10_000)
    kept = masked.labels >= 0
    assert np.array_equal(masked.labels[kept], batch.labels[kept])
    assert (masked.labels[~kept] == -1).all()


def test_stream_config_validation():
    with pytest.raises(ValueError):
        streams.StreamConfig(kind="mystery")
    with pytest.raises(ValueError):
        streams.StreamConfig(noise_fraction=1.5)
    with pytest.raises(ValueError):
        streams.StreamConfig(batch_size=0)


def test_stream_reproducible_from_seed():
    cfg = streams.StreamConfig(kind="waveform", seed=13)
    a = streams.make_stream(cfg).next_batch(50)
    b = streams.make_stream(cfg).next_batch(50)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)


def test_write_read_stream_roundtrip(tmp_path):
    cfg = streams.StreamConfig(kind="led", seed=3)
    stream = streams.make_stream(cfg)
    batches = [stream.next_batch(7), stream.next_batch(5)]
    path = tmp_path / "dump.hsst"
    streams.write_stream(path, cfg, batches)
    read_cfg, data = streams.read_stream(path)
    assert read_cfg == cfg
    expect = np.concatenate([b.features for b in batches])
    assert np.array_equal(data.features, expect)
    assert np.array_equal(data.labels,
                          np.concatenate([b.labels for b in batches]))


def test_read_stream_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.hsst"
    path.write_bytes(b"NOPE" + b"\0" * 16)
    with pytest.raises(ValueError):
        streams.read_stream(path)
