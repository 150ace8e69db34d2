import numpy as np
import pytest

from hybridstream import evaluation
from hybridstream.evaluation import (CurveWriter, PrequentialState,
                                     prequential_direct, read_curve,
                                     summarize_trials)
from hybridstream.numerics import make_rng


def test_hand_case_alpha_half():
    p = PrequentialState(0.5)
    p.update(1.0)
    assert p.update(0.0) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_incremental_equals_direct():
    rng = make_rng(0)
    losses = rng.random(1000)
    for alpha in (0.5, 0.9, 0.995):
        p = PrequentialState(alpha)
        incr = p.update_many(losses)
        assert abs(incr - prequential_direct(losses, alpha)) < 1e-12


def test_alpha_one_is_running_mean():
    losses = [1.0, 0.0, 1.0, 1.0]
    p = PrequentialState(1.0)
    assert p.update_many(losses) == pytest.approx(0.75, abs=1e-15)


def test_error_undefined_before_samples():
    with pytest.raises(ValueError):
        PrequentialState().error


def test_invalid_alpha():
    with pytest.raises(ValueError):
        PrequentialState(0.0)
    with pytest.raises(ValueError):
        PrequentialState(1.1)


def test_test_error():
    def predict(x):
        return np.tile([0.9, 0.1], (len(x), 1))

    err = evaluation.test_error(predict, np.zeros((4, 2)), np.array([0, 0, 1, 1]))
    assert err == pytest.approx(0.5)
    with pytest.raises(ValueError):
        evaluation.test_error(predict, np.zeros((0, 2)), np.array([]))


def test_curve_writer_roundtrip(tmp_path):
    path = tmp_path / "curve.csv"
    with CurveWriter(path) as w:
        w.add(100, "dhbm-mf", 0.25)
        w.add(200, "mlp-pl", 1.0 / 3.0)
    rows = read_curve(path)
    assert rows[0] == (100, "dhbm-mf", 0.25)
    assert rows[1][2] == pytest.approx(1.0 / 3.0, abs=0)  # repr round-trips


def test_read_curve_rejects_foreign_header(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_curve(path)


def test_summarize_trials():
    s = summarize_trials({"m": [0.1, 0.2, 0.3]})
    assert s["m"]["mean"] == pytest.approx(0.2)
    assert s["m"]["trials"] == 3
    assert s["m"]["stderr"] == pytest.approx(np.std([0.1, 0.2, 0.3], ddof=1)
                                             / np.sqrt(3))
    single = summarize_trials({"m": [0.4]})
    assert single["m"]["stderr"] == 0.0
