import math

import numpy as np
import pytest

from kdvb.experiments import (
    PAIRED_MODE1_CONSTANT,
    DataFamily,
    analyticity_experiment,
    cascade_experiment,
    loglog_slope,
    resolution_K,
    rough_field,
    smoothing_experiment,
)
from kdvb.torus import TorusField, sobolev_norm


def test_paired_constant():
    assert PAIRED_MODE1_CONSTANT * math.exp(-0.01) == pytest.approx(0.068648, abs=5e-7)


def test_families():
    f = DataFamily("paired_cos", 4, 0.1)
    u = f.field(16)
    assert u.coeff(4) == pytest.approx(0.2) and u.coeff(5) == pytest.approx(0.2)
    assert f.kmax == 5 and f.with_N(8).N == 8
    s = DataFamily("single_cos", 8, 1.0).field(32)
    assert s.coeff(8) == 4.0 and np.count_nonzero(s.coefficients) == 2
    with pytest.raises(ValueError):
        DataFamily("triangle")
    with pytest.raises(ValueError):
        DataFamily("single_cos", 0)


def test_single_cos_H_minus_one_and_a_half_slope():
    Ns = [4, 8, 16, 32, 64, 128]
    vals = [sobolev_norm(DataFamily("single_cos", N).field(256), -1.5) for N in Ns]
    assert loglog_slope(Ns, vals) == pytest.approx(-0.5, abs=0.05)


def test_rough_field_truncations_agree():
    a = rough_field(64, 0.1, seed=2)
    b = rough_field(512, 0.1, seed=2)
    np.testing.assert_array_equal(b.resized(64).coefficients, a.coefficients)
    assert a.real
    assert abs(a.coeff(16)) == pytest.approx(0.1 * 16**-0.25)


def test_resolution_K():
    for N in (1, 4, 64, 128):
        K = resolution_K(N)
        assert 2 * N + 2 <= K / 2 and K & (K - 1) == 0
    assert resolution_K(64) == 512


def test_cascade_small():
    rec = cascade_experiment(DataFamily("paired_cos", delta=0.05), [4, 8], n_steps=50)
    assert rec.column("cascade", "N") == [4, 8]
    o = rec.summary["oracle1_over_delta2"]
    m = rec.summary["mode1_over_delta2"]
    for a, b in zip(m, o):
        assert a == pytest.approx(b, rel=0.05)
    single = cascade_experiment(DataFamily("single_cos", delta=0.1), [4], n_steps=50)
    assert single.summary["off_support_max"] <= 1e-12


def test_cascade_validation():
    with pytest.raises(ValueError):
        cascade_experiment(DataFamily("paired_cos"), [6])
    with pytest.raises(ValueError):
        cascade_experiment(DataFamily("paired_cos"), [16], K=32)
    with pytest.raises(ValueError):
        cascade_experiment(DataFamily("paired_cos"), [4], t_eval=0.5)
    with pytest.raises(ValueError):
        cascade_experiment(DataFamily("rough_Hminus1"), [4])


def test_smoothing_small():
    rec = smoothing_experiment(DataFamily("rough_Hminus1", delta=0.1), t_list=(0.0, 0.05), m_list=(0, 2),
                               K_list=(32, 64), dt=1e-2)
    ts = rec.column("norms", "t")
    h2 = rec.column("norms", "H2")
    assert len(ts) == 4
    # H^2 at t = 0.05 barely depends on the truncation
    assert abs(h2[3] - h2[1]) / h2[3] < 0.05
    assert h2[2] > h2[0]
    assert rec.summary["l2_growth_exponent"] == pytest.approx(0.25, abs=0.1)
    with pytest.raises(ValueError):
        smoothing_experiment(t_list=(0.0, 0.015, 0.03), K_list=(32,), dt=1e-2)
    with pytest.raises(ValueError):
        smoothing_experiment(DataFamily("single_cos"))


def test_analyticity_small():
    K = 8
    rec = analyticity_experiment(TorusField.cos_mode(K, 1), TorusField.sin_mode(K, 2), (1e-2, 1e-3), dt=1e-2)
    assert rec.summary["exponent"] == pytest.approx(2.0, abs=0.1)
    with pytest.raises(ValueError):
        analyticity_experiment(TorusField.zeros(8), TorusField.zeros(16))


def test_experiments_are_deterministic():
    a = cascade_experiment(DataFamily("paired_cos", delta=0.05), [4], n_steps=20)
    b = cascade_experiment(DataFamily("paired_cos", delta=0.05), [4], n_steps=20)
    assert a.series_equal(b)
