import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdvb.checks import (
    SUITES,
    LatticeField,
    ProfileField,
    SuiteGrid,
    bilinear_ratio,
    check_airy_modulation,
    check_bilinear_lemma,
    dx,
    lattice_convolution,
    lattice_point,
    lemma2_bound,
    lemma2_ratio,
    random_lattice_field,
    random_profile_field,
    ratio_suite,
    resonance,
    resonance_sign_scan,
    st_product,
    suite_lemma2,
)
from kdvb.dyadic import SpaceTimeField
from kdvb.torus import TorusField


def test_resonance_examples():
    assert resonance(1, 1, -2, 0.0, 0.0, 0.0) == 0.0
    # k = (1, 1, -2): modulations sum to -(1 + 1 - 8) = 6 = -3 * 1 * 1 * (-2)
    assert resonance(1, 1, -2, 0.0, 0.0, 0.0, sign=1) == 12.0
    assert resonance(2, 3, -5, 7.0, -2.5, -4.5) == 0.0
    with pytest.raises(ValueError):
        resonance(1, 1, 1, 0, 0, 0)
    with pytest.raises(ValueError):
        resonance(1, 1, -2, 1.0, 0, 0)


@settings(max_examples=100, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_resonance_identity(k1, k2, t1, t2):
    k3, t3 = -k1 - k2, -t1 - t2
    assert resonance(k1, k2, k3, t1, t2, t3) <= 1e-9 * (1 + abs(t1) + abs(t2))


def test_resonance_sign_scan():
    assert resonance_sign_scan(10) == -1


def _brute_convolution(u1, u2, kmin):
    # direct sum over lattice points in (tau, k) coordinates
    ds = u1.dsigma
    out = {}
    for k1, (j1, v1) in u1.rows.items():
        for k2, (j2, v2) in u2.rows.items():
            k = k1 + k2
            if abs(k) < kmin:
                continue
            for a, x in enumerate(v1):
                for b, y in enumerate(v2):
                    tau = (j1 + a) * ds + k1**3 + (j2 + b) * ds + k2**3
                    j = int(round((tau - k**3) / ds))
                    out[(k, j)] = out.get((k, j), 0.0) + x * y * ds
    return out


def _as_points(f: LatticeField):
    return {(k, j0 + i): v for k, (j0, vals) in f.rows.items() for i, v in enumerate(vals) if v != 0}


@pytest.mark.parametrize("ds", [1.0, 0.5])
def test_lattice_convolution_against_brute_force(ds):
    rng = np.random.default_rng(11)
    u1 = random_lattice_field(rng, 2, 2, ds)
    u2 = random_lattice_field(rng, 1, 1, ds)
    for kmin in (0, 2):
        got = _as_points(lattice_convolution(u1, u2, kmin))
        want = {key: v for key, v in _brute_convolution(u1, u2, kmin).items() if v != 0}
        scale = max(want.values())
        # fftconvolve leaves roundoff where the exact sum is zero
        for key in got.keys() | want.keys():
            assert abs(got.get(key, 0.0) - want.get(key, 0.0)) <= 1e-12 * scale


def test_lattice_convolution_grid_checks():
    a = lattice_point(1, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        lattice_convolution(a, lattice_point(1, 0.0, 1.0, 0.5))
    with pytest.raises(ValueError):
        lattice_convolution(lattice_point(1, 0, 1, 0.3), lattice_point(1, 0, 1, 0.3))


def test_point_mass_ratio():
    ds = 0.5
    u1 = lattice_point(4, 16.0, 2.0, ds)
    u2 = lattice_point(5, -20.0, 3.0, ds)
    r = lemma2_ratio(u1, u2, 4, 4, 16, 16, N=1.0)
    assert r == pytest.approx(math.sqrt(ds) / lemma2_bound(4, 4, 16, 16, 1.0), rel=1e-13)
    # output at k = 9 is cut by the |k| >= N restriction when N = 16
    assert lemma2_ratio(u1, u2, 4, 4, 16, 16, N=16.0) == 0.0


def test_lemma2_zero_cases():
    z = LatticeField(1.0, {})
    u = lattice_point(4, 16.0, 1.0)
    assert lemma2_ratio(z, u, 4, 4, 16, 16) == 0.0
    assert lemma2_ratio(u, LatticeField(1.0, {3: (0, np.zeros(4))}), 4, 4, 16, 16) == 0.0


def test_lemma2_bounds_and_validation():
    assert lemma2_bound(4, 4, 16, 64, N=1) == pytest.approx(4 * (64**0.25 + 1))
    assert lemma2_bound(16, 2, 16, 256, second=True) == pytest.approx(4 * (16 / 16 + 1))
    with pytest.raises(ValueError):
        check_bilinear_lemma(4, 4, 16, 16, second=True)
    with pytest.raises(ValueError):
        random_lattice_field(np.random.default_rng(0), 4, 0.5)


def test_random_lattice_field_support():
    ds = 0.5
    f = random_lattice_field(np.random.default_rng(3), 4, 16, ds)
    for k, (j0, vals) in f.rows.items():
        assert 4 <= abs(k) < 8
        sig = ds * (j0 + np.arange(len(vals)))
        br = np.sqrt(1 + sig**2)
        assert np.all((vals == 0) | ((br >= 16 - 1e-12) & (br < 32)))
        assert np.all(vals >= 0)


def test_suite_lemma2_small():
    rec = suite_lemma2(trials=4, seed=1)
    assert rec.summary["finite"]
    assert set(rec.series["ratios"]) == {"trial", "case", "ratio_dsigma1", "ratio_dsigma0.5"}


def test_profile_field_resampling_is_consistent():
    pf = ProfileField(((1, 1.0 + 0j, 2.0), (-2, 0.5j, 0.0)), T=1.0)
    a = pf.sample(4, 256)
    b = pf.sample(8, 512)
    # same continuous field: coarse samples are every other fine sample
    np.testing.assert_allclose(b.demodulated()[::2, 4:-4], a.demodulated(), atol=1e-12)
    with pytest.raises(ValueError):
        pf.sample(1, 64)
    assert pf.windowed(0.5).T == 0.5


def test_st_product_and_dx():
    pf = ProfileField(((1, 1.0, 0.0),), T=1.0)
    U = pf.sample(2, 128)
    P = st_product(U, U)
    assert P.K == 4
    w = P.demodulated()
    # e^{ix} squared is e^{2ix}; demodulation brings a phase e^{-i(8 - 2) t}
    t = P.times
    want = SpaceTimeField.window_times(128)
    np.testing.assert_allclose(t, want)
    amp = U.demodulated()[:, 3]
    np.testing.assert_allclose(w[:, 4 + 2], amp**2 * np.exp(-1j * (8 - 2) * t), atol=1e-12)
    D = dx(U)
    np.testing.assert_allclose(D.spectrum[:, 3], 1j * U.spectrum[:, 3])
    with pytest.raises(ValueError):
        st_product(U, pf.sample(4, 128))


def test_bilinear_ratio_zero_and_validation():
    U = random_profile_field(np.random.default_rng(0), 2).sample(2, 256)
    Z = SpaceTimeField.zeros(2, 256)
    assert bilinear_ratio(U, Z) == 0.0
    r, wit = bilinear_ratio(Z, U, with_witness=True)
    assert r == 0.0 and wit is None
    with pytest.raises(ValueError):
        bilinear_ratio(U, U, eps=0.1)


def test_bilinear_ratio_witness():
    rng = np.random.default_rng(1)
    u = random_profile_field(rng, 2, n_terms=3, omega_max=8).sample(2, 512)
    v = random_profile_field(rng, 2, n_terms=3, omega_max=8).sample(2, 512)
    r, wit = bilinear_ratio(u, v, with_witness=True)
    assert np.isfinite(r) and r > 0
    assert r == pytest.approx(wit["numerator"].value / (wit["u"].value * wit["v"].value))


def test_airy_modulation_of_zero_and_one_mode():
    assert check_airy_modulation(TorusField.zeros(4)) == 0.0
    r = check_airy_modulation(TorusField.cos_mode(4, 2), 512)
    assert 0 < r < 2


def test_ratio_suite_is_grid_consistent():
    def trial(rng, K, M):
        return rng.random()

    rec = ratio_suite("probe", trial, trials=3, seed=5, grids=(SuiteGrid(4, 64), SuiteGrid(8, 128)))
    assert rec.series["ratios"]["ratio_K4_M64"] == rec.series["ratios"]["ratio_K8_M128"]
    assert rec.summary["growth"] == 0.0 and rec.summary["finite"]


def test_suite_registry():
    assert set(SUITES) == {"est-lin", "est-linNhom", "est-L2S-11", "est-L2S-1", "est-L2l2",
                           "lemma1-airy", "lemma2-first", "lemma2-second", "est-bil"}
    for name in ("est-lin", "lemma1-airy", "est-L2l2"):
        rec = SUITES[name](trials=2, seed=0)
        assert rec.name == name and rec.summary["finite"]
