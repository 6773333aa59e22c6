import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdvb.dyadic import (
    SpaceTimeField,
    aggregate,
    atoms_to_json,
    bump_matrix,
    check_dyadic,
    decompose,
    dyadic_up_to,
    eta,
    project_P,
    project_Q,
    truncated_mass,
    varphi,
    varphi_N,
)
from kdvb.torus import TorusField, l2_norm, random_field

DYADIC = [0.5] + [2.0**j for j in range(0, 12)]


def random_st(seed, K=8, M=128):
    rng = np.random.default_rng(seed)
    t = SpaceTimeField.window_times(M)
    prof = eta(t)[:, None] * np.exp(1j * np.outer(t, rng.uniform(-8, 8, 2 * K + 1)))
    w = prof * (rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1))
    return SpaceTimeField.from_demodulated(w)


def test_eta_shape():
    x = np.linspace(-3, 3, 6001)
    e = eta(x)
    assert np.all((0 <= e) & (e <= 1))
    assert np.all(e[np.abs(x) <= 1] == 1) and np.all(e[np.abs(x) >= 2] == 0)
    np.testing.assert_array_equal(e, eta(-x))
    assert eta(0.5) == 1.0
    # smooth: finite differences of all low orders stay bounded
    d = np.diff(e, 3) / (x[1] - x[0]) ** 3
    assert np.max(np.abs(d)) < 1e3


def test_varphi_at_N_is_one():
    for N in DYADIC[1:]:
        assert varphi_N(N, N) == 1.0
    assert varphi(1.0) == 1.0


def test_varphi_support():
    x = np.linspace(-100, 100, 40001)
    for N in (1, 2, 8, 32):
        v = varphi_N(N, x)
        assert np.all(v[(np.abs(x) <= N / 2) | (np.abs(x) >= 2 * N)] == 0)
        assert np.all((0 <= v) & (v <= 1))


@pytest.mark.parametrize("k", [0, 1, -1, 7, -7, 100, -100])
def test_partition_of_unity_integers(k):
    assert sum(varphi_N(N, k) for N in DYADIC) == pytest.approx(1.0, abs=1e-15)


def test_partition_of_unity_grid():
    x = np.linspace(-1000, 1000, 100001)
    total = bump_matrix(DYADIC, x).sum(axis=1)
    assert np.max(np.abs(total - 1)) <= 1e-12


def test_at_most_two_bumps_at_integers():
    k = np.arange(-2000, 2001)
    nz = (bump_matrix(DYADIC, k) > 0).sum(axis=1)
    assert nz.max() <= 2


def test_check_dyadic():
    assert check_dyadic(0.5) == 0.5
    for bad in (0.25, 3, 0, -1):
        with pytest.raises(ValueError):
            check_dyadic(bad)
    assert dyadic_up_to(5) == [0.5, 1, 2, 4, 8]


def test_project_P_examples():
    K, N = 64, 4
    u = TorusField.from_modes(K, {N: 1.0}, real=False)
    np.testing.assert_array_equal(project_P(u, N).coefficients, u.coefficients)
    u8 = TorusField.from_modes(K, {8 * N: 1.0}, real=False)
    assert np.all(project_P(u8, N).coefficients == 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([8, 32, 128]))
def test_P_partition_and_aggregate(seed, K):
    u = random_field(np.random.default_rng(seed), K, 0, K)
    total = sum(project_P(u, N).coefficients for N in dyadic_up_to(K))
    np.testing.assert_allclose(total, u.coefficients, atol=1e-12 * np.max(np.abs(u.coefficients)))
    for N in (1, 4):
        s = aggregate(u, "P_lesssim", N).coefficients + aggregate(u, "P_gg", N).coefficients
        np.testing.assert_allclose(s, u.coefficients, atol=1e-12 * np.max(np.abs(u.coefficients)))
    np.testing.assert_allclose(aggregate(u, "P_lesssim", 2 * K).coefficients, u.coefficients, atol=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31))
def test_l2_consistency(seed):
    u = random_field(np.random.default_rng(seed), 64, 0, 64)
    s = sum(l2_norm(project_P(u, N)) ** 2 for N in dyadic_up_to(64))
    assert l2_norm(u) ** 2 / 3 <= s <= 3 * l2_norm(u) ** 2


def test_near_orthogonality():
    u = random_field(np.random.default_rng(4), 128, 0, 128)
    for N in (1, 2, 4, 8):
        a = project_P(u, N).coefficients
        b = project_P(u, 4 * N).coefficients
        assert np.sum(a * np.conj(b)) == 0


def test_demodulation_parseval():
    U = random_st(0)
    w = U.demodulated()
    quad = U.dt * np.sum(np.abs(w) ** 2, axis=0)
    plan = np.sum(np.abs(U.spectrum) ** 2, axis=0) * (U.dsigma / (2 * np.pi))
    np.testing.assert_allclose(plan, quad, rtol=1e-8)


def test_physical_round_trip():
    U = random_st(1)
    V = SpaceTimeField.from_physical(U.physical())
    np.testing.assert_allclose(V.spectrum, U.spectrum, atol=1e-12 * np.max(np.abs(U.spectrum)))


def test_airy_wave_lives_at_low_modulation():
    # e^{-t d_xxx} phi windowed by eta(t) has demodulated samples eta(t) phi_k
    K, M = 16, 1024
    t = SpaceTimeField.window_times(M)
    k = np.arange(-K, K + 1)
    phys = eta(t)[:, None] * np.exp(1j * np.outer(t, k.astype(float) ** 3)) * np.ones(2 * K + 1)
    U = SpaceTimeField.from_physical(phys)
    A = np.abs(U.spectrum) ** 2
    outside = A[np.abs(U.sigma) > 30].sum()
    assert outside < 1e-4 * A.sum()


def test_Q_examples():
    M, K = 256, 4
    # constant in time on the periodic window: all mass at sigma = 0
    U = SpaceTimeField.from_demodulated(np.ones((M, 2 * K + 1), dtype=complex))
    tot = U.l2_norm()
    assert project_Q(U, 0.5).l2_norm() == pytest.approx(tot, rel=1e-12)
    for L in (1, 4, 16):
        assert project_Q(U, L).l2_norm() <= 1e-12 * tot
    R = random_st(7)
    total = sum(project_Q(R, L).spectrum for L in R.L_indices)
    np.testing.assert_allclose(total, R.spectrum, atol=1e-12 * np.max(np.abs(R.spectrum)))
    Z = SpaceTimeField.zeros(K, 64)
    assert np.all(project_Q(Z, 2).spectrum == 0)
    assert np.all(aggregate(R, "Q_gg", 4 * max(R.L_indices)).spectrum == 0)


def test_Q_aggregates_complement():
    U = random_st(5)
    for L in (1, 4):
        s = aggregate(U, "Q_le", L).spectrum + aggregate(U, "Q_gg", L).spectrum
        np.testing.assert_allclose(s, U.spectrum, atol=1e-12 * np.max(np.abs(U.spectrum)))
    with pytest.raises(ValueError):
        aggregate(U, "P_other", 1)


def test_decompose_zero_and_reconstruct():
    assert decompose(SpaceTimeField.zeros(8, 64)) == []
    U = random_st(2)
    atoms = decompose(U)
    assert len(atoms) <= len(U.N_indices) * len(U.L_indices)
    total = sum(a.payload.spectrum for a in atoms)
    np.testing.assert_allclose(total, U.spectrum, rtol=0, atol=1e-10 * np.max(np.abs(U.spectrum)))
    keys = [(a.N, a.L) for a in atoms]
    assert keys == sorted(keys)


def test_decompose_single_atom_touches_adjacent_indices():
    # one grid point (sigma_j, k): at most two bumps in each index, hence <= 4 atoms
    K, M = 16, 256
    V = np.zeros((M, 2 * K + 1), dtype=complex)
    V[M // 2 + 20, K + 6] = 1.0
    U = SpaceTimeField(K, V)
    atoms = decompose(U)
    Ns = sorted({a.N for a in atoms})
    Ls = sorted({a.L for a in atoms})
    assert 1 <= len(Ns) <= 2 and 1 <= len(Ls) <= 2
    for seq in (Ns, Ls):
        assert all(b == 2 * a for a, b in zip(seq, seq[1:]))


def test_decompose_localised_payload_touches_at_most_three():
    # a payload spread over one bump's full support overlaps its two neighbours
    K, M = 16, 256
    U0 = random_st(3, K, M)
    atom = project_Q(project_P(U0, 4), 8)
    atoms = decompose(atom)
    Ns = sorted({a.N for a in atoms})
    Ls = sorted({a.L for a in atoms})
    assert len(Ns) <= 3 and len(Ls) <= 3
    assert 4 in Ns and 8 in Ls


def test_torus_decompose_and_json():
    u = TorusField.cos_mode(16, 3)
    atoms = decompose(u)
    assert {a.N for a in atoms} == {2.0, 4.0}
    data = json.loads(atoms_to_json(atoms))
    assert set(data[0]) == {"N", "L", "l2_mass"}
    U = random_st(0)
    d = json.loads(atoms_to_json(decompose(U)[:2], include_payload=True))
    assert "payload" in d[0]


def test_truncated_mass_flags_high_modulation():
    M, K = 128, 2
    V = np.zeros((M, 2 * K + 1), dtype=complex)
    V[2, K] = 1.0  # sigma near -sigma_max
    U = SpaceTimeField(K, V)
    assert truncated_mass(U) == pytest.approx(U.l2_norm())
    assert truncated_mass(random_st(0, M=1024)) < 1e-6 * random_st(0, M=1024).l2_norm()


def test_spacetime_grid_checks():
    with pytest.raises(ValueError):
        random_st(0) + random_st(0, M=64)
    U = random_st(0)
    assert U.resized(16).K == 16
    np.testing.assert_array_equal(U.resized(16).resized(8).spectrum, U.spectrum)
