"""Sampled checks of the linear and bilinear estimates.

None of these prove anything: each draws seeded random fields, evaluates both
sides of an inequality and records the ratio.  A suite is run on a base grid
and again with K and the number of time samples doubled; the fields are
defined independently of the grid (finitely many modes times smooth time
profiles), so only the discretisation changes between the two runs.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from . import norms as nm
from .dyadic import SpaceTimeField, eta
from .propagators import extended_L
from .records import RunRecord, Timer
from .torus import TorusField, dealiased_product, l2_norm, random_field, sobolev_norm

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# grid-independent random fields


@dataclass(frozen=True)
class ProfileField:
    """Demodulated field w(t, k) = eta(t / T) * sum_terms c * exp(i omega t) on mode k.

    ``terms`` holds (k, c, omega) triples.  ``decay`` adds the factor
    exp(-|t| k^2) of the linear propagator.
    """

    terms: tuple
    T: float = 1.0
    decay: bool = False

    @property
    def kmax(self) -> int:
        return max((abs(k) for k, _, _ in self.terms), default=0)

    def sample(self, K: int, M: int) -> SpaceTimeField:
        if self.kmax > K:
            raise ValueError(f"field has modes up to {self.kmax} > K={K}")
        t = SpaceTimeField.window_times(M)
        w = np.zeros((M, 2 * K + 1), dtype=complex)
        for k, c, om in self.terms:
            w[:, k + K] += c * np.exp(1j * om * t)
        w *= eta(t / self.T)[:, None]
        if self.decay:
            k2 = np.arange(-K, K + 1, dtype=float) ** 2
            w *= np.exp(-np.outer(np.abs(t), k2))
        return SpaceTimeField.from_demodulated(w)

    def windowed(self, T: float) -> "ProfileField":
        return ProfileField(self.terms, T, self.decay)


def random_profile_field(rng: np.random.Generator, kmax: int, n_terms: int = 6,
                         omega_max: float = 16.0, T: float = 1.0, weight: float = 1.0) -> ProfileField:
    """Random terms with |c| ~ <k>^weight and log-spread frequencies."""
    terms = []
    for _ in range(n_terms):
        k = int(rng.integers(-kmax, kmax + 1))
        c = (rng.standard_normal() + 1j * rng.standard_normal()) * (1.0 + k * k) ** (weight / 2)
        om = float(rng.choice([-1, 1]) * np.exp(rng.uniform(0.0, np.log(omega_max + 1.0))) - 1.0)
        if rng.random() < 0.25:
            om = 0.0
        terms.append((k, complex(c), om))
    return ProfileField(tuple(terms), T)


def free_solution_field(phi: TorusField, decay: bool = True) -> ProfileField:
    """eta(t) W(t) phi, i.e. exp(-|t| k^2) phi_k in the demodulated variable."""
    terms = tuple((int(k), complex(c), 0.0) for k, c in zip(phi.k, phi.coefficients) if c != 0)
    return ProfileField(terms, 1.0, decay)


# ---------------------------------------------------------------------------
# space-time products


def st_product(u: SpaceTimeField, v: SpaceTimeField) -> SpaceTimeField:
    """Pointwise product in (t, x), returned on K_out = 2K so nothing is cut."""
    if u.K != v.K or u.M != v.M:
        raise ValueError("fields live on different grids")
    K2 = 2 * u.K
    pu = u.resized(K2).physical()
    pv = v.resized(K2).physical()
    prod = dealiased_product(pu, pv, K2)
    return SpaceTimeField.from_physical(prod, u.t0, u.period)


def dx(U: SpaceTimeField) -> SpaceTimeField:
    return U.with_spectrum(U.spectrum * (1j * U.k)[None, :])


def bilinear_ratio(u: SpaceTimeField, v: SpaceTimeField, eps: float = nm.DEFAULT_EPS,
                   s_u: float = -1.0, with_witness: bool = False):
    """N^{-1}_eps(d_x(uv)) / (S^{s_u}_eps(u) S^{-1}_eps(v)) with sum-space upper bounds.

    The numerator is an upper bound of the true norm and the denominators are
    upper bounds too, so the value is not one-sided; the witnesses are logged.
    """
    if not 0 < eps < 1 / 12:
        raise ValueError(f"eps must lie in (0, 1/12), got {eps}")
    du = nm.resolution_norm(u, eps, s=s_u, tilde=False)
    dv = nm.resolution_norm(v, eps, s=-1.0, tilde=False)
    if du.value == 0 or dv.value == 0:
        if np.all(u.spectrum == 0) or np.all(v.spectrum == 0):
            return (0.0, None) if with_witness else 0.0
        raise ZeroDivisionError("zero denominator for a nonzero field")
    F = dx(st_product(u, v))
    num = nm.nonlinear_norm(F, eps)
    log.debug("bilinear witness: num %s  u %s  v %s", num.part_values, du.part_values, dv.part_values)
    r = num.value / (du.value * dv.value)
    return (r, {"numerator": num, "u": du, "v": dv}) if with_witness else r


def time_restriction_gain(u: SpaceTimeField, v: SpaceTimeField, supports=(1.0, 0.5, 0.25),
                          eps: float = nm.DEFAULT_EPS) -> dict:
    """Bilinear ratios with the S^0 norm on u after restricting both fields to [-T, T].

    The restriction multiplies by eta(2t/T), which is supported in [-T, T].
    """
    out = {}
    t = u.times
    for T in supports:
        win = eta(2 * t / T)[:, None]
        uT = SpaceTimeField.from_demodulated(u.demodulated() * win, u.t0, u.period)
        vT = SpaceTimeField.from_demodulated(v.demodulated() * win, v.t0, v.period)
        out[T] = bilinear_ratio(uT, vT, eps, s_u=0.0)
    return out


# ---------------------------------------------------------------------------
# single-ratio checks


def check_airy_modulation(phi: TorusField, M: int = 512) -> float:
    """(sum_L [L^{1/2} ||Q_L(eta(t) Airy(t) phi)||]^2)^{1/2} / ||phi||_{L^2}."""
    n = l2_norm(phi)
    if n == 0:
        return 0.0
    U = free_solution_field(phi, decay=False).sample(phi.K, M)
    return nm.modulation_l2(U) / n


def linear_ratio(phi: TorusField, M: int = 256, eps: float = nm.DEFAULT_EPS) -> float:
    """||eta(t) W(t) phi||_{S~^{-1}_eps} / ||phi||_{H^{-1}}."""
    U = free_solution_field(phi).sample(phi.K, M)
    return nm.resolution_norm(U, eps).value / sobolev_norm(phi, -1.0)


def duhamel_ratio(f: SpaceTimeField, eps: float = nm.DEFAULT_EPS) -> float:
    """||L f||_{S~^{-1}_eps} / ||f||_{N^{-1}_eps}."""
    return nm.resolution_norm(extended_L(f), eps).value / nm.nonlinear_norm(f, eps).value


def linf_embedding_ratio(U: SpaceTimeField, eps: float = nm.DEFAULT_EPS) -> float:
    return nm.linf_h_norm(U, -1.0) / nm.resolution_norm(U, eps).value


def l2_embedding_ratio(U: SpaceTimeField, eps: float = nm.DEFAULT_EPS) -> float:
    return U.l2_norm() / nm.resolution_norm(U, eps, tilde=False).value


def modulation_ratio(U: SpaceTimeField) -> float:
    return nm.modulation_l2(U) / nm.y_norm(U, 0.0, 0.5)


# ---------------------------------------------------------------------------
# ensemble harness


@dataclass(frozen=True)
class SuiteGrid:
    K: int
    M: int


def ratio_suite(name: str, trial, trials: int = 100, seed: int = 0,
                grids=(SuiteGrid(4, 256), SuiteGrid(8, 512)), config: dict | None = None) -> RunRecord:
    """Run ``trial(rng, K, M) -> ratio`` on every grid with per-trial seeds.

    The per-trial generator is rebuilt from (seed, trial index) for each grid,
    so each grid sees the same random field.
    """
    with Timer() as tm:
        cols = {"trial": list(range(trials))}
        for g in grids:
            vals = []
            for i in range(trials):
                rng = np.random.default_rng([seed, i])
                vals.append(float(trial(rng, g.K, g.M)))
            cols[f"ratio_K{g.K}_M{g.M}"] = vals
    maxima = [max(cols[f"ratio_K{g.K}_M{g.M}"]) for g in grids]
    summary = {
        "max_ratio": maxima,
        "finite": bool(np.all(np.isfinite(maxima))),
        "growth": maxima[-1] / maxima[0] - 1.0 if maxima[0] > 0 else float("nan"),
    }
    rec = RunRecord(name, {"trials": trials, "grids": [[g.K, g.M] for g in grids], **(config or {})},
                    seed, summary=summary)
    rec.add_series("ratios", **cols)
    rec.wall_time = tm.elapsed
    return rec


def _phi_trial(kmax):
    def draw(rng, K):
        return random_field(rng, K, 1, min(kmax, K), exponent=float(rng.uniform(0, 1)), real=True)
    return draw


def suite_est_lin(trials=100, seed=0, kmax=4, grids=(SuiteGrid(4, 256), SuiteGrid(8, 512)), eps=nm.DEFAULT_EPS):
    draw = _phi_trial(kmax)
    return ratio_suite("est-lin", lambda rng, K, M: linear_ratio(draw(rng, K), M, eps),
                       trials, seed, grids, {"eps": eps, "kmax": kmax})


def suite_airy(trials=100, seed=0, kmax=4, grids=(SuiteGrid(4, 256), SuiteGrid(8, 512))):
    draw = _phi_trial(kmax)
    return ratio_suite("lemma1-airy", lambda rng, K, M: check_airy_modulation(draw(rng, K), M),
                       trials, seed, grids, {"kmax": kmax})


def _field_suite(name, fn, trials, seed, kmax, grids, omega_max=16.0, **config):
    def trial(rng, K, M):
        T = float(rng.choice([1.0, 0.5]))
        return fn(random_profile_field(rng, kmax, omega_max=omega_max, T=T, weight=1.0).sample(K, M))
    return ratio_suite(name, trial, trials, seed, grids, {"kmax": kmax, "omega_max": omega_max, **config})


def suite_est_linNhom(trials=100, seed=0, kmax=4, grids=(SuiteGrid(4, 256), SuiteGrid(8, 512)), eps=nm.DEFAULT_EPS):
    return _field_suite("est-linNhom", lambda U: duhamel_ratio(U, eps), trials, seed, kmax, grids, eps=eps)


def suite_est_L2S_11(trials=100, seed=0, kmax=4, grids=(SuiteGrid(4, 256), SuiteGrid(8, 512)), eps=nm.DEFAULT_EPS):
    return _field_suite("est-L2S-11", lambda U: linf_embedding_ratio(U, eps), trials, seed, kmax, grids, eps=eps)


def suite_est_L2S_1(trials=100, seed=0, kmax=4, grids=(SuiteGrid(4, 256), SuiteGrid(8, 512)), eps=nm.DEFAULT_EPS):
    return _field_suite("est-L2S-1", lambda U: l2_embedding_ratio(U, eps), trials, seed, kmax, grids, eps=eps)


def suite_est_L2l2(trials=100, seed=0, kmax=4, grids=(SuiteGrid(4, 256), SuiteGrid(8, 512))):
    return _field_suite("est-L2l2", modulation_ratio, trials, seed, kmax, grids)


def suite_est_bil(trials=100, seed=0, kmax=2, grids=(SuiteGrid(2, 512), SuiteGrid(4, 1024)), eps=nm.DEFAULT_EPS,
                  omega_max=8.0):
    def trial(rng, K, M):
        u = random_profile_field(rng, kmax, n_terms=3, omega_max=omega_max, weight=1.0).sample(K, M)
        v = random_profile_field(rng, kmax, n_terms=3, omega_max=omega_max, weight=1.0).sample(K, M)
        return bilinear_ratio(u, v, eps)
    return ratio_suite("est-bil", trial, trials, seed, grids, {"eps": eps, "kmax": kmax, "omega_max": omega_max})


def suite_time_restriction(trials=30, seed=0, kmax=2, K=2, M=1024, supports=(1.0, 0.5, 0.25),
                           extra=(0.125, 0.0625), eps=nm.DEFAULT_EPS, omega_max=8.0) -> RunRecord:
    """Median over an ensemble of the est-bil3 ratio at each support width.

    The fields are drawn exactly as in the est-bil suite.  ``extra`` widths
    are recorded alongside to show where the small-T regime starts; the
    monotonicity summary only looks at ``supports``.
    """
    widths = tuple(supports) + tuple(extra)
    with Timer() as tm:
        table = {T: [] for T in widths}
        for i in range(trials):
            rng = np.random.default_rng([seed, i])
            u = random_profile_field(rng, kmax, n_terms=3, omega_max=omega_max, weight=1.0).sample(K, M)
            v = random_profile_field(rng, kmax, n_terms=3, omega_max=omega_max, weight=1.0).sample(K, M)
            for T, r in time_restriction_gain(u, v, widths, eps).items():
                table[T].append(r)
    medians = [float(np.median(table[T])) for T in widths]
    main = medians[: len(supports)]
    rec = RunRecord("est-bil3", {"trials": trials, "kmax": kmax, "K": K, "M": M, "supports": list(supports),
                                 "extra": list(extra), "eps": eps, "omega_max": omega_max}, seed,
                    summary={"median_ratio": main,
                             "nonincreasing": bool(all(a >= b for a, b in zip(main, main[1:]))),
                             "extra_median_ratio": medians[len(supports):]})
    rec.add_series("ratios", trial=list(range(trials)), **{f"T_{T:g}": table[T] for T in widths})
    rec.add_series("medians", T=list(widths), median=medians)
    rec.wall_time = tm.elapsed
    return rec


# ---------------------------------------------------------------------------
# resonance identity


def resonance(k1: int, k2: int, k3: int, tau1: float, tau2: float, tau3: float, sign: int = -1) -> float:
    """|sum (tau_i - k_i^3) - sign * 3 k1 k2 k3| for a triple summing to zero.

    With k1 + k2 + k3 = 0 one has k1^3 + k2^3 + k3^3 = 3 k1 k2 k3, so for
    tau1 + tau2 + tau3 = 0 the modulations sum to -3 k1 k2 k3 (``sign=-1``).
    """
    if k1 + k2 + k3 != 0:
        raise ValueError(f"wavenumbers must sum to 0, got {k1 + k2 + k3}")
    tsum = tau1 + tau2 + tau3
    if abs(tsum) > 1e-9 * max(1.0, abs(tau1), abs(tau2), abs(tau3)):
        raise ValueError(f"frequencies must sum to 0, got {tsum}")
    lhs = (tau1 - k1**3) + (tau2 - k2**3) + (tau3 - k3**3)
    return abs(lhs - sign * 3 * k1 * k2 * k3)


def resonance_sign_scan(kmax: int = 10) -> int:
    """Find the sign s with sum(tau_i - k_i^3) = s * 3 k1 k2 k3 on all small triples."""
    hits = {1: 0, -1: 0}
    total = 0
    for k1, k2 in itertools.product(range(-kmax, kmax + 1), repeat=2):
        k3 = -k1 - k2
        if abs(k3) > kmax:
            continue
        total += 1
        for s in (1, -1):
            if resonance(k1, k2, k3, 0.0, 0.0, 0.0, sign=s) == 0:
                hits[s] += 1
    good = [s for s in (1, -1) if hits[s] == total]
    if len(good) != 1:
        raise RuntimeError(f"no consistent sign: {hits} of {total}")
    log.info("resonance scan over |k_i| <= %d: sum of modulations = %+d * 3 k1 k2 k3 (%d triples)",
             kmax, good[0], total)
    return good[0]


# ---------------------------------------------------------------------------
# Lemma 2: direct (tau, k) convolution


@dataclass
class LatticeField:
    """Nonnegative function on (sigma, k) with sigma on dsigma * Z.

    ``rows`` maps k to (j0, values): values[i] sits at sigma = (j0 + i) dsigma,
    where sigma = tau - k^3 is the modulation.
    """

    dsigma: float
    rows: dict

    def norm(self) -> float:
        return float(np.sqrt(self.dsigma * sum(np.sum(v**2) for _, v in self.rows.values())))

    def is_zero(self) -> bool:
        return all(not np.any(v) for _, v in self.rows.values())


def lattice_point(k: int, sigma: float, mass: float, dsigma: float = 1.0) -> LatticeField:
    j = int(round(sigma / dsigma))
    return LatticeField(dsigma, {k: (j, np.array([mass], dtype=float))})


def random_lattice_field(rng: np.random.Generator, N: float, L: float, dsigma: float = 1.0,
                         n_bumps: int = 3, fill: float = 0.7) -> LatticeField:
    """Random nonnegative field on |k| in [N, 2N), <sigma> in [L, 2L).

    The profile is a sum of Gaussians with seeded centres, so halving dsigma
    samples the same continuous function more finely.
    """
    if L < 1:
        raise ValueError("<sigma> >= 1, so L must be at least 1")
    lo = np.sqrt(max(L * L - 1, 0.0))
    hi = np.sqrt(4 * L * L - 1)
    ks = [k for k in range(-int(np.ceil(2 * N)) + 1, int(np.ceil(2 * N))) if N <= abs(k) < 2 * N]
    rows = {}
    jmax = int(np.ceil(hi / dsigma))
    sig = dsigma * np.arange(-jmax, jmax + 1)
    mask = (np.abs(sig) >= lo) & (np.abs(sig) < hi)
    width = max(L / 4, 0.5)
    for k in ks:
        amp = rng.exponential() if rng.random() < fill else 0.0
        centres = rng.uniform(-hi, hi, n_bumps)
        heights = rng.exponential(size=n_bumps)
        prof = np.zeros_like(sig)
        for c, h in zip(centres, heights):
            prof += h * np.exp(-(((sig - c) / width) ** 2))
        vals = amp * prof * mask
        if np.any(vals):
            rows[k] = (-jmax, vals)
    return LatticeField(dsigma, rows)


def lattice_convolution(u1: LatticeField, u2: LatticeField, kmin: float = 0.0) -> LatticeField:
    """(u1 * u2)(tau, k) = sum_{k1} int u1(tau1, k1) u2(tau - tau1, k - k1) dtau1, kept on |k| >= kmin.

    In modulation variables the output profile is the sigma-convolution of the
    inputs shifted by -3 k k1 k2, the resonance function.
    """
    ds = u1.dsigma
    if u2.dsigma != ds:
        raise ValueError("lattices differ")
    inv = 1.0 / ds
    if abs(inv - round(inv)) > 1e-12:
        raise ValueError("1/dsigma must be an integer so resonance shifts land on the lattice")
    inv = int(round(inv))
    pieces: dict = {}
    for k1, (j1, v1) in u1.rows.items():
        for k2, (j2, v2) in u2.rows.items():
            k = k1 + k2
            if abs(k) < kmin:
                continue
            c = fftconvolve(v1, v2) * ds
            start = j1 + j2 - 3 * k * k1 * k2 * inv
            pieces.setdefault(k, []).append((start, c))
    rows = {}
    for k, plist in pieces.items():
        lo = min(s for s, _ in plist)
        hi = max(s + len(c) for s, c in plist)
        acc = np.zeros(hi - lo)
        for s, c in plist:
            acc[s - lo : s - lo + len(c)] += c
        rows[k] = (lo, np.maximum(acc, 0.0))
    return LatticeField(ds, rows)


def lemma2_bound(N1, N2, L1, L2, N=None, second: bool = False) -> float:
    lmin, lmax = min(L1, L2), max(L1, L2)
    if second:
        return np.sqrt(lmin) * (np.sqrt(lmax) / N1 + 1.0)
    return np.sqrt(lmin) * (lmax**0.25 / N**0.25 + 1.0)


def lemma2_ratio(u1: LatticeField, u2: LatticeField, N1, N2, L1, L2, N=1.0, second: bool = False) -> float:
    """LHS / RHS of one of the two convolution bounds."""
    if u1.is_zero() or u2.is_zero():
        return 0.0
    conv = lattice_convolution(u1, u2, kmin=0.0 if second else N)
    return conv.norm() / (lemma2_bound(N1, N2, L1, L2, N, second) * u1.norm() * u2.norm())


def check_bilinear_lemma(N1, N2, L1, L2, trials: int = 10, restriction_N=1.0, second: bool = False,
                         dsigma: float = 1.0, seed: int = 0) -> float:
    """Max sampled ratio of a convolution bound over random supported fields."""
    if second and N1 < 4 * N2:
        raise ValueError("second bound needs N1 >> N2 (N1 >= 4 N2 here)")
    if 2 * max(L1, L2) / dsigma < 2:
        raise ValueError("grid too coarse to host the modulation supports")
    best = 0.0
    for i in range(trials):
        rng = np.random.default_rng([seed, i])
        u1 = random_lattice_field(rng, N1, L1, dsigma)
        u2 = random_lattice_field(rng, N2, L2, dsigma)
        best = max(best, lemma2_ratio(u1, u2, N1, N2, L1, L2, restriction_N, second))
    return best


LEMMA2_CASES_FIRST = [(N1, N2, L1, L2, N) for N1, N2 in [(4, 4), (4, 8), (8, 8)]
                      for L1, L2 in [(N1**2, N2**2), (N1**2, N2**3), (N1**3, N2**2)]
                      for N in (1, 8)]
LEMMA2_CASES_SECOND = [(N1, N2, L1, L2) for N1, N2 in [(16, 2), (16, 4), (32, 4)]
                       for L1, L2 in [(16, 16), (64, 16), (16, 256)]]


def suite_lemma2(trials=100, seed=0, dsigmas=(1.0, 0.5), second=False) -> RunRecord:
    """Lemma 2 ratios cycling through the support cases; dsigma halves on refinement."""
    cases = LEMMA2_CASES_SECOND if second else LEMMA2_CASES_FIRST
    with Timer() as tm:
        cols = {"trial": list(range(trials)), "case": []}
        for i in range(trials):
            cols["case"].append(str(cases[i % len(cases)]))
        for ds in dsigmas:
            vals = []
            for i in range(trials):
                rng = np.random.default_rng([seed, i])
                case = cases[i % len(cases)]
                if second:
                    N1, N2, L1, L2 = case
                    N = None
                else:
                    N1, N2, L1, L2, N = case
                u1 = random_lattice_field(rng, N1, L1, ds)
                u2 = random_lattice_field(rng, N2, L2, ds)
                vals.append(lemma2_ratio(u1, u2, N1, N2, L1, L2, N, second))
            cols[f"ratio_dsigma{ds:g}"] = vals
    maxima = [max(cols[f"ratio_dsigma{ds:g}"]) for ds in dsigmas]
    name = "lemma2-second" if second else "lemma2-first"
    rec = RunRecord(name, {"trials": trials, "dsigmas": list(dsigmas), "cases": [list(c) for c in cases]}, seed,
                    summary={"max_ratio": maxima, "finite": bool(np.all(np.isfinite(maxima))),
                             "growth": maxima[-1] / maxima[0] - 1.0})
    rec.add_series("ratios", **cols)
    rec.wall_time = tm.elapsed
    return rec


SUITES = {
    "est-lin": suite_est_lin,
    "est-linNhom": suite_est_linNhom,
    "est-L2S-11": suite_est_L2S_11,
    "est-L2S-1": suite_est_L2S_1,
    "est-L2l2": suite_est_L2l2,
    "lemma1-airy": suite_airy,
    "lemma2-first": lambda trials=100, seed=0: suite_lemma2(trials, seed, second=False),
    "lemma2-second": lambda trials=100, seed=0: suite_lemma2(trials, seed, second=True),
    "est-bil": suite_est_bil,
}
