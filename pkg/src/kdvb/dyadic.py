"""Littlewood-Paley machinery in space (k) and modulation (sigma = tau - k^3).

Dyadic indices run over 1/2, 1, 2, 4, ...  The bumps are

    phi_N(x) = eta(x/N) - eta(2x/N)   for N >= 1,    phi_{1/2}(x) = eta(2x),

so that sum_{N' <= N} phi_{N'} = eta(./N) telescopes exactly and the bumps form a
partition of unity on every integer (and every real) argument.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .torus import TorusField, is_power_of_two, l2_norm, wavenumbers

WINDOW_T0 = -4.0
WINDOW_PERIOD = 8.0


def _smooth_step(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def eta(x):
    """Smooth even cutoff: 1 on [-1, 1], 0 outside (-2, 2)."""
    x = np.abs(np.asarray(x, dtype=float))
    a = _smooth_step(2.0 - x)
    b = _smooth_step(x - 1.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mid = a / (a + b)
    out = np.where(x <= 1.0, 1.0, np.where(x >= 2.0, 0.0, mid))
    return float(out) if out.ndim == 0 else out


def varphi(x):
    """eta(x) - eta(2x): supported where 1/2 < |x| < 2."""
    return eta(x) - eta(2 * np.asarray(x, dtype=float))


def varphi_N(N: float, x):
    check_dyadic(N)
    x = np.asarray(x, dtype=float)
    if N == 0.5:
        return eta(2 * x)
    return varphi(x / N)


def check_dyadic(N: float) -> float:
    if N <= 0 or N != 2.0 ** round(np.log2(N)) or N < 0.5:
        raise ValueError(f"{N!r} is not a dyadic index in {{1/2, 1, 2, 4, ...}}")
    return float(N)


def dyadic_up_to(x: float) -> list[float]:
    """Dyadic indices 1/2, 1, ..., up to the smallest one >= x."""
    out = [0.5]
    while out[-1] < x:
        out.append(out[-1] * 2)
    return out


def bump_matrix(indices, x) -> np.ndarray:
    """Rows: points of ``x``; columns: phi_N(x) for N in ``indices``."""
    x = np.asarray(x, dtype=float)
    return np.stack([varphi_N(N, x) for N in indices], axis=-1)


# ---------------------------------------------------------------------------
# space-time fields


@dataclass(frozen=True, eq=False)
class SpaceTimeField:
    """Demodulated time-frequency data on a periodic time window.

    ``spectrum[j, k+K]`` holds V(sigma_j, k) = dt * sum_n exp(-i sigma_j t_n) w(t_n, k) with
    w(t, k) = exp(-i k^3 t) u_hat(t, k) and sigma_j = 2pi j / period,
    j = -M/2..M/2-1. The stored frequency is the modulation tau - k^3.
    """

    K: int
    spectrum: np.ndarray
    t0: float = WINDOW_T0
    period: float = WINDOW_PERIOD

    def __post_init__(self):
        V = np.array(self.spectrum, dtype=complex)
        if V.ndim != 2 or V.shape[1] != 2 * self.K + 1 or V.shape[0] % 2:
            raise ValueError(f"spectrum shape {V.shape} incompatible with K={self.K}")
        V.setflags(write=False)
        object.__setattr__(self, "spectrum", V)

    # grids
    @property
    def M(self) -> int:
        return self.spectrum.shape[0]

    @property
    def dt(self) -> float:
        return self.period / self.M

    @cached_property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.M)

    @cached_property
    def sigma(self) -> np.ndarray:
        return 2 * np.pi * np.arange(-self.M // 2, self.M // 2) / self.period

    @property
    def dsigma(self) -> float:
        return 2 * np.pi / self.period

    @property
    def sigma_max(self) -> float:
        return float(np.max(np.abs(self.sigma)))

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.K)

    def _phase(self) -> np.ndarray:
        # exp(-i sigma_j t0) factor between the DFT and the sampled transform
        return np.exp(-1j * self.sigma * self.t0)[:, None]

    # constructors
    @classmethod
    def from_demodulated(cls, w, t0: float = WINDOW_T0, period: float = WINDOW_PERIOD) -> "SpaceTimeField":
        w = np.asarray(w, dtype=complex)
        M, nk = w.shape
        K = (nk - 1) // 2
        dt = period / M
        spec = dt * np.fft.fftshift(np.fft.fft(w, axis=0), axes=0)
        sigma = 2 * np.pi * np.arange(-M // 2, M // 2) / period
        spec *= np.exp(-1j * sigma * t0)[:, None]
        return cls(K, spec, t0, period)

    @classmethod
    def from_physical(cls, uhat, t0: float = WINDOW_T0, period: float = WINDOW_PERIOD) -> "SpaceTimeField":
        """From raw samples u_hat(t_n, k) on the window grid."""
        uhat = np.asarray(uhat, dtype=complex)
        M, nk = uhat.shape
        K = (nk - 1) // 2
        t = t0 + (period / M) * np.arange(M)
        k3 = wavenumbers(K).astype(float) ** 3
        return cls.from_demodulated(uhat * np.exp(-1j * np.outer(t, k3)), t0, period)

    @classmethod
    def zeros(cls, K: int, M: int, t0: float = WINDOW_T0, period: float = WINDOW_PERIOD) -> "SpaceTimeField":
        return cls(K, np.zeros((M, 2 * K + 1), dtype=complex), t0, period)

    @classmethod
    def window_times(cls, M: int, t0: float = WINDOW_T0, period: float = WINDOW_PERIOD) -> np.ndarray:
        return t0 + (period / M) * np.arange(M)

    # views
    def demodulated(self) -> np.ndarray:
        V = self.spectrum / self._phase()
        return np.fft.ifft(np.fft.ifftshift(V, axes=0), axis=0) / self.dt

    def physical(self) -> np.ndarray:
        k3 = self.k.astype(float) ** 3
        return self.demodulated() * np.exp(1j * np.outer(self.times, k3))

    def with_spectrum(self, V) -> "SpaceTimeField":
        return SpaceTimeField(self.K, V, self.t0, self.period)

    def resized(self, K: int) -> "SpaceTimeField":
        V = np.zeros((self.M, 2 * K + 1), dtype=complex)
        m = min(K, self.K)
        V[:, K - m : K + m + 1] = self.spectrum[:, self.K - m : self.K + m + 1]
        return SpaceTimeField(K, V, self.t0, self.period)

    def __add__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        self._check_compatible(other)
        return self.with_spectrum(self.spectrum + other.spectrum)

    def __sub__(self, other: "SpaceTimeField") -> "SpaceTimeField":
        self._check_compatible(other)
        return self.with_spectrum(self.spectrum - other.spectrum)

    def __mul__(self, a) -> "SpaceTimeField":
        return self.with_spectrum(self.spectrum * a)

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if other.K != self.K or other.M != self.M or other.t0 != self.t0 or other.period != self.period:
            raise ValueError("space-time fields live on different grids")

    def l2_norm(self) -> float:
        """||u||_{L^2_{xt}} over the window (Plancherel in sigma)."""
        return float(np.sqrt(2 * np.pi / self.period * np.sum(np.abs(self.spectrum) ** 2)))

    def slice_at(self, n: int) -> TorusField:
        """Spatial field at time sample n (complex)."""
        uhat = self.physical()[n]
        if not is_power_of_two(self.K):
            raise ValueError("TorusField needs K a power of two")
        return TorusField(self.K, uhat, real=False)

    # dyadic ranges
    @property
    def N_indices(self) -> list[float]:
        return dyadic_up_to(self.K)

    @property
    def L_indices(self) -> list[float]:
        return dyadic_up_to(self.sigma_max)


# ---------------------------------------------------------------------------
# projections


def project_P(u, N: float):
    """Spatial Littlewood-Paley projection: coefficients times phi_N(k)."""
    if isinstance(u, TorusField):
        c = u.coefficients * varphi_N(N, u.k)
        return TorusField(u.K, c, u.real)
    if isinstance(u, SpaceTimeField):
        return u.with_spectrum(u.spectrum * varphi_N(N, u.k)[None, :])
    raise TypeError(f"cannot project {type(u).__name__}")


def project_Q(U: SpaceTimeField, L: float) -> SpaceTimeField:
    """Modulation projection: V(sigma, k) times phi_L(sigma)."""
    return U.with_spectrum(U.spectrum * varphi_N(L, U.sigma)[:, None])


AGGREGATE_KINDS = ("P_lesssim", "P_gg", "Q_gg", "Q_le")


def aggregate(u, kind: str, threshold: float):
    """Sum of elementary projections over an index range.

    P_lesssim: N' <= threshold;  P_gg: N' > threshold;
    Q_le: L' <= threshold;       Q_gg: L' > threshold.
    """
    check_dyadic(threshold)
    if kind in ("P_lesssim", "P_gg"):
        k = u.k
        top = max(dyadic_up_to(np.max(np.abs(k)))[-1], threshold)
        idx = [N for N in dyadic_up_to(top) if (N <= threshold) == (kind == "P_lesssim")]
        mult = np.sum([varphi_N(N, k) for N in idx], axis=0) if idx else np.zeros(len(k))
        if isinstance(u, TorusField):
            return TorusField(u.K, u.coefficients * mult, u.real)
        return u.with_spectrum(u.spectrum * mult[None, :])
    if kind in ("Q_gg", "Q_le"):
        if not isinstance(u, SpaceTimeField):
            raise TypeError("modulation projections need a SpaceTimeField")
        top = max(u.L_indices[-1], threshold)
        idx = [L for L in dyadic_up_to(top) if (L <= threshold) == (kind == "Q_le")]
        mult = np.sum([varphi_N(L, u.sigma) for L in idx], axis=0) if idx else np.zeros(u.M)
        return u.with_spectrum(u.spectrum * mult[:, None])
    raise ValueError(f"unknown aggregate kind {kind!r}; expected one of {AGGREGATE_KINDS}")


@dataclass(frozen=True, eq=False)
class DyadicAtom:
    N: float
    L: float | None
    payload: object

    @property
    def l2_mass(self) -> float:
        p = self.payload
        if isinstance(p, SpaceTimeField):
            return p.l2_norm()
        return l2_norm(p)

    def to_dict(self, include_payload: bool = False) -> dict:
        d = {"N": self.N, "L": self.L, "l2_mass": self.l2_mass}
        if include_payload:
            p = self.payload
            if isinstance(p, SpaceTimeField):
                d["payload"] = {
                    "K": p.K, "t0": p.t0, "period": p.period,
                    "spectrum": [[[z.real, z.imag] for z in row] for row in p.spectrum],
                }
            else:
                d["payload"] = p.to_dict()
        return d


def atom_masses(U: SpaceTimeField, Ns=None, Ls=None) -> np.ndarray:
    """Matrix of ||P_N Q_L U||_{L^2_{xt}} with rows over N and columns over L."""
    Ns = U.N_indices if Ns is None else Ns
    Ls = U.L_indices if Ls is None else Ls
    PhiN = bump_matrix(Ns, U.k) ** 2
    PhiL = bump_matrix(Ls, U.sigma) ** 2
    A = np.abs(U.spectrum) ** 2
    m2 = (PhiN.T @ (A.T @ PhiL)) * (2 * np.pi / U.period)
    return np.sqrt(np.maximum(m2, 0.0))


def decompose(U) -> list[DyadicAtom]:
    """All (N, L) atoms with nonzero payload, ordered by N then L."""
    atoms = []
    if isinstance(U, TorusField):
        for N in dyadic_up_to(U.K):
            p = project_P(U, N)
            if np.any(p.coefficients != 0):
                atoms.append(DyadicAtom(N, None, p))
        return atoms
    PhiN = bump_matrix(U.N_indices, U.k)
    PhiL = bump_matrix(U.L_indices, U.sigma)
    nz = np.abs(U.spectrum) != 0
    # support test before building payloads
    hit = (PhiN != 0).T.astype(float) @ nz.T.astype(float) @ (PhiL != 0).astype(float)
    for i, N in enumerate(U.N_indices):
        for j, L in enumerate(U.L_indices):
            if hit[i, j] > 0:
                V = U.spectrum * PhiL[:, j][:, None] * PhiN[:, i][None, :]
                atoms.append(DyadicAtom(N, L, U.with_spectrum(V)))
    return atoms


def atoms_to_json(atoms: list[DyadicAtom], include_payload: bool = False) -> str:
    return json.dumps([a.to_dict(include_payload) for a in atoms])


def truncated_mass(U: SpaceTimeField) -> float:
    """L^2_{xt} mass in the outer half of the sigma grid, |sigma| > sigma_max/2.

    Large values flag fields whose modulation content is cut by the grid.
    """
    sel = np.abs(U.sigma) > U.sigma_max / 2
    return float(np.sqrt(2 * np.pi / U.period * np.sum(np.abs(U.spectrum[sel]) ** 2)))
