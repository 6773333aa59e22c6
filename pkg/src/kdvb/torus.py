"""Truncated Fourier fields on the 2*pi-torus.

A field is stored by its coefficients c(k), k = -K..K, with the convention

    c(k) = (1/2pi) * int_0^{2pi} u(x) exp(-ikx) dx,    u(x) = sum_k c(k) exp(ikx)

so that ||u||_{L^2}^2 = 2pi * sum_k |c(k)|^2 and H^0 is exactly L^2.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

HERMITIAN_RTOL = 1e-12


def bracket(x):
    """Japanese bracket (1 + |x|^2)^(1/2)."""
    x = np.asarray(x, dtype=float)
    out = np.sqrt(1.0 + x * x)
    return float(out) if out.ndim == 0 else out


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def wavenumbers(K: int) -> np.ndarray:
    """Integer wavenumbers -K..K in storage order."""
    return np.arange(-K, K + 1)


def product_grid_size(K: int) -> int:
    """Collocation size for dealiased products: smallest power of two >= 3K+1."""
    return next_power_of_two(3 * K + 1)


def _to_fft_order(coeffs: np.ndarray, K: int, n: int) -> np.ndarray:
    # coeffs[..., k+K] -> out[..., k mod n]
    out = np.zeros(coeffs.shape[:-1] + (n,), dtype=complex)
    idx = np.mod(wavenumbers(K), n)
    out[..., idx] = coeffs
    return out


def _from_fft_order(spec: np.ndarray, K: int) -> np.ndarray:
    n = spec.shape[-1]
    return spec[..., np.mod(wavenumbers(K), n)]


def coeffs_to_samples(coeffs: np.ndarray, K: int, n: int) -> np.ndarray:
    """Values on x_j = 2pi j/n, j = 0..n-1 (n > 2K). Works along the last axis."""
    return np.fft.ifft(_to_fft_order(coeffs, K, n), axis=-1) * n


def samples_to_coeffs(values: np.ndarray, K: int) -> np.ndarray:
    n = values.shape[-1]
    if n <= 2 * K:
        raise ValueError(f"need more than 2K={2 * K} samples, got {n}")
    return _from_fft_order(np.fft.fft(values, axis=-1) / n, K)


def dealiased_product(a: np.ndarray, b: np.ndarray, K: int) -> np.ndarray:
    """Coefficients of the product of two coefficient arrays, truncated to |k| <= K.

    Exact (no aliasing) because the collocation grid has at least 3K+1 points.
    Broadcasts over leading axes.
    """
    n = product_grid_size(K)
    ua = coeffs_to_samples(a, K, n)
    ub = coeffs_to_samples(b, K, n)
    return samples_to_coeffs(ua * ub, K)


def hermitian_part(coeffs: np.ndarray) -> np.ndarray:
    """Project onto c(-k) = conj(c(k)) along the last axis."""
    return 0.5 * (coeffs + np.conj(coeffs[..., ::-1]))


@dataclass(frozen=True, eq=False)
class TorusField:
    """Immutable truncated Fourier field with coefficients indexed k = -K..K."""

    K: int
    coefficients: np.ndarray
    real: bool = True

    def __post_init__(self):
        if not isinstance(self.K, (int, np.integer)) or not is_power_of_two(int(self.K)):
            raise ValueError(f"K must be a positive power of two, got {self.K!r}")
        c = np.array(self.coefficients, dtype=complex)
        if c.shape != (2 * self.K + 1,):
            raise ValueError(
                f"expected {2 * self.K + 1} coefficients for K={self.K}, got shape {c.shape}"
            )
        if self.real:
            scale = max(float(np.max(np.abs(c))), np.finfo(float).tiny)
            if np.max(np.abs(c - np.conj(c[::-1]))) > HERMITIAN_RTOL * scale:
                raise ValueError("real field requires Hermitian coefficients c(-k) = conj(c(k))")
        c.setflags(write=False)
        object.__setattr__(self, "K", int(self.K))
        object.__setattr__(self, "coefficients", c)

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, K: int, real: bool = True) -> "TorusField":
        return cls(K, np.zeros(2 * K + 1, dtype=complex), real)

    @classmethod
    def from_modes(cls, K: int, modes: dict, real: bool | None = None) -> "TorusField":
        """Build from a {k: c(k)} mapping. With ``real=None`` the field is real
        exactly when the supplied modes are Hermitian."""
        c = np.zeros(2 * K + 1, dtype=complex)
        for k, v in modes.items():
            if abs(k) > K:
                raise ValueError(f"mode {k} outside |k| <= {K}")
            c[k + K] += v
        if real is None:
            real = bool(np.allclose(c, np.conj(c[::-1]), rtol=0, atol=1e-15))
        return cls(K, c, real)

    @classmethod
    def cos_mode(cls, K: int, k: int, amplitude: float = 1.0) -> "TorusField":
        return cls.from_modes(K, {k: amplitude / 2, -k: amplitude / 2}, real=True)

    @classmethod
    def sin_mode(cls, K: int, k: int, amplitude: float = 1.0) -> "TorusField":
        return cls.from_modes(K, {k: amplitude / 2j, -k: -amplitude / 2j}, real=True)

    @classmethod
    def from_samples(cls, values, K: int, real: bool | None = None) -> "TorusField":
        values = np.asarray(values)
        if real is None:
            real = not np.iscomplexobj(values)
        c = samples_to_coeffs(values.astype(complex), K)
        if real:
            c = hermitian_part(c)
        return cls(K, c, real)

    # views ----------------------------------------------------------------

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.K)

    def coeff(self, k: int) -> complex:
        return complex(self.coefficients[k + self.K]) if abs(k) <= self.K else 0j

    def grid(self, n: int | None = None) -> np.ndarray:
        n = n or next_power_of_two(2 * self.K + 2)
        return 2 * np.pi * np.arange(n) / n

    def to_samples(self, n: int | None = None) -> np.ndarray:
        n = n or next_power_of_two(2 * self.K + 2)
        u = coeffs_to_samples(self.coefficients, self.K, n)
        return u.real if self.real else u

    def with_coefficients(self, c, real: bool | None = None) -> "TorusField":
        return TorusField(self.K, c, self.real if real is None else real)

    def resized(self, K: int) -> "TorusField":
        """Zero-pad or truncate to a new K."""
        c = np.zeros(2 * K + 1, dtype=complex)
        m = min(K, self.K)
        c[K - m : K + m + 1] = self.coefficients[self.K - m : self.K + m + 1]
        return TorusField(K, c, self.real)

    # arithmetic -------------------------------------------------------------

    def _check_same_K(self, other: "TorusField"):
        if other.K != self.K:
            raise ValueError(f"dimension mismatch: K={self.K} vs K={other.K}")

    def __add__(self, other: "TorusField") -> "TorusField":
        self._check_same_K(other)
        return TorusField(self.K, self.coefficients + other.coefficients, self.real and other.real)

    def __sub__(self, other: "TorusField") -> "TorusField":
        self._check_same_K(other)
        return TorusField(self.K, self.coefficients - other.coefficients, self.real and other.real)

    def __mul__(self, a) -> "TorusField":
        if isinstance(a, TorusField):
            return product_dealiased(self, a)
        real = self.real and np.isrealobj(a)
        return TorusField(self.K, self.coefficients * a, real)

    __rmul__ = __mul__

    def __neg__(self) -> "TorusField":
        return TorusField(self.K, -self.coefficients, self.real)

    # serialization ------------------------------------------------------------

    def to_dict(self) -> dict:
        c = self.coefficients
        return {
            "K": self.K,
            "real_flag": self.real,
            "coefficients": [[float(z.real), float(z.imag)] for z in c],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TorusField":
        c = np.array([complex(re, im) for re, im in d["coefficients"]])
        return cls(int(d["K"]), c, bool(d["real_flag"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "TorusField":
        return cls.from_dict(json.loads(s))


def _finite_or_warn(value: float, what: str) -> float:
    if not np.isfinite(value):
        warnings.warn(f"{what} overflowed to {value}", RuntimeWarning, stacklevel=3)
    return value


def sobolev_weights(K: int, p: float) -> np.ndarray:
    """<k>^p for k = -K..K."""
    k = wavenumbers(K).astype(float)
    with np.errstate(over="ignore"):
        return (1.0 + k * k) ** (p / 2)


def sobolev_norm(u: TorusField, s: float = 0.0) -> float:
    """(2pi * sum_k <k>^{2s} |c(k)|^2)^{1/2}; overflow gives inf with a warning."""
    with np.errstate(over="ignore", invalid="ignore"):
        w = sobolev_weights(u.K, 2 * s)
        a = np.abs(u.coefficients) ** 2
        # empty modes contribute nothing even where the weight overflowed
        total = 2 * np.pi * np.sum(np.where(a > 0, w * a, 0.0))
        val = float(np.sqrt(total))
    return _finite_or_warn(val, f"H^{s} norm")


def l2_norm(u: TorusField) -> float:
    return sobolev_norm(u, 0.0)


def derivative(u: TorusField, order: int = 1) -> TorusField:
    if order < 0:
        raise ValueError("derivative order must be non-negative")
    mult = (1j * u.k.astype(float)) ** order
    c = u.coefficients * mult
    if u.real:
        c = hermitian_part(c)
    return TorusField(u.K, c, u.real)


def product_dealiased(u: TorusField, v: TorusField) -> TorusField:
    """Pointwise product via a 3K+1-point (or larger) collocation grid, truncated to |k| <= K."""
    if u.K != v.K:
        raise ValueError(f"dimension mismatch: K={u.K} vs K={v.K}")
    c = dealiased_product(u.coefficients, v.coefficients, u.K)
    real = u.real and v.real
    if real:
        c = hermitian_part(c)
    return TorusField(u.K, c, real)


def inner_product(u: TorusField, v: TorusField) -> complex:
    """L^2 inner product int u conj(v) dx."""
    if u.K != v.K:
        raise ValueError(f"dimension mismatch: K={u.K} vs K={v.K}")
    return complex(2 * np.pi * np.sum(u.coefficients * np.conj(v.coefficients)))


def random_field(rng: np.random.Generator, K: int, kmin: int = 1, kmax: int | None = None,
                 exponent: float = 0.0, real: bool = True) -> TorusField:
    """Gaussian coefficients with |c(k)| ~ |k|^exponent on kmin <= |k| <= kmax."""
    kmax = K if kmax is None else kmax
    c = np.zeros(2 * K + 1, dtype=complex)
    ks = np.arange(kmin, kmax + 1)
    z = rng.standard_normal(len(ks)) + 1j * rng.standard_normal(len(ks))
    amp = np.abs(ks).astype(float)
    amp[ks == 0] = 1.0
    amp = amp**exponent
    c[ks + K] = z * amp
    if real:
        c[-ks + K] = np.conj(c[ks + K])
        if kmin == 0:
            c[K] = c[K].real
    else:
        z2 = rng.standard_normal(len(ks)) + 1j * rng.standard_normal(len(ks))
        c[-ks + K] = z2 * amp
    return TorusField(K, c, real)
