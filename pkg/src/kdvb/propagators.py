"""Linear propagators, Duhamel integrals and time steppers for

    u_t + u_xxx - u_xx + u u_x = 0   on the 2pi-torus.

In Fourier variables the linear part is the multiplier exp(t * lam(k)) with
lam(k) = i k^3 - k^2, and the nonlinearity is -(ik/2) * (u^2)^(k).
"""

from __future__ import annotations

import csv
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dyadic import SpaceTimeField, eta
from .torus import (
    TorusField,
    coeffs_to_samples,
    dealiased_product,
    hermitian_part,
    samples_to_coeffs,
    sobolev_weights,
    wavenumbers,
)

log = logging.getLogger(__name__)

PICARD_DIVERGENCE = 1e6


class BlowUpError(RuntimeError):
    """Raised when a trajectory produces non-finite or absurdly large values."""

    def __init__(self, time: float, step: int, norm: float):
        self.time, self.step, self.norm = time, step, norm
        super().__init__(f"blow-up at t={time:.6g} (step {step}): ||u||_L2 = {norm:.3e}")


def linear_symbol(K: int) -> np.ndarray:
    k = wavenumbers(K).astype(float)
    return 1j * k**3 - k**2


# ---------------------------------------------------------------------------
# propagators


def semigroup_S(phi: TorusField, t: float) -> TorusField:
    """S(t): multiplier exp(itk^3 - tk^2), forward in time only."""
    if t < 0:
        raise ValueError(f"the dissipative semigroup is defined for t >= 0 only (got t={t})")
    return TorusField(phi.K, phi.coefficients * np.exp(t * linear_symbol(phi.K)), phi.real)


def two_param_W(phi: TorusField, t: float, t_prime: float) -> TorusField:
    """W(t, t'): multiplier exp(itk^3 - |t'|k^2), any real t, t'."""
    k = wavenumbers(phi.K).astype(float)
    mult = np.exp(1j * t * k**3 - abs(t_prime) * k**2)
    return TorusField(phi.K, phi.coefficients * mult, phi.real)


def airy(phi: TorusField, t: float) -> TorusField:
    """Airy flow exp(-t d_xxx): multiplier exp(itk^3)."""
    k = wavenumbers(phi.K).astype(float)
    return TorusField(phi.K, phi.coefficients * np.exp(1j * t * k**3), phi.real)


# ---------------------------------------------------------------------------
# exponential quadrature


def phi_functions(z):
    """phi_1, phi_2, phi_3 of complex z, stable near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1.0
    p1 = np.empty_like(z)
    p2 = np.empty_like(z)
    p3 = np.empty_like(z)
    if np.any(small):
        zs = z[small]
        s1 = np.zeros_like(zs)
        s2 = np.zeros_like(zs)
        s3 = np.zeros_like(zs)
        term = np.ones_like(zs)
        for m in range(24):
            s1 += term / math.factorial(m + 1)
            s2 += term / math.factorial(m + 2)
            s3 += term / math.factorial(m + 3)
            term = term * zs
        p1[small], p2[small], p3[small] = s1, s2, s3
    big = ~small
    if np.any(big):
        zb = z[big]
        with np.errstate(under="ignore", over="ignore"):
            q1 = np.expm1(zb) / zb
        q2 = (q1 - 1.0) / zb
        q3 = (q2 - 0.5) / zb
        p1[big], p2[big], p3[big] = q1, q2, q3
    return p1, p2, p3


def _pair_weights(z):
    """Weights of exp(z(1-s)) against the quadratic through s = 0, 1/2, 1.

    Returns (A, B, C), each of shape (3,) + z.shape, for the integrals over
    [0, 1] (kernel ending at 1), [0, 1/2] (kernel ending at 1/2) and
    [1/2, 1] (kernel ending at 1). Multiply by the pair length. At z = 0,
    A is Simpson's rule.
    """
    z = np.asarray(z, dtype=complex)
    p1, p2, p3 = phi_functions(z)
    mA = (p1, p2, 2 * p3)
    h1, h2, h3 = phi_functions(z / 2)
    mB = (0.5 * h1, 0.25 * h2, 0.125 * 2 * h3)
    with np.errstate(under="ignore"):
        e = np.exp(z / 2)

    def lagrange(m):
        return np.stack([m[0] - 3 * m[1] + 2 * m[2], 4 * m[1] - 4 * m[2], -m[1] + 2 * m[2]])

    A = lagrange(mA)
    B = lagrange(mB)
    C = A - e * B
    return A, B, C


def exp_cumulative(g: np.ndarray, h: float, lam: np.ndarray) -> np.ndarray:
    """J_m = int_0^{t_m} exp(lam (t_m - s)) g(s) ds on the grid t_m = m h.

    ``g`` has shape (n+1, nk); ``lam`` has shape (nk,). The integrand's
    exponential factor is integrated exactly against the piecewise quadratic
    interpolant of g (composite Simpson on pairs of steps).
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0] - 1
    J = np.zeros_like(g)
    if n == 0:
        return J
    H = 2 * h
    A, B, C = _pair_weights(lam * H)
    with np.errstate(under="ignore"):
        E1 = np.exp(lam * h)
        E2 = np.exp(lam * H)
    if n == 1:
        # single step: linear interpolation via trapezoid-type exact weights
        p1, p2, _ = phi_functions(lam * h)
        J[1] = h * ((p1 - p2) * g[0] + p2 * g[1])
        return J
    m = 0
    while m + 2 <= n:
        g0, g1, g2 = g[m], g[m + 1], g[m + 2]
        J[m + 1] = E1 * J[m] + H * (B[0] * g0 + B[1] * g1 + B[2] * g2)
        J[m + 2] = E2 * J[m] + H * (A[0] * g0 + A[1] * g1 + A[2] * g2)
        m += 2
    if m < n:
        # odd count: last step from the trailing pair (m-1, m, m+1)
        g0, g1, g2 = g[m - 1], g[m], g[m + 1]
        J[m + 1] = E1 * J[m] + H * (C[0] * g0 + C[1] * g1 + C[2] * g2)
    return J


def _decaying_cumulative(g: np.ndarray, h: float, rate: np.ndarray) -> np.ndarray:
    """H_m = int_0^{r_m} exp(-rate * q) g(q) dq on r_m = m h, rate >= 0."""
    g = np.asarray(g, dtype=complex)
    n = g.shape[0] - 1
    out = np.zeros_like(g)
    if n == 0:
        return out
    Hlen = 2 * h
    A, B, C = _pair_weights(-rate * Hlen)
    r = h * np.arange(n + 1)

    def damp(m):
        with np.errstate(under="ignore"):
            return np.exp(-rate * r[m])

    if n == 1:
        p1, p2, _ = phi_functions(-rate * h)
        # int_0^h exp(-rate q) g dq with linear g; reversed kernel
        out[1] = h * (p2 * g[0] + (p1 - p2) * g[1])
        return out
    m = 0
    while m + 2 <= n:
        g0, g1, g2 = g[m], g[m + 1], g[m + 2]
        d = damp(m)
        # exp(-rate q) on [0, H] = exp(z(1-v)) with v = 1 - q/H: reverse node order
        out[m + 2] = out[m] + d * Hlen * (A[2] * g0 + A[1] * g1 + A[0] * g2)
        out[m + 1] = out[m] + d * Hlen * (C[2] * g0 + C[1] * g1 + C[0] * g2)
        m += 2
    if m < n:
        g0, g1, g2 = g[m - 1], g[m], g[m + 1]
        with np.errstate(under="ignore"):
            d = damp(m - 1) * np.exp(-rate * h)
        # piece [1/2, 1] of the trailing pair = reversed [0, 1/2] piece
        out[m + 1] = out[m] + d * Hlen * (B[2] * g0 + B[1] * g1 + B[0] * g2)
    return out


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States u(t_n) on a uniform time grid."""

    times: np.ndarray
    states: np.ndarray
    K: int
    real: bool = True
    scheme: str = ""
    dt: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        s = np.asarray(self.states, dtype=complex)
        if s.shape != (len(t), 2 * self.K + 1):
            raise ValueError(f"states shape {s.shape} does not match {len(t)} times and K={self.K}")
        if len(t) > 2:
            d = np.diff(t)
            if np.max(np.abs(d - d[0])) > 1e-9 * max(1.0, abs(t[-1])):
                raise ValueError("trajectory times must be uniformly spaced")
        t.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", s)

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> TorusField:
        c = self.states[i]
        return TorusField(self.K, hermitian_part(c) if self.real else c, self.real)

    @property
    def final(self) -> TorusField:
        return self.state(len(self) - 1)

    def norms(self, s: float = 0.0) -> np.ndarray:
        w = sobolev_weights(self.K, 2 * s)
        return np.sqrt(2 * np.pi * np.sum(w * np.abs(self.states) ** 2, axis=1))

    def mode(self, k: int) -> np.ndarray:
        return self.states[:, k + self.K]

    def to_csv(self, path, modes) -> None:
        """Columns: t, then |u_hat(t, k)| for each requested k."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"abs_u_{k}" for k in modes])
            for n, t in enumerate(self.times):
                w.writerow([repr(float(t))] + [repr(float(abs(self.states[n, k + self.K]))) for k in modes])

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme, "K": self.K, "dt": self.dt, "real_flag": self.real,
            "times": self.times.tolist(),
            "states_re": self.states.real.tolist(),
            "states_im": self.states.imag.tolist(),
        }


@dataclass(frozen=True)
class SolverConfig:
    K: int
    dt: float
    T: float
    scheme: str = "exponential_rk4"
    picard_depth: int = 8
    dealias: bool = True
    record_every: int = 1

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.T < self.dt * (1 - 1e-12):
            raise ValueError("T must be at least dt")
        if self.scheme not in ("exponential_rk4", "picard"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.picard_depth < 1:
            raise ValueError("picard_depth must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.T / self.dt - 1e-9)))


# ---------------------------------------------------------------------------
# nonlinearity


def nonlinear_term(c: np.ndarray, K: int, dealias: bool = True) -> np.ndarray:
    """-(1/2) d_x (u^2) in coefficient space; broadcasts over leading axes."""
    if dealias:
        sq = dealiased_product(c, c, K)
    else:
        n = 2 * K + 2
        u = coeffs_to_samples(c, K, n)
        sq = samples_to_coeffs(u * u, K)
    return -0.5j * wavenumbers(K) * sq


def duhamel(u0: TorusField, forcing, T: float | None = None, dt: float | None = None) -> Trajectory:
    """u(t) = S(t) u0 + int_0^t S(t - t') F(t') dt' on the forcing's time grid.

    ``forcing`` is a Trajectory (or an array of coefficient rows with ``dt``)
    sampled at t_n = n dt. The Airy phase is removed from F before the
    quadrature, and the dissipative kernel exp(-k^2 (t - t')) is integrated
    exactly against Simpson-type quadratic interpolation.
    """
    if isinstance(forcing, Trajectory):
        F, h = forcing.states, forcing.times[1] - forcing.times[0]
    else:
        F, h = np.asarray(forcing, dtype=complex), dt
        if h is None:
            raise ValueError("dt required with array forcing")
    if T is not None:
        n = int(round(T / h))
        F = F[: n + 1]
    K = u0.K
    t = h * np.arange(F.shape[0])
    k = wavenumbers(K).astype(float)
    airy_phase = np.exp(1j * np.outer(t, k**3))
    G = F * np.conj(airy_phase)
    J = exp_cumulative(G, h, -(k**2) + 0j)
    lin = u0.coefficients[None, :] * np.exp(np.outer(t, linear_symbol(K)))
    states = lin + airy_phase * J
    real = u0.real and (not isinstance(forcing, Trajectory) or forcing.real)
    if real:
        states = hermitian_part(states)
    return Trajectory(t, states, K, real, "duhamel", h)


def extended_L(f: SpaceTimeField) -> SpaceTimeField:
    """eta(t) [chi_{t>0} int_0^t W(t-t', t-t') f dt' + chi_{t<0} int_0^t W(t-t', t+t') f dt'].

    Evaluated on the window grid of ``f``; the grid must contain t = 0.
    """
    n0 = int(round(-f.t0 / f.dt))
    if abs(f.t0 + n0 * f.dt) > 1e-12 * f.period:
        raise ValueError("time window must contain t = 0 as a sample")
    g = f.demodulated()
    k2 = f.k.astype(float) ** 2
    h = f.dt
    out = np.zeros_like(g)
    fwd = exp_cumulative(g[n0:], h, -k2 + 0j)
    out[n0:] = fwd
    back = g[n0::-1]
    Hcum = _decaying_cumulative(back, h, k2)
    r = h * np.arange(n0 + 1)
    with np.errstate(under="ignore"):
        neg = -np.exp(-np.outer(r, k2)) * Hcum
    out[n0::-1][1:] = neg[1:]
    out *= eta(f.times)[:, None]
    return SpaceTimeField.from_demodulated(out, f.t0, f.period)


# ---------------------------------------------------------------------------
# time stepping


def _ifrk4_step(u, dt, E, E2, K, dealias):
    k1 = nonlinear_term(u, K, dealias)
    k2 = nonlinear_term(E2 * (u + 0.5 * dt * k1), K, dealias)
    k3 = nonlinear_term(E2 * u + 0.5 * dt * k2, K, dealias)
    k4 = nonlinear_term(E * u + dt * E2 * k3, K, dealias)
    return E * u + (dt / 6.0) * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)


class _Stepper:
    def __init__(self, K: int, dt: float, dealias: bool = True):
        lam = linear_symbol(K)
        self.K, self.dt, self.dealias = K, dt, dealias
        self.E = np.exp(lam * dt)
        self.E2 = np.exp(lam * dt / 2)

    def __call__(self, u):
        return _ifrk4_step(u, self.dt, self.E, self.E2, self.K, self.dealias)


def _check_finite(u, t, step):
    if not np.all(np.isfinite(u)):
        raise BlowUpError(t, step, float("inf"))
    with np.errstate(over="ignore", invalid="ignore"):
        nrm = float(np.sqrt(2 * np.pi * np.sum(np.abs(u) ** 2)))
    if nrm > 1e150:
        raise BlowUpError(t, step, nrm)


def solve_ivp(u0: TorusField, cfg: SolverConfig) -> Trajectory:
    """Integrating-factor RK4 (Lawson) with the exact linear multiplier.

    Records every ``cfg.record_every`` steps. Raises BlowUpError on
    non-finite values.
    """
    if cfg.K != u0.K:
        raise ValueError(f"config K={cfg.K} does not match data K={u0.K}")
    if cfg.scheme == "picard":
        return picard(u0, cfg.picard_depth, cfg.T, cfg.dt)
    n = cfg.n_steps
    dt = cfg.T / n
    step = _Stepper(u0.K, dt, cfg.dealias)
    u = u0.coefficients.astype(complex)
    times, states = [0.0], [u.copy()]
    for i in range(1, n + 1):
        u = step(u)
        if u0.real:
            u = hermitian_part(u)
        _check_finite(u, i * dt, i)
        if i % cfg.record_every == 0:
            times.append(i * dt)
            states.append(u.copy())
    rec_dt = dt * cfg.record_every
    return Trajectory(np.array(times), np.array(states), u0.K, u0.real, "exponential_rk4", rec_dt,
                      {"step_dt": dt, "n_steps": n})


def global_solve(u0: TorusField, T_final: float, cfg: SolverConfig) -> Trajectory:
    """solve_ivp with a refined start: steps of size <= 1/K^2 for at least
    the first 100 steps, then cfg.dt. Records L^2 and H^4 norms."""
    K = u0.K
    dt = cfg.dt
    n_coarse = max(1, int(math.ceil(T_final / dt - 1e-9)))
    dt = T_final / n_coarse
    sub = max(1, int(math.ceil(dt * K * K)))
    n_fine_intervals = min(n_coarse, int(math.ceil(100 / sub)))
    fine = _Stepper(K, dt / sub, cfg.dealias)
    coarse = _Stepper(K, dt, cfg.dealias)
    u = u0.coefficients.astype(complex)
    times, states = [0.0], [u.copy()]
    step_count = 0
    for i in range(1, n_coarse + 1):
        if i <= n_fine_intervals:
            for _ in range(sub):
                u = fine(u)
                step_count += 1
        else:
            u = coarse(u)
            step_count += 1
        if u0.real:
            u = hermitian_part(u)
        _check_finite(u, i * dt, step_count)
        if i % cfg.record_every == 0:
            times.append(i * dt)
            states.append(u.copy())
    traj = Trajectory(np.array(times), np.array(states), K, u0.real, "exponential_rk4+startup",
                      dt * cfg.record_every,
                      {"step_dt": dt, "startup_dt": dt / sub, "startup_steps": n_fine_intervals * sub})
    traj.diagnostics["l2"] = traj.norms(0.0)
    traj.diagnostics["h4"] = traj.norms(4.0)
    return traj


# ---------------------------------------------------------------------------
# Picard iteration


def _linear_evolution(u0: TorusField, t: np.ndarray) -> np.ndarray:
    return u0.coefficients[None, :] * np.exp(np.outer(t, linear_symbol(u0.K)))


def picard(u0: TorusField, depth: int = 8, T: float = 1.0, dt: float = 1e-3, dealias: bool = True) -> Trajectory:
    """m-th Picard iterate of the Duhamel map on the grid t_n = n dt, n dt <= T.

    Depth 1 is the linear evolution S(t) u0. Successive increments in
    sup_t H^{-1} are stored in ``diagnostics['increments']``; iterates whose
    norm exceeds 1e6 stop the iteration and set ``diagnostics['diverged']``.
    """
    if T > 1.0 + 1e-12:
        raise ValueError("picard is restricted to T <= 1")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    K = u0.K
    n = max(1, int(round(T / dt)))
    h = T / n
    t = h * np.arange(n + 1)
    k = wavenumbers(K).astype(float)
    lin = _linear_evolution(u0, t)
    airy_phase = np.exp(1j * np.outer(t, k**3))
    wH = sobolev_weights(K, -2.0)
    u = lin
    increments, diverged = [], False
    for _ in range(depth - 1):
        F = nonlinear_term(u, K, dealias)
        J = exp_cumulative(F * np.conj(airy_phase), h, -(k**2) + 0j)
        new = lin + airy_phase * J
        if u0.real:
            new = hermitian_part(new)
        inc = float(np.max(np.sqrt(2 * np.pi * np.sum(wH * np.abs(new - u) ** 2, axis=1))))
        increments.append(inc)
        u = new
        size = float(np.max(np.sqrt(2 * np.pi * np.sum(np.abs(u) ** 2, axis=1))))
        if not np.isfinite(size) or size > PICARD_DIVERGENCE:
            diverged = True
            warnings.warn("Picard iteration left the contraction regime", RuntimeWarning, stacklevel=2)
            break
    return Trajectory(t, u, K, u0.real, "picard", h,
                      {"depth": depth, "increments": increments, "diverged": diverged})


def second_iterate_oracle(u0: TorusField, t: float, modes=None) -> dict:
    """Closed form of the second Picard iterate at time t.

    u2(t,k) = e^{lam_k t} c(k) - (ik/2) sum_{k1+k2=k} c(k1) c(k2) e^{lam_k t} (e^{D t} - 1)/D,
    D = lam_{k1} + lam_{k2} - lam_k. Sums only over the nonzero data modes.
    Returns {k: complex}.
    """
    K = u0.K
    c = u0.coefficients
    support = [int(kk) for kk in wavenumbers(K) if c[kk + K] != 0]
    modes = list(wavenumbers(K)) if modes is None else list(modes)

    def lam(kk):
        return 1j * kk**3 - kk**2

    out = {}
    for kk in modes:
        kk = int(kk)
        val = c[kk + K] * np.exp(lam(kk) * t) if abs(kk) <= K else 0j
        acc = 0j
        for k1 in support:
            k2 = kk - k1
            if abs(k2) > K or c[k2 + K] == 0:
                continue
            D = lam(k1) + lam(k2) - lam(kk)
            p1 = phi_functions(np.array([D * t]))[0][0]
            acc += c[k1 + K] * c[k2 + K] * t * p1
        out[kk] = complex(val - 0.5j * kk * np.exp(lam(kk) * t) * acc)
    return out
