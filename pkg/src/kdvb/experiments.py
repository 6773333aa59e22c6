"""Desk-scale experiments: frequency cascade, parabolic smoothing, analytic dependence.

Every experiment returns a RunRecord; identical arguments give identical series.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dyadic import dyadic_up_to, project_P
from .propagators import SolverConfig, global_solve, second_iterate_oracle, solve_ivp
from .records import RunRecord, Timer
from .torus import TorusField, is_power_of_two, l2_norm, next_power_of_two, sobolev_norm

FAMILIES = ("single_cos", "paired_cos", "rough_Hminus1")

# mode-1 limit of the second iterate for the paired family, divided by delta^2 e^{-t}
PAIRED_MODE1_CONSTANT = 1.0 / (4.0 * math.sqrt(13.0))


@dataclass(frozen=True)
class DataFamily:
    """Initial data families.

    single_cos:    delta * N cos(Nx)
    paired_cos:    delta * N (cos(Nx) + cos((N+1)x))
    rough_Hminus1: |c(k)| = delta |k|^exponent on 1 <= |k| <= K, seeded phases
    """

    tag: str
    N: int = 1
    delta: float = 1.0
    exponent: float = -0.25
    seed: int = 0

    def __post_init__(self):
        if self.tag not in FAMILIES:
            raise ValueError(f"unknown family {self.tag!r}; choose from {FAMILIES}")
        if self.N < 1:
            raise ValueError("N must be positive")

    @property
    def kmax(self) -> int:
        return {"single_cos": self.N, "paired_cos": self.N + 1}.get(self.tag, 0)

    def field(self, K: int) -> TorusField:
        if self.tag == "single_cos":
            return TorusField.cos_mode(K, self.N, self.delta * self.N)
        if self.tag == "paired_cos":
            a = self.delta * self.N
            return TorusField.cos_mode(K, self.N, a) + TorusField.cos_mode(K, self.N + 1, a)
        return rough_field(K, self.delta, self.exponent, self.seed)

    def with_N(self, N: int) -> "DataFamily":
        return DataFamily(self.tag, N, self.delta, self.exponent, self.seed)


def rough_field(K: int, delta: float, exponent: float = -0.25, seed: int = 0) -> TorusField:
    """Real field with |c(k)| = delta |k|^exponent, 1 <= |k| <= K.

    Phases for k = 1, 2, ... come from one seeded stream, so a smaller K is a
    truncation of a larger one.
    """
    rng = np.random.default_rng(seed)
    phases = np.empty(0)
    while len(phases) < K:
        phases = np.concatenate([phases, rng.uniform(0, 2 * np.pi, 256)])
    ks = np.arange(1, K + 1)
    c = np.zeros(2 * K + 1, dtype=complex)
    c[K + ks] = delta * ks.astype(float) ** exponent * np.exp(1j * phases[:K])
    c[K - ks] = np.conj(c[K + ks])
    return TorusField(K, c, real=True)


def resolution_K(N: int) -> int:
    """Smallest power of two K with 2N + 2 <= K/2."""
    return next_power_of_two(4 * N + 4)


def loglog_slope(x, y) -> float:
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(x, y, 1)[0])


# ---------------------------------------------------------------------------
# cascade


def cascade_experiment(family: DataFamily, N_list, t_eval: float = 0.01, delta: float | None = None,
                       track_modes=(1, 2), K: int | None = None, n_steps: int = 100,
                       sobolev_s=(-1.0, -1.5, -2.0), record_every: int = 10,
                       phase_step: float = 0.15) -> RunRecord:
    """Solve from family(N) for each N and track low modes against the second iterate.

    ``K=None`` picks the smallest admissible K per N.  The step count is at
    least ``n_steps`` and large enough that dt (N+1)^2 <= phase_step, since the
    interaction phases rotate at rate ~ N^2.  For single_cos the
    largest coefficient off the multiples of N is recorded at every stored time.
    """
    if not 0 < t_eval <= 0.1:
        raise ValueError("t_eval must lie in (0, 0.1]")
    if family.tag == "rough_Hminus1":
        raise ValueError("the cascade runs on the cos families")
    if delta is not None:
        family = DataFamily(family.tag, family.N, delta, family.exponent, family.seed)
    N_list = [int(N) for N in N_list]
    for N in N_list:
        if not is_power_of_two(N):
            raise ValueError(f"N={N} is not dyadic")
        KN = K or resolution_K(N)
        if 2 * N + 2 > KN / 2:
            raise ValueError(f"K={KN} too small for N={N}: need 2N+2 <= K/2")
    config = {"family": asdict(family), "N_list": N_list, "t_eval": t_eval, "track_modes": list(track_modes),
              "K": K, "n_steps": n_steps, "sobolev_s": list(sobolev_s), "record_every": record_every,
              "phase_step": phase_step}
    rows = {"N": [], "K": [], "steps": []}
    for s in sobolev_s:
        rows[f"data_H{s:g}"] = []
    for k in track_modes:
        rows[f"abs_u_{k}"] = []
        rows[f"abs_oracle_{k}"] = []
    rows["off_support_max"] = []
    dyad = {"N": [], "band": [], "energy": []}
    with Timer() as tm:
        for N in N_list:
            KN = K or resolution_K(N)
            fam = family.with_N(N)
            u0 = fam.field(KN)
            steps = max(n_steps, math.ceil(t_eval * (N + 1) ** 2 / phase_step))
            traj = solve_ivp(u0, SolverConfig(KN, t_eval / steps, t_eval, record_every=record_every))
            uT = traj.final
            oracle = second_iterate_oracle(u0, t_eval, track_modes)
            rows["N"].append(N)
            rows["K"].append(KN)
            rows["steps"].append(steps)
            for s in sobolev_s:
                rows[f"data_H{s:g}"].append(sobolev_norm(u0, s))
            for k in track_modes:
                rows[f"abs_u_{k}"].append(abs(uT.coeff(k)))
                rows[f"abs_oracle_{k}"].append(abs(oracle[k]))
            if fam.tag == "single_cos":
                off = np.mod(np.arange(-KN, KN + 1), N) != 0
                rows["off_support_max"].append(float(np.max(np.abs(traj.states[:, off]))))
            else:
                rows["off_support_max"].append(float("nan"))
            for band in dyadic_up_to(KN):
                dyad["N"].append(N)
                dyad["band"].append(band)
                dyad["energy"].append(l2_norm(project_P(uT, band)) ** 2)
    rec = RunRecord("cascade", config, family.seed)
    rec.add_series("cascade", **rows)
    rec.add_series("dyadic_energy", **dyad)
    d = family.delta
    summary = {"delta": d, "mode1_limit_over_delta2": PAIRED_MODE1_CONSTANT * math.exp(-t_eval)}
    if len(N_list) > 1:
        summary["slope_H-1.5"] = loglog_slope(N_list, rows["data_H-1.5"]) if -1.5 in sobolev_s else None
    if 1 in track_modes:
        summary["mode1_over_delta2"] = [a / d**2 for a in rows["abs_u_1"]]
        summary["oracle1_over_delta2"] = [a / d**2 for a in rows["abs_oracle_1"]]
    if family.tag == "single_cos":
        summary["off_support_max"] = max(rows["off_support_max"])
    rec.summary = summary
    rec.wall_time = tm.elapsed
    return rec


# ---------------------------------------------------------------------------
# smoothing


def smoothing_experiment(data: DataFamily | None = None, t_list=(0.0, 0.01, 0.05, 0.1), m_list=(0, 1, 2, 4),
                         K_list=(256, 512), dt: float = 1e-3) -> RunRecord:
    """Sobolev norms of the solution from rough H^{-1} data at several truncations."""
    data = data or DataFamily("rough_Hminus1", delta=0.1)
    if data.tag != "rough_Hminus1":
        raise ValueError("smoothing runs on rough_Hminus1 data")
    t_list = sorted(float(t) for t in t_list)
    T = t_list[-1]
    n = max(1, int(round(T / dt)))
    idx = [int(round(t / (T / n))) for t in t_list]
    if any(abs(i * (T / n) - t) > 1e-9 for i, t in zip(idx, t_list)):
        raise ValueError("t_list must lie on the dt grid")
    config = {"data": asdict(data), "t_list": t_list, "m_list": list(m_list), "K_list": list(K_list), "dt": dt}
    rows = {"K": [], "t": []}
    for m in m_list:
        rows[f"H{m:g}"] = []
    rows["tail_envelope"] = []
    data_l2 = []
    with Timer() as tm:
        for K in K_list:
            u0 = data.field(K)
            data_l2.append(l2_norm(u0))
            traj = global_solve(u0, T, SolverConfig(K, T / n, T))
            high = np.abs(np.arange(-K, K + 1)) > K // 2
            k2 = np.arange(-K, K + 1, dtype=float) ** 2
            for i, t in zip(idx, t_list):
                u = traj.state(i)
                rows["K"].append(K)
                rows["t"].append(t)
                for m in m_list:
                    rows[f"H{m:g}"].append(sobolev_norm(u, m))
                with np.errstate(divide="ignore", over="ignore"):
                    env = np.exp(np.log(np.abs(u.coefficients[high])) + t * k2[high] / 2)
                rows["tail_envelope"].append(float(np.max(env)))
    rec = RunRecord("smoothing", config, data.seed)
    rec.add_series("norms", **rows)
    rec.add_series("data_l2", K=list(K_list), l2=data_l2)
    summary = {}
    if len(K_list) > 1:
        summary["l2_growth_exponent"] = loglog_slope(K_list, data_l2)
        last = [rows[f"H{m_list[-1]:g}"][j] for j in range(len(rows["t"])) if rows["t"][j] == T]
        summary[f"H{m_list[-1]:g}_rel_change_at_T"] = abs(last[-1] - last[-2]) / abs(last[-2])
    rec.summary = summary
    rec.wall_time = tm.elapsed
    return rec


# ---------------------------------------------------------------------------
# analyticity


def analyticity_experiment(u0: TorusField, v: TorusField, delta_list=(1e-2, 1e-3, 1e-4), t_eval: float = 0.1,
                           dt: float = 1e-3, s: float = -1.0) -> RunRecord:
    """Second differences D(delta) = ||u(u0 + delta v) - 2 u(u0) + u(u0 - delta v)||_{H^s} at t_eval."""
    if u0.K != v.K:
        raise ValueError("u0 and v must share K")
    cfg = SolverConfig(u0.K, dt, t_eval)

    def flow(w):
        return solve_ivp(w, cfg).final

    config = {"u0": u0.to_dict(), "v": v.to_dict(), "delta_list": list(delta_list), "t_eval": t_eval,
              "dt": dt, "s": s}
    with Timer() as tm:
        base = flow(u0)
        D = []
        for d in delta_list:
            second = flow(u0 + d * v) - 2.0 * base + flow(u0 - d * v)
            D.append(sobolev_norm(second, s))
    rec = RunRecord("analyticity", config, None)
    rec.add_series("second_difference", delta=list(delta_list), D=D)
    rec.summary = {"exponent": loglog_slope(delta_list, D) if all(x > 0 for x in D) else float("nan")}
    rec.wall_time = tm.elapsed
    return rec
