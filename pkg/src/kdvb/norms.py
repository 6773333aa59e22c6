"""Dyadic space-time norms evaluated on sampled SpaceTimeFields.

Atom masses ||P_N Q_L u||_{L^2_{xt}} are weighted at the nominal dyadic
indices (the bump centres), so <N>^s <L + N^2>^b uses N and L themselves.

Sum spaces X + Y are evaluated by an upper bound on the infimum: each dyadic
atom is routed to one summand (greedy by marginal cost, then single-atom
moves until none helps), and the best of that and the trivial splits is kept.
The returned witness records the routing.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .dyadic import SpaceTimeField, bump_matrix, truncated_mass
from .torus import bracket

DEFAULT_EPS = 1.0 / 16

LEAF_TAGS = ("Xsb1", "Xsb1_eps", "Xsb_inf", "Ysb", "Zs_minus_half", "TildeLinfH", "Sobolev", "L2st")
COMPOUND_TAGS = ("SumSpace", "Intersection", "Z_beta")


@dataclass(frozen=True)
class NormKind:
    """A norm and its parameters.

    ``parts`` holds sub-kinds for SumSpace / Intersection, and ``weights`` the
    factors in front of each summand of a SumSpace (1 if omitted).
    """

    tag: str
    s: float = -1.0
    b: float = 0.5
    eps: float = DEFAULT_EPS
    beta: float = 1.0
    parts: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        if self.tag not in LEAF_TAGS + COMPOUND_TAGS:
            raise ValueError(f"unknown norm tag {self.tag!r}")
        if self.tag in ("Xsb1_eps", "Z_beta") and not 0 < self.eps < 1 / 12:
            raise ValueError(f"eps must lie in (0, 1/12), got {self.eps}")
        if self.tag == "Z_beta" and self.beta < 1:
            raise ValueError(f"beta must be >= 1, got {self.beta}")
        if self.tag in ("SumSpace", "Intersection") and not self.parts:
            raise ValueError(f"{self.tag} needs parts")

    @property
    def label(self) -> str:
        if self.tag in ("SumSpace", "Intersection"):
            op = " + " if self.tag == "SumSpace" else " & "
            return "(" + op.join(p.label for p in self.parts) + ")"
        if self.tag == "Z_beta":
            return f"Z_beta[beta={self.beta:g},eps={self.eps:g}]"
        return f"{self.tag}[s={self.s:g},b={self.b:g}]"


def X(s=-1.0, b=0.5):
    return NormKind("Xsb1", s=s, b=b)


def X_eps(s=-1.0, b=0.5, eps=DEFAULT_EPS):
    return NormKind("Xsb1_eps", s=s, b=b, eps=eps)


def Y(s=-1.0, b=0.5):
    return NormKind("Ysb", s=s, b=b)


def Z(s=-1.0):
    return NormKind("Zs_minus_half", s=s, b=-0.5)


def tilde_LinfH(s=-1.0):
    return NormKind("TildeLinfH", s=s)


def sum_kind(*parts, weights=None):
    return NormKind("SumSpace", parts=tuple(parts), weights=tuple(weights or (1.0,) * len(parts)))


def intersection(*parts):
    return NormKind("Intersection", parts=tuple(parts))


def resolution_kind(s=-1.0, eps=DEFAULT_EPS, tilde=True):
    """(X^{s,1/2,1}_eps & tilde L^inf H^{-1}) + Y^{s,1/2}; without tilde: X_eps + Y."""
    xpart = intersection(X_eps(s, 0.5, eps), tilde_LinfH(-1.0)) if tilde else X_eps(s, 0.5, eps)
    return sum_kind(xpart, Y(s, 0.5))


def nonlinear_kind(s=-1.0, eps=DEFAULT_EPS):
    """(X^{s,-1/2,1}_eps & Z^{s,-1/2}) + Y^{s,-1/2}."""
    return sum_kind(intersection(X_eps(s, -0.5, eps), Z(s)), Y(s, -0.5))


def z_beta_kind(beta=1.0, eps=DEFAULT_EPS):
    return NormKind("Z_beta", beta=beta, eps=eps)


# ---------------------------------------------------------------------------
# grid context


class _Grid:
    """Precomputed bumps and weights for one space-time grid."""

    def __init__(self, U: SpaceTimeField):
        self.K, self.M, self.period, self.t0 = U.K, U.M, U.period, U.t0
        self.k = U.k.astype(float)
        self.sigma = U.sigma
        self.Ns = np.array(U.N_indices)
        self.Ls = np.array(U.L_indices)
        self.PhiN = bump_matrix(self.Ns, self.k)
        self.PhiL = bump_matrix(self.Ls, self.sigma)
        self.PhiN2 = self.PhiN**2
        self.PhiL2 = self.PhiL**2
        self.dt = U.dt
        self.phase = np.exp(-1j * self.sigma * self.t0)[:, None]

    def key(self):
        return (self.K, self.M, self.period, self.t0)

    def masses(self, V):
        A = np.abs(V) ** 2
        return np.sqrt(np.maximum((self.PhiN2.T @ (A.T @ self.PhiL2)) * (2 * np.pi / self.period), 0.0))

    def demodulated(self, V):
        return np.fft.ifft(np.fft.ifftshift(V / self.phase, axes=0), axis=0) / self.dt


_GRID_CACHE: dict = {}


def _grid(U: SpaceTimeField) -> _Grid:
    key = (U.K, U.M, U.period, U.t0)
    g = _GRID_CACHE.get(key)
    if g is None:
        if len(_GRID_CACHE) > 16:
            _GRID_CACHE.clear()
        g = _GRID_CACHE[key] = _Grid(U)
    return g


def _x_weights(g: _Grid, s, b):
    N = g.Ns[:, None]
    L = g.Ls[None, :]
    return bracket(N) ** s * bracket(L + N**2) ** b


# ---------------------------------------------------------------------------
# leaf norms on raw spectra


def _xsb1(g, V, s, b):
    inner = np.sum(_x_weights(g, s, b) * g.masses(V), axis=1)
    return float(np.sqrt(np.sum(inner**2)))


def _xsb1_eps(g, V, s, b, eps):
    m = g.masses(V)
    W = _x_weights(g, s, b)
    low = g.Ls[None, :] <= g.Ns[:, None] ** 3
    first = np.sum(np.where(low, W * m, 0.0), axis=1)
    second = np.sum(np.where(low, 0.0, W * m), axis=1) * bracket(g.Ns) ** (-eps)
    return float(np.sqrt(np.sum(first**2)) + np.sqrt(np.sum(second**2)))


def _xsb_inf(g, V, s, b):
    sup = np.max(_x_weights(g, s, b) * g.masses(V), axis=1)
    return float(np.sqrt(np.sum(sup**2)))


def _ysb(g, V, s, b):
    k2 = g.k**2
    mult = (1j * g.sigma[:, None] + k2[None, :] + 1.0) ** (b + 0.5)
    w = g.demodulated(V * mult)
    # per-N L^2_x at each time, then L^1_t
    l2x = np.sqrt(2 * np.pi * (np.abs(w) ** 2 @ g.PhiN2))
    l1t = g.dt * np.sum(l2x, axis=0)
    return float(np.sqrt(np.sum((bracket(g.Ns) ** s * l1t) ** 2)))


def _z(g, V, s):
    k2 = g.k**2
    br = np.sqrt(1.0 + g.sigma[:, None] ** 2 + k2[None, :] ** 2)
    a = (2 * np.pi / g.period) * np.sum(np.abs(V) / br, axis=0)
    per_N = np.sqrt(a**2 @ g.PhiN2)
    return float(np.sqrt(np.sum((bracket(g.Ns) ** s * per_N) ** 2)))


def _tilde_linf(g, V, s):
    w = g.demodulated(V)
    l2x = np.sqrt(2 * np.pi * (np.abs(w) ** 2 @ g.PhiN2))
    sup = np.max(l2x, axis=0)
    return float(np.sqrt(np.sum((bracket(g.Ns) ** s * sup) ** 2)))


def _sobolev_sup(g, V, s):
    w = g.demodulated(V)
    wts = bracket(g.k) ** (2 * s)
    return float(np.sqrt(np.max(2 * np.pi * (np.abs(w) ** 2 @ wts))))


def _l2st(g, V):
    return float(np.sqrt(2 * np.pi / g.period * np.sum(np.abs(V) ** 2)))


def _leaf(g, V, kind: NormKind) -> float:
    t = kind.tag
    if t == "Xsb1":
        return _xsb1(g, V, kind.s, kind.b)
    if t == "Xsb1_eps":
        return _xsb1_eps(g, V, kind.s, kind.b, kind.eps)
    if t == "Xsb_inf":
        return _xsb_inf(g, V, kind.s, kind.b)
    if t == "Ysb":
        return _ysb(g, V, kind.s, kind.b)
    if t == "Zs_minus_half":
        return _z(g, V, kind.s)
    if t == "TildeLinfH":
        return _tilde_linf(g, V, kind.s)
    if t == "Sobolev":
        return _sobolev_sup(g, V, kind.s)
    if t == "L2st":
        return _l2st(g, V)
    if t == "Intersection":
        return max(_leaf(g, V, p) for p in kind.parts)
    raise ValueError(f"{t} is not a direct norm")


# ---------------------------------------------------------------------------
# sum spaces


def _flatten(kind: NormKind, weight: float = 1.0) -> list:
    """Nested sums of norms -> list of (direct kind, weight)."""
    if kind.tag == "SumSpace":
        ws = kind.weights or (1.0,) * len(kind.parts)
        out = []
        for p, w in zip(kind.parts, ws):
            out.extend(_flatten(p, weight * w))
        return out
    if kind.tag == "Z_beta":
        s1 = resolution_kind(-1.0, kind.eps, tilde=True)
        s0 = resolution_kind(0.0, kind.eps, tilde=True)
        return _flatten(s1, weight) + _flatten(s0, weight / kind.beta)
    return [(kind, weight)]


@dataclass
class SumNormResult:
    """Upper bound on a sum-space norm with the routing that achieves it."""

    value: float
    assignment: dict
    part_values: list
    parts: list = field(default_factory=list)

    def parts_of(self, index: int) -> list:
        return [a for a, p in self.assignment.items() if p == index]


def _atom_list(g: _Grid, V) -> list:
    nz = (np.abs(V) != 0).astype(float)
    hit = (g.PhiN != 0).T.astype(float) @ nz.T @ (g.PhiL != 0).astype(float)
    return [(i, j) for i in range(len(g.Ns)) for j in range(len(g.Ls)) if hit[i, j] > 0]


def sum_space_norm(U: SpaceTimeField, kindA, kindB=None, weights=None, max_passes: int = 25) -> SumNormResult:
    """Upper bound on inf { sum_p w_p ||u_p||_p : u = sum_p u_p } over atom routings.

    ``kindA`` may already be a SumSpace / Z_beta kind (then ``kindB`` is
    omitted), or two kinds may be passed.
    """
    if kindB is not None:
        kind = sum_kind(kindA, kindB, weights=weights)
    else:
        kind = kindA
    parts = _flatten(kind)
    g = _grid(U)
    V = U.spectrum
    n = len(parts)
    atoms = _atom_list(g, V)
    if not atoms:
        return SumNormResult(0.0, {}, [0.0] * n, [p for p, _ in parts])

    pieces = {a: V * g.PhiL[:, a[1]][:, None] * g.PhiN[:, a[0]][None, :] for a in atoms}

    def cost(p, Vp):
        return parts[p][1] * _leaf(g, Vp, parts[p][0])

    # trivial splits
    best_val, best_assign = np.inf, None
    for p in range(n):
        c = cost(p, V)
        if c < best_val:
            best_val, best_assign = c, {a: p for a in atoms}

    if n > 1:
        cur = [np.zeros_like(V) for _ in range(n)]
        cur_cost = [0.0] * n
        assign = {}
        for a in atoms:
            deltas = []
            for p in range(n):
                deltas.append(cost(p, cur[p] + pieces[a]) - cur_cost[p])
            p = int(np.argmin(deltas))
            cur[p] = cur[p] + pieces[a]
            cur_cost[p] += deltas[p]
            assign[a] = p
        cur_cost = [cost(p, cur[p]) for p in range(n)]
        for _ in range(max_passes):
            improved = False
            for a in atoms:
                p = assign[a]
                without = cost(p, cur[p] - pieces[a])
                best_q, best_gain, best_with = None, 1e-14 * max(1.0, sum(cur_cost)), None
                for q in range(n):
                    if q == p:
                        continue
                    with_q = cost(q, cur[q] + pieces[a])
                    gain = (cur_cost[p] + cur_cost[q]) - (without + with_q)
                    if gain > best_gain:
                        best_q, best_gain, best_with = q, gain, with_q
                if best_q is not None:
                    cur[p] = cur[p] - pieces[a]
                    cur[best_q] = cur[best_q] + pieces[a]
                    cur_cost[p], cur_cost[best_q] = without, best_with
                    assign[a] = best_q
                    improved = True
            if not improved:
                break
        total = float(sum(cur_cost))
        if total < best_val:
            best_val, best_assign = total, dict(assign)

    part_vals = [0.0] * n
    for p in range(n):
        Vp = sum((pieces[a] for a, q in best_assign.items() if q == p), np.zeros_like(V))
        part_vals[p] = cost(p, Vp)
    labels = {a: p for a, p in best_assign.items()}
    witness = {(float(g.Ns[i]), float(g.Ls[j])): p for (i, j), p in labels.items()}
    return SumNormResult(float(best_val), witness, part_vals, [p for p, _ in parts])


# ---------------------------------------------------------------------------
# public API


def norm(U: SpaceTimeField, kind: NormKind) -> float:
    if kind.tag in ("SumSpace", "Z_beta"):
        return sum_space_norm(U, kind).value
    return _leaf(_grid(U), U.spectrum, kind)


def xsb1_norm(U, s=-1.0, b=0.5):
    return norm(U, X(s, b))


def xsb1_eps_norm(U, s=-1.0, b=0.5, eps=DEFAULT_EPS):
    return norm(U, X_eps(s, b, eps))


def xsb_inf_norm(U, s=-1.0, b=0.5):
    return norm(U, NormKind("Xsb_inf", s=s, b=b))


def y_norm(U, s=-1.0, b=0.5):
    return norm(U, Y(s, b))


def z_norm(U, s=-1.0):
    return norm(U, Z(s))


def tilde_linf_h_norm(U, s=-1.0):
    return norm(U, tilde_LinfH(s))


def linf_h_norm(U, s=-1.0):
    """sup_t ||u(t)||_{H^s} over the time samples."""
    return norm(U, NormKind("Sobolev", s=s))


def z_beta_norm(U, beta=1.0, eps=DEFAULT_EPS) -> SumNormResult:
    return sum_space_norm(U, z_beta_kind(beta, eps))


def resolution_norm(U, eps=DEFAULT_EPS, s=-1.0, tilde=True) -> SumNormResult:
    return sum_space_norm(U, resolution_kind(s, eps, tilde))


def nonlinear_norm(F, eps=DEFAULT_EPS, s=-1.0) -> SumNormResult:
    return sum_space_norm(F, nonlinear_kind(s, eps))


def modulation_l2(U: SpaceTimeField) -> float:
    """(sum_L [L^{1/2} ||Q_L u||_{L^2}]^2)^{1/2}."""
    g = _grid(U)
    A = np.sum(np.abs(U.spectrum) ** 2, axis=1)
    qL = (2 * np.pi / g.period) * (A @ g.PhiL2)
    return float(np.sqrt(np.sum(g.Ls * qL)))


@dataclass
class NormReport:
    kind: str
    rows: list
    total: float
    truncated_mass: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "rows": self.rows, "total": self.total,
                "truncated_mass": self.truncated_mass}


def norm_report(U: SpaceTimeField, kind: NormKind) -> NormReport:
    """Per-atom table (N, L, weight, mass) for the X-type norms, plus the total."""
    if kind.tag not in ("Xsb1", "Xsb1_eps", "Xsb_inf"):
        raise ValueError("per-atom reports exist for X-type norms only")
    g = _grid(U)
    m = g.masses(U.spectrum)
    W = _x_weights(g, kind.s, kind.b)
    if kind.tag == "Xsb1_eps":
        high = g.Ls[None, :] > g.Ns[:, None] ** 3
        W = np.where(high, W * bracket(g.Ns)[:, None] ** (-kind.eps), W)
    rows = []
    for i, N in enumerate(g.Ns):
        for j, L in enumerate(g.Ls):
            if m[i, j] > 0:
                rows.append({"N": float(N), "L": float(L), "weight": float(W[i, j]),
                             "mass": float(m[i, j])})
    return NormReport(kind.label, rows, _leaf(g, U.spectrum, kind), truncated_mass(U))


def aggregate_report(report: NormReport, tag: str, eps: float = DEFAULT_EPS) -> float:
    """Recompute a report's total from its rows."""
    by_N: dict = {}
    for r in report.rows:
        by_N.setdefault(r["N"], []).append(r)
    if tag == "Xsb1":
        return float(np.sqrt(sum(sum(r["weight"] * r["mass"] for r in rs) ** 2 for rs in by_N.values())))
    if tag == "Xsb_inf":
        return float(np.sqrt(sum(max(r["weight"] * r["mass"] for r in rs) ** 2 for rs in by_N.values())))
    if tag == "Xsb1_eps":
        lo = sum(sum(r["weight"] * r["mass"] for r in rs if r["L"] <= N**3) ** 2 for N, rs in by_N.items())
        hi = sum(sum(r["weight"] * r["mass"] for r in rs if r["L"] > N**3) ** 2 for N, rs in by_N.items())
        return float(np.sqrt(lo) + np.sqrt(hi))
    raise ValueError(tag)


def with_eps(kind: NormKind, eps: float) -> NormKind:
    return replace(kind, eps=eps)
