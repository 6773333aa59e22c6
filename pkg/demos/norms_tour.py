"""
A tour of the dyadic space-time norms
=====================================

Sample a free solution on the space-time window, split it into dyadic atoms
P_N Q_L u and evaluate the Bourgain-type norms and the sum-space norm built
from them.  Run with ``python3 demos/norms_tour.py``.
"""

import numpy as np

from kdvb import norms as nm
from kdvb.checks import free_solution_field
from kdvb.dyadic import SpaceTimeField, decompose, eta
from kdvb.torus import TorusField, sobolev_norm

# eta(t) W(t) phi for phi = cos x + 1/2 sin 2x + 1/4 cos 6x
K, M = 8, 256
phi = TorusField.cos_mode(K, 1) + TorusField.sin_mode(K, 2, 0.5) + TorusField.cos_mode(K, 6, 0.25)
U = free_solution_field(phi).sample(K, M)

# the atoms: nominal (N, L) and their L^2 masses
atoms = decompose(U)
print(f"{len(atoms)} atoms, largest five:")
for a in sorted(atoms, key=lambda a: -a.l2_mass)[:5]:
    print(f"  N = {a.N:<5g} L = {a.L:<6g} mass = {a.l2_mass:.4f}")

# the individual norms
print("\nX^{-1,1/2,1}      ", round(nm.xsb1_norm(U), 4))
print("X^{-1,1/2,1}_eps  ", round(nm.xsb1_eps_norm(U), 4))
print("Y^{-1,1/2}        ", round(nm.y_norm(U), 4))
print("sup_t H^-1        ", round(nm.linf_h_norm(U), 4))
print("||phi||_H^-1      ", round(sobolev_norm(phi, -1.0), 4))

# the sum space routes each atom to the cheaper side; the witness records the choice
res = nm.resolution_norm(U)
print("\nresolution norm   ", round(res.value, 4), " parts:", [round(v, 4) for v in res.part_values])
print("atoms on the Y side:", sorted(res.parts_of(1)))

# a sharp pulse in time is cheaper in Y than in X
t = SpaceTimeField.window_times(1024)
w = np.zeros((1024, 9), dtype=complex)
w[:, 4] = eta(t / 0.2)
P = SpaceTimeField.from_demodulated(w)
r = nm.resolution_norm(P, tilde=False)
print("\npulse: X_eps", round(nm.xsb1_eps_norm(P), 3), " Y", round(nm.y_norm(P), 3),
      " sum", round(r.value, 3), " sides used", sorted(set(r.assignment.values())))
