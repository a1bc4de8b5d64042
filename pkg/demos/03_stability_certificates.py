"""Stability certificates from the delay LMI.

A certificate is a positive triple (P, Q, R) and scalars eps1..3 making a
block matrix negative definite; it yields a decay rate gamma, a
Mittag-Leffler envelope for ||x(t)||, and a certified delay margin. Every
certificate is re-checked by plain eigenvalue computations.

For the benchmark's published coupling constants the inequality is
PROVABLY infeasible: the delayed-coupling constant alone exceeds the
symmetric stability margin of the linearization. The solver detects the
obstruction analytically and says so instead of searching forever; the
weak-coupling variant below is certifiable and exercises the full
pipeline.

Run:  python demos/03_stability_certificates.py
"""

import numpy as np

from fracstab import fde, stability
from fracstab.errors import Infeasible

# a certifiable scalar problem
c = fde.SystemConstants(L_f=0.1, L_g=0.1, L_tau=0.0, tau_bar=0.1)
prob = stability.LmiProblem(A=np.array([[-2.0]]), constants=c,
                            alpha=0.95, tau_bar=0.1)
cert = stability.solve_lmi(prob)
chk = stability.verify_certificate(prob, cert)
print(f"scalar problem: gamma={cert.gamma:.3f}, delay margin="
      f"{cert.delay_margin:.3f} s, re-check passed: {chk.passed}")

# the 3x3 linearization with weak coupling: feasible
A = np.array([[-1.5, 0.1, -0.1], [0.1, -1.8, -0.3], [0.3, 0.1, -1.3]])
c3 = fde.SystemConstants(L_f=0.3, L_g=0.2, L_tau=0.05, tau_bar=0.5)
prob3 = stability.LmiProblem(A=A, constants=c3, alpha=0.95, tau_bar=0.5)
cert3 = stability.solve_lmi(prob3)
print(f"weak-coupling 3x3: gamma={cert3.gamma:.3f}, "
      f"delta={cert3.delta:.3f}, margin={cert3.delay_margin:.3f} s, "
      f"c1={cert3.bounds.c1:.3f}, c2={cert3.bounds.c2:.3f}")

# margin consistency: re-solving inside the certified enlargement works
tb2 = 0.5 + 0.9 * cert3.delay_margin
prob_wide = stability.LmiProblem(A=A, constants=fde.SystemConstants(
    0.3, 0.2, 0.05, tb2), alpha=0.95, tau_bar=tb2)
print(f"re-solve at tau_bar={tb2:.3f}: gamma="
      f"{stability.solve_lmi(prob_wide).gamma:.3f}")

# the benchmark constants: provably out of reach
ch = fde.SystemConstants(L_f=3.81, L_g=2.22, L_tau=0.078, tau_bar=0.5)
probh = stability.LmiProblem(A=A, constants=ch, alpha=0.95, tau_bar=0.5)
try:
    stability.solve_lmi(probh)
except Infeasible as exc:
    print(f"\nbenchmark constants: {exc}")
