"""Integrating a Caputo system with a state-dependent delay.

The solver is a fractional predictor-corrector over the full memory of the
trajectory; delayed arguments are resolved against the stored history with
linear interpolation. Two sanity anchors: a scalar linear equation whose
exact solution is a Mittag-Leffler function, and the three-neuron
benchmark, whose delay must stay inside its admissible band.

Run:  python demos/02_fractional_delay_solver.py
"""

import numpy as np

from fracstab import fde, hopfield
from fracstab.specfun import ml

# scalar oracle: D^a x = -x has solution E_a(-t^a)
alpha = 0.8
c = fde.SystemConstants(L_f=1.0, L_g=0.0, L_tau=0.0, tau_bar=0.0)
model = fde.SystemModel(alpha=alpha, dim=1, f=lambda x: -x,
                        g=lambda x: np.zeros(1), tau=lambda x: 0.0,
                        B=np.zeros((1, 1)), constants=c)
traj = fde.integrate(model, fde.InitialFunction.constant([1.0], 0.0),
                     fde.SolverConfig(t_end=5.0, h=0.05))
ref = np.array([1.0] + [ml(alpha, -float(t) ** alpha)
                        for t in traj.times()[1:]])
print(f"scalar oracle (alpha={alpha}): max error "
      f"{np.max(np.abs(traj.states()[:, 0] - ref)):.2e} at h=0.05")

# benchmark: three neurons, activity-dependent transmission delay
params = hopfield.HopfieldParams()
net = hopfield.build(params)
init = fde.InitialFunction.constant([0.5, -0.3, 0.4], params.tau_bar)
run = fde.integrate(net, init, fde.SolverConfig(t_end=15.0, h=0.05))
norms = np.linalg.norm(run.states(), axis=1)
taus = np.array(run.series["tau"])
print(f"benchmark: ||x|| {norms[0]:.3f} -> {norms[-1]:.5f} over 15 s")
print(f"delay band observed [{taus.min():.3f}, {taus.max():.3f}] s "
      f"(admissible [0, {params.tau_bar}])")

audit = fde.holder_audit(net, run)
print(f"Holder audit: worst pair quotient {audit.worst_quotient:.3f} "
      f"<= bound {audit.bound:.3f}: {audit.satisfied}")

# memory correctness: replaying any step from the stored prefix is exact
k = 100
redo = fde.abm_step(net, run, None, k)
print(f"bitwise replay of node {k + 1}: "
      f"{np.array_equal(redo, run.state(k + 1))}")
