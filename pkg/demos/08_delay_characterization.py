"""How the state-dependent delay couples to the trajectory.

The transmission delay tau(x) = tau_bar (1 - eta tanh(w'x)) shortens when
the weighted activity is positive and relaxes back to tau_bar as the
network settles. The figures show its evolution inside the admissible
band, the delay-versus-norm locus colored by time, and the phase relation
between a component and its retarded value.

Run:  python demos/08_delay_characterization.py
"""

from fracstab import experiments

man = experiments.run_experiment("delay_characterization")
lo, hi = man.metrics["tau_range"]
print(f"observed delay range: [{lo:.3f}, {hi:.3f}] s "
      f"(admissible [0.35, 0.50] for the default parameters)")
print(f"checks: {man.checks}")
for key, path in man.outputs.items():
    if path.endswith(".svg"):
        print(f"  figure: {path}")
