"""Sensitivity of the controlled benchmark to the fractional order and to
the delay bound.

Raising the order toward 1 speeds convergence (the memory kernel forgets
faster); growing the delay bound from 0 to 0.7 s costs less than a factor
of two in settling time, consistent with delay-robust design.

Run:  python demos/06_sensitivity_sweeps.py
"""

from fracstab import experiments

for name in ("sensitivity_alpha", "sensitivity_tau"):
    man = experiments.run_experiment(name)
    print(f"{name} (ok={man.ok})")
    for value, metrics in man.metrics["summary"].items():
        print(f"  {value:>5}: settling {metrics['settling_time_10pct']} s, "
              f"energy {metrics['control_energy']:.3f}")
    print(f"  checks: {man.checks}\n")
