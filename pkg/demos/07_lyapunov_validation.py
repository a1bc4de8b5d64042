"""Numerical validation of the energy-functional analysis.

For a certified system the functional V (quadratic term plus two history
integrals, one with the singular kernel xi^(a-1)) must stay below the
comparison envelope V(0) E_a(-(gamma/c2) t^a), and its numerical Caputo
derivative must stay below -gamma ||x||^2 up to discretization slack.
Both checks run on the certifiable weak-coupling config; on the default
benchmark config they fail loudly because no certificate exists there.

Run:  python demos/07_lyapunov_validation.py
"""

from fracstab import experiments

man = experiments.run_experiment("lyapunov_validation",
                                 config="configs/hopfield_small.toml")
print(f"weak-coupling config: ok={man.ok}")
print(f"  gamma={man.metrics['gamma']:.4f}, c2={man.metrics['c2']:.4f}")
for k, v in man.checks.items():
    print(f"  {k}: {v}")

print("\ndefault benchmark config (expected to fail - no certificate):")
man2 = experiments.run_experiment("lyapunov_validation",
                                  out="out/benchmark_constants")
print(f"  ok={man2.ok}; lmi status: {man2.notes['lmi_status']}")
print(f"  diagnostic: {man2.notes.get('lmi_diagnostic', '')[:100]}...")
