"""Adaptive control vs a sliding-mode baseline on the same benchmark.

The sliding-mode law reaches fast but keeps paying for it: the switching
term chatters forever, so the control energy grows linearly and the state
parks in a residual oscillation. The adaptive law spends energy only while
it is learning.

Run:  python demos/05_controller_comparison.py
"""

from fracstab import experiments

man = experiments.run_experiment("compare")
a = man.metrics["adaptive"]
s = man.metrics["smc"]
r = man.metrics["ratio"]

print(f"{'metric':<28} {'adaptive':>12} {'smc':>12} {'ratio':>10}")
rows = (("peak ||u||", "peak_control"),
        ("energy int ||u||^2 dt", "control_energy"),
        ("terminal ||x(15)||", "terminal_norm"))
for label, key in rows:
    print(f"{label:<28} {a[key]:>12.4f} {s[key]:>12.4f} {r[key]:>10.4f}")
print(f"\nchecks: {man.checks}")
print(f"outputs next to {man.outputs['manifest']}")
