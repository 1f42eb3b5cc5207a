"""Critical-threshold classifier over the documented parameter sets.

The sign structure of the initial velocity slope against the roots
d_- = (-1 - sqrt(1-4Km))/(2m) and d*_- = (-1 - sqrt(1+4Km))/(2m) decides
between guaranteed global existence (subcritical), guaranteed finite-time
collapse (supercritical), and the indeterminate band in between.
"""
import json

import kurahydro as kh

cases = [
    ("gentle slope, weak coupling", 0.5, 0.1, kh.USine(-1.0)),
    ("steep slope, strong coupling", 1.0, 1.0, kh.USine(-2.0)),
    ("heavy inertia, gentle slope", 2.0, 0.1, kh.USine(-0.1)),
    ("heavy inertia, steep slope", 2.0, 0.1, kh.USine(-10.0)),
    ("second harmonic, steep", 2.0, 0.1, kh.USine(10.0, 2)),
    ("inside the indeterminate band", 2.0, 0.1, kh.USine(-0.45)),
]

for label, m, K, u0 in cases:
    params = kh.Params(m, K)
    verdict = kh.classify(kh.InitSpec(kh.RhoGaussian(), u0), params)
    print(f"{label}  (m={m}, K={K}, u0={kh.format_wave(u0)})")
    print("  " + json.dumps(verdict.as_dict()))
    print()

print("the K=0 limit collapses the band: d_- = d*_- = -1/m")
roots = kh.critical_roots(kh.Params(2.0, 0.0))
print(f"  m=2, K=0: d_- = {roots.d_minus}, d*_- = {roots.d_star_minus}")
