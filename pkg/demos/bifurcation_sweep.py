"""Counting modulus-one eigenvalues across period doublings.

The number of predicted eigenvalues on the unit circle equals the sum of
the periods of the attracting orbits. It jumps from 1 to 2 at b = sqrt(5)
and from 2 to 4 near b = 2.71.
"""
import math

from circspec import NoiseSpec, detect_lambda_bifurcations, sweep

noise = NoiseSpec.constant(1.0)

for lo, hi, p_max in [(2.0, 2.5, 2), (2.6, 2.8, 4)]:
    records = sweep("sine-circle", noise, (lo, hi, 0.001), p_max, 2)
    for ev in detect_lambda_bifurcations(records):
        print(f"b in [{ev.param_lo:.3f}, {ev.param_hi:.3f}]: "
              f"{ev.count_before} -> {ev.count_after}")

print("sqrt(5) =", round(math.sqrt(5), 6))
