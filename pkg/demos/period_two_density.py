"""Invariant density after the first period doubling.

At b = 2.3 the stationary density splits into two bumps, one per point
of the attracting 2-cycle. The bump widths differ because the noise
accumulated along the cycle differs at each point.
"""
import numpy as np

from circspec import (
    CircleMap,
    NoiseSpec,
    assemble,
    find_periodic_orbits,
    invariant_density,
    local_scale,
    predicted_mode,
    simulate_chain,
    spectrum,
)

f = CircleMap.sine_circle(2.3)
noise = NoiseSpec.constant(1.0)
two = [o for o in find_periodic_orbits(f, 2) if o.is_stable][0]
print("cycle", np.round(two.points, 6), "multiplier", round(two.multiplier, 6))
print("local scales", [round(local_scale(two, noise, k), 5) for k in range(2)])

# %% spectrum: -1 from the cycle, and the +-sqrt(c) pair
spec = spectrum(assemble(f, noise, 0.0125, 2048), 8)
print("top eigenvalues", np.round(spec.eigenvalues.real, 4))
print("sqrt(c) =", round(np.sqrt(two.multiplier), 4))

# %% density: operator, asymptotic mode, and a direct simulation
for eps in (0.05, 0.025, 0.0125):
    n = 1024 if eps > 0.02 else 2048
    op = assemble(f, noise, eps, n)
    rho = invariant_density(op)
    mode = predicted_mode(two, noise, 0, 0, eps, op.nodes)
    l1 = np.sum(np.abs(rho - mode.values)) * op.h
    print(f"eps={eps:<7} L1(operator, mode) = {l1:.4f}")

stats = simulate_chain(f, noise, 0.05, 0.0, 200_000, seed=7, bins=128)
print("simulated peak near", np.round(stats.centers[np.argmax(stats.counts)], 3))
