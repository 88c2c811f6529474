"""Spectrum of the noisy sine circle map in the fixed-point regime.

At b = 2.2 the map x -> x + 1 - b sin x has one attracting and one
repelling fixed point. As the noise shrinks, the leading eigenvalues
of the transition operator approach powers of the attracting
multiplier, plus inverse powers of the repelling one.
"""
import numpy as np

from circspec import (
    CircleMap,
    NoiseSpec,
    assemble,
    find_periodic_orbits,
    match_spectra,
    predicted_spectrum,
    spectrum,
)

f = CircleMap.sine_circle(2.2)
noise = NoiseSpec.constant(1.0)

orbits = find_periodic_orbits(f, 1)
for o in orbits:
    print(f"{o.stability:>8}  x={o.points[0]:+.6f}  c={o.multiplier:+.6f}")

pred = predicted_spectrum(orbits, 4)
print("\npredicted:", np.round([p.value.real for p in pred[:6]], 4))

# %% shrink epsilon and watch the matched errors fall
for eps, n in [(0.2, 256), (0.1, 512), (0.05, 1024)]:
    spec = spectrum(assemble(f, noise, eps, n), 6)
    rep = match_spectra(spec, pred)
    print(f"\neps={eps}  N={n}  max matched error {rep.max_error:.4f}")
    for p in rep.pairs:
        print(f"  {p.numeric.real:+.5f}  ->  {p.predicted.value.real:+.5f}"
              f"  ({p.predicted.kind}, j={p.predicted.j})")
