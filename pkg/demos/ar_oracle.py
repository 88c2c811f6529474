"""Local autoregressive model: exact spectrum and Hermite eigenvectors.

The chain y -> c*y + sigma*chi on the line is the local picture near a
periodic point. Its eigenvalues are known in closed form, which makes it
a clean check of the discretization before going to the circle.
"""
import math

import numpy as np

from circspec import ar_truncation_bound, build_local_ar_operator, hermite, spectrum

# %% contracting case: eigenvalues c^n, densities h_n(alpha x)
c = 0.5
L = ar_truncation_bound(c, 1.0)
op = build_local_ar_operator(c, 1.0, L, 400)
res = spectrum(op, 8, vectors=True)

alpha = math.sqrt((1 - c * c) / 2)
print(f"c={c}  half-width={L:.2f}  alpha={alpha:.5f}")
for n, lam in enumerate(res.eigenvalues):
    left = np.real(res.left_vectors[:, n])
    ref = hermite(n, alpha * op.nodes, weighted=True)
    cos = abs(left @ ref) / (np.linalg.norm(left) * np.linalg.norm(ref))
    print(f"  n={n}  lambda={lam.real:.10f}  c^n={c**n:.10f}  cos={cos:.8f}")

# %% expanding case: eigenvalues |c|^-1 c^-n
c = 3.0
op = build_local_ar_operator(c, 1.0, 8.0, 400)
lam = spectrum(op, 5).eigenvalues
print(f"\nc={c}")
for n, v in enumerate(lam):
    print(f"  n={n}  lambda={v.real:.8f}  3^-(n+1)={3.0 ** -(n + 1):.8f}")
