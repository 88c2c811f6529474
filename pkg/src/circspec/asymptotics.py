"""Zero-noise predictions built from periodic-orbit data.

Near a stable orbit of period ``p`` and multiplier ``c`` the rescaled chain
behaves like the linear recursion ``Y' = c Y + sigma chi``.  Its spectrum
``{c^j}`` gives limiting eigenvalues ``(c^j)^(1/p)`` (every branch), and its
eigendensities are Hermite functions ``h_n(alpha x)``.  Near an unstable orbit
the roles of functions and densities swap and the eigenvalues are
``(|c|^-1 c^-j)^(1/q)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BifurcationPointError, DomainError
from .maps import NoiseSpec, TWO_PI, wrap_angle
from .orbits import NEUTRAL_BAND, PeriodicOrbit
from .transfer import SQRT_2PI, DiscretizedOperator, assemble_line

HERMITE_MAX_UNWEIGHTED = 50


def hermite(n: int, x, weighted: bool = False):
    """Physicists' Hermite polynomial ``H_n(x)`` or function ``exp(-x^2) H_n(x)``.

    Both use the three-term recurrence ``H_{n+1} = 2x H_n - 2n H_{n-1}``; the
    weighted variant starts it from ``exp(-x^2)`` and ``2x exp(-x^2)`` so that
    large arguments underflow to zero instead of producing ``inf * 0``.

    Examples
    --------
    >>> hermite(4, 1.0)
    -20.0
    >>> hermite(2, 0.0, weighted=True)
    -2.0
    """
    if n < 0:
        raise DomainError("Hermite order must be nonnegative")
    if not weighted and n > HERMITE_MAX_UNWEIGHTED:
        raise DomainError(f"unweighted H_n overflows for n > {HERMITE_MAX_UNWEIGHTED}")
    x = np.asarray(x, dtype=float)
    h0 = np.exp(-x * x) if weighted else np.ones_like(x)
    h1 = 2.0 * x * h0
    if n == 0:
        out = h0
    else:
        for k in range(1, n):
            h0, h1 = h1, 2.0 * x * h1 - 2.0 * k * h0
        out = h1
    return float(out) if out.ndim == 0 else out


def hermite_coefficients(n: int) -> list[int]:
    """Integer coefficients of ``H_n`` in ascending powers (same recurrence, exact)."""
    if n < 0:
        raise DomainError("Hermite order must be nonnegative")
    prev, cur = [1], [0, 2]
    if n == 0:
        return prev
    for k in range(1, n):
        nxt = [0] + [2 * a for a in cur]
        for i, a in enumerate(prev):
            nxt[i] -= 2 * k * a
        prev, cur = cur, nxt
    return cur


# -- eigenvalues --------------------------------------------------------------

@dataclass(frozen=True)
class PredictedEigenvalue:
    """A limiting eigenvalue tied to the orbit that produces it.

    ``orbit_id`` indexes the orbit list passed to :func:`predicted_spectrum`.
    """

    value: complex
    orbit_id: int
    period: int
    multiplier: float
    j: int
    branch: int
    kind: str

    @property
    def modulus(self) -> float:
        return abs(self.value)


def _root(z: complex, p: int, k: int) -> complex:
    """Branch ``k`` of ``z^(1/p)``."""
    z = complex(z)
    r = abs(z) ** (1.0 / p)
    th = (np.angle(z) + TWO_PI * k) / p
    re, im = r * np.cos(th), r * np.sin(th)
    # snap the components that trigonometric round-off leaves at ~1e-17
    if abs(im) <= 1e-15 * r:
        im = 0.0
    if abs(re) <= 1e-15 * r:
        re = 0.0
    return complex(re, im)


def branch_root(orbit: PeriodicOrbit, j: int, branch: int) -> complex:
    """Predicted eigenvalue of ``orbit`` for index ``j`` and root ``branch``."""
    _require_hyperbolic(orbit)
    c = orbit.multiplier
    z = c ** j if orbit.is_stable else 1.0 / (abs(c) * c ** j)
    if j == 0 and orbit.is_stable:
        # exact roots of unity
        return _root(1.0, orbit.period, branch)
    return _root(z, orbit.period, branch)


def _require_hyperbolic(orbit: PeriodicOrbit):
    if orbit.is_neutral or abs(abs(orbit.multiplier) - 1.0) <= NEUTRAL_BAND:
        raise BifurcationPointError(
            f"orbit with multiplier {orbit.multiplier:.8g} is neutral")


def predicted_spectrum(orbits, j_max: int) -> list[PredictedEigenvalue]:
    """Limiting eigenvalues of all orbits for ``0 <= j <= j_max``.

    Values that coincide within ``1e-12`` are merged only when they come from
    the same orbit (this happens for superstable orbits, whose ``c^j`` vanish
    for every ``j >= 1``).  Separate orbits keep separate copies because each
    contributes its own eigenvalue.  The list is sorted by descending
    modulus, then by descending real and imaginary part.
    """
    if j_max < 0:
        raise DomainError("j_max must be >= 0")
    out = []
    for oid, orb in enumerate(orbits):
        _require_hyperbolic(orb)
        mine: list[PredictedEigenvalue] = []
        for j in range(j_max + 1):
            for k in range(orb.period):
                v = branch_root(orb, j, k)
                if any(abs(v - q.value) <= 1e-12 for q in mine):
                    continue
                mine.append(PredictedEigenvalue(v, oid, orb.period, orb.multiplier,
                                                j, k, orb.stability))
        out.extend(mine)
    out.sort(key=lambda e: (-round(abs(e.value), 12), -e.value.real, -e.value.imag,
                            e.orbit_id, e.j, e.branch))
    return out


def mod1_count(orbits) -> int:
    """Number of modulus-one limiting eigenvalues: the sum of stable periods."""
    return sum(o.period for o in orbits if o.is_stable)


# -- local scales and modes ---------------------------------------------------

def accumulated_variance(orbit: PeriodicOrbit, noise: NoiseSpec, base_index: int = 0) -> float:
    """Noise variance gathered over one cycle, measured at ``points[base_index]``.

    Linearising along the orbit from ``x_j`` gives
    ``Y_{j+p} = c Y_j + sum_i (prod of later f') sigma(x_{j+i}) chi_i``; the
    returned value is the variance of that sum.  For ``p = 2`` and ``j = 0``
    it equals ``f'(x_2)^2 sigma(x_1)^2 + sigma(x_2)^2``.
    """
    p = orbit.period
    var = 0.0
    for i in range(p):
        k = (base_index + i) % p
        var = orbit.derivatives[k] ** 2 * var + noise(orbit.points[k]) ** 2
    return float(var)


def local_scale(orbit: PeriodicOrbit, noise: NoiseSpec, base_index: int = 0) -> float:
    """Gaussian scale ``alpha_j`` (stable) or ``beta_j`` (unstable) at a base point.

    ``alpha_j = sqrt((1 - c^2) / (2 s_j^2))`` and
    ``beta_j = sqrt((c^2 - 1) / (2 s_j^2))`` with ``s_j^2`` from
    :func:`accumulated_variance` and ``c`` the full multiplier.
    """
    _require_hyperbolic(orbit)
    c = orbit.multiplier
    s2 = accumulated_variance(orbit, noise, base_index)
    num = (1.0 - c * c) if orbit.is_stable else (c * c - 1.0)
    return float(np.sqrt(num / (2.0 * s2)))


@dataclass(frozen=True, eq=False)
class HermiteMode:
    """A Hermite mixture ``sum_k a_k h_n(scale_k (x - x_k) / eps)`` on a grid.

    ``side`` is ``"density"`` for stable orbits (left eigenvectors) and
    ``"function"`` for unstable orbits (right eigenvectors).
    """

    order: int
    centers: tuple
    scales: tuple
    weights: tuple
    side: str
    epsilon: float
    eigenvalue: complex
    nodes: np.ndarray
    values: np.ndarray

    def __call__(self, x):
        return _mixture(np.asarray(x, dtype=float), self.order, self.centers, self.scales,
                        self.weights, self.epsilon)


def _mixture(x, n, centers, scales, weights, eps):
    out = np.zeros(np.shape(x), dtype=complex)
    for xc, s, a in zip(centers, scales, weights):
        out += a * hermite(n, s * wrap_angle(x - xc) / eps, weighted=True)
    return out


def mode_weights(orbit: PeriodicOrbit, scales, n: int, nu: complex):
    """Per-point coefficients that make the mixture an eigenmode with value ``nu``.

    Densities (stable orbits) are pushed forward along the orbit: a local
    profile ``h_n(alpha_k y / eps)`` at ``x_k`` reappears at ``x_{k+1}`` as
    ``c_k^n (alpha_{k+1} / alpha_k)^{n+1} h_n(alpha_{k+1} y / eps)``, so
    ``a_{k+1} = a_k c_k^n (alpha_{k+1}/alpha_k)^{n+1} / nu``.

    Functions (unstable orbits) are pulled back:
    ``b_{k+1} = nu b_k |c_k| c_k^n (beta_{k+1}/beta_k)^{n+1}``.

    Both recursions close after one cycle exactly when ``nu`` is one of the
    predicted branch values.
    """
    p = orbit.period
    a = np.ones(p, dtype=complex)
    for k in range(p - 1):
        ck = orbit.derivatives[k]
        ratio = (scales[k + 1] / scales[k]) ** (n + 1)
        if orbit.is_stable:
            a[k + 1] = a[k] * ck ** n * ratio / nu
        else:
            a[k + 1] = nu * a[k] * abs(ck) * ck ** n * ratio
    return a


def predicted_mode(orbit: PeriodicOrbit, noise: NoiseSpec, n: int, branch: int,
                   epsilon: float, grid) -> HermiteMode:
    """Sample the predicted eigenmode of ``orbit`` with order ``n`` and root ``branch``.

    Stable orbits give densities normalised to unit L1 mass (midpoint rule on
    the uniform ``grid``), unstable orbits give functions normalised to unit
    sup-norm.  ``n = 0, branch = 0`` on a stable orbit is the predicted
    invariant density.  Real-valued modes are returned as real arrays.
    """
    if n < 0:
        raise DomainError("mode order must be nonnegative")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    _require_hyperbolic(orbit)
    p = orbit.period
    scales = tuple(local_scale(orbit, noise, k) for k in range(p))
    nu = branch_root(orbit, n, branch % p)
    weights = mode_weights(orbit, scales, n, nu)
    x = np.asarray(grid, dtype=float)
    vals = _mixture(x, n, orbit.points, scales, weights, epsilon)
    if orbit.is_stable:
        h = (x[-1] - x[0]) / (len(x) - 1) if len(x) > 1 else 1.0
        norm = np.sum(np.abs(vals)) * h
        side = "density"
    else:
        norm = np.max(np.abs(vals))
        side = "function"
    if norm == 0 or not np.isfinite(norm):
        raise DomainError("mode vanishes on the grid; refine the grid or increase epsilon")
    vals = vals / norm
    weights = weights / norm
    if side == "function":
        # fix the global phase so the largest entry is real and positive
        ph = vals[np.argmax(np.abs(vals))]
        ph = ph / abs(ph)
        vals, weights = vals / ph, weights / ph
    if np.all(np.abs(vals.imag) <= 1e-14 * np.max(np.abs(vals))):
        vals = vals.real.copy()
    return HermiteMode(n, tuple(orbit.points), scales, tuple(weights), side,
                       float(epsilon), nu, x, vals)


# -- AR(1) oracle ---------------------------------------------------------------

def ar_truncation_bound(c: float, sigma: float) -> float:
    """Smallest admissible half-width ``L`` for :func:`build_local_ar_operator`."""
    if abs(c) < 1:
        alpha = np.sqrt((1.0 - c * c) / (2.0 * sigma * sigma))
        return 8.0 / alpha
    return 8.0 * sigma / (abs(c) - 1.0 + 0.1)


def build_local_ar_operator(c: float, sigma: float, L: float, n_grid: int) -> DiscretizedOperator:
    """Transition operator of ``Y' = c Y + sigma chi`` truncated to ``[-L, L]``.

    Midpoint rule, no wrapping; mass that leaves the segment is lost.  The
    eigenvalues are ``c^n`` when ``|c| < 1`` and ``|c|^-1 c^-n`` when
    ``|c| > 1``.

    Raises
    ------
    BifurcationPointError
        If ``|c|`` lies within ``1e-6`` of one.
    DomainError
        If ``sigma <= 0`` or ``L`` is below :func:`ar_truncation_bound`.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    if abs(abs(c) - 1.0) <= NEUTRAL_BAND:
        raise BifurcationPointError("AR coefficient is neutral (|c| = 1)")
    need = ar_truncation_bound(c, sigma)
    if L < need:
        raise DomainError(f"half-width L={L:g} too small; need L >= {need:.6g}")

    def kernel(x, y):
        return np.exp(-0.5 * ((y - c * x) / sigma) ** 2) / (SQRT_2PI * sigma)

    return assemble_line(kernel, L, n_grid, c=float(c), sigma=float(sigma))
