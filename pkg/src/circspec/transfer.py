"""Nyström discretisation of the noisy transition operator and its spectrum.

The transition operator of ``X_{n+1} = f(X_n) + eps * sigma(X_n) * xi_n
(mod 2 pi)`` acts on observables by ``(T phi)(x) = int phi(y) k(x, y) dy``
with the wrapped Gaussian kernel ``k``.  On a uniform midpoint grid this
becomes the matrix ``A[i, j] = h * k(x_i, x_j)``: rows act on functions
(right eigenvectors ~ eigenfunctions), columns on measures (left
eigenvectors / h ~ eigendensities).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegeneracyError, DomainError, NumericalFailureError
from .maps import TWO_PI, CircleMap, NoiseSpec, wrap_angle

SQRT_2PI = np.sqrt(2.0 * np.pi)
WRAP_SIGMAS = 8.0


class ResolutionWarning(UserWarning):
    """Grid spacing exceeds a quarter of the smallest kernel width."""


@dataclass(frozen=True, eq=False)
class DiscretizedOperator:
    """Quadrature matrix of a transition kernel on a midpoint grid.

    Attributes
    ----------
    kind : {"circle", "line"}
        ``circle`` grids cover ``[-pi, pi)`` with a wrapped kernel; ``line``
        grids cover ``[-L, L]`` and let mass escape through the ends.
    nodes : ndarray
        Midpoint nodes.
    h : float
        Node spacing.
    matrix : ndarray
        ``matrix[i, j] = h * kernel(nodes[i], nodes[j])``.
    epsilon : float or None
        Noise scale of a circle operator.
    """

    kind: str
    nodes: np.ndarray
    h: float
    matrix: np.ndarray
    epsilon: float | None = None
    half_width: float = np.pi
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate([self.nodes - 0.5 * self.h, [self.nodes[-1] + 0.5 * self.h]])


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    right_vectors: np.ndarray | None = None
    left_vectors: np.ndarray | None = None
    all_eigenvalues: np.ndarray | None = None


def midpoint_grid(lo: float, hi: float, n: int):
    h = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * h, h


def wrapped_kernel(cmap: CircleMap, noise: NoiseSpec, epsilon: float, x, y):
    """Wrapped Gaussian transition density ``k(x, y)`` on the circle.

    ``x`` and ``y`` broadcast against each other.  The periodic sum covers every
    translate within ``8 * eps * sigma_ub`` of ``f(x)`` and never fewer than the
    three nearest ones.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fx = cmap.lift(x)
    s = epsilon * np.asarray(noise(x), dtype=float)
    d0 = wrap_angle(y - fx)
    n_wrap = int(np.ceil(WRAP_SIGMAS * epsilon * noise.sigma_ub / TWO_PI)) + 1
    total = np.zeros(np.broadcast(d0, s).shape)
    for n in range(-n_wrap, n_wrap + 1):
        total = total + np.exp(-0.5 * ((d0 + TWO_PI * n) / s) ** 2)
    out = total / (SQRT_2PI * s)
    return float(out) if out.ndim == 0 else out


def assemble(cmap: CircleMap, noise: NoiseSpec, epsilon: float, n_grid: int) -> DiscretizedOperator:
    """Midpoint (Nyström) discretisation of the circle transition operator.

    Emits :class:`ResolutionWarning` when ``h > eps * sigma_lb / 4``.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if n_grid < 64:
        raise DomainError("n_grid must be >= 64")
    x, h = midpoint_grid(-np.pi, np.pi, n_grid)
    limit = epsilon * noise.sigma_lb / 4.0
    if h > limit:
        warnings.warn(
            f"grid spacing h={h:.4g} exceeds eps*sigma_lb/4={limit:.4g}; "
            "kernel under-resolved", ResolutionWarning, stacklevel=2)
    A = h * wrapped_kernel(cmap, noise, epsilon, x[:, None], x[None, :])
    return DiscretizedOperator("circle", x, h, A, float(epsilon),
                               meta={"map": cmap, "noise": noise})


def assemble_line(kernel, half_width: float, n_grid: int, **meta) -> DiscretizedOperator:
    """Midpoint discretisation of ``kernel(x, y)`` on ``[-L, L]`` without wrapping."""
    if n_grid < 2:
        raise DomainError("n_grid must be >= 2")
    x, h = midpoint_grid(-half_width, half_width, n_grid)
    A = h * kernel(x[:, None], x[None, :])
    return DiscretizedOperator("line", x, h, A, None, float(half_width), meta=meta)


# -- spectra ----------------------------------------------------------------

def _sort_desc(vals):
    order = np.lexsort((-vals.imag, -np.round(np.abs(vals), 13)))
    return vals[order]


def _normalize_phase(v):
    k = np.argmax(np.abs(v))
    v = v / v[k]
    if np.allclose(v.imag, 0.0, atol=1e-13):
        return v.real.copy()
    return v


def refine_eigenpair(op: DiscretizedOperator, lam, side: str = "right",
                     tol: float = 1e-8, max_iter: int = 200, start=None):
    """Shifted inverse iteration about ``lam``.

    Returns ``(eigenvalue, vector, residual)`` where the eigenvalue is the
    Rayleigh-quotient estimate and ``residual = |A v - lam v|_inf / |v|_inf``
    (``A^T`` in place of ``A`` for ``side="left"``).

    Raises
    ------
    NumericalFailureError
        When the residual does not drop below ``tol`` within ``max_iter``.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    A = op.matrix if side == "right" else op.matrix.T
    n = A.shape[0]
    lam = complex(lam)
    is_real = abs(lam.imag) < 1e-14
    dtype = float if is_real else complex
    shift = lam.real if is_real else lam
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            lu = sla.lu_factor(A - shift * np.eye(n, dtype=dtype), check_finite=False)
        except (sla.LinAlgWarning, np.linalg.LinAlgError, ValueError):
            shift = shift + 1e-10
            lu = sla.lu_factor(A - shift * np.eye(n, dtype=dtype), check_finite=False)
    if start is None:
        v = np.ones(n, dtype=dtype) + 0.01 * np.cos(np.arange(n) * 0.37)
    else:
        v = np.asarray(start, dtype=dtype).copy()
    mu = lam
    res = np.inf
    for it in range(1, max_iter + 1):
        w = sla.lu_solve(lu, v, check_finite=False)
        if not np.all(np.isfinite(w)):
            raise NumericalFailureError("inverse iteration produced non-finite values", it)
        v = w / w[np.argmax(np.abs(w))]
        Av = A @ v
        mu = np.vdot(v, Av) / np.vdot(v, v)
        res = np.max(np.abs(Av - mu * v)) / np.max(np.abs(v))
        if res <= tol:
            mu = mu.real if is_real else mu
            return complex(mu), _normalize_phase(v), float(res)
    raise NumericalFailureError(
        f"inverse iteration stalled at residual {res:.3g} near {lam}", max_iter)


def eigenvector(op: DiscretizedOperator, lam, side: str = "right", tol: float = 1e-8,
                max_iter: int = 200) -> np.ndarray:
    """Sampled eigenvector for the eigenvalue closest to ``lam``.

    Right vectors sample eigenfunctions at the nodes.  Left vectors sample
    eigendensities up to the quadrature weight; see :func:`to_density`.
    Vectors are scaled so that their largest entry is 1.
    """
    return refine_eigenpair(op, lam, side, tol, max_iter)[1]


def to_density(op: DiscretizedOperator, left_vector) -> np.ndarray:
    """Convert a left eigenvector to density samples with unit L1 mass."""
    rho = np.asarray(left_vector) / op.h
    return rho / (np.sum(np.abs(rho)) * op.h)


def spectrum(op: DiscretizedOperator, top_k: int, vectors: bool = False) -> SpectrumResult:
    """Largest-modulus eigenvalues of the discretised operator.

    All eigenvalues come from LAPACK's dense nonsymmetric solver (Hessenberg
    reduction followed by the shifted QR / Schur iteration).  Each of the
    ``top_k`` retained eigenvalues is then confirmed by inverse iteration,
    which provides the residuals and, if ``vectors`` is true, the right and
    left eigenvectors.
    """
    if top_k < 1:
        raise DomainError("top_k must be >= 1")
    try:
        vals = sla.eigvals(op.matrix, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"dense eigensolve failed: {exc}") from exc
    vals = _sort_desc(vals)
    top = vals[:top_k]
    rights, lefts, res = [], [], []
    for lam in top:
        _, vr, r = refine_eigenpair(op, lam, "right", tol=1e-10)
        res.append(np.max(np.abs(op.matrix @ vr - lam * vr)) / np.max(np.abs(vr)))
        if vectors:
            rights.append(vr)
            lefts.append(refine_eigenpair(op, lam, "left", tol=1e-10)[1])
    right_vectors = left_vectors = None
    if vectors:
        right_vectors = np.array(rights, dtype=complex).T
        left_vectors = np.array(lefts, dtype=complex).T
    return SpectrumResult(top, np.array(res), right_vectors, left_vectors, vals)


def invariant_density(op: DiscretizedOperator) -> np.ndarray:
    """Stationary density samples (left eigenvector at 1, divided by h).

    Raises
    ------
    DegeneracyError
        If two different starting vectors lead to different stationary
        vectors, i.e. the eigenvalue 1 is not simple to working precision.
    """
    if op.kind != "circle":
        raise DomainError("invariant_density needs a circle operator")
    n = op.n
    starts = [np.ones(n), 1.0 + 0.5 * np.sin(3.0 * op.nodes + 0.7) * np.cos(op.nodes)]
    vecs = []
    for s in starts:
        _, v, _ = refine_eigenpair(op, 1.0, "left", tol=1e-10, start=s)
        v = np.real(v)
        vecs.append(v / v.sum())
    a, b = vecs
    if np.max(np.abs(a - b)) > 1e-6 * np.max(np.abs(a)):
        raise DegeneracyError("eigenvalue 1 is not simple to working precision")
    rho = a / op.h
    rho /= rho.sum() * op.h
    if rho.min() < -1e-10 * rho.max():
        raise NumericalFailureError("stationary vector has significant negative entries")
    return np.where(rho < 0.0, 0.0, rho)


def block_norms(op: DiscretizedOperator, partition) -> np.ndarray:
    """Discrete sup-norms of the blocks of ``op`` induced by ``partition``.

    ``B[i, j]`` is the largest mass that a node of region ``i`` sends into
    region ``j`` in one step.
    """
    idx = partition.region_index(op.nodes)
    k = len(partition.regions)
    B = np.zeros((k, k))
    for j in range(k):
        mass = op.matrix[:, idx == j].sum(axis=1)
        for i in range(k):
            sel = idx == i
            if sel.any():
                B[i, j] = mass[sel].max()
    return B
