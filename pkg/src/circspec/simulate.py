"""Monte Carlo simulation of the perturbed circle map.

One run uses one ``numpy.random.Generator`` stream (PCG64) seeded with the
given 64-bit integer; normal draws are consumed in blocks, one per step.
Histograms from runs with different seeds can be merged by adding counts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError
from .maps import TWO_PI, CircleMap, NoiseSpec

_BLOCK = 1 << 16


@dataclass(frozen=True, eq=False)
class TrajectoryStats:
    """Occupation histogram of a simulated trajectory.

    ``edges`` has ``bins + 1`` entries spanning ``[-pi, pi]`` and matches the
    cells of a midpoint grid with ``bins`` nodes.
    """

    edges: np.ndarray
    counts: np.ndarray
    steps: int
    seed: int
    burn_in: int
    epsilon: float
    x_final: float

    @property
    def bins(self) -> int:
        return len(self.counts)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def density_estimate(self) -> np.ndarray:
        return self.counts / (self.counts.sum() * np.diff(self.edges))

    def merge(self, other: "TrajectoryStats") -> "TrajectoryStats":
        """Pool the counts of two independent runs on the same bins."""
        if not np.array_equal(self.edges, other.edges):
            raise ContractError("cannot merge histograms with different bins")
        return TrajectoryStats(self.edges, self.counts + other.counts,
                               self.steps + other.steps, self.seed,
                               self.burn_in + other.burn_in, self.epsilon, other.x_final)


def _step_functions(cmap: CircleMap, noise: NoiseSpec):
    fam, params = cmap._family, cmap.params
    if noise.is_constant:
        s = noise.params["sigma"]
        return (lambda x: fam.lift(x, params)), (lambda x: s)
    return (lambda x: fam.lift(x, params)), noise


def simulate_chain(cmap: CircleMap, noise: NoiseSpec, epsilon: float, x0: float,
                   steps: int, burn_in: int | None = None, bins: int = 256,
                   seed: int = 0) -> TrajectoryStats:
    """Run ``X_{n+1} = f(X_n) + eps sigma(X_n) chi_n (mod 2 pi)`` and bin the states.

    ``steps`` counts all iterations; the first ``burn_in`` states (default 1%
    of ``steps``) are discarded, so the histogram holds ``steps - burn_in``
    samples.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    if burn_in is None:
        burn_in = steps // 100
    if not (0 <= burn_in < steps):
        raise DomainError("need steps > burn_in >= 0")
    if bins < 16:
        raise DomainError("bins must be >= 16")
    if not np.isfinite(x0):
        raise DomainError("x0 must be finite")
    lift, sigma = _step_functions(cmap, noise)
    rng = np.random.default_rng(seed)
    pi = np.pi
    x = float((x0 + pi) % TWO_PI - pi)
    states = np.empty(steps - burn_in)
    n = 0
    while n < steps:
        chi = rng.standard_normal(min(_BLOCK, steps - n))
        for z in chi.tolist():
            x = float(lift(x)) + epsilon * float(sigma(x)) * z
            x = (x + pi) % TWO_PI - pi
            if x >= pi:
                x -= TWO_PI
            if n >= burn_in:
                states[n - burn_in] = x
            n += 1
    edges = np.linspace(-pi, pi, bins + 1)
    counts, _ = np.histogram(states, bins=edges)
    return TrajectoryStats(edges, counts, steps, seed, burn_in, float(epsilon), x)


def compare_density(stats: TrajectoryStats, density, nodes=None) -> float:
    """L1 distance between the normalised histogram and a sampled density.

    ``density`` holds midpoint samples on the histogram's cells; the bin
    masses are ``density * width`` renormalised to sum to one.  Passing
    ``nodes`` additionally checks that they sit at the bin centres.

    Raises
    ------
    ContractError
        If the sample count or node positions do not match the bins.
    """
    rho = np.asarray(density, dtype=float)
    if rho.ndim != 1 or len(rho) != stats.bins:
        raise ContractError(f"density has {rho.size} samples, histogram has {stats.bins} bins")
    if nodes is not None:
        nodes = np.asarray(nodes, dtype=float)
        if nodes.shape != rho.shape or np.max(np.abs(nodes - stats.centers)) > 1e-9:
            raise ContractError("density nodes are not the histogram bin centres")
    if np.any(rho < 0):
        raise ContractError("density samples must be nonnegative")
    mass = rho * np.diff(stats.edges)
    p = mass / mass.sum()
    phat = stats.counts / stats.counts.sum()
    return float(np.sum(np.abs(phat - p)))
