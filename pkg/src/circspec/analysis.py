"""Comparison of numeric and predicted spectra, parameter sweeps and
detection of lambda-bifurcations (changes in the number of modulus-one
limiting eigenvalues).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .asymptotics import PredictedEigenvalue, mod1_count, predicted_spectrum
from .errors import CircSpecError, ContractError, DomainError
from .maps import CircleMap, NoiseSpec
from .orbits import find_periodic_orbits
from .transfer import SpectrumResult, assemble, spectrum


@dataclass(frozen=True)
class MatchedPair:
    numeric: complex
    predicted: PredictedEigenvalue
    error: float


@dataclass(frozen=True)
class MatchReport:
    pairs: tuple
    unmatched_numeric: tuple
    unmatched_predicted: tuple

    @property
    def errors(self) -> np.ndarray:
        return np.array([p.error for p in self.pairs])

    @property
    def max_error(self) -> float:
        return float(self.errors.max()) if self.pairs else 0.0


def match_spectra(numeric, predicted) -> MatchReport:
    """Greedy nearest-neighbour matching of numeric to predicted eigenvalues.

    Numeric values are visited in order of descending modulus and each takes
    the closest predicted value not yet used.

    Parameters
    ----------
    numeric : SpectrumResult or array_like of complex
    predicted : list of PredictedEigenvalue
    """
    vals = numeric.eigenvalues if isinstance(numeric, SpectrumResult) else numeric
    vals = np.asarray(vals, dtype=complex).ravel()
    vals = vals[np.argsort(-np.abs(vals), kind="stable")]
    pool = list(predicted)
    targets = np.array([p.value for p in pool], dtype=complex)
    used = np.zeros(len(pool), dtype=bool)
    pairs, lonely = [], []
    for v in vals:
        if used.all():
            lonely.append(complex(v))
            continue
        d = np.where(used, np.inf, np.abs(targets - v))
        k = int(np.argmin(d))
        used[k] = True
        pairs.append(MatchedPair(complex(v), pool[k], float(d[k])))
    rest = tuple(p for p, u in zip(pool, used) if not u)
    return MatchReport(tuple(pairs), tuple(lonely), rest)


# -- sweeps ---------------------------------------------------------------------

@dataclass
class SweepRecord:
    """Spectral summary at one parameter value.

    ``mod1_count`` is ``None`` at neutral points or when the orbit search
    failed; ``error`` then holds the reason.
    """

    param: float
    periods: tuple
    multipliers: tuple
    n_stable: int
    n_unstable: int
    predicted: tuple
    mod1_count: int | None
    neutral: bool = False
    epsilon: float | None = None
    numeric: tuple = ()
    match_errors: tuple = ()
    error: str | None = None

    @property
    def top_moduli(self):
        return [abs(p.value) for p in self.predicted]


@dataclass(frozen=True)
class LambdaBifurcationEvent:
    param_lo: float
    param_hi: float
    count_before: int
    count_after: int

    @property
    def interval(self):
        return (self.param_lo, self.param_hi)


def sweep_values(lo: float, hi: float, step: float) -> np.ndarray:
    """Grid ``lo + i * step`` up to ``hi`` (inclusive within round-off)."""
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise DomainError("sweep needs finite lo < hi")
    if not step > 0:
        raise DomainError("sweep step must be positive")
    n = int(np.floor((hi - lo) / step + 1e-9))
    # rounding keeps printed values like 2.711 free of representation noise
    return np.round(lo + step * np.arange(n + 1), 12)


def sweep(family: str, noise: NoiseSpec, param_range, p_max: int, j_max: int,
          epsilon: float | None = None, *, param: str = "b", base_params=None,
          top_k: int = 6, n_grid: int | None = None, scan_n: int = 4096) -> list[SweepRecord]:
    """Orbit search and limiting spectrum at each value of a map parameter.

    With ``epsilon`` the discretised operator is also assembled and its top
    ``top_k`` eigenvalues are matched against the predictions.  ``n_grid``
    defaults to the smallest power of two meeting the resolution rule.
    Failures at individual parameter values are stored in the record.
    """
    lo, hi, step = param_range
    values = sweep_values(lo, hi, step)
    if epsilon is not None and n_grid is None:
        n_grid = default_grid(epsilon, noise)
    base = dict(base_params or {})
    out = []
    for v in values:
        params = dict(base, **{param: float(v)})
        try:
            cmap = CircleMap(family, params)
            orbs = find_periodic_orbits(cmap, p_max, scan_n=scan_n)
        except CircSpecError as exc:
            out.append(SweepRecord(float(v), (), (), 0, 0, (), None, error=str(exc)))
            continue
        rec = SweepRecord(
            param=float(v),
            periods=tuple(o.period for o in orbs),
            multipliers=tuple(o.multiplier for o in orbs),
            n_stable=sum(o.stability == "stable" for o in orbs),
            n_unstable=sum(o.stability == "unstable" for o in orbs),
            predicted=(),
            mod1_count=None,
            neutral=any(o.is_neutral for o in orbs),
            epsilon=epsilon,
        )
        if rec.neutral:
            rec.error = "neutral orbit"
            out.append(rec)
            continue
        pred = predicted_spectrum(orbs, j_max)
        rec.predicted = tuple(pred[:top_k])
        rec.mod1_count = mod1_count(orbs)
        if epsilon is not None:
            try:
                spec = spectrum(assemble(cmap, noise, epsilon, n_grid), top_k)
                rep = match_spectra(spec, pred)
                rec.numeric = tuple(spec.eigenvalues)
                rec.match_errors = tuple(rep.errors)
            except CircSpecError as exc:
                rec.error = str(exc)
        out.append(rec)
    return out


def default_grid(epsilon: float, noise: NoiseSpec, minimum: int = 64) -> int:
    """Smallest power of two with ``2 pi / N <= eps * sigma_lb / 4``."""
    need = 2.0 * np.pi / (epsilon * noise.sigma_lb / 4.0)
    return max(minimum, 1 << int(np.ceil(np.log2(need))))


def detect_lambda_bifurcations(records) -> list[LambdaBifurcationEvent]:
    """Events where the modulus-one count changes between usable records.

    Records without a count (neutral points, failed searches) are skipped, so
    the reported interval then spans them.

    Raises
    ------
    ContractError
        If the parameters are not strictly increasing.
    """
    params = np.array([r.param for r in records], dtype=float)
    if np.any(np.diff(params) <= 0):
        raise ContractError("sweep records must be sorted by strictly increasing parameter")
    events = []
    prev = None
    for r in records:
        if r.mod1_count is None:
            continue
        if prev is not None and r.mod1_count != prev.mod1_count:
            events.append(LambdaBifurcationEvent(prev.param, r.param, prev.mod1_count,
                                                 r.mod1_count))
        prev = r
    return events
