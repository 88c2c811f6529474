import math

import numpy as np
import pytest

from circspec import (
    ContractError,
    NoiseSpec,
    detect_lambda_bifurcations,
    match_spectra,
    predicted_spectrum,
    spectrum,
    sweep,
)
from circspec.analysis import SweepRecord, default_grid, sweep_values

from conftest import operator_for, orbits_for

UNIT = NoiseSpec.constant(1.0)


def record(param, count, neutral=False):
    return SweepRecord(param, (), (), 0, 0, (), None if neutral else count, neutral)


def test_match_empty_numeric():
    pred = predicted_spectrum(orbits_for(2.2, 1), 2)
    rep = match_spectra(np.array([], dtype=complex), pred)
    assert rep.pairs == () and len(rep.unmatched_predicted) == len(pred)
    assert rep.max_error == 0.0


def test_match_is_injective_and_greedy():
    pred = predicted_spectrum(orbits_for(2.2, 1), 3)
    numeric = np.array([1.0, 0.99, -0.95, 0.5])
    rep = match_spectra(numeric, pred)
    used = [id(p.predicted) for p in rep.pairs]
    assert len(used) == len(set(used)) == 4
    # 1.0 takes the prediction 1, so 0.99 must fall back to the next closest (c_s^2)
    assert rep.pairs[0].predicted.value == 1.0
    assert rep.pairs[1].predicted.value == pytest.approx((1 - math.sqrt(3.84)) ** 2)


def test_match_more_numeric_than_predicted():
    pred = predicted_spectrum(orbits_for(2.2, 1), 0)
    rep = match_spectra([1.0, 0.5, 0.2, 0.1], pred)
    assert len(rep.pairs) == 2 and len(rep.unmatched_numeric) == 2


def test_match_real_spectrum():
    spec = spectrum(operator_for(2.2, 0.05, 1024), 6)
    rep = match_spectra(spec, predicted_spectrum(orbits_for(2.2, 1), 8))
    assert len(rep.pairs) == 6
    assert rep.pairs[0].error <= 1e-8


def test_sweep_values_count():
    v = sweep_values(2.0, 2.5, 0.001)
    assert len(v) == 501 and v[0] == 2.0 and v[-1] == 2.5
    assert v[237] == 2.237


def test_sweep_before_first_doubling():
    recs = sweep("sine-circle", UNIT, (1.8, 2.2, 0.01), 2, 2)
    assert len(recs) == 41
    assert {r.mod1_count for r in recs} == {1}
    assert detect_lambda_bifurcations(recs) == []


def test_sweep_period_two_window():
    recs = sweep("sine-circle", UNIT, (2.25, 2.5, 0.01), 2, 2)
    assert {r.mod1_count for r in recs} == {2}


def test_sweep_with_numerics():
    recs = sweep("sine-circle", UNIT, (2.2, 2.2 + 1e-9, 0.01), 1, 8, epsilon=0.05,
                 n_grid=512)
    (r,) = recs
    assert len(r.numeric) == 6 and len(r.match_errors) == 6
    assert r.match_errors[0] <= 1e-8


def test_sweep_records_failures():
    recs = sweep("no-such-family", UNIT, (1.0, 1.1, 0.05), 1, 1)
    assert all(r.mod1_count is None and r.error for r in recs)


def test_default_grid_rule():
    n = default_grid(0.05, UNIT)
    assert 2 * math.pi / n <= 0.05 / 4 and n == 512


def test_first_lambda_bifurcation():
    recs = sweep("sine-circle", UNIT, (2.0, 2.5, 0.001), 2, 2)
    (ev,) = detect_lambda_bifurcations(recs)
    assert 2.236 <= ev.param_lo < math.sqrt(5) < ev.param_hi <= 2.237
    assert (ev.count_before, ev.count_after) == (1, 2)


def test_second_lambda_bifurcation():
    recs = sweep("sine-circle", UNIT, (2.6, 2.8, 0.001), 4, 2)
    (ev,) = detect_lambda_bifurcations(recs)
    assert ev.param_lo == pytest.approx(2.71, abs=0.005)
    assert (ev.count_before, ev.count_after) == (2, 4)


def test_detect_skips_neutral_points():
    recs = [record(1.0, 1), record(1.1, 1), record(1.2, 0, neutral=True), record(1.3, 2)]
    (ev,) = detect_lambda_bifurcations(recs)
    assert ev.interval == (1.1, 1.3)


def test_detect_constant_and_unsorted():
    assert detect_lambda_bifurcations([record(1.0, 1), record(1.1, 1)]) == []
    with pytest.raises(ContractError):
        detect_lambda_bifurcations([record(1.1, 1), record(1.0, 1)])


def test_mod1_count_step_function():
    recs = sweep("sine-circle", UNIT, (2.2, 2.3, 0.005), 2, 1)
    counts = [r.mod1_count for r in recs]
    changes = sum(a != b for a, b in zip(counts, counts[1:]))
    assert changes == len(detect_lambda_bifurcations(recs)) == 1
