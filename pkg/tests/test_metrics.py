"""Discovery labelling and pooled error-rate estimators."""
from types import SimpleNamespace

import numpy as np
import pytest

from peakpost.errors import ParameterError
from peakpost.metrics import (conditional_coverage, estimate_eps_pcer,
                              estimate_null_pcer, estimate_pcmr, label_peaks,
                              ratio_of_sums)
from peakpost.model import Bump, SignalSpec, true_peaks

DOM = np.array([[-1.0, 1.0], [-1.0, 1.0]])


def loc(x, y):
    return SimpleNamespace(location=np.array([x, y]))


def test_label_peaks_partition():
    sig = SignalSpec(bumps=(Bump(np.zeros(2), 4.0, 0.1),), domain=DOM, tapered=True)
    tps = true_peaks(sig)
    eps = 0.08
    peaks = [loc(0.05, 0.0),   # within eps of the true peak
             loc(0.3, 0.0),    # outside eps but inside the support halo
             loc(0.8, 0.3)]    # signal vanishes on the whole eps-ball
    labels = label_peaks(peaks, tps, sig, eps)
    assert [l.label for l in labels] == ["epsilon-consistent", "high-gradient",
                                         "null-region"]
    assert labels[0].nearest_true == 0
    assert labels[0].distance == pytest.approx(0.05, rel=1e-12)
    # boundary case: distance exactly eps counts as consistent
    on_edge = label_peaks([loc(eps, 0.0)], tps, sig, eps)[0]
    assert on_edge.label == "epsilon-consistent"


def test_label_peaks_with_no_true_peaks():
    sig = SignalSpec(bumps=(), domain=DOM)
    lab = label_peaks([loc(0.2, -0.4)], [], sig, 0.08)[0]
    assert lab.label == "null-region"
    assert lab.nearest_true == -1
    assert np.isinf(lab.distance)


def test_ratio_of_sums_hand_value():
    est = ratio_of_sums([1.0, 0.0, 2.0], [2.0, 1.0, 3.0])
    assert est.value == pytest.approx(0.5, rel=1e-14)
    assert est.numerator == 3.0
    assert est.denominator == 6.0
    assert est.replicates == 3
    # leave-one-out jackknife on the three replicates, worked by hand
    loo = np.array([2.0 / 4.0, 3.0 / 5.0, 1.0 / 3.0])
    want_se = np.sqrt(2.0 / 3.0 * np.sum((loo - loo.mean()) ** 2))
    assert est.se == pytest.approx(want_se, rel=1e-12)


def test_ratio_of_sums_is_order_invariant():
    a = ratio_of_sums([1.0, 0.0, 2.0], [2.0, 1.0, 3.0])
    b = ratio_of_sums([2.0, 1.0, 0.0], [3.0, 2.0, 1.0])
    assert a.value == pytest.approx(b.value, rel=1e-14)
    assert a.se == pytest.approx(b.se, rel=1e-12)


def test_ratio_of_sums_degenerate_cases():
    zero = ratio_of_sums([1.0, 2.0], [0.0, 0.0])
    assert np.isnan(zero.value) and np.isnan(zero.se)
    assert zero.replicates == 2
    empty = ratio_of_sums([], [])
    assert np.isnan(empty.value)
    assert empty.replicates == 0
    with pytest.raises(ParameterError):
        ratio_of_sums([1.0], [1.0, 2.0])
    # a replicate carrying the whole denominator leaves the estimate finite
    single = ratio_of_sums([1.0, 0.0, 0.0], [2.0, 0.0, 0.0])
    assert single.value == pytest.approx(0.5)
    assert np.isfinite(single.se) or np.isnan(single.se)


def test_rate_wrappers_delegate():
    nd = [1.0, 0.0, 2.0]
    pre = [3.0, 2.0, 4.0]
    base = ratio_of_sums(nd, pre)
    for wrapper in (estimate_null_pcer, estimate_eps_pcer, estimate_pcmr):
        est = wrapper(nd, pre)
        assert est.value == pytest.approx(base.value, rel=1e-14)
        assert est.se == pytest.approx(base.se, rel=1e-14)


def test_conditional_coverage():
    est = conditional_coverage([True, True, False, True])
    assert est.value == pytest.approx(0.75, rel=1e-14)
    assert est.se == pytest.approx(np.sqrt(0.75 * 0.25 / 4.0), rel=1e-12)
    assert est.n == 4
    empty = conditional_coverage([])
    assert np.isnan(empty.value) and empty.n == 0
