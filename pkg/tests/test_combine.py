import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from corrsop.combine import CombinerKind, TasMode, combined_snr, secrecy_capacity, select_antenna
from corrsop.errors import DomainError

snrs = st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=8)


@given(snrs)
def test_combiner_ordering(g):
    # MRC >= EGC >= SC is not guaranteed; EGC and SC both sit in [MRC/M, MRC]
    M = len(g)
    mrc = combined_snr("MRC", g)
    sc = combined_snr("SC", g)
    egc = combined_snr("EGC", g)
    tol = 1e-9 * (1 + mrc)
    assert mrc / M - tol <= sc <= mrc + tol
    assert mrc / M - tol <= egc <= mrc + tol


def test_egc_can_fall_below_sc():
    assert combined_snr("EGC", [1.0, 0.0]) < combined_snr("SC", [1.0, 0.0])


@given(st.floats(0, 1e3), st.integers(1, 8))
def test_equal_branches(g, M):
    for kind in CombinerKind:
        want = g if kind is CombinerKind.SC else M * g
        assert combined_snr(kind, [g] * M) == pytest.approx(want, rel=1e-12, abs=1e-12)
        assert kind.epsilon(M) == (1 if kind is CombinerKind.SC else M)


def test_combined_snr_errors():
    with pytest.raises(DomainError):
        combined_snr("MRC", [])
    with pytest.raises(DomainError):
        combined_snr("MRC", [-1.0])
    with pytest.raises(DomainError):
        CombinerKind.parse("ABC")
    assert CombinerKind.parse("egc") is CombinerKind.EGC
    assert TasMode.parse("tas_no_eve_csi") is TasMode.TAS_NO_EVE_CSI


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_secrecy_capacity(b, e):
    c = secrecy_capacity(b, e)
    assert c >= 0
    if b > e:
        assert c == pytest.approx(math.log2((1 + b) / (1 + e)), rel=1e-12, abs=1e-12)
    else:
        assert c == 0.0


def test_select_antenna():
    b = [3.0, 5.0, 5.0]
    e = [0.0, 10.0, 1.0]
    assert select_antenna("TAS_NO_EVE_CSI", b, e) == 1
    assert select_antenna("TAS_WITH_EVE_CSI", b, e) == 0
    assert select_antenna("TAS_NO_EVE_CSI", [2.0, 2.0], [0.0, 0.0]) == 0
    assert select_antenna("SIMO", [2.0], [1.0]) == 0
    with pytest.raises(DomainError):
        select_antenna("SIMO", [1.0, 2.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        select_antenna("TAS_NO_EVE_CSI", [1.0], [1.0, 2.0])


@given(st.lists(st.tuples(st.floats(0, 1e4), st.floats(0, 1e4)), min_size=1, max_size=5))
def test_with_csi_maximizes_capacity(pairs):
    b = [p[0] for p in pairs]
    e = [p[1] for p in pairs]
    i = select_antenna("TAS_WITH_EVE_CSI", b, e)
    best = max(secrecy_capacity(x, y) for x, y in pairs)
    assert secrecy_capacity(b[i], e[i]) == pytest.approx(best, abs=1e-12)


def test_examples():
    assert combined_snr("MRC", [1, 2, 3]) == 6
    assert combined_snr("SC", [1, 2, 3]) == 3
    assert combined_snr("EGC", [4, 4, 4, 4]) == pytest.approx(16)
    assert secrecy_capacity(3, 1) == pytest.approx(1.0)
    assert secrecy_capacity(1, 3) == 0.0
    assert secrecy_capacity(0, 0) == 0.0
    assert select_antenna("TAS_NO_EVE_CSI", [2, 5, 1], [9, 9, 9]) == 1
    assert select_antenna("TAS_WITH_EVE_CSI", [3, 3], [1, 0]) == 1
    assert select_antenna("TAS_WITH_EVE_CSI", [5, 5], [2, 2]) == 0


@given(st.floats(0, 1e4), st.floats(0, 1e4), st.floats(0, 1e3))
def test_capacity_monotone(b, e, d):
    assert secrecy_capacity(b + d, e) >= secrecy_capacity(b, e)
    assert secrecy_capacity(b, e + d) <= secrecy_capacity(b, e)


@given(st.lists(st.tuples(st.floats(0, 1e3), st.floats(0, 1e3)), min_size=2, max_size=5),
       st.floats(0.1, 10.0))
def test_with_csi_scale_invariant(pairs, s):
    # rescaling every (1+b)/(1+e) by s > 0 keeps the argmax
    b = np.array([p[0] for p in pairs])
    e = np.array([p[1] for p in pairs])
    b2 = s * (1 + b) - 1
    keep = b2 >= 0
    if not keep.all():
        return
    assert select_antenna("TAS_WITH_EVE_CSI", b, e) == select_antenna("TAS_WITH_EVE_CSI", b2, e)
