import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrsop import chanmodel
from corrsop.chanmodel import CorrelationSpec, SystemConfig
from corrsop.errors import DegenerateCorrelation, DomainError

U1_ETA = (0.85, 0.9, -0.95)
U3_ETA = (0.6, -0.7, 0.8)


def test_printed_u3_entries():
    U = chanmodel.correlation_matrix(U3_ETA)
    want = np.array([[1, -0.42, 0.48], [-0.42, 1, -0.56], [0.48, -0.56, 1]])
    assert np.allclose(U, want, atol=1e-15)
    assert chanmodel.det_product(U3_ETA) == pytest.approx(0.5054, abs=1e-3)


def test_u1_det():
    assert chanmodel.det_product(U1_ETA) == pytest.approx(0.088, abs=1e-3)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-0.99, 0.99), min_size=1, max_size=8))
def test_det_product_identity(eta):
    d = chanmodel.det_product(eta)
    ref = np.linalg.det(chanmodel.correlation_matrix(eta))
    assert d == pytest.approx(ref, rel=1e-9, abs=1e-15)
    assert d > 0


def test_config_validation():
    with pytest.raises(DomainError):
        SystemConfig(M=0)
    with pytest.raises(DomainError):
        SystemConfig(M=1.5)
    with pytest.raises(DomainError):
        SystemConfig(gamma_bar_b=0.0)
    with pytest.raises(DomainError):
        SystemConfig(r_s=-1.0)
    assert SystemConfig(r_s=2.0).two_rs == 4.0


def test_spec_validation():
    with pytest.raises(DomainError):
        CorrelationSpec((1.0, 0.2))
    with pytest.raises(DomainError):
        CorrelationSpec((0.2,), lambda_e=1.0)
    CorrelationSpec((1.0, -1.0), 1.0, True, True)


def test_degenerate_weights():
    spec = CorrelationSpec((0.3, -0.5), -1.0, True, True)
    pb, sb, pe, se = spec.weights()
    assert np.all(pb == 0) and list(sb) == [1.0, -1.0]
    assert pe == 0.0 and se == -1.0


def test_build_factors():
    cfg = SystemConfig(M=3, N_E=2, gamma_bar_b=10.0, gamma_bar_e=2.0)
    f = chanmodel.build_factors(CorrelationSpec(U3_ETA, 0.5), cfg)
    eta = np.array(U3_ETA)
    S = np.sum(eta ** 2 / (1 - eta ** 2))
    assert f.S == pytest.approx(S, rel=1e-15)
    assert f.det_U == pytest.approx(f.det_direct, rel=1e-12)
    assert f.alpha == pytest.approx(1 + S + 2 * 0.25 / 0.75, rel=1e-15)
    with pytest.raises(DegenerateCorrelation):
        chanmodel.build_factors(CorrelationSpec(U3_ETA, 1.0, False, True), cfg)


def test_sample_channel_shapes():
    cfg = SystemConfig(M=3, N_E=2)
    d = chanmodel.sample_channel(CorrelationSpec(U3_ETA, 0.5), cfg, np.random.default_rng(0))
    assert d.h_b.shape == (3,) and d.h_e.shape == (2,) and d.t >= 0


def test_sample_gains_covariance():
    cfg = SystemConfig(M=3, N_t=2, N_E=2)
    spec = CorrelationSpec(U3_ETA, 0.5)
    h_b, h_e, t = chanmodel.sample_gains(spec, cfg, np.random.default_rng(1), 200_000)
    assert h_b.shape == (200_000, 2, 3) and h_e.shape == (200_000, 2, 2) and t.shape == (200_000, 2)
    h = np.concatenate([h_b[:, 0], h_e[:, 0]], axis=1)
    C = (h.T @ h.conj()).real / h.shape[0]
    rho_b, rho_ee, rho_be = spec.branch_correlation()
    want = np.ones((5, 5))
    want[:3, :3] = rho_b
    want[3:, 3:] = rho_ee
    np.fill_diagonal(want, 1.0)
    want[:3, 3:] = rho_be[:, None]
    want[3:, :3] = rho_be[None, :]
    assert np.allclose(C, want, atol=0.01)
    # antennas independent
    cross = np.mean(h_b[:, 0, 0] * h_b[:, 1, 0].conj())
    assert abs(cross) < 0.01


def test_conditional_branch_cdf_vs_sampling():
    rng = np.random.default_rng(2)
    eta, gbar, t = 0.8, 5.0, 1.7
    z0 = math.sqrt(t)
    w = (rng.standard_normal(200_000) + 1j * rng.standard_normal(200_000)) * math.sqrt(0.5)
    g = gbar * np.abs(math.sqrt(1 - eta ** 2) * w + eta * z0) ** 2
    for x in (1.0, 5.0, 12.0):
        assert chanmodel.conditional_branch_cdf(x, t, eta, gbar) == pytest.approx(np.mean(g <= x), abs=5e-3)
    assert chanmodel.conditional_branch_cdf(np.inf, t, eta, gbar) == 1.0


def test_identity_when_uncorrelated():
    f = chanmodel.build_factors(CorrelationSpec((0.0,) * 4, 0.0), SystemConfig(M=4))
    assert np.array_equal(f.U, np.eye(4)) and f.det_U == 1.0


def test_u1_offdiagonals():
    U = chanmodel.correlation_matrix(U1_ETA)
    assert U[0, 1] == pytest.approx(0.765) and U[0, 2] == pytest.approx(-0.8075)
    assert U[1, 2] == pytest.approx(-0.855)


def _corr(a, b):
    return float(np.real(np.mean(a * b.conj())) / np.sqrt(np.mean(np.abs(a) ** 2) * np.mean(np.abs(b) ** 2)))


@pytest.mark.parametrize("eta,lam,pairs", [
    ((0.0, 0.0, 0.0), 0.0, [("b", 0, "b", 1, 0.0), ("b", 2, "e", 0, 0.0), ("e", 0, "e", 1, 0.0)]),
    (U1_ETA, 0.0, [("b", 0, "b", 1, 0.765), ("b", 0, "b", 2, -0.8075)]),
    ((0.8, 0.8), 0.5, [("b", 0, "e", 0, 0.4), ("b", 1, "e", 1, 0.4), ("e", 0, "e", 1, 0.25)]),
])
def test_sampled_correlations(eta, lam, pairs):
    cfg = SystemConfig(M=len(eta), N_E=2)
    h_b, h_e, _ = chanmodel.sample_gains(CorrelationSpec(eta, lam), cfg, np.random.default_rng(6), 1_000_000)
    h = {"b": h_b[:, 0], "e": h_e[:, 0]}
    for s1, i, s2, j, want in pairs:
        assert _corr(h[s1][:, i], h[s2][:, j]) == pytest.approx(want, abs=0.01)


def test_marginal_rayleigh():
    from scipy import stats
    cfg = SystemConfig(M=3, N_E=2)
    h_b, h_e, t = chanmodel.sample_gains(CorrelationSpec(U1_ETA, 0.7), cfg, np.random.default_rng(9), 1_000_000)
    edges = stats.expon.ppf(np.linspace(0, 1, 21))
    for g in (np.abs(h_b[:, 0, 2]) ** 2, np.abs(h_e[:, 0, 1]) ** 2, t[:, 0]):
        obs, _ = np.histogram(g, bins=edges)
        assert stats.chisquare(obs).pvalue > 0.01


def test_conditional_branch_cdf_examples():
    assert chanmodel.conditional_branch_cdf(0.0, 0.5, 0.6, 10.0) == 0.0
    assert chanmodel.conditional_branch_cdf(1e6, 0.5, 0.6, 10.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        chanmodel.conditional_branch_cdf(1.0, 0.5, 1.0, 10.0)
    # (x=1, t=0.5, eta=0.6, gamma=10) against conditional draws
    rng = np.random.default_rng(10)
    n = 2_000_000
    w = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * math.sqrt(0.5)
    z0 = math.sqrt(0.5) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    g = 10.0 * np.abs(0.8 * w + 0.6 * z0) ** 2
    p = np.mean(g <= 1.0)
    v = chanmodel.conditional_branch_cdf(1.0, 0.5, 0.6, 10.0)
    assert abs(p - v) < 3 * math.sqrt(v * (1 - v) / n)
