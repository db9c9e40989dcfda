"""Signal and kernel derivatives checked against finite-difference oracles."""
import numpy as np
import pytest

from peakpost.errors import (ConfigurationError, CurvatureTooLowError,
                             DomainError, ParameterError)
from peakpost.model import (Bump, KernelSpec, SignalSpec, curvature_scales,
                            derivative_bundle, kernel_eval, kernel_matrix,
                            signal_eval, signal_grad, signal_hess,
                            signal_third, signal_values, true_peaks)

DOM = np.array([[-1.0, 1.0], [-1.0, 1.0]])


def fd_grad(f, t, h=1e-4):
    g = np.zeros(t.size)
    for i in range(t.size):
        e = np.zeros(t.size)
        e[i] = h
        g[i] = (f(t + e) - f(t - e)) / (2.0 * h)
    return g


def fd_hess(f, t, h=1e-4):
    d = t.size
    out = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            ei = np.zeros(d)
            ej = np.zeros(d)
            ei[i] = h
            ej[j] = h
            out[i, j] = (f(t + ei + ej) - f(t + ei - ej)
                         - f(t - ei + ej) + f(t - ei - ej)) / (4.0 * h * h)
    return out


def centered(amplitude, width=0.15, tapered=False):
    return SignalSpec(bumps=(Bump(np.zeros(2), amplitude, width),),
                      domain=DOM, tapered=tapered)


def test_kernel_basics(kernel):
    t = np.array([0.3, -0.2])
    s = np.array([-0.1, 0.4])
    assert kernel_eval(kernel, t, t) == pytest.approx(1.0, rel=1e-15)
    assert kernel_eval(kernel, s, t) == pytest.approx(kernel_eval(kernel, t, s), rel=1e-15)
    r2 = float(np.sum((s - t) ** 2))
    assert kernel_eval(kernel, s, t) == pytest.approx(np.exp(-r2 / (2 * 0.15**2)), rel=1e-13)
    pts = np.array([s, t, [0.0, 0.0]])
    mat = kernel_matrix(kernel, pts)
    for i in range(3):
        for j in range(3):
            assert mat[i, j] == pytest.approx(kernel_eval(kernel, pts[i], pts[j]), rel=1e-14)


def test_kernel_spec_validation():
    with pytest.raises(ConfigurationError):
        KernelSpec(length_scale=0.0)
    with pytest.raises(ConfigurationError):
        KernelSpec(dimension=0)
    with pytest.raises(ConfigurationError):
        KernelSpec(family="matern")


def test_derivative_bundle_matches_finite_differences(kernel, bundle):
    # Lambda[i, j] is the mixed derivative d^2 K(s, t) / ds_i dt_j at s = t
    t = np.array([0.21, -0.13])
    h = 1e-4
    lam = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            ei = np.zeros(2)
            ej = np.zeros(2)
            ei[i] = h
            ej[j] = h
            lam[i, j] = (kernel_eval(kernel, t + ei, t + ej)
                         - kernel_eval(kernel, t + ei, t - ej)
                         - kernel_eval(kernel, t - ei, t + ej)
                         + kernel_eval(kernel, t - ei, t - ej)) / (4.0 * h * h)
    assert np.allclose(bundle.lambda_mat, lam, rtol=1e-5)
    assert np.allclose(bundle.lambda_mat, np.eye(2) / 0.15**2, rtol=1e-13)
    assert bundle.sigma1_sq == pytest.approx(1.0 / 0.15**2, rel=1e-13)
    # stationarity and evenness kill the odd covariances
    assert np.allclose(bundle.k21, 0.0, atol=1e-12)
    assert np.allclose(bundle.gamma, 0.0, atol=1e-12)


def test_single_bump_values_and_derivatives():
    sig = centered(5.0)
    assert signal_eval(sig, np.zeros(2)) == pytest.approx(5.0, rel=1e-15)
    assert np.allclose(signal_grad(sig, np.zeros(2)), 0.0, atol=1e-12)
    assert np.allclose(signal_hess(sig, np.zeros(2)), -(5.0 / 0.15**2) * np.eye(2),
                       rtol=1e-12)
    t = np.array([0.45, 0.0])  # three widths out
    assert signal_eval(sig, t) == pytest.approx(5.0 * np.exp(-4.5), rel=1e-12)

    def f(s):
        return signal_eval(sig, s)

    for t in (np.array([0.1, -0.05]), np.array([0.02, 0.22]), np.array([-0.31, 0.07])):
        assert np.allclose(signal_grad(sig, t), fd_grad(f, t), rtol=1e-5, atol=1e-7)
        assert np.allclose(signal_hess(sig, t), fd_hess(f, t), rtol=1e-5, atol=5e-4)


def test_tapered_bump_derivatives_match_fd_in_the_blend_band():
    sig = SignalSpec(bumps=(Bump(np.zeros(2), 4.0, 0.1),), domain=DOM, tapered=True)

    def f(s):
        return signal_eval(sig, s)

    # 0.25 < r < 0.4 exercises the taper; r < 0.25 the pure-Gaussian branch
    for t in (np.array([0.3, 0.05]), np.array([-0.27, 0.1]), np.array([0.2, 0.0]),
              np.array([0.26, -0.26])):
        assert np.allclose(signal_grad(sig, t), fd_grad(f, t), rtol=1e-5, atol=1e-6)
        assert np.allclose(signal_hess(sig, t), fd_hess(f, t), rtol=1e-5, atol=1e-3)


def test_taper_is_twice_differentiable_at_the_seams():
    sig = SignalSpec(bumps=(Bump(np.zeros(2), 4.0, 0.1),), domain=DOM, tapered=True)
    for r in (0.25, 0.4):  # inner and outer taper radii for width 0.1
        lo = np.array([r - 1e-7, 0.0])
        hi = np.array([r + 1e-7, 0.0])
        assert signal_eval(sig, hi) == pytest.approx(signal_eval(sig, lo), abs=1e-6)
        assert np.allclose(signal_grad(sig, hi), signal_grad(sig, lo), atol=1e-4)
        assert np.allclose(signal_hess(sig, hi), signal_hess(sig, lo), atol=1e-2)


def test_taper_support_and_null_ball():
    sig = SignalSpec(bumps=(Bump(np.zeros(2), 3.0, 0.1),), domain=DOM, tapered=True)
    assert signal_eval(sig, np.array([0.41, 0.0])) == 0.0
    assert signal_eval(sig, np.array([0.39, 0.0])) > 0.0
    assert sig.is_null_on_ball(np.array([0.8, 0.0]), 0.3)
    assert not sig.is_null_on_ball(np.array([0.6, 0.0]), 0.3)
    flat = SignalSpec(bumps=(), domain=DOM)
    assert flat.is_null_on_ball(np.zeros(2), 0.5)
    untapered = centered(3.0)
    assert not untapered.is_null_on_ball(np.array([0.9, 0.9]), 0.05)


def test_signal_third_matches_fd_of_hessian():
    sig = centered(5.0)
    t = np.array([0.08, -0.11])
    third = signal_third(sig, t)
    h = 1e-4
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (signal_hess(sig, t + e) - signal_hess(sig, t - e)) / (2.0 * h)
        assert np.allclose(third[:, :, k], fd, rtol=1e-4, atol=1e-2)
    # full symmetry of the third-derivative tensor
    for perm in ((0, 2, 1), (1, 0, 2), (2, 1, 0)):
        assert np.allclose(third, np.transpose(third, perm), atol=1e-10)


def test_signal_values_matches_pointwise_eval():
    sig = centered(5.0)
    pts = np.array([[0.0, 0.0], [0.1, 0.2], [-0.3, 0.05]])
    vals = signal_values(sig, pts)
    for i in range(3):
        assert vals[i] == pytest.approx(signal_eval(sig, pts[i]), rel=1e-14)


def test_signal_configuration_guards():
    with pytest.raises(ConfigurationError):  # too close to the boundary
        SignalSpec(bumps=(Bump(np.array([0.9, 0.0]), 1.0, 0.05),), domain=DOM)
    with pytest.raises(ConfigurationError):  # bumps closer than six widths
        SignalSpec(bumps=(Bump(np.zeros(2), 1.0, 0.1),
                          Bump(np.array([0.5, 0.0]), 1.0, 0.1)), domain=DOM)
    with pytest.raises(ConfigurationError):
        SignalSpec(bumps=(Bump(np.zeros(2), 1.0, -0.1),), domain=DOM)
    sig = centered(5.0)
    with pytest.raises(DomainError):
        signal_eval(sig, np.array([1.5, 0.0]))
    with pytest.raises(DomainError):
        signal_grad(sig, np.array([0.0, -1.0000001]))


def test_true_peaks_single_bump():
    sig = centered(11.0)
    (pk,) = true_peaks(sig)
    assert np.allclose(pk.location, 0.0, atol=1e-10)
    assert pk.height == pytest.approx(11.0, rel=1e-12)
    assert np.allclose(pk.neg_hessian, (11.0 / 0.15**2) * np.eye(2), rtol=1e-10)
    assert pk.delta == pytest.approx(0.15**2 / 11.0, rel=1e-9)


def test_true_peaks_nine_bump_lattice():
    coords = (-0.6, 0.0, 0.6)
    heights = np.linspace(3.0, 6.0, 9)
    bumps = []
    k = 0
    for x in coords:
        for y in coords:
            bumps.append(Bump(np.array([x, y]), float(heights[k]), 0.1))
            k += 1
    sig = SignalSpec(bumps=tuple(bumps), domain=DOM, tapered=True)
    pks = true_peaks(sig)
    assert len(pks) == 9
    # compact support keeps every bump untouched by its neighbours
    assert np.allclose(sorted(p.height for p in pks), heights, rtol=1e-12)
    for p in pks:
        dists = [np.hypot(p.location[0] - x, p.location[1] - y)
                 for x in coords for y in coords]
        assert min(dists) < 1e-9


def test_curvature_scales_formulas_and_frozen_values(bundle):
    sig = centered(11.0)
    scales = curvature_scales(true_peaks(sig), bundle)
    lam_n = 11.0 / 0.15**2  # smallest curvature eigenvalue over peaks
    delta_n = 0.15**2 / 11.0
    assert scales.lambda_n == pytest.approx(lam_n, rel=1e-12)
    assert scales.delta_n == pytest.approx(delta_n, rel=1e-12)
    assert scales.eps_n == pytest.approx(delta_n * np.sqrt(6.0 * bundle.sigma1_sq * np.log(lam_n)), rel=1e-12)
    assert scales.Delta_n == pytest.approx(np.sqrt(6.0 * np.log(lam_n)), rel=1e-12)
    assert scales.eps_n == pytest.approx(0.08311787198032036, rel=1e-10)
    assert scales.Delta_n == pytest.approx(6.09531061189016, rel=1e-10)


def test_curvature_scales_guards(bundle):
    with pytest.raises(ParameterError):
        curvature_scales([], bundle)
    sig = centered(11.0)
    with pytest.raises(ConfigurationError):
        curvature_scales(true_peaks(sig), bundle, eps_constant=3.9)
    weak = centered(0.02)  # curvature eigenvalue 0.02 / 0.0225 < 1
    with pytest.raises(CurvatureTooLowError):
        curvature_scales(true_peaks(weak), bundle)
