import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spectral_clt import simulate as sim
from spectral_clt import spectral as S
from spectral_clt.exceptions import ConfigurationError, MarkovSpecError


def brute_cesaro(covs, n, theta):
    """(1/n) sum_j sum_l c_{j-l} e^{i(j-l)theta}, the unsimplified double sum."""
    c = lambda k: covs[abs(k)] if abs(k) < len(covs) else 0.0
    tot = 0j
    for j in range(1, n + 1):
        for l in range(1, n + 1):
            tot += c(j - l) * cmath.exp(1j * (j - l) * theta)
    return tot / n


def brute_linear_condfn(a, theta, n):
    """||E(S_n|F_0)||^2 from E(X_l|F_0) = sum_{m>=0} a_{l+m} eps_{-m}, by explicit loops."""
    J = len(a) - 1
    total = 0.0
    for m in range(J + 1):
        s = 0j
        for l in range(1, n + 1):
            if l + m <= J:
                s += cmath.exp(1j * l * theta) * a[l + m]
        total += abs(s) ** 2
    return total


def random_reversible_chain(rng, S_):
    """Random reversible chain: symmetric weights W, Q_ij = W_ij / sum_j W_ij."""
    W = rng.uniform(0.1, 1.0, (S_, S_))
    W = W + W.T
    Q = W / W.sum(axis=1, keepdims=True)
    pi = W.sum(axis=1) / W.sum()
    f = rng.standard_normal(S_)
    f = f - pi @ f
    return sim.MarkovSpec(Q, f, pi)


# -- linear -------------------------------------------------------------------

def test_transfer_examples():
    assert S.linear_transfer([1.0], 1.234) == pytest.approx(1 + 0j)
    assert S.linear_transfer([1.0, 0.5], 0.0) == pytest.approx(1.5 + 0j)
    assert S.linear_transfer([1.0, 0.5], math.pi) == pytest.approx(1 + 0.5 * cmath.exp(1j * math.pi))


def test_g_examples():
    th = np.linspace(0, 2 * math.pi, 11)
    np.testing.assert_allclose(S.linear_g([1.0], th), 1.0)
    assert S.linear_g([1.0, 0.5], 0.0) == pytest.approx(2.25)
    assert S.linear_g([1.0, 0.5], math.pi) == pytest.approx(0.25)
    with pytest.raises(ConfigurationError):
        S.linear_g([], 0.0)


def test_long_filter_transfer_matches_horner_definition():
    a = np.r_[1.0, 0.99 ** np.arange(1, 2000)]
    for t in (0.01, 1.0, 3.0):
        ref = sum(c * cmath.exp(1j * j * t) for j, c in enumerate(a))
        assert S.linear_transfer(a, t) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("coeffs", [[1.0], [1.0, 0.5], [0.3, -1.2, 0.7, 0.05], sim.slow_decay_coeffs(300)])
def test_transfer_modulus_is_g(coeffs):
    th = np.linspace(0, 2 * math.pi, 1000)
    A = S.linear_transfer(coeffs, th)
    np.testing.assert_allclose(np.abs(A) ** 2, S.linear_g(coeffs, th), rtol=0, atol=1e-12 * max(1, np.max(np.abs(A)) ** 2))


def test_autocov_examples():
    np.testing.assert_array_equal(S.linear_autocov([1.0], 3), [1, 0, 0, 0])
    np.testing.assert_allclose(S.linear_autocov([1.0, 0.5], 2), [1.25, 0.5, 0.0])
    geo = 0.5 ** np.arange(61)
    assert S.linear_autocov(geo, 0)[0] == pytest.approx(4 / 3, abs=1e-12)


def test_autocov_fft_path_matches_direct():
    a = sim.slow_decay_coeffs(6000)
    fast = S.linear_autocov(a, 50)
    direct = [np.dot(a[: a.size - j], a[j:]) for j in range(51)]
    np.testing.assert_allclose(fast, direct, rtol=1e-10)


def test_cesaro_examples():
    assert S.cesaro_variance([1.0], 17, 0.4) == pytest.approx(1.0)
    assert S.cesaro_variance([1.25, 0.5], 2, 0.0) == pytest.approx(1.75)
    assert abs(S.cesaro_variance([1.25, 0.5], 4096, 0.0) - 2.25) <= 1e-3
    with pytest.raises(ValueError):
        S.cesaro_variance([1.0], 0, 0.0)


@pytest.mark.parametrize("n,theta", [(1, 0.3), (5, 2.0), (12, 1.0), (30, 3.0)])
def test_cesaro_matches_double_sum(n, theta):
    covs = S.linear_autocov([1.0, -0.4, 0.3, 0.2], 40)
    assert S.cesaro_variance(covs, n, theta) == pytest.approx(brute_cesaro(covs, n, theta).real, abs=1e-12)


def test_cesaro_reports_missing_lags():
    v, info = S.cesaro_variance([1.25, 0.5], 10, 1.0, return_info=True)
    assert info["missing_lags"] == 8
    _, info = S.cesaro_variance(np.ones(10), 10, 1.0, return_info=True)
    assert info["missing_lags"] == 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=6), st.floats(0, 2 * math.pi),
       st.integers(0, 6))
def test_cesaro_convergence_bound(coeffs, theta, k):
    a = np.asarray(coeffs)
    if not np.any(a != 0):
        a[0] = 1.0
    q = a.size - 1
    n = 8 * q + 1 + 37 * k
    covs = S.linear_autocov(a, n)
    gap = abs(S.cesaro_variance(covs, n, theta) - S.linear_g(a, theta))
    assert gap <= 2 * covs[0] * q / n + 1e-12


def test_linear_condfn_examples():
    for n in (1, 5, 100):
        assert S.linear_condfn_norm([1.0], 1.0, n) == 0.0
    for t in (0.0, 1.0, 2.5):
        assert S.linear_condfn_norm([1.0, 0.5], t, 1) == pytest.approx(0.25)
    v16 = S.linear_condfn_norm([1.0, 0.5], 1.0, 16) / 16
    v1024 = S.linear_condfn_norm([1.0, 0.5], 1.0, 1024) / 1024
    assert v1024 <= v16


@pytest.mark.parametrize("n", [1, 2, 3, 7, 20])
@pytest.mark.parametrize("theta", [0.4, 2.0])
def test_linear_condfn_matches_loops(n, theta):
    a = [1.0, 0.7, -0.3, 0.2, 0.1, -0.05]
    assert S.linear_condfn_norm(a, theta, n) == pytest.approx(brute_linear_condfn(a, theta, n), rel=1e-12)


# -- Jacobi and Markov -------------------------------------------------------------

@pytest.mark.parametrize("size", [1, 2, 5, 16, 64])
def test_jacobi_matches_numpy(rng, size):
    B = rng.standard_normal((size, size))
    A = B + B.T
    vals, vecs = S.jacobi_eigh(A)
    np.testing.assert_allclose(vals, np.sort(np.linalg.eigvalsh(A))[::-1], atol=1e-10)
    np.testing.assert_allclose(vecs.T @ vecs, np.eye(size), atol=1e-10)
    np.testing.assert_allclose(A @ vecs, vecs * vals, atol=1e-9)


def test_jacobi_limits():
    with pytest.raises(ValueError):
        S.jacobi_eigh(np.eye(65))
    with pytest.raises(ValueError):
        S.jacobi_eigh([[1.0, 2.0], [0.0, 1.0]])


@pytest.mark.parametrize("p", [0.1, 0.25, 0.5, 0.9])
def test_two_state_eigen(p):
    d = S.markov_eigen(sim.two_state(p))
    np.testing.assert_allclose(sorted(d.eigenvalues), sorted([1.0, 1 - 2 * p]), atol=1e-12)
    lam2 = np.argmin(np.abs(d.eigenvalues - (1 - 2 * p)))
    assert d.weights[lam2] == pytest.approx(1.0, abs=1e-12)
    assert d.c0 == pytest.approx(1.0, abs=1e-10)


def test_reducible_chain_rejected():
    spec = sim.MarkovSpec(np.eye(3), [1.0, -2.0, 1.0], [1 / 3, 1 / 3, 1 / 3])
    with pytest.raises(MarkovSpecError) as exc:
        S.markov_eigen(spec)
    assert exc.value.invariant == "ergodic"


def test_random_chain_weights_and_covariances(rng):
    for size in (3, 6, 12):
        spec = random_reversible_chain(rng, size)
        d = S.markov_eigen(spec)
        pi, f, Q = spec.stationary, spec.f, spec.transition
        assert d.c0 == pytest.approx(float(pi @ f ** 2), abs=1e-10)
        assert np.all(np.abs(d.eigenvalues) <= 1.0)
        # c_j = E f(xi_0) f(xi_j) = sum_i pi_i f_i (Q^j f)_i
        covs = d.autocov(6)
        Qj = np.eye(size)
        for j in range(7):
            assert covs[j] == pytest.approx(float(pi @ (f * (Qj @ f))), abs=1e-10)
            Qj = Qj @ Q


def test_markov_g_examples():
    white = S.EigenDecomp(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    np.testing.assert_allclose(S.markov_g(white, np.linspace(0, 6, 7)), 1.0)
    half = S.EigenDecomp(np.array([0.5]), np.array([1.0]))
    assert S.markov_g(half, 0.0) == pytest.approx(3.0)
    assert S.markov_g(half, math.pi / 2) / 2 == pytest.approx(0.3)
    integral, _ = S.integrate_g(lambda t: S.markov_g(half, t))
    assert integral == pytest.approx(2 * math.pi * 1.0, rel=1e-6)


def test_markov_g_rejects_unit_mass():
    d = S.EigenDecomp(np.array([1.0, 0.5]), np.array([0.3, 0.7]))
    with pytest.raises(ConfigurationError):
        S.markov_g(d, 1.0)
    flip = S.markov_eigen(sim.two_state(1.0))
    with pytest.raises(ConfigurationError):
        S.markov_g(flip, 1.0)


def test_markov_condfn_examples():
    white = S.EigenDecomp(np.array([0.0]), np.array([1.0]))
    assert S.markov_condfn_norm(white, 1.0, 10) == 0.0
    half = S.EigenDecomp(np.array([0.5]), np.array([1.0]))
    for t in (0.1, 1.0, 2.0):
        assert S.markov_condfn_norm(half, t, 1) == pytest.approx(0.25)
    for n in range(1, 4097, 37):
        assert S.markov_condfn_norm(half, math.pi / 2, n) <= 4.0


def test_markov_condfn_matches_direct_geometric_sum(rng):
    d = S.markov_eigen(random_reversible_chain(rng, 5))
    for n in (1, 4, 33):
        ref = sum(w * abs(sum((lam * cmath.exp(1.3j)) ** k for k in range(1, n + 1))) ** 2
                  for lam, w in zip(d.eigenvalues, d.weights))
        assert S.markov_condfn_norm(d, 1.3, n) == pytest.approx(ref, rel=1e-10, abs=1e-14)


def test_markov_condfn_bound_random_chains(rng):
    for _ in range(5):
        d = S.markov_eigen(random_reversible_chain(rng, 4))
        for theta in (0.3, 1.0, 2.0, 2.8):
            bound = 4 * d.c0 / (1 - math.cos(theta) ** 2)
            assert all(S.markov_condfn_norm(d, theta, n) <= bound for n in (1, 2, 10, 100, 4096))


# -- identities -------------------------------------------------------------------

MODELS = [
    ("white", S.spectral_model(sim.iid_gauss())),
    ("ma1", S.spectral_model(sim.ma1())),
    ("ma3", S.spectral_model(sim.LinearSpec([1.0, -0.6, 0.3, 0.25]))),
    ("two_state", S.spectral_model(sim.two_state(0.25))),
    ("chain5", S.spectral_model(random_reversible_chain(np.random.default_rng(8), 5))),
]


@pytest.mark.parametrize("label,model", MODELS)
def test_fourier_coefficients_are_covariances(label, model):
    covs = model.autocov(5)
    for j in range(6):
        assert abs(S.fourier_coefficient(model.g, j) - covs[j]) <= 1e-6
    integral, _ = S.integrate_g(model.g)
    assert integral == pytest.approx(2 * math.pi * model.c0, rel=1e-6)


@pytest.mark.parametrize("label,model", MODELS)
def test_density_symmetric_and_nonnegative(label, model):
    th = np.linspace(0, 2 * math.pi, 501)
    g = np.asarray(model.g(th))
    np.testing.assert_allclose(model.g(2 * math.pi - th), g, atol=1e-10)
    assert np.all(g >= 0)


@pytest.mark.parametrize("label,model", MODELS[1:])
@pytest.mark.parametrize("theta", [1.0, 2.0])
def test_regularity_half_rule(label, model, theta):
    v16 = model.condfn_norm(theta, 16) / 16
    v1024 = model.condfn_norm(theta, 1024) / 1024
    assert v1024 <= 0.5 * v16


def test_model_cesaro_tends_to_g():
    for _, model in MODELS:
        assert model.cesaro_variance(4096, 2.0) == pytest.approx(float(model.g(2.0)), abs=2e-3)


def test_integrate_g_excludes_pole():
    model = S.spectral_model(sim.slow_decay(2000))
    with pytest.warns(UserWarning, match="excluded"):
        integral, width = S.integrate_g(model.g, exclude_radius=1e-3 * 4)
    assert width == pytest.approx(8e-3)
    assert integral > 0


def test_gaussian_functional_has_no_model():
    assert S.spectral_model(sim.GaussianFunctionalSpec(0.5)) is None
