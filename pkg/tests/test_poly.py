import numpy as np
import pytest

from socptilt.poly import Polynomial, quadratic


def random_poly(rng, n, max_deg=4, n_terms=8):
    terms = []
    for _ in range(n_terms):
        e = [0] * n
        for _ in range(rng.integers(0, max_deg + 1)):
            e[rng.integers(0, n)] += 1
        terms.append((float(rng.standard_normal()), tuple(e)))
    return Polynomial.from_terms(terms, n)


def central_diff_gradient(p, x, h=1e-5):
    g = np.zeros(p.n)
    for i in range(p.n):
        e = np.zeros(p.n)
        e[i] = h
        g[i] = (p.value(x + e) - p.value(x - e)) / (2 * h)
    return g


def central_diff_hessian(p, x, h=1e-5):
    H = np.zeros((p.n, p.n))
    for i in range(p.n):
        for j in range(p.n):
            ei = np.zeros(p.n); ei[i] = h
            ej = np.zeros(p.n); ej[j] = h
            H[i, j] = (p.value(x + ei + ej) - p.value(x + ei - ej)
                       - p.value(x - ei + ej) + p.value(x - ei - ej)) / (4 * h * h)
    return H


def test_derivatives_match_central_differences(rng):
    for _ in range(60):
        n = int(rng.integers(1, 5))
        p = random_poly(rng, n)
        x = rng.uniform(-1, 1, size=n)
        g = p.gradient(x)
        g_fd = central_diff_gradient(p, x)
        assert np.allclose(g, g_fd, rtol=1e-6, atol=1e-6)
        H = p.hessian(x)
        H_fd = central_diff_hessian(p, x)
        assert np.allclose(H, H_fd, rtol=1e-4, atol=1e-4)


def test_hessian_exactly_symmetric(rng):
    for _ in range(40):
        p = random_poly(rng, 3)
        H = p.hessian(rng.standard_normal(3))
        assert np.array_equal(H, H.T)


def test_constant_polynomial():
    p = Polynomial.from_terms([(2.5, (0, 0))], 2)
    assert p.value(np.zeros(2)) == 2.5
    assert np.array_equal(p.gradient(np.ones(2)), np.zeros(2))
    assert np.array_equal(p.hessian(np.ones(2)), np.zeros((2, 2)))
    assert p.degree == 0


def test_canonicalization_merges_duplicates():
    p = Polynomial.from_terms([(1.0, (1, 0)), (2.0, (1, 0)), (0.0, (0, 1))], 2)
    assert p.terms == ((3.0, (1, 0)),)


def test_zero_coefficients_dropped():
    p = Polynomial.from_terms([(1.0, (2, 0)), (-1.0, (2, 0))], 2)
    assert p.terms == ()
    assert p.degree == 0


def test_rejects_bad_terms():
    with pytest.raises(ValueError):
        Polynomial.from_terms([(np.inf, (0,))], 1)
    with pytest.raises(ValueError):
        Polynomial.from_terms([(1.0, (-1,))], 1)
    with pytest.raises(ValueError):
        Polynomial.from_terms([(1.0, (1, 0))], 1)


def test_batch_value_matches_pointwise(rng):
    p = random_poly(rng, 3)
    X = rng.standard_normal((50, 3))
    vals = p.value(X)
    for x, v in zip(X, vals):
        assert abs(p.value(x) - v) <= 1e-12 * (1 + abs(v))


def test_quadratic_builder():
    Q = np.array([[2.0, 1.0], [1.0, 4.0]])
    p = quadratic(2, Q=Q, lin=[1.0, -1.0], const=0.5)
    x = np.array([0.3, -0.7])
    expected = 0.5 * x @ Q @ x + np.array([1.0, -1.0]) @ x + 0.5
    assert abs(p.value(x) - expected) <= 1e-14
    assert np.allclose(p.hessian(x), Q)


def test_dict_round_trip(rng):
    p = random_poly(rng, 3)
    q = Polynomial.from_dict(p.to_dict(), 3)
    assert p == q
