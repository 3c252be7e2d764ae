import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from betacurv.curvature import (
    BudgetExceeded,
    CurvatureParams,
    curvature_exact,
    curvature_mc,
    curvature_via_e,
    e_integrand,
    k_integrand,
    m_p_functional,
)
from betacurv.geometry import kappa_height_ratio_bound
from betacurv.measure import InputError, PointCloudMeasure, similarity_transform
from betacurv.synth import flat_plane_grid, segment, triangle

from conftest import measures, rotations


def _brute_integrand(pts, p, alpha, m):
    """h_min^p / diam^(m(m+1)+(1+alpha)p) with heights from least-squares projections."""
    pts = np.asarray(pts, dtype=float)
    d = max(np.linalg.norm(a - b) for a, b in itertools.combinations(pts, 2))
    if d == 0:
        return 0.0
    edges = pts[1:] - pts[0]
    if np.linalg.matrix_rank(edges, tol=1e-9 * d) < m + 1:
        return 0.0
    hs = []
    for j in range(len(pts)):
        others = np.delete(pts, j, axis=0)
        A = (others[1:] - others[0]).T
        c, *_ = np.linalg.lstsq(A, pts[j] - others[0], rcond=None)
        hs.append(np.linalg.norm(A @ c - (pts[j] - others[0])))
    return min(hs) ** p / d ** (m * (m + 1) + (1 + alpha) * p)


def _brute_curvature(mu, x, cp):
    """Sum over all ordered (m+1)-tuples with repetition, no shortcuts."""
    inside = [i for i in range(len(mu)) if np.linalg.norm(mu.positions[i] - x) <= cp.R]
    total = []
    for idx in itertools.product(inside, repeat=cp.m + 1):
        pts = np.vstack([x, mu.positions[list(idx)]])
        total.append(np.prod(mu.weights[list(idx)]) * _brute_integrand(pts, cp.p, cp.alpha, cp.m))
    return math.fsum(total)


def test_integrand_examples():
    cp = CurvatureParams(1, 2.0, 0.0)
    assert k_integrand([[0, 0], [1, 0], [0.5, 0.5]], cp) == pytest.approx(0.25, rel=1e-14)
    assert k_integrand([[0, 0], [1, 0], [1, 0]], cp) == 0
    assert k_integrand([[0, 0], [1, 1], [2, 2]], cp) == 0
    with pytest.raises(InputError):
        k_integrand([[0, 0], [1, 0]], cp)


def test_curvature_examples():
    cp = CurvatureParams(1, 2.0, 0.0, math.inf)
    est = curvature_exact(triangle(), np.zeros(2), cp)
    assert est.value == pytest.approx(0.5, abs=1e-12)
    assert est.stderr == 0 and est.method == "exact"
    assert curvature_exact(segment(1.0, 7), np.zeros(2), cp).value == 0
    grid = flat_plane_grid(1.0, 3)
    assert curvature_exact(grid, grid.positions[0], CurvatureParams(2)).value == 0
    lonely = PointCloudMeasure.from_points([[0, 0], [5, 5]])
    assert curvature_exact(lonely, np.zeros(2), CurvatureParams(1, R=1.0)).value == 0


def test_e_integrand_example():
    cp = CurvatureParams(1)
    assert e_integrand(triangle(), np.zeros(2), np.array([1.0, 0.0]), cp) == pytest.approx(0.25, rel=1e-14)
    line = segment(1.0, 5)
    assert e_integrand(line, np.zeros(2), np.array([10.0, 0.0]), cp) == 0


@given(measures(n=2, max_atoms=5), st.sampled_from([0.0, 0.5, 1.0]), st.sampled_from([1.0, 2.0]), st.sampled_from([3.0, math.inf]))
def test_exact_matches_brute_force(mu, alpha, p, R):
    cp = CurvatureParams(1, p, alpha, R)
    x = mu.positions[0]
    got = curvature_exact(mu, x, cp).value
    assert got == pytest.approx(_brute_curvature(mu, x, cp), rel=1e-7, abs=1e-300)


def test_exact_matches_brute_force_m2():
    g = np.random.default_rng(11)
    mu = PointCloudMeasure(g.uniform(0, 1, (5, 3)), 2 * (1 - g.random(5)))
    cp = CurvatureParams(2, 2.0, 0.5)
    for x in mu.positions[:2]:
        assert curvature_exact(mu, x, cp).value == pytest.approx(_brute_curvature(mu, x, cp), rel=1e-9)


@pytest.mark.parametrize("n, m", [(2, 1), (3, 1), (3, 2)])
def test_identity_on_generic_clouds(n, m):
    g = np.random.default_rng(n * 10 + m)
    for _ in range(3):
        mu = PointCloudMeasure(g.uniform(0, 1, (7, n)), 2 * (1 - g.random(7)))
        x = mu.positions[2]
        for R in (0.6, math.inf):
            cp = CurvatureParams(m, 2.0, 0.5, R)
            assert curvature_exact(mu, x, cp).value == pytest.approx(curvature_via_e(mu, x, cp), rel=1e-12)


def test_identity_with_ties_is_upper_bound():
    # two atoms equidistant from x: each sees the other in its E-region
    mu = PointCloudMeasure.from_points([[0, 0], [1, 0], [0, 1]])
    cp = CurvatureParams(1)
    exact = curvature_exact(mu, np.zeros(2), cp).value
    assert curvature_via_e(mu, np.zeros(2), cp) >= exact * (1 - 1e-12)


def test_mc_agrees_and_is_deterministic():
    cp = CurvatureParams(1)
    a = curvature_mc(triangle(), np.zeros(2), cp, 10**5, seed=3)
    b = curvature_mc(triangle(), np.zeros(2), cp, 10**5, seed=3)
    assert a == b
    assert abs(a.value - 0.5) <= 4 * a.stderr
    assert a.method == "monte_carlo" and a.terms_or_samples == 10**5
    flat = curvature_mc(segment(1.0, 9), np.zeros(2), cp, 1000, seed=0)
    assert flat.value == 0 and flat.stderr == 0


def test_m_p_examples():
    eq = PointCloudMeasure.from_points([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2]])
    assert m_p_functional(eq, 2.0, 1) == pytest.approx(9 / 8, rel=1e-12)
    assert m_p_functional(segment(1.0, 6), 2.0, 1) == 0
    assert m_p_functional(PointCloudMeasure.from_points([[0, 0]]), 2.0, 1) == 0


def test_budget_refusal():
    mu = segment(1.0, 40)
    with pytest.raises(BudgetExceeded, match="curvature_mc"):
        curvature_exact(mu, np.zeros(2), CurvatureParams(1), budget=100)
    with pytest.raises(BudgetExceeded):
        m_p_functional(mu, 2.0, 1, budget=100)


@given(measures(max_atoms=5), st.floats(0.25, 4), st.sampled_from([0.0, 0.5, 1.0]), st.data())
def test_similarity_scaling(mu, lam, alpha, data):
    n = mu.ambient_dim
    m = data.draw(st.integers(1, n - 1))
    R = data.draw(rotations(n))
    x = mu.positions[0]
    moved = similarity_transform(mu, lam, R, np.full(n, 0.5), weight_exponent=float(m))
    a = curvature_exact(mu, x, CurvatureParams(m, 2.0, alpha)).value
    b = curvature_exact(moved, lam * R @ x + 0.5, CurvatureParams(m, 2.0, alpha)).value
    assert b == pytest.approx(lam ** (-2 * alpha) * a, rel=1e-8, abs=1e-300)


def test_params_validation():
    for bad in ({"m": 0}, {"m": 1, "p": 0.5}, {"m": 1, "alpha": 2.0}, {"m": 1, "R": 0.0}):
        with pytest.raises(InputError):
            CurvatureParams(**bad)


@given(measures(max_atoms=6), st.floats(0.1, 5), st.floats(1.0, 4.0))
def test_monotone_in_radius(mu, R, factor):
    x = mu.positions[0]
    small = curvature_exact(mu, x, CurvatureParams(1, 2.0, 0.5, R)).value
    big = curvature_exact(mu, x, CurvatureParams(1, 2.0, 0.5, R * factor)).value
    assert big >= small


@pytest.mark.parametrize("m, n, p", [(1, 2, 2.0), (1, 3, 3.0), (2, 3, 6.0)])
def test_global_functional_chain(m, n, p):
    """M_p <= (1/(m+1)!)^p * sum_x w(x) K(x, inf) with alpha = 1 - m(m+1)/p."""
    g = np.random.default_rng(m * 7 + n)
    alpha = 1 - m * (m + 1) / p
    for _ in range(4):
        mu = PointCloudMeasure(g.uniform(0, 1, (6, n)), 2 * (1 - g.random(6)))
        total_K = math.fsum(w * curvature_exact(mu, x, CurvatureParams(m, p, alpha)).value
                            for x, w in zip(mu.positions, mu.weights))
        mp = m_p_functional(mu, p, m)
        bound = kappa_height_ratio_bound(m) ** p
        assert mp <= bound * total_K * (1 + 1e-12)
        if m == 1:
            # kappa * diam / h_min is exactly 1/2 for every triangle
            assert mp == pytest.approx(bound * total_K, rel=1e-10)
