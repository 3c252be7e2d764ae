import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from betacurv.measure import (
    Ball,
    CubeRegion,
    DyadicCube,
    InputError,
    PointCloudMeasure,
    ball_restrict,
    cube_restrict,
    dump_csv,
    dyadic_cubes_touching,
    expand_cube,
    load_csv,
    similarity_transform,
    theta_ball,
    theta_cube,
    unit_ball_volume,
)
from betacurv.synth import add_noise, circle, segment, synthesize

from conftest import measures, rotations


def test_load_csv_default_weights():
    mu = load_csv("x0,x1\n0,0\n1,0")
    assert len(mu) == 2 and mu.ambient_dim == 2
    assert mu.weights.tolist() == [1.0, 1.0]


def test_load_csv_explicit_weight():
    mu = load_csv("x0,x1,w\n0,0,2.5")
    assert mu.weights.tolist() == [2.5]


@pytest.mark.parametrize(
    "text, row",
    [
        ("x0,x1,w\n0,0,-1", 2),
        ("x0,x1\n0,0\n1,nan", 3),
        ("x0,x1\n0,0\n1", 3),
        ("x0,x1\n0,abc", 2),
    ],
)
def test_load_csv_errors_carry_row(text, row):
    with pytest.raises(InputError, match=f"row {row}"):
        load_csv(text)


def test_load_csv_rejects_bad_header():
    with pytest.raises(InputError):
        load_csv("a,b\n0,0")


@given(measures())
def test_csv_round_trip(mu):
    back = load_csv(io.StringIO(dump_csv(mu)))
    np.testing.assert_array_equal(back.positions, mu.positions)
    np.testing.assert_array_equal(back.weights, mu.weights)


def test_measure_validation():
    with pytest.raises(InputError):
        PointCloudMeasure([[0, 0]], [-1.0])
    with pytest.raises(InputError):
        PointCloudMeasure([[0, np.inf]], [1.0])
    with pytest.raises(InputError):
        PointCloudMeasure([[0, 0], [1, 1]], [1.0])


def test_ball_restrict_examples():
    mu = PointCloudMeasure.from_points([[0, 0], [3, 0]])
    assert len(ball_restrict(mu, Ball(np.zeros(2), 1.0))) == 1
    # closed ball: the boundary atom counts
    mu = PointCloudMeasure.from_points([[0, 0], [1, 0]])
    assert len(ball_restrict(mu, Ball(np.zeros(2), 1.0))) == 2
    assert len(ball_restrict(PointCloudMeasure.empty(2), Ball(np.zeros(2), 1.0))) == 0


def test_ball_mask_tree_matches_brute_force():
    g = np.random.default_rng(5)
    mu = PointCloudMeasure(g.uniform(0, 1, (600, 3)), np.ones(600))
    for _ in range(20):
        x, r = g.uniform(0, 1, 3), g.uniform(0.01, 0.8)
        brute = np.sqrt(np.sum((mu.positions - x) ** 2, axis=1)) <= r
        np.testing.assert_array_equal(mu.ball_mask(x, r), brute)
    # an atom exactly on the sphere stays inside
    y = mu.positions[7]
    x = y + np.array([0.25, 0.0, 0.0])
    assert mu.ball_mask(x, 0.25)[7]


def test_theta_examples():
    mu = PointCloudMeasure.from_points([[0, 0], [0.5, 0], [1, 0]])
    assert theta_ball(mu, np.zeros(2), 1.0, 1) == pytest.approx(1.5)
    one = PointCloudMeasure.from_points([[0, 0, 0]])
    assert theta_ball(one, np.zeros(3), 1.0, 2) == pytest.approx(1 / math.pi)
    assert theta_ball(mu, np.array([10.0, 10.0]), 1.0, 1) == 0.0
    assert unit_ball_volume(1) == 2 and unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_cube_membership_is_half_open():
    q = DyadicCube(0, (0, 0))
    mu = PointCloudMeasure([[0.2, 0.3], [0.7, 0.1]], [1.0, 1.0])
    assert theta_cube(mu, q, 1) == 2
    edge = PointCloudMeasure.from_points([[1.0, 0.5], [0.0, 0.5]])
    assert q.contains(edge.positions).tolist() == [False, True]
    assert theta_cube(PointCloudMeasure.empty(2), q, 1) == 0


def test_dyadic_cubes_touching():
    mu = PointCloudMeasure.from_points([[0.25, 0.25], [0.75, 0.75]])
    assert len(dyadic_cubes_touching(mu, 1)) == 2
    assert len(dyadic_cubes_touching(mu, 0)) == 1
    assert dyadic_cubes_touching(PointCloudMeasure.empty(2), 0) == []
    neg = dyadic_cubes_touching(PointCloudMeasure.from_points([[-0.5, 3.2]]), -1)
    assert neg[0].corner == (-1, 1) and neg[0].side == 2.0


@given(measures(), st.integers(-3, 3))
def test_dyadic_cubes_partition_mass(mu, k):
    cubes = dyadic_cubes_touching(mu, k)
    assert math.fsum(mu.cube_mass(q) for q in cubes) == pytest.approx(mu.total_mass, rel=1e-12)


def test_expand_cube():
    q = DyadicCube(0, (0, 0, 0))
    big = expand_cube(q, 3)
    assert big.side == 3
    np.testing.assert_allclose(big.center, [0.5, 0.5, 0.5])
    same = expand_cube(q, 1)
    assert same.side == 1 and np.all(same.lower == 0)
    y = np.array([[0.5 + 1.4, 0.5, 0.5]])
    assert big.contains(y)[0] and not q.contains(y)[0]


def test_cube_restrict_region():
    mu = PointCloudMeasure.from_points([[0, 0], [2, 2]])
    assert len(cube_restrict(mu, CubeRegion(np.zeros(2), 1.0))) == 1


def test_generators():
    c = circle(1.0, 100)
    assert len(c) == 100 and np.allclose(np.linalg.norm(c.positions, axis=1), 1)
    s = segment(1.0, 50)
    assert np.all(s.positions[:, 1] == 0)
    np.testing.assert_array_equal(
        synthesize("noisy", {"base": "circle", "amplitude": 0}).positions, c.positions
    )
    a = synthesize("random", {"atoms": 9}, seed=4)
    b = synthesize("random", {"atoms": 9}, seed=4)
    np.testing.assert_array_equal(a.positions, b.positions)
    moved = add_noise(c, 0.1, seed=2)
    assert np.max(np.linalg.norm(moved.positions - c.positions, axis=1)) <= 0.1 + 1e-15
    with pytest.raises(InputError):
        synthesize("nope")


def test_similarity_identity():
    mu = synthesize("random", {"atoms": 6, "n": 3}, seed=1)
    same = similarity_transform(mu, 1.0, np.eye(3), np.zeros(3), 0.0)
    np.testing.assert_array_equal(same.positions, mu.positions)
    np.testing.assert_array_equal(same.weights, mu.weights)
    with pytest.raises(InputError):
        similarity_transform(mu, 1.0, 2 * np.eye(3))


@given(measures(n=2), rotations(2), st.floats(0.1, 5), st.floats(0.1, 3))
def test_theta_similarity_invariant(mu, R, lam, r):
    x = mu.positions[0]
    t = np.array([0.3, -1.2])
    moved = similarity_transform(mu, lam, R, t, weight_exponent=1.0)
    a = theta_ball(mu, x, r, 1)
    b = theta_ball(moved, lam * R @ x + t, lam * r, 1)
    # atoms near the sphere can flip sides under rounding; skip those draws
    d = np.linalg.norm(mu.positions - x, axis=1)
    if np.all(np.abs(d - r) > 1e-9 * max(r, 1)):
        assert b == pytest.approx(a, rel=1e-10)


@given(measures(max_atoms=10), st.integers(-2, 2), st.data())
def test_cube_restrict_matches_scan(mu, k, data):
    n = mu.ambient_dim
    corner = tuple(data.draw(st.lists(st.integers(-25, 25), min_size=n, max_size=n)))
    q = DyadicCube(k, corner)
    side = 2.0**-k
    lo = np.array(corner) * side
    scan = [i for i, y in enumerate(mu.positions) if all(lo[j] <= y[j] < lo[j] + side for j in range(n))]
    sub = cube_restrict(mu, q)
    np.testing.assert_array_equal(sub.positions, mu.positions[scan].reshape(-1, n))


@given(measures(max_atoms=10), st.integers(-3, 3))
def test_cubes_cover_atoms_once(mu, k):
    cubes = dyadic_cubes_touching(mu, k)
    hits = sum(q.contains(mu.positions).astype(int) for q in cubes)
    assert np.all(hits == 1)


@given(measures(), st.floats(0.05, 10), st.floats(0.5, 1.0), st.integers(1, 2))
def test_density_ratio_bound(mu, s, frac, m):
    x = mu.positions[-1]
    t = frac * s
    assert theta_ball(mu, x, t, m) <= (s / t) ** m * theta_ball(mu, x, s, m) * (1 + 1e-12)
