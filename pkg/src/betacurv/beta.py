"""Jones beta numbers of atomic measures on balls and cubes.

For p = 2 the infimum over m-planes is a weighted PCA problem and is solved
exactly from the singular values of the weighted, centred data matrix. For
other p an iteratively reweighted fit gives an upper bound, flagged inexact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import AffinePlane, RANK_RTOL, dist_to_plane
from .measure import (
    CubeRegion,
    DyadicCube,
    InputError,
    PointCloudMeasure,
    cube_restrict,
    distances,
    unit_ball_volume,
)

IRLS_EPS = 1e-12
IRLS_RTOL = 1e-10
IRLS_MAX_ITER = 200


@dataclass(frozen=True)
class BetaParams:
    m: int
    p: float = 2.0
    centred: bool = False

    def __post_init__(self):
        if self.m < 1:
            raise InputError(f"m must be a positive integer, got {self.m}")
        if not (1 <= self.p < math.inf):
            raise InputError(f"p must lie in [1, inf), got {self.p}")

    @property
    def exact(self) -> bool:
        return self.p == 2


def _pca_plane(points, weights, m, through=None):
    """Best m-plane in the weighted L2 sense, and its residual sum of w*dist^2."""
    n = points.shape[1]
    if through is None:
        W = math.fsum(weights)
        base = (weights @ points) / W if W > 0 else points[0]
    else:
        base = np.asarray(through, dtype=float)
    A = np.sqrt(weights)[:, None] * (points - base)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    if s.size and s[0] > 0:
        s = np.where(s > RANK_RTOL * s[0], s, 0.0)
    residual = math.fsum(s[m:] ** 2)
    return AffinePlane(base, vt[:m]) if vt.shape[0] >= m else _axis_plane(base, m, n), residual


def _axis_plane(base, m, n):
    return AffinePlane(base, np.eye(n)[:m])


def best_plane_l2(mu: PointCloudMeasure, m: int, through=None) -> tuple[AffinePlane, float]:
    """Minimise sum w * dist(y, L)^2 over m-planes L (optionally through a point).

    Without a constraint the optimum passes through the weighted centroid and
    is spanned by the top-m principal directions; with ``through = x`` the same
    construction is applied to the second-moment matrix about x.
    """
    if len(mu) == 0:
        raise InputError("best_plane_l2 of an empty measure")
    if not 0 < m < mu.ambient_dim:
        raise InputError(f"need 0 < m < n, got m={m}, n={mu.ambient_dim}")
    return _pca_plane(mu.positions, mu.weights, m, through)


def _lp_cost(points, weights, plane, p):
    return math.fsum(weights * dist_to_plane(points, plane) ** p)


def best_plane_lp(mu: PointCloudMeasure, m: int, p: float, through=None) -> tuple[AffinePlane, float]:
    """IRLS fit of an m-plane minimising sum w * dist^p.

    Starts from the L2 plane and reweights by max(dist, eps)^(p-2). The
    returned cost is attained by the returned plane, so it is an upper bound
    on the infimum.
    """
    plane, _ = best_plane_l2(mu, m, through)
    pts, w = mu.positions, mu.weights
    best_plane, best = plane, _lp_cost(pts, w, plane, p)
    if p == 2:
        return plane, best
    prev = best
    for _ in range(IRLS_MAX_ITER):
        d = np.maximum(dist_to_plane(pts, plane), IRLS_EPS)
        plane, _ = _pca_plane(pts, w * d ** (p - 2), m, through)
        cost = _lp_cost(pts, w, plane, p)
        if cost < best:
            best_plane, best = plane, cost
        if abs(prev - cost) <= IRLS_RTOL * max(prev, 1e-300):
            break
        prev = cost
    return best_plane, best


def _normalise(total: float, scale: float, m: int, p: float) -> float:
    return (total / scale**m) ** (1.0 / p) / scale


def beta_given_plane(mu: PointCloudMeasure, x, r: float, L: AffinePlane, params: BetaParams) -> float:
    """(1/r) * (r^-m * integral over the closed ball of dist(y, L)^p)^(1/p)."""
    if not r > 0:
        raise InputError(f"radius must be positive, got {r}")
    if L.dim != params.m:
        raise InputError(f"plane has dimension {L.dim}, expected {params.m}")
    mask = mu.ball_mask(x, r)
    if not mask.any():
        return 0.0
    return _normalise(_lp_cost(mu.positions[mask], mu.weights[mask], L, params.p), r, params.m, params.p)


def beta_cube_given_plane(mu: PointCloudMeasure, q: DyadicCube | CubeRegion, L: AffinePlane, params: BetaParams) -> float:
    if L.dim != params.m:
        raise InputError(f"plane has dimension {L.dim}, expected {params.m}")
    sub = cube_restrict(mu, q)
    if len(sub) == 0:
        return 0.0
    return _normalise(_lp_cost(sub.positions, sub.weights, L, params.p), q.side, params.m, params.p)


def _ball_numerator(points, weights, x, params: BetaParams) -> tuple[AffinePlane | None, float]:
    if points.shape[0] == 0:
        return None, 0.0
    sub = PointCloudMeasure(points, weights)
    through = x if params.centred else None
    if params.exact:
        return best_plane_l2(sub, params.m, through)
    return best_plane_lp(sub, params.m, params.p, through)


def beta_ball(mu: PointCloudMeasure, x, r: float, params: BetaParams) -> tuple[float, bool]:
    """beta_{mu,p}(x, r), or the centred variant; returns (value, exact)."""
    if not r > 0:
        raise InputError(f"radius must be positive, got {r}")
    x = np.asarray(x, dtype=float)
    mask = mu.ball_mask(x, r)
    _, numer = _ball_numerator(mu.positions[mask], mu.weights[mask], x, params)
    return _normalise(numer, r, params.m, params.p), params.exact


def beta_cube(mu: PointCloudMeasure, q: DyadicCube | CubeRegion, params: BetaParams):
    """beta_{mu,p}(Q) with its minimising plane; returns (value, exact, plane).

    The plane of an empty cube is the coordinate m-plane through its centre.
    ``params.centred`` is ignored: cube betas are never centred.
    """
    sub = cube_restrict(mu, q)
    if len(sub) == 0:
        return 0.0, params.exact, _axis_plane(q.center, params.m, mu.ambient_dim)
    if params.exact:
        plane, numer = best_plane_l2(sub, params.m)
    else:
        plane, numer = best_plane_lp(sub, params.m, params.p)
    return _normalise(numer, q.side, params.m, params.p), params.exact, plane


@dataclass(frozen=True)
class ScaleProfile:
    """Ball mass and best-plane residual of a fixed centre, piecewise in r.

    On interval i, ``[lo[i], hi[i])``, the closed ball B(x, r) holds
    ``mass[i]`` and ``numer[i] = inf_L sum w * dist(y, L)^p`` over it, so
    theta(r) = mass / (omega_m r^m) and beta(r)^p = numer * r^-(p+m).
    The first interval starts at 0; the last ends at ``rho`` (possibly inf).
    """

    center: np.ndarray
    rho: float
    params: BetaParams
    breakpoints: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    mass: np.ndarray
    numer: np.ndarray
    exact: np.ndarray = field(repr=False)

    def locate(self, r) -> np.ndarray:
        return np.searchsorted(self.lo, r, side="right") - 1

    def theta(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.mass[self.locate(r)] / (unit_ball_volume(self.params.m) * r**self.params.m)

    def beta_p(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return self.numer[self.locate(r)] * r ** (-self.params.p - self.params.m)

    def rows(self):
        for lo, hi, mass, numer in zip(self.lo, self.hi, self.mass, self.numer):
            yield float(lo), float(hi), float(mass), float(numer)


def scale_profile(mu: PointCloudMeasure, x, rho: float, params: BetaParams) -> ScaleProfile:
    if not rho > 0:
        raise InputError(f"rho must be positive, got {rho}")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != mu.ambient_dim:
        raise InputError("centre dimension does not match the measure")
    d = distances(mu.positions, x)
    order = np.argsort(d, kind="stable")
    d_sorted, w_sorted, p_sorted = d[order], mu.weights[order], mu.positions[order]
    bps = np.unique(d_sorted[(d_sorted > 0) & (d_sorted <= rho)])
    lo = np.concatenate([[0.0], bps])
    hi = np.concatenate([bps, [rho]])
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    mass, numer = [], []
    for a in lo:
        end = int(np.searchsorted(d_sorted, a, side="right"))
        mass.append(math.fsum(w_sorted[:end]))
        _, c = _ball_numerator(p_sorted[:end], w_sorted[:end], x, params)
        numer.append(c)
    exact = np.full(lo.shape[0], params.exact)
    return ScaleProfile(x, float(rho), params, bps, lo, hi, np.array(mass), np.array(numer), exact)
