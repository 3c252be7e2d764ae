"""Affine planes and simplex functionals: hulls, heights, volumes, curvatures.

Most functions come in a scalar form and a batched form working on arrays of
shape ``(B, k, n)`` (B tuples of k points in R^n); the curvature enumerators
use the batched forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measure import InputError

RANK_RTOL = 1e-10


def _rank_tol(smax):
    return RANK_RTOL * (smax + 1.0)


@dataclass(frozen=True)
class AffinePlane:
    """``base + span(basis)`` with orthonormal rows in ``basis`` (shape ``(d, n)``)."""

    base: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float).reshape(-1)
        basis = np.asarray(self.basis, dtype=float).reshape(-1, base.shape[0])
        if basis.shape[0] and np.max(np.abs(basis @ basis.T - np.eye(basis.shape[0]))) > 1e-12:
            raise InputError("plane basis must be orthonormal")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.base.shape[0]

    @classmethod
    def through(cls, base, directions) -> AffinePlane:
        """Plane through ``base`` spanned by (not necessarily orthonormal) directions."""
        d = np.atleast_2d(np.asarray(directions, dtype=float))
        q, _ = np.linalg.qr(d.T)
        return cls(base, q.T[: d.shape[0]])


def dist_to_plane(y, plane: AffinePlane):
    """Euclidean distance from ``y`` (a point or an ``(N, n)`` array) to ``plane``."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != plane.ambient_dim:
        raise InputError("point and plane dimensions differ")
    v = y - plane.base
    if plane.dim:
        v = v - (v @ plane.basis.T) @ plane.basis
    out = np.sqrt(np.sum(v * v, axis=-1))
    return float(out) if out.ndim == 0 else out


def affine_hull(points) -> AffinePlane:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        raise InputError("affine hull of an empty set")
    base = pts[0]
    diffs = pts[1:] - base
    if diffs.shape[0] == 0:
        return AffinePlane(base, np.zeros((0, pts.shape[1])))
    _, s, vt = np.linalg.svd(diffs, full_matrices=False)
    rank = int(np.sum(s > _rank_tol(s[0])))
    return AffinePlane(base, vt[:rank])


def diam(points) -> float:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return float(diam_batch(pts[None])[0])


def diam_batch(tuples: np.ndarray) -> np.ndarray:
    k = tuples.shape[1]
    best = np.zeros(tuples.shape[0])
    for i in range(k):
        for j in range(i + 1, k):
            d = np.sqrt(np.sum((tuples[:, i] - tuples[:, j]) ** 2, axis=-1))
            np.maximum(best, d, out=best)
    return best


def _edge_svals(tuples: np.ndarray):
    """Singular values of the edge matrices and a full-rank mask."""
    edges = tuples[:, 1:] - tuples[:, :1]
    k = edges.shape[1]
    s = np.linalg.svd(edges, compute_uv=False)
    if k > tuples.shape[2]:
        return s, np.zeros(tuples.shape[0], dtype=bool)
    return s, s[:, -1] > _rank_tol(s[:, 0])


def simplex_volume_batch(tuples: np.ndarray) -> np.ndarray:
    """k-dimensional volume of the simplices on k+1 vertices; 0 if degenerate."""
    k = tuples.shape[1] - 1
    if k == 0:
        return np.ones(tuples.shape[0])
    s, nondeg = _edge_svals(tuples)
    if k > tuples.shape[2]:
        return np.zeros(tuples.shape[0])
    return np.where(nondeg, np.prod(s, axis=1), 0.0) / math.factorial(k)


def simplex_measure(points) -> float:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] - 1 > pts.shape[1]:
        return 0.0
    return float(simplex_volume_batch(pts[None])[0])


def h_min_batch(tuples: np.ndarray) -> np.ndarray:
    """Smallest height of each simplex in ``tuples`` (shape ``(B, m+2, n)``).

    A height is the distance from a vertex to the affine hull of the others.
    Degenerate simplices (rank below m+1 at the hull tolerance) get 0. For the
    rest, height_j^2 = det Gram(all edges) / det Gram(edges of facet j).
    """
    B, k, n = tuples.shape
    out = np.zeros(B)
    if k - 1 > n or B == 0:
        return out
    s, nondeg = _edge_svals(tuples)
    if not np.any(nondeg):
        return out
    X = tuples[nondeg]
    vol2 = np.prod(s[nondeg] ** 2, axis=1)
    best = np.full(X.shape[0], np.inf)
    for j in range(k):
        facet = np.delete(X, j, axis=1)
        fe = facet[:, 1:] - facet[:, :1]
        gram = fe @ np.swapaxes(fe, 1, 2)
        g = np.linalg.det(gram) if gram.shape[1] else np.ones(X.shape[0])
        np.minimum(best, np.sqrt(vol2 / g), out=best)
    out[nondeg] = best
    return out


def h_min(points, m: int | None = None) -> float:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if m is not None and pts.shape[0] != m + 2:
        raise InputError(f"h_min needs m+2 = {m + 2} points, got {pts.shape[0]}")
    return float(h_min_batch(pts[None])[0])


def menger_c_batch(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    tri = np.stack([x, y, z], axis=1)
    area = simplex_volume_batch(tri)
    a = np.linalg.norm(x - y, axis=-1)
    b = np.linalg.norm(y - z, axis=-1)
    c = np.linalg.norm(z - x, axis=-1)
    den = a * b * c
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where((den > 0) & (area > 0), 4 * area / den, 0.0)


def menger_c(x, y, z) -> float:
    """Menger curvature 4 * area / (product of side lengths), 0 if degenerate."""
    x, y, z = (np.asarray(v, dtype=float).reshape(1, -1) for v in (x, y, z))
    return float(menger_c_batch(x, y, z)[0])


def kappa_batch(tuples: np.ndarray) -> np.ndarray:
    k = tuples.shape[1] - 1
    d = diam_batch(tuples)
    vol = simplex_volume_batch(tuples)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(d > 0, vol / d**k, 0.0)


def kappa(points, m: int | None = None) -> float:
    """Simplex volume over diam^(m+1)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if m is not None and pts.shape[0] != m + 2:
        raise InputError(f"kappa needs m+2 = {m + 2} points, got {pts.shape[0]}")
    return float(kappa_batch(pts[None])[0])


def kappa_height_ratio_bound(m: int) -> float:
    """Upper bound 1/(m+1)! on kappa * diam / h_min.

    volume = h_min * facet / (m+1) and facet <= diam^m / m! (Hadamard).
    Equality holds for every nondegenerate triangle (m = 1).
    """
    return 1.0 / math.factorial(m + 1)


def estimate_kappa_constant(m: int, n: int, samples: int = 100, seed: int = 0) -> float:
    """Empirical max of kappa * diam / h_min over random Gaussian (m+2)-tuples."""
    g = np.random.default_rng(seed)
    t = g.standard_normal((samples, m + 2, n))
    h = h_min_batch(t)
    ok = h > 0
    r = kappa_batch(t[ok]) * diam_batch(t[ok]) / h[ok]
    return float(r.max()) if r.size else 0.0
