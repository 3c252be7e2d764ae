"""Discrete curvature K^alpha_{mu,p}(x, R) of atomic measures.

The integral over B(x,R)^(m+1) of h_min^p / diam^(m(m+1) + (1+alpha)p)
becomes a finite sum over ordered (m+1)-tuples of atoms. Tuples that repeat
an atom are skipped: their simplex is degenerate and contributes exactly 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import diam_batch, h_min_batch, kappa_batch
from .measure import InputError, PointCloudMeasure, distances

DEFAULT_BUDGET = 10**8
_BLOCK = 1 << 16


class BudgetExceeded(InputError):
    """Exact enumeration would exceed the configured number of terms."""


@dataclass(frozen=True)
class CurvatureParams:
    m: int
    p: float = 2.0
    alpha: float = 0.0
    R: float = math.inf

    def __post_init__(self):
        if self.m < 1:
            raise InputError(f"m must be a positive integer, got {self.m}")
        if not 1 <= self.p < math.inf:
            raise InputError(f"p must lie in [1, inf), got {self.p}")
        if not 0 <= self.alpha <= 1:
            raise InputError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.R > 0:
            raise InputError(f"R must be positive, got {self.R}")

    @property
    def diam_exponent(self) -> float:
        return self.m * (self.m + 1) + (1 + self.alpha) * self.p


@dataclass(frozen=True)
class CurvatureEstimate:
    value: float
    stderr: float
    terms_or_samples: int
    method: str  # "exact" | "monte_carlo"


def _integrand_batch(tuples: np.ndarray, params: CurvatureParams) -> np.ndarray:
    h = h_min_batch(tuples)
    d = diam_batch(tuples)
    ok = (h > 0) & (d > 0)
    out = np.zeros(tuples.shape[0])
    out[ok] = h[ok] ** params.p / d[ok] ** params.diam_exponent
    return out


def k_integrand(points, params: CurvatureParams) -> float:
    """h_min^p / diam^(m(m+1) + (1+alpha)p) for one (m+2)-tuple; 0 if degenerate."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] != params.m + 2:
        raise InputError(f"expected {params.m + 2} points, got {pts.shape[0]}")
    return float(_integrand_batch(pts[None], params)[0])


def _distinct_index_blocks(N: int, k: int):
    """Lexicographic blocks of k-tuples of pairwise distinct indices in range(N)."""
    total = N**k
    for start in range(0, total, _BLOCK):
        idx = np.stack(np.unravel_index(np.arange(start, min(start + _BLOCK, total)), (N,) * k), axis=1)
        keep = np.ones(idx.shape[0], dtype=bool)
        for a in range(k):
            for b in range(a + 1, k):
                keep &= idx[:, a] != idx[:, b]
        if keep.any():
            yield idx[keep]


def _tuple_sum(fixed: np.ndarray, pts: np.ndarray, w: np.ndarray, k: int, params: CurvatureParams):
    """Sum over distinct k-tuples of atoms of prod(w) * integrand(fixed..., tuple...)."""
    N = pts.shape[0]
    partials, count = [], 0
    for idx in _distinct_index_blocks(N, k):
        tuples = np.concatenate(
            [np.broadcast_to(fixed, (idx.shape[0],) + fixed.shape), pts[idx]], axis=1
        )
        vals = _integrand_batch(tuples, params) * np.prod(w[idx], axis=1)
        partials.append(float(np.sum(vals)))
        count += idx.shape[0]
    return math.fsum(partials), count


def curvature_exact(mu: PointCloudMeasure, x, params: CurvatureParams, budget: int = DEFAULT_BUDGET) -> CurvatureEstimate:
    """K^alpha_{mu,p}(x, R) by enumerating all (m+1)-tuples in the closed ball."""
    x = np.asarray(x, dtype=float).reshape(-1)
    mask = mu.ball_mask(x, params.R)
    pts, w = mu.positions[mask], mu.weights[mask]
    k = params.m + 1
    if pts.shape[0] ** k > budget:
        raise BudgetExceeded(
            f"{pts.shape[0]}^{k} tuples exceed the budget of {budget}; use curvature_mc"
        )
    value, count = _tuple_sum(x[None], pts, w, k, params)
    return CurvatureEstimate(value, 0.0, count, "exact")


def e_integrand(mu: PointCloudMeasure, x, y, params: CurvatureParams, budget: int = DEFAULT_BUDGET) -> float:
    """Sum over m-tuples z of atoms with |z_j - x| <= |y - x| of integrand(x, y, z).

    (m+1) * sum_y w(y) E(x, y) reproduces K(x, R) when no two distinct atoms
    of the ball are equidistant from x; ties are counted once per maximiser,
    so in general the sum is an upper bound.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    r = float(np.sqrt(np.sum((y - x) ** 2)))
    if r == 0:
        raise InputError("e_integrand needs y != x")
    mask = distances(mu.positions, x) <= r
    pts, w = mu.positions[mask], mu.weights[mask]
    if pts.shape[0] ** params.m > budget:
        raise BudgetExceeded(f"{pts.shape[0]}^{params.m} tuples exceed the budget of {budget}")
    value, _ = _tuple_sum(np.stack([x, y]), pts, w, params.m, params)
    return value


def curvature_via_e(mu: PointCloudMeasure, x, params: CurvatureParams) -> float:
    """(m+1) * sum over atoms y of the ball of w(y) E(x, y)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    mask = mu.ball_mask(x, params.R)
    terms = [
        w * e_integrand(mu, x, y, params)
        for y, w in zip(mu.positions[mask], mu.weights[mask])
        if np.any(y != x)
    ]
    return (params.m + 1) * math.fsum(terms)


def curvature_mc(mu: PointCloudMeasure, x, params: CurvatureParams, samples: int, seed: int) -> CurvatureEstimate:
    """Unbiased Monte Carlo estimate of K with i.i.d. weight-proportional atoms."""
    if samples < 2:
        raise InputError("curvature_mc needs at least 2 samples")
    x = np.asarray(x, dtype=float).reshape(-1)
    mask = mu.ball_mask(x, params.R)
    pts, w = mu.positions[mask], mu.weights[mask]
    M = math.fsum(w)
    if pts.shape[0] == 0 or M <= 0:
        raise InputError("curvature_mc: the ball carries no mass")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    idx = rng.choice(pts.shape[0], size=(samples, params.m + 1), p=w / M)
    vals = []
    for start in range(0, samples, _BLOCK):
        blk = idx[start : start + _BLOCK]
        tuples = np.concatenate([np.broadcast_to(x, (blk.shape[0], 1, x.shape[0])), pts[blk]], axis=1)
        vals.append(_integrand_batch(tuples, params))
    f = np.concatenate(vals)
    scale = M ** (params.m + 1)
    return CurvatureEstimate(
        scale * float(np.mean(f)),
        scale * float(np.std(f, ddof=1)) / math.sqrt(samples),
        samples,
        "monte_carlo",
    )


def m_p_functional(mu: PointCloudMeasure, p: float, m: int, budget: int = DEFAULT_BUDGET) -> float:
    """Sum over ordered (m+2)-tuples of atoms of prod(w) * kappa^p / diam^p."""
    if m < 1 or not 1 <= p < math.inf:
        raise InputError("need m >= 1 and p in [1, inf)")
    N, k = len(mu), m + 2
    if N**k > budget:
        raise BudgetExceeded(f"{N}^{k} tuples exceed the budget of {budget}")
    partials = []
    for idx in _distinct_index_blocks(N, k):
        t = mu.positions[idx]
        kap = kappa_batch(t)
        d = diam_batch(t)
        ok = (kap > 0) & (d > 0)
        vals = np.zeros(idx.shape[0])
        vals[ok] = (kap[ok] / d[ok]) ** p
        partials.append(float(np.sum(vals * np.prod(mu.weights[idx], axis=1))))
    return math.fsum(partials)
