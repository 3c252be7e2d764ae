"""The verification battery: seeded random instances for every inequality and oracle.

Each ``check_*`` function returns a plain dict with at least ``name``,
``passed``, ``instances`` and a few worst-case numbers. ``run_suite`` collects
them; ``size="smoke"`` shrinks the instance counts for quick runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import special_ortho_group

from .beta import BetaParams, beta_ball, best_plane_l2
from .curvature import CurvatureParams, curvature_exact, curvature_mc, curvature_via_e, m_p_functional
from .geometry import diam_batch, h_min_batch, kappa_batch, menger_c_batch, simplex_volume_batch
from .inequalities import (
    MultiscaleParams,
    multiscale_integral,
    quadrature_integral,
    verify_corollary_lw11,
    verify_lemma1,
    verify_lemma2,
    verify_pointwise_bounds,
)
from .measure import DyadicCube, PointCloudMeasure, similarity_transform, theta_ball
from .synth import triangle

DIMS = ((2, 1), (3, 1), (3, 2))


@dataclass(frozen=True)
class SuiteSize:
    lemma1: int
    lemma2: int
    corollary: int
    identity: int
    quadrature: int
    quadrature_nodes: int
    bounds: int
    optimality_instances: int
    optimality_planes: int
    mc_runs: int
    mc_samples: int
    invariance: int


SIZES = {
    "full": SuiteSize(200, 200, 100, 50, 50, 10**6, 10**4, 20, 10**4, 200, 20000, 30),
    "smoke": SuiteSize(12, 12, 6, 5, 4, 10**5, 500, 3, 1000, 20, 5000, 4),
}


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream,)))


def random_measure(g: np.random.Generator, n: int, m: int, N: int | None = None, low=0.0, high=1.0, flat_prob=0.0):
    """Random atomic measure; with probability ``flat_prob`` it lives on a random m-plane."""
    N = int(g.integers(3, 16)) if N is None else N
    if g.random() < flat_prob:
        base = g.uniform(low, high, n)
        frame = special_ortho_group.rvs(n, random_state=g)[:m]
        coords = g.uniform(-(high - low) / 2, (high - low) / 2, (N, m))
        pos = base + coords @ frame
    else:
        pos = g.uniform(low, high, (N, n))
    w = 2.0 * (1.0 - g.random(N))
    return PointCloudMeasure(pos, w)


def _summary(name, reports, extra=None):
    ratios = [r.ratio for r in reports]
    out = {
        "name": name,
        "instances": len(reports),
        "passed": all(r.passed for r in reports),
        "failures": sum(not r.passed for r in reports),
        "vacuous": sum(r.vacuous for r in reports),
        "worst_ratio": max(ratios) if ratios else 0.0,
    }
    if extra:
        out.update(extra)
    return out


def check_lemma1(count: int, seed: int) -> dict:
    g = _rng(seed, 1)
    alphas, Rs = (0.0, 0.5, 1.0), (1.0, 2.0, math.inf)
    reports, first_failure = [], None
    for i in range(count):
        n, m = DIMS[i % 3]
        alpha, R = alphas[(i // 3) % 3], Rs[(i // 9) % 3]
        mu = random_measure(g, n, m, flat_prob=0.1)
        for x in mu.positions:
            rep = verify_lemma1(mu, x, R, m, 2.0, alpha)
            reports.append(rep)
            if not rep.passed and first_failure is None:
                first_failure = {"instance": i, **rep.to_dict()}
    return _summary("lemma1", reports, {"measures": count, "first_failure": first_failure})


def _random_cube_and_measure(g, n, m):
    k = int(g.choice([-1, 0, 1]))
    mu = random_measure(g, n, m, low=-1.0, high=2.0, flat_prob=0.1)
    anchor = mu.positions[int(g.integers(len(mu)))]
    q = DyadicCube(k, tuple(np.floor(np.ldexp(anchor, k)).astype(int)))
    return mu, q


def check_lemma2(count: int, seed: int) -> dict:
    g = _rng(seed, 2)
    reports = []
    for i in range(count):
        n, m = DIMS[i % 3]
        mu, q = _random_cube_and_measure(g, n, m)
        p, qq = ((2.0, 2.0), (2.0, 1.0))[(i // 3) % 2]
        gamma = (0.0, 1.0, float(m))[(i // 6) % 3]
        alpha = (0.0, 1.0)[(i // 18) % 2]
        rho = q.side * float(g.choice([0.25, 0.5, 1.0, 4.0, math.inf]))
        params = MultiscaleParams(m, n, p, qq, gamma, alpha, rho)
        reports.append(verify_lemma2(mu, q, rho, params))
    return _summary("lemma2", reports)


def check_corollary(count: int, seed: int) -> dict:
    g = _rng(seed, 3)
    reports = []
    for i in range(count):
        n, m = DIMS[i % 3]
        mu, q = _random_cube_and_measure(g, n, m)
        alpha = (0.0, 0.5, 1.0)[(i // 3) % 3]
        R = q.side * float(g.choice([0.25, 1.0, 4.0, math.inf]))
        reports.append(verify_corollary_lw11(mu, q, R, m, 2.0, alpha))
    return _summary("corollary_lw11", reports)


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def check_identity(count: int, seed: int, rtol: float = 1e-12) -> dict:
    """K(x,R) against (m+1) * sum_y w(y) E(x,y) on generic (tie-free) clouds."""
    g = _rng(seed, 4)
    worst = 0.0
    for i in range(count):
        n, m = DIMS[i % 3]
        mu = random_measure(g, n, m)
        x = mu.positions[int(g.integers(len(mu)))]
        cp = CurvatureParams(m, 2.0, float(g.choice([0.0, 0.5, 1.0])), float(g.choice([0.5, 1.0, math.inf])))
        worst = max(worst, _rel(curvature_exact(mu, x, cp).value, curvature_via_e(mu, x, cp)))
    return {"name": "permutation_identity", "instances": count, "passed": bool(worst <= rtol), "worst_rel_err": worst, "rtol": rtol}


def check_quadrature(count: int, seed: int, nodes: int, rtol: float = 1e-8) -> dict:
    g = _rng(seed, 5)
    cases = []
    tri = PointCloudMeasure.from_points([[0, 0], [1, 0], [0, 1]])
    for gamma, expected in ((0.0, 7 / 24), (1.0, 45 / 128)):
        params = MultiscaleParams(1, 2, 2.0, 2.0, gamma, 0.0, 2.0, True)
        cases.append((tri, np.zeros(2), params, expected))
    for i in range(count):
        n, m = DIMS[i % 3]
        mu = random_measure(g, n, m)
        x = mu.positions[int(g.integers(len(mu)))] if g.random() < 0.8 else g.uniform(0, 1, n)
        params = MultiscaleParams(
            m, n, 2.0, float(g.choice([1.0, 2.0])), float(g.choice([0.0, 1.0, m])),
            float(g.choice([0.0, 0.5, 1.0])), float(g.uniform(0.3, 3.0)), bool(g.random() < 0.5),
        )
        cases.append((mu, x, params, None))
    worst_quad = worst_analytic = 0.0
    for mu, x, params, expected in cases:
        closed = multiscale_integral(mu, x, params)
        worst_quad = max(worst_quad, _rel(closed, quadrature_integral(mu, x, params, nodes)))
        if expected is not None:
            worst_analytic = max(worst_analytic, _rel(closed, expected))
    return {
        "name": "multiscale_quadrature",
        "instances": len(cases),
        "passed": worst_quad <= rtol and worst_analytic <= 1e-12,
        "worst_rel_err": worst_quad,
        "worst_analytic_rel_err": worst_analytic,
        "rtol": rtol,
    }


def check_bounds(samples: int, seed: int) -> dict:
    rep = verify_pointwise_bounds(samples, seed)
    return {"name": "pointwise_bounds", "instances": samples, "passed": rep.passed, **rep.diagnostics}


def _line_residual_oracle(pts, w, through=None, grid=20000):
    """min over lines in R^2 of sum w dist^2: angle grid + golden refinement.

    For a fixed normal direction the best offset is the weighted mean of the
    normal coordinates, or fixed by ``through``.
    """

    def cost(theta):
        nrm = np.array([-np.sin(theta), np.cos(theta)])
        s = pts @ nrm
        c = (w @ s) / w.sum() if through is None else through @ nrm
        return float(w @ (s - c) ** 2)

    thetas = np.linspace(0.0, np.pi, grid, endpoint=False)
    vals = np.array([cost(t) for t in thetas])
    j = int(np.argmin(vals))
    h = np.pi / grid
    res = minimize_scalar(cost, bounds=(thetas[j] - h, thetas[j] + h), method="bounded", options={"xatol": 1e-12})
    return min(vals[j], res.fun)


def check_beta_optimality(instances: int, planes: int, seed: int) -> dict:
    g = _rng(seed, 7)
    violations, worst_oracle = 0, 0.0
    for i in range(instances):
        n, m = DIMS[i % 3]
        mu = random_measure(g, n, m)
        centred = bool(i % 2)
        x = mu.positions[0] if centred else None
        plane, residual = best_plane_l2(mu, m, x)
        # random competitors, vectorised
        bases = np.broadcast_to(x, (planes, n)) if centred else g.normal(mu.positions.mean(0), 0.5, (planes, n))
        dirs = np.linalg.qr(g.standard_normal((planes, n, m)))[0]
        v = mu.positions[None] - bases[:, None]
        proj = np.einsum("pkn,pnm->pkm", v, dirs)
        d2 = np.sum(v * v, axis=2) - np.sum(proj * proj, axis=2)
        costs = np.maximum(d2, 0) @ mu.weights
        violations += int(np.sum(costs < residual * (1 - 1e-12)))
        if n == 2:
            oracle = _line_residual_oracle(mu.positions, mu.weights, x)
            worst_oracle = max(worst_oracle, abs(residual - oracle) / max(1.0, oracle))
    return {
        "name": "beta_optimality",
        "instances": instances,
        "planes_per_instance": planes,
        "violations": violations,
        "worst_grid_oracle_err": worst_oracle,
        "passed": bool(violations == 0 and worst_oracle <= 1e-6),
    }


def check_curvature_oracles(runs: int, samples: int, seed: int) -> dict:
    cp = CurvatureParams(1, 2.0, 0.0, math.inf)
    tri_val = curvature_exact(triangle(), np.zeros(2), cp).value
    g = _rng(seed, 8)
    flat_vals = []
    for i in range(10):
        n, m = DIMS[i % 3]
        mu = random_measure(g, n, m, flat_prob=1.0)
        flat_vals.append(curvature_exact(mu, mu.positions[0], CurvatureParams(m, 2.0, 0.5, math.inf)).value)
    mc_mu = random_measure(g, 2, 1, N=8)
    x = mc_mu.positions[0]
    exact = curvature_exact(mc_mu, x, cp).value
    hits = 0
    for k in range(runs):
        est = curvature_mc(mc_mu, x, cp, samples, seed * 1000 + k)
        hits += int(abs(est.value - exact) <= 4 * est.stderr)
    return {
        "name": "curvature_oracles",
        "triangle_value": tri_val,
        "flat_values_max": max(flat_vals),
        "mc_runs": runs,
        "mc_hits": hits,
        "passed": abs(tri_val - 0.5) <= 1e-12 and max(flat_vals) == 0.0 and hits >= 0.99 * runs,
    }


def _functionals(mu: PointCloudMeasure, x, m: int, tuples: np.ndarray, alpha: float):
    n = mu.ambient_dim
    out = {
        "h_min": h_min_batch(tuples),
        "diam": diam_batch(tuples),
        "simplex": simplex_volume_batch(tuples),
        "kappa": kappa_batch(tuples),
        "theta": np.array([theta_ball(mu, x, r, m) for r in (0.3, 0.7, 1.5)]),
        "beta": np.array([beta_ball(mu, x, r, BetaParams(m, 2.0, c))[0] for r in (0.3, 0.7, 1.5) for c in (False, True)]),
        "K": np.array([curvature_exact(mu, x, CurvatureParams(m, 2.0, alpha, R)).value for R in (0.7, math.inf)]),
        "multiscale": np.array([
            multiscale_integral(mu, x, MultiscaleParams(m, n, 2.0, 2.0, float(m), alpha, 1.5, c)) for c in (False, True)
        ]),
    }
    if n >= 2:
        out["menger"] = menger_c_batch(tuples[:, 0], tuples[:, 1], tuples[:, 2])
    if len(mu) <= 8:
        out["M_p"] = np.array([m_p_functional(mu, 2.0, m)])
    return out


def _max_rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(a - b) / scale, 0.0)
    return float(rel.max()) if rel.size else 0.0


def check_invariance(count: int, seed: int, rtol: float = 1e-10) -> dict:
    g = _rng(seed, 9)
    worst_rigid, worst_sim = {}, {}
    for i in range(count):
        n, m = DIMS[i % 3]
        mu = random_measure(g, n, m, N=int(g.integers(4, 9)))
        x = mu.positions[0]
        alpha = float(g.choice([0.0, 0.5, 1.0]))
        tuples = g.standard_normal((50, m + 2, n))
        base = _functionals(mu, x, m, tuples, alpha)

        Rot = special_ortho_group.rvs(n, random_state=g)
        t = g.uniform(-3, 3, n)
        moved = similarity_transform(mu, 1.0, Rot, t, 0.0)
        rigid = _functionals(moved, Rot @ x + t, m, tuples @ Rot.T + t, alpha)
        for key in base:
            worst_rigid[key] = max(worst_rigid.get(key, 0.0), _max_rel(base[key], rigid[key]))

        lam = float(g.choice([0.5, 2.0, 3.0]))
        scaled = similarity_transform(mu, lam, Rot, t, float(m))
        y = lam * Rot @ x + t
        cmp = {
            "theta": (base["theta"], np.array([theta_ball(scaled, y, lam * r, m) for r in (0.3, 0.7, 1.5)])),
            "beta": (base["beta"], np.array([
                beta_ball(scaled, y, lam * r, BetaParams(m, 2.0, c))[0] for r in (0.3, 0.7, 1.5) for c in (False, True)
            ])),
            "K": (base["K"] * lam ** (-alpha * 2.0), np.array([
                curvature_exact(scaled, y, CurvatureParams(m, 2.0, alpha, lam * R)).value for R in (0.7, math.inf)
            ])),
        }
        for key, (a, b) in cmp.items():
            worst_sim[key] = max(worst_sim.get(key, 0.0), _max_rel(a, b))
    worst = max(list(worst_rigid.values()) + list(worst_sim.values()))
    return {
        "name": "invariance",
        "instances": count,
        "worst_rigid": worst_rigid,
        "worst_similarity": worst_sim,
        "passed": bool(worst <= rtol),
        "rtol": rtol,
    }


def run_suite(seed: int = 0, size: str = "smoke") -> dict:
    s = SIZES[size]
    checks = [
        check_lemma1(s.lemma1, seed),
        check_lemma2(s.lemma2, seed),
        check_corollary(s.corollary, seed),
        check_identity(s.identity, seed),
        check_quadrature(s.quadrature, seed, s.quadrature_nodes),
        check_bounds(s.bounds, seed),
        check_beta_optimality(s.optimality_instances, s.optimality_planes, seed),
        check_curvature_oracles(s.mc_runs, s.mc_samples, seed),
        check_invariance(s.invariance, seed),
    ]
    return {
        "size": size,
        "checks": checks,
        "passed": sum(c["passed"] for c in checks),
        "failed": sum(not c["passed"] for c in checks),
    }
