"""Explicit constants, exact multiscale integrals, and inequality checks.

Three inequalities are checked on atomic measures:

* ``verify_lemma1``: K(x, R) <= G1 * int_0^{2R} theta^m cbeta^p r^(-alpha p) dr/r
* ``verify_lemma2``: int_Q (centred integral up to rho) dmu
  <= D1 * D2 * int_{3Q} (non-centred integral up to 12 rho sqrt n) dmu
* ``verify_corollary_lw11``: int_Q K dmu <= G1 * D1 * D2 * int_{3Q} (non-centred,
  density exponent m, up to 24 R sqrt n) dmu
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .beta import BetaParams, ScaleProfile, beta_ball, scale_profile
from .curvature import CurvatureParams, curvature_exact
from .geometry import AffinePlane, diam_batch, dist_to_plane, h_min_batch
from .measure import (
    DyadicCube,
    InputError,
    PointCloudMeasure,
    cube_restrict,
    expand_cube,
    theta_ball,
    unit_ball_volume,
)

PASS_RTOL = 1e-9
# rounding slack for bounds that are tight when both balls hold the same atoms
BOUND_RTOL = 1e-12


def gamma_lemma1(m: int, p: float, alpha: float) -> float:
    """2(m+1)(m+2) omega_m^m 4^(m + (1+alpha)p + m^2 + 1)."""
    return 2 * (m + 1) * (m + 2) * unit_ball_volume(m) ** m * 4.0 ** (m + (1 + alpha) * p + m * m + 1)


def gamma_lemma2(n: int, m: int, p: float, q: float, alpha: float, gamma: float) -> tuple[float, float, float]:
    """(Delta1, Delta2, Delta1 * Delta2) for the centred/non-centred comparison."""
    if q > p:
        raise InputError(f"need q <= p, got q={q}, p={p}")
    d1 = 6.0 ** (q + m * q / p + gamma * m) * 2.0 ** (2 + alpha * q)
    d2 = 3.0**n * (2 * math.sqrt(n)) ** (gamma * m + alpha * q + m * q / p + q) / math.log(2)
    return d1, d2, d1 * d2


@dataclass(frozen=True)
class MultiscaleParams:
    m: int
    n: int
    p: float = 2.0
    q: float = 2.0
    gamma: float = 0.0
    alpha: float = 0.0
    rho: float = 1.0
    centred: bool = False

    def __post_init__(self):
        if not 0 < self.m < self.n:
            raise InputError(f"need 0 < m < n, got m={self.m}, n={self.n}")
        if not 1 <= self.q <= self.p < math.inf:
            raise InputError(f"need 1 <= q <= p < inf, got p={self.p}, q={self.q}")
        if self.gamma < 0 or not 0 <= self.alpha <= 1 or not self.rho > 0:
            raise InputError("need gamma >= 0, alpha in [0, 1], rho > 0")

    @property
    def beta_params(self) -> BetaParams:
        return BetaParams(self.m, self.p, self.centred)

    @property
    def exponent(self) -> float:
        """Power of r in the integrand on an interval where mass and residual are fixed."""
        return -self.gamma * self.m - self.q * (self.p + self.m) / self.p - self.alpha * self.q - 1


def _power_integral(a: float, b: float, e: float) -> float:
    """int_a^b r^e dr for 0 < a < b <= inf."""
    if e == -1:
        if math.isinf(b):
            raise ValueError("divergent logarithmic tail")
        return math.log(b / a)
    k = e + 1
    if math.isinf(b):
        if k >= 0:
            raise ValueError("divergent tail")
        return -(a**k) / k
    return a**k * math.expm1(k * math.log(b / a)) / k


def profile_coefficients(profile: ScaleProfile, params: MultiscaleParams) -> np.ndarray:
    """Per-interval constant A_i with integrand A_i * r^exponent."""
    omega = unit_ball_volume(params.m)
    with np.errstate(divide="ignore"):
        dens = (profile.mass / omega) ** params.gamma
    return np.where(profile.numer > 0, dens * profile.numer ** (params.q / params.p), 0.0)


def integrate_profile(profile: ScaleProfile, params: MultiscaleParams) -> tuple[float, list[float]]:
    """Exact integral of the profile; returns (total, per-interval contributions)."""
    coef = profile_coefficients(profile, params)
    e = params.exponent
    parts = [
        float(c) * _power_integral(float(a), float(b), e) if c > 0 else 0.0
        for c, a, b in zip(coef, profile.lo, profile.hi)
    ]
    return math.fsum(parts), parts


def multiscale_integral(mu: PointCloudMeasure, x, params: MultiscaleParams) -> float:
    """int_0^rho theta^m(mu,x,r)^gamma beta(x,r)^q r^(-alpha q) dr/r, in closed form.

    Exact for p = 2. For other p the per-interval residuals come from the
    IRLS fit, so the result is an upper bound.
    """
    prof = scale_profile(mu, x, params.rho, params.beta_params)
    return integrate_profile(prof, params)[0]


def quadrature_integral(mu: PointCloudMeasure, x, params: MultiscaleParams, nodes: int = 10**6) -> float:
    """Trapezoid quadrature of the multiscale integrand, log-spaced per interval.

    Interval endpoints are the atom distances from x. The integrand is
    evaluated from the definitions: ball mass and best-plane residual come
    from direct ``theta_ball``/``beta_ball`` calls, once per distinct ball.
    Needs a finite ``rho``.
    """
    if math.isinf(params.rho):
        raise InputError("quadrature needs finite rho")
    x = np.asarray(x, dtype=float)
    d = np.sqrt(np.sum((mu.positions - x) ** 2, axis=1))
    cuts = np.unique(np.concatenate([d[(d > 0) & (d < params.rho)], [params.rho]]))
    if cuts.size < 2:
        return 0.0
    logs = np.log(cuts)
    span = logs[-1] - logs[0]
    bp = params.beta_params
    total = []
    for a, b, la, lb in zip(cuts[:-1], cuts[1:], logs[:-1], logs[1:]):
        k = max(8, int(round(nodes * (lb - la) / span)))
        t = np.linspace(la, lb, k + 1)
        # the ball is constant on [a, b), sample it just inside
        probe = a
        theta = theta_ball(mu, x, probe, params.m) * probe**params.m
        beta, _ = beta_ball(mu, x, probe, bp)
        numer = (beta * probe) ** params.p * probe**params.m
        r = np.exp(t)
        theta_r = theta / r**params.m
        beta_q = (numer * r ** (-params.p - params.m)) ** (params.q / params.p)
        g = theta_r**params.gamma * beta_q * r ** (-params.alpha * params.q)  # times dr/r = dt
        total.append(float(np.sum((g[1:] + g[:-1]) * np.diff(t) / 2)))
    return math.fsum(total)


@dataclass
class VerificationReport:
    name: str
    lhs: float
    rhs: float
    constant: float
    ratio: float
    passed: bool
    params: dict
    vacuous: bool = False
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def build(cls, name, lhs, rhs, constant, params, diagnostics=None) -> VerificationReport:
        if rhs == 0:
            passed, ratio = lhs == 0, (0.0 if lhs == 0 else math.inf)
        else:
            passed, ratio = lhs <= rhs * (1 + PASS_RTOL), lhs / rhs
        return cls(
            name, float(lhs), float(rhs), float(constant), float(ratio), bool(passed),
            dict(params), vacuous=(lhs == 0 and rhs == 0), diagnostics=diagnostics or {},
        )

    def to_dict(self) -> dict:
        return asdict(self)


def verify_lemma1(mu: PointCloudMeasure, x, R: float, m: int, p: float = 2.0, alpha: float = 0.0, budget=None) -> VerificationReport:
    x = np.asarray(x, dtype=float).reshape(-1)
    cp = CurvatureParams(m, p, alpha, R)
    kw = {} if budget is None else {"budget": budget}
    lhs = curvature_exact(mu, x, cp, **kw).value
    msp = MultiscaleParams(m, mu.ambient_dim, p, p, gamma=m, alpha=alpha, rho=2 * R, centred=True)
    prof = scale_profile(mu, x, msp.rho, msp.beta_params)
    integral, parts = integrate_profile(prof, msp)
    G = gamma_lemma1(m, p, alpha)
    diag = {
        "integral": integral,
        "exact": bool(p == 2),
        "scales": [
            {"r_lo": float(a), "r_hi": float(b), "mass": float(M), "beta_numerator": float(C), "part": part}
            for (a, b, M, C), part in zip(prof.rows(), parts)
        ],
    }
    params = {"x": x.tolist(), "R": R, "m": m, "p": p, "alpha": alpha}
    return VerificationReport.build("lemma1", lhs, G * integral, G, params, diag)


def _weighted_integrals(mu: PointCloudMeasure, region, params: MultiscaleParams):
    sub = cube_restrict(mu, region)
    vals = [multiscale_integral(mu, y, params) for y in sub.positions]
    return math.fsum(w * v for w, v in zip(sub.weights, vals)), len(sub)


def verify_lemma2(mu: PointCloudMeasure, q_cube: DyadicCube, rho: float, params: MultiscaleParams) -> VerificationReport:
    """Centred integral over Q against non-centred integral over 3Q."""
    n = mu.ambient_dim
    centred = MultiscaleParams(params.m, n, params.p, params.q, params.gamma, params.alpha, rho, True)
    plain = MultiscaleParams(params.m, n, params.p, params.q, params.gamma, params.alpha, 12 * rho * math.sqrt(n), False)
    lhs, n_in_q = _weighted_integrals(mu, q_cube, centred)
    rhs_int, n_in_3q = _weighted_integrals(mu, expand_cube(q_cube, 3), plain)
    d1, d2, G = gamma_lemma2(n, params.m, params.p, params.q, params.alpha, params.gamma)
    diag = {"delta1": d1, "delta2": d2, "rhs_integral": rhs_int, "atoms_in_Q": n_in_q,
            "atoms_in_3Q": n_in_3q, "exact": bool(params.p == 2)}
    rep_params = {"level": q_cube.level, "corner": list(q_cube.corner), "rho": rho, "m": params.m,
                  "n": n, "p": params.p, "q": params.q, "gamma": params.gamma, "alpha": params.alpha}
    return VerificationReport.build("lemma2", lhs, G * rhs_int, G, rep_params, diag)


def verify_corollary_lw11(mu: PointCloudMeasure, q_cube: DyadicCube, R: float, m: int, p: float = 2.0, alpha: float = 0.0) -> VerificationReport:
    n = mu.ambient_dim
    cp = CurvatureParams(m, p, alpha, R)
    sub = cube_restrict(mu, q_cube)
    lhs = math.fsum(w * curvature_exact(mu, y, cp).value for y, w in zip(sub.positions, sub.weights))
    plain = MultiscaleParams(m, n, p, p, gamma=m, alpha=alpha, rho=24 * R * math.sqrt(n), centred=False)
    rhs_int, n_in_3q = _weighted_integrals(mu, expand_cube(q_cube, 3), plain)
    g1 = gamma_lemma1(m, p, alpha)
    _, _, g2 = gamma_lemma2(n, m, p, p, alpha, m)
    diag = {"gamma1": g1, "gamma2": g2, "rhs_integral": rhs_int, "atoms_in_Q": len(sub),
            "atoms_in_3Q": n_in_3q, "exact": bool(p == 2)}
    rep_params = {"level": q_cube.level, "corner": list(q_cube.corner), "R": R, "m": m, "n": n,
                  "p": p, "alpha": alpha}
    return VerificationReport.build("corollary_lw11", lhs, g1 * g2 * rhs_int, g1 * g2, rep_params, diag)


def _random_plane(g: np.random.Generator, n: int, m: int, scale: float = 1.0) -> AffinePlane:
    return AffinePlane.through(scale * g.standard_normal(n), g.standard_normal((m, n)))


def verify_pointwise_bounds(samples: int, seed: int = 0, ms=(1, 2), n: int = 3) -> VerificationReport:
    """Randomised check of the four elementary bounds used in the curvature estimate.

    * h_min <= 2(m+2) max_i dist(x_i, L) for any m-plane L
    * diam >= max_i |x_i - x_0|
    * beta(x,t,L)^p <= (s/t)^(m+p) beta(x,s,L)^p for s/2 <= t <= s
    * theta(x,t) <= (s/t)^m theta(x,s) for s/2 <= t <= s

    ``lhs``/``rhs`` of the report hold the worst observed ratio and 1.
    """
    if samples < 1:
        raise InputError("samples must be positive")
    g = np.random.default_rng(np.random.SeedSequence(int(seed)))
    worst = {"h_min": 0.0, "diam": 0.0, "beta_inc": 0.0, "dens_inc": 0.0}
    violations = dict.fromkeys(worst, 0)

    for m in ms:
        if m >= n:
            continue
        tuples = g.standard_normal((samples, m + 2, n))
        # some tuples get a repeated vertex
        rep = g.random(samples) < 0.05
        tuples[rep, 1] = tuples[rep, 0]
        h = h_min_batch(tuples)
        dmax = np.empty(samples)
        for i in range(samples):
            L = _random_plane(g, n, m)
            dmax[i] = np.max(dist_to_plane(tuples[i], L))
        bound = 2 * (m + 2) * dmax
        ratio = np.where(bound > 0, h / np.where(bound > 0, bound, 1), np.where(h > 0, np.inf, 0))
        worst["h_min"] = max(worst["h_min"], float(ratio.max()))
        violations["h_min"] += int(np.sum(h > bound))
        d = diam_batch(tuples)
        far = np.max(np.linalg.norm(tuples - tuples[:, :1], axis=2), axis=1)
        worst["diam"] = max(worst["diam"], float(np.max(np.where(d > 0, far / np.where(d > 0, d, 1), 0))))
        violations["diam"] += int(np.sum(far > d))

        p = 2.0
        for i in range(samples):
            N = int(g.integers(1, 16))
            mu = PointCloudMeasure(g.standard_normal((N, n)), 2 * (1 - g.random(N)))
            x = mu.positions[int(g.integers(N))] if g.random() < 0.7 else g.standard_normal(n)
            s = float(g.uniform(0.05, 3.0))
            t = s if g.random() < 0.1 else float(g.uniform(s / 2, s))
            L = _random_plane(g, n, m)
            wd = mu.weights * dist_to_plane(mu.positions, L) ** p
            dist_x = np.sqrt(np.sum((mu.positions - x) ** 2, axis=1))
            # beta(x,r,L)^p = r^-(m+p) * sum over the ball of w dist^p
            bt = math.fsum(wd[dist_x <= t]) / t ** (m + p)
            bs = math.fsum(wd[dist_x <= s]) / s ** (m + p)
            rhs = (s / t) ** (m + p) * bs
            if bt > 0:
                worst["beta_inc"] = max(worst["beta_inc"], bt / rhs if rhs > 0 else math.inf)
            violations["beta_inc"] += int(bt > rhs * (1 + BOUND_RTOL))
            th_t, th_s = theta_ball(mu, x, t, m), theta_ball(mu, x, s, m)
            rhs = (s / t) ** m * th_s
            if th_t > 0:
                worst["dens_inc"] = max(worst["dens_inc"], th_t / rhs if rhs > 0 else math.inf)
            violations["dens_inc"] += int(th_t > rhs * (1 + BOUND_RTOL))

    lhs = max(worst.values())
    report = VerificationReport.build(
        "pointwise_bounds", lhs, 1.0, 1.0, {"samples": samples, "seed": seed, "ms": list(ms), "n": n},
        {"worst_ratio": worst, "violations": violations},
    )
    report.passed = sum(violations.values()) == 0
    return report
