"""Seeded generators for synthetic test measures."""

from __future__ import annotations

import numpy as np

from .measure import InputError, PointCloudMeasure

KINDS = ("segment", "circle", "flat_plane_grid", "sphere", "triangle", "random", "noisy")


def _rng(seed: int, stream: int = 0) -> np.random.Generator:
    if not 0 <= int(seed) < 2**64:
        raise InputError("seed must be an unsigned 64-bit integer")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream,)))


def _need(cond: bool, msg: str):
    if not cond:
        raise InputError(msg)


def segment(length: float = 1.0, samples: int = 50, n: int = 2) -> PointCloudMeasure:
    _need(length > 0 and samples >= 1 and n >= 2, "segment needs length > 0, samples >= 1, n >= 2")
    pos = np.zeros((samples, n))
    pos[:, 0] = np.linspace(0.0, length, samples)
    return PointCloudMeasure.from_points(pos)


def circle(radius: float = 1.0, samples: int = 100, n: int = 2) -> PointCloudMeasure:
    _need(radius > 0 and samples >= 1 and n >= 2, "circle needs radius > 0, samples >= 1, n >= 2")
    t = 2 * np.pi * np.arange(samples) / samples
    pos = np.zeros((samples, n))
    pos[:, 0] = radius * np.cos(t)
    pos[:, 1] = radius * np.sin(t)
    return PointCloudMeasure.from_points(pos)


def flat_plane_grid(side: float = 1.0, per_axis: int = 5, m: int = 2, n: int = 3) -> PointCloudMeasure:
    """Regular grid on the coordinate m-plane of R^n."""
    _need(side > 0 and per_axis >= 1 and 0 < m < n, "flat_plane_grid needs side > 0, per_axis >= 1, 0 < m < n")
    axes = [np.linspace(0.0, side, per_axis)] * m
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
    pos = np.zeros((grid.shape[0], n))
    pos[:, :m] = grid
    return PointCloudMeasure.from_points(pos)


def sphere(radius: float = 1.0, samples: int = 100, n: int = 3, seed: int = 0) -> PointCloudMeasure:
    """Uniform random samples on the (n-1)-sphere."""
    _need(radius > 0 and samples >= 1 and n >= 2, "sphere needs radius > 0, samples >= 1, n >= 2")
    g = _rng(seed).standard_normal((samples, n))
    return PointCloudMeasure.from_points(radius * g / np.linalg.norm(g, axis=1, keepdims=True))


def triangle(n: int = 2) -> PointCloudMeasure:
    """Three unit atoms at (0,0), (1,0), (1/2,1/2)."""
    pos = np.zeros((3, n))
    pos[1, 0] = 1.0
    pos[2, :2] = 0.5
    return PointCloudMeasure.from_points(pos)


def random_cloud(
    atoms: int = 10, n: int = 2, box: float = 1.0, wmax: float = 2.0, seed: int = 0
) -> PointCloudMeasure:
    """Uniform positions in [0, box)^n with weights uniform in (0, wmax]."""
    _need(atoms >= 1 and n >= 1 and box > 0 and wmax > 0, "random needs atoms >= 1, box > 0, wmax > 0")
    g = _rng(seed)
    pos = g.uniform(0.0, box, size=(atoms, n))
    w = wmax * (1.0 - g.random(atoms))
    return PointCloudMeasure(pos, w)


def add_noise(mu: PointCloudMeasure, amplitude: float, seed: int = 0) -> PointCloudMeasure:
    """Move each atom by an isotropic random vector of length at most ``amplitude``."""
    _need(amplitude >= 0, "noise amplitude must be nonnegative")
    g = _rng(seed, stream=1)
    N, n = mu.positions.shape
    d = g.standard_normal((N, n))
    d /= np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-300)
    radii = amplitude * g.random((N, 1)) ** (1.0 / n)
    return PointCloudMeasure(mu.positions + radii * d, mu.weights)


def synthesize(kind: str, params: dict | None = None, seed: int = 0) -> PointCloudMeasure:
    """Build a named test measure.

    ``noisy`` takes ``base`` (another kind) and ``amplitude``; the remaining
    params are forwarded to the base generator.
    """
    params = dict(params or {})
    if kind == "noisy":
        base = params.pop("base", "circle")
        amplitude = float(params.pop("amplitude", 0.0))
        _need(base != "noisy", "noisy base must be a plain kind")
        return add_noise(synthesize(base, params, seed), amplitude, seed)
    ints = {"samples", "n", "m", "per_axis", "atoms"}
    params = {k: int(v) if k in ints else float(v) for k, v in params.items()}
    try:
        if kind == "segment":
            return segment(**params)
        if kind == "circle":
            return circle(**params)
        if kind == "flat_plane_grid":
            return flat_plane_grid(**params)
        if kind == "sphere":
            return sphere(**params, seed=seed)
        if kind == "triangle":
            return triangle(**params)
        if kind == "random":
            return random_cloud(**params, seed=seed)
    except TypeError as exc:
        raise InputError(f"bad parameters for {kind}: {exc}") from None
    raise InputError(f"unknown generator kind {kind!r}; choose from {', '.join(KINDS)}")
