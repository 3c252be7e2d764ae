"""Finite atomic measures on R^n, balls, and the dyadic lattice."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

# below this size a linear scan beats building a tree
_TREE_MIN_ATOMS = 256


class InputError(ValueError):
    """Malformed measure input (CSV rows, parameters, dimensions)."""


def unit_ball_volume(m: int) -> float:
    """Lebesgue measure of the unit ball in R^m.

    Uses omega_m = (2 pi / m) omega_{m-2}, so omega_1 = 2 and omega_2 = pi exactly.
    """
    if m < 0:
        raise InputError(f"dimension must be nonnegative, got {m}")
    vol = 1.0 if m % 2 == 0 else 2.0
    for k in range(2 + m % 2, m + 1, 2):
        vol *= 2 * math.pi / k
    return vol


def distances(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    # Every ball membership test and every profile breakpoint goes through
    # this one function so that boundary atoms are classified consistently.
    return np.sqrt(np.sum((points - x) ** 2, axis=1))


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InputError(f"ball radius must be finite and positive, got {self.radius}")


@dataclass(frozen=True)
class CubeRegion:
    """Axis-aligned half-open cube given by centre and side length."""

    center: np.ndarray
    side: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.side / 2

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.side / 2

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.all((pts >= self.lower) & (pts < self.upper), axis=1)


@dataclass(frozen=True)
class DyadicCube:
    """The cube 2^-level * (corner + [0,1)^n)."""

    level: int
    corner: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(int(a) for a in self.corner))

    @property
    def dim(self) -> int:
        return len(self.corner)

    @property
    def side(self) -> float:
        return math.ldexp(1.0, -self.level)

    @property
    def center(self) -> np.ndarray:
        return np.ldexp(np.asarray(self.corner, dtype=float) + 0.5, -self.level)

    def region(self) -> CubeRegion:
        return CubeRegion(self.center, self.side)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        # scaling by a power of two is exact, so floor() decides membership exactly
        idx = np.floor(np.ldexp(pts, self.level))
        return np.all(idx == np.asarray(self.corner, dtype=float), axis=1)


def expand_cube(q: DyadicCube | CubeRegion, factor: float) -> CubeRegion:
    """Concentric cube with side ``factor * l(q)``; ``expand_cube(q, 3)`` is 3Q."""
    if not factor > 0:
        raise InputError(f"expansion factor must be positive, got {factor}")
    region = q.region() if isinstance(q, DyadicCube) else q
    return CubeRegion(region.center, factor * region.side)


@dataclass(frozen=True)
class PointCloudMeasure:
    """Finite weighted sum of Dirac masses in R^n.

    Positions are an ``(N, n)`` array and weights a length-``N`` array. The
    instance is treated as immutable; the spatial index is built lazily.
    """

    positions: np.ndarray
    weights: np.ndarray
    ambient_dim: int = field(default=-1)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if pos.ndim == 1:
            if pos.size == 0:
                pos = pos.reshape(0, max(self.ambient_dim, 1))
            else:
                pos = pos.reshape(1, -1)
        if pos.shape[0] != w.shape[0]:
            raise InputError(f"{pos.shape[0]} positions but {w.shape[0]} weights")
        if not np.all(np.isfinite(pos)):
            raise InputError("non-finite coordinate")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InputError("weights must be finite and nonnegative")
        n = pos.shape[1]
        if self.ambient_dim not in (-1, n):
            raise InputError(f"ambient_dim {self.ambient_dim} does not match positions ({n})")
        pos.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "ambient_dim", n)

    @classmethod
    def from_points(cls, points, weights=None) -> PointCloudMeasure:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if weights is None:
            weights = np.ones(pts.shape[0])
        return cls(pts, weights)

    @classmethod
    def empty(cls, n: int) -> PointCloudMeasure:
        return cls(np.zeros((0, n)), np.zeros(0), ambient_dim=n)

    def __len__(self) -> int:
        return self.weights.shape[0]

    @cached_property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    @cached_property
    def _tree(self):
        return cKDTree(self.positions)

    def subset(self, mask_or_index) -> PointCloudMeasure:
        return PointCloudMeasure(
            self.positions[mask_or_index], self.weights[mask_or_index], ambient_dim=self.ambient_dim
        )

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.ambient_dim:
            raise InputError(f"point has dimension {x.shape[0]}, measure lives in R^{self.ambient_dim}")
        return x

    def ball_mask(self, x, r: float) -> np.ndarray:
        """Boolean mask of atoms with |y - x| <= r (closed ball)."""
        x = self._check_point(x)
        if len(self) < _TREE_MIN_ATOMS or math.isinf(r):
            return distances(self.positions, x) <= r
        # tree gives candidates with a safety margin; the exact test is redone below
        cand = np.asarray(self._tree.query_ball_point(x, r * (1 + 1e-9) + 1e-300), dtype=int)
        mask = np.zeros(len(self), dtype=bool)
        if cand.size:
            mask[cand[distances(self.positions[cand], x) <= r]] = True
        return mask

    def ball_mass(self, x, r: float) -> float:
        return math.fsum(self.weights[self.ball_mask(x, r)])

    def cube_mass(self, q: DyadicCube | CubeRegion) -> float:
        return math.fsum(self.weights[q.contains(self.positions)]) if len(self) else 0.0


def ball_restrict(mu: PointCloudMeasure, b: Ball) -> PointCloudMeasure:
    """Atoms of ``mu`` inside the closed ball ``b``, weights unchanged."""
    return mu.subset(mu.ball_mask(b.center, b.radius))


def cube_restrict(mu: PointCloudMeasure, q: DyadicCube | CubeRegion) -> PointCloudMeasure:
    if q.center.shape[0] != mu.ambient_dim:
        raise InputError("cube dimension does not match the measure")
    if len(mu) == 0:
        return mu
    return mu.subset(q.contains(mu.positions))


def theta_ball(mu: PointCloudMeasure, x, r: float, m: int) -> float:
    """m-dimensional density mu(B(x,r)) / (omega_m r^m)."""
    if not r > 0:
        raise InputError(f"radius must be positive, got {r}")
    if math.isinf(r):
        return 0.0
    return mu.ball_mass(x, r) / (unit_ball_volume(m) * r**m)


def theta_cube(mu: PointCloudMeasure, q: DyadicCube | CubeRegion, m: int) -> float:
    side = q.side
    return mu.cube_mass(q) / side**m


def dyadic_cubes_touching(mu: PointCloudMeasure, k: int) -> list[DyadicCube]:
    """Level-k dyadic cubes of positive mass, sorted by corner."""
    if len(mu) == 0:
        return []
    live = mu.weights > 0
    corners = np.floor(np.ldexp(mu.positions[live], k)).astype(np.int64)
    if corners.size == 0:
        return []
    uniq = np.unique(corners, axis=0)
    return [DyadicCube(k, tuple(row)) for row in uniq]


def load_csv(stream) -> PointCloudMeasure:
    """Read ``x0,...,x{n-1}[,w]`` CSV text into a measure.

    ``stream`` may be a string or a text file object.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError("empty CSV input") from None
    has_w = bool(header) and header[-1] == "w"
    coords = header[:-1] if has_w else header
    if not coords or coords != [f"x{i}" for i in range(len(coords))]:
        raise InputError(f"row 1: bad header {header!r}; expected x0,...,x{{n-1}}[,w]")
    n = len(coords)
    pts, ws = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise InputError(f"row {lineno}: expected {len(header)} columns, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise InputError(f"row {lineno}: unparseable number in {row!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputError(f"row {lineno}: non-finite value")
        w = vals[n] if has_w else 1.0
        if w < 0:
            raise InputError(f"row {lineno}: negative weight {w}")
        pts.append(vals[:n])
        ws.append(w)
    if not pts:
        return PointCloudMeasure.empty(n)
    return PointCloudMeasure(np.array(pts), np.array(ws))


def dump_csv(mu: PointCloudMeasure) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([f"x{i}" for i in range(mu.ambient_dim)] + ["w"])
    for y, w in zip(mu.positions, mu.weights):
        writer.writerow([repr(float(v)) for v in y] + [repr(float(w))])
    return out.getvalue()


def similarity_transform(
    mu: PointCloudMeasure,
    scale: float = 1.0,
    rotation=None,
    translation=None,
    weight_exponent: float = 0.0,
) -> PointCloudMeasure:
    """Push ``mu`` forward by y -> scale * R y + t and multiply weights by scale**s."""
    n = mu.ambient_dim
    R = np.eye(n) if rotation is None else np.asarray(rotation, dtype=float)
    t = np.zeros(n) if translation is None else np.asarray(translation, dtype=float)
    if R.shape != (n, n) or np.max(np.abs(R.T @ R - np.eye(n))) > 1e-12:
        raise InputError("rotation must be an orthogonal n x n matrix")
    if not scale > 0:
        raise InputError("scale must be positive")
    pos = scale * mu.positions @ R.T + t
    return PointCloudMeasure(pos, mu.weights * scale**weight_exponent, ambient_dim=n)
