"""Points, balls, shells, singular sets, and the inclusions used in the
two-observer argument."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np

from .errors import DimensionMismatch, InvalidParameter

MAX_DIM = 16


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Validate ``x`` as a finite point of R^n and return a read-only copy."""
    arr = np.array(x, dtype=float).reshape(-1)
    if arr.size == 0:
        raise InvalidParameter("a point needs at least one coordinate")
    if arr.size > MAX_DIM:
        raise InvalidParameter(f"dimension {arr.size} exceeds the cap n <= {MAX_DIM}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"point coordinates must be finite, got {arr.tolist()}")
    if dim is not None and arr.size != dim:
        raise DimensionMismatch(dim, arr.size)
    arr.flags.writeable = False
    return arr


def as_points(x, dim: int) -> np.ndarray:
    """Coerce ``x`` to an ``(N, dim)`` array; a single point becomes ``(1, dim)``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise DimensionMismatch(dim, arr.shape[-1] if arr.ndim else 0)
    return arr


def check_dim(n: int) -> int:
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
        raise InvalidParameter(f"dimension must be a positive integer, got {n!r}")
    if n > MAX_DIM:
        raise InvalidParameter(f"dimension {n} exceeds the cap n <= {MAX_DIM}")
    return int(n)


def unit_ball_volume(n: int) -> float:
    return pi ** (n / 2) / gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    return 2 * pi ** (n / 2) / gamma(n / 2)


def _frozen(obj, name, value):
    object.__setattr__(obj, name, value)


@dataclass(frozen=True, eq=False)
class Ball:
    """Open Euclidean ball ``{x : |x - center| < radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        _frozen(self, "center", as_point(self.center))
        r = float(self.radius)
        if not (np.isfinite(r) and r > 0):
            raise InvalidParameter(f"ball radius must be positive and finite, got {self.radius}")
        _frozen(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def inner(self) -> float:
        return 0.0

    @property
    def outer(self) -> float:
        return self.radius

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.dim) * self.radius**self.dim

    def scaled(self, factor: float) -> "Ball":
        return Ball(self.center, self.radius * factor)

    def contains(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        return np.linalg.norm(pts - self.center, axis=1) < self.radius

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius!r})"


@dataclass(frozen=True, eq=False)
class Shell:
    """Annulus ``{x : inner <= |x - center| < outer}``; ``inner = 0`` is a ball."""

    center: np.ndarray
    inner: float
    outer: float

    def __post_init__(self):
        _frozen(self, "center", as_point(self.center))
        lo, hi = float(self.inner), float(self.outer)
        if not (np.isfinite(hi) and 0 <= lo < hi):
            raise InvalidParameter(f"shell needs 0 <= inner < outer < inf, got ({lo}, {hi})")
        _frozen(self, "inner", lo)
        _frozen(self, "outer", hi)

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def volume(self) -> float:
        return unit_ball_volume(self.dim) * (self.outer**self.dim - self.inner**self.dim)

    def contains(self, x) -> np.ndarray:
        r = np.linalg.norm(as_points(x, self.dim) - self.center, axis=1)
        return (r >= self.inner) & (r < self.outer)

    def __repr__(self):
        return f"Shell(center={self.center.tolist()}, inner={self.inner!r}, outer={self.outer!r})"


# -- singular sets -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Hyperplane:
    """``{x : <normal, x> = offset}`` with a unit normal."""

    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        nrm = as_point(self.normal)
        if abs(np.linalg.norm(nrm) - 1.0) > 1e-12:
            raise InvalidParameter(f"hyperplane normal must have norm 1, got {np.linalg.norm(nrm)!r}")
        _frozen(self, "normal", nrm)
        _frozen(self, "offset", float(self.offset))

    codim = 1

    @property
    def dim(self) -> int:
        return self.normal.size

    def signed_distance(self, x) -> np.ndarray:
        return as_points(x, self.dim) @ self.normal - self.offset

    def distance(self, x) -> np.ndarray:
        return np.abs(self.signed_distance(x))


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        _frozen(self, "center", as_point(self.center))
        r = float(self.radius)
        if not (np.isfinite(r) and r > 0):
            raise InvalidParameter(f"sphere radius must be positive, got {self.radius}")
        _frozen(self, "radius", r)

    codim = 1

    @property
    def dim(self) -> int:
        return self.center.size

    def distance(self, x) -> np.ndarray:
        r = np.linalg.norm(as_points(x, self.dim) - self.center, axis=1)
        return np.abs(r - self.radius)


@dataclass(frozen=True, eq=False)
class PointSet:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InvalidParameter("a point set needs at least one point")
        for p in pts:
            as_point(p)
        pts.flags.writeable = False
        _frozen(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def codim(self) -> int:
        return self.dim

    def distance(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        d = np.linalg.norm(pts[:, None, :] - self.points[None, :, :], axis=2)
        return d.min(axis=1)

    def min_separation(self) -> float:
        if len(self.points) < 2:
            return np.inf
        d = np.linalg.norm(self.points[:, None, :] - self.points[None, :, :], axis=2)
        return float(d[np.triu_indices(len(self.points), 1)].min())


GeometricSet = Hyperplane | Sphere | PointSet


def distance_to_set(s: GeometricSet, x) -> float | np.ndarray:
    """Euclidean distance from ``x`` (one point or an ``(N, n)`` batch) to ``s``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != s.dim:
        raise DimensionMismatch(s.dim, x.shape[-1])
    d = s.distance(x)
    return float(d[0]) if x.ndim == 1 else d


# -- inclusions (1)-(4) of the homogeneity argument ----------------------------


@dataclass
class InclusionReport:
    """Sampled check of the four set inclusions behind the ratio estimate.

    ``a_in_e`` covers A_i ⊂ E_i ⊂ B(x^i, R); ``half_ball_in_cap`` covers
    B(x^i, R/2) ⊂ B(x^1, R) ∩ B(x^2, R).
    """

    x1: np.ndarray
    x2: np.ndarray
    R: float
    inclusion_1: bool
    inclusion_2: bool
    inclusion_3: bool
    inclusion_4: bool
    threshold: float
    n_samples: int = field(default=10_000)

    @property
    def all_hold(self) -> bool:
        return self.inclusion_1 and self.inclusion_2 and self.inclusion_3 and self.inclusion_4


def _uniform_in_ball(rng, center, radius, size):
    n = center.size
    g = rng.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return center + g * (radius * rng.random(size) ** (1.0 / n))[:, None]


def _in_ball(pts, center, radius):
    return np.linalg.norm(pts - center, axis=1) < radius


def proof_inclusions(x1, x2, R: float, n_samples: int = 10_000, seed: int = 0) -> InclusionReport:
    """Verify inclusions (1)-(4) by membership tests on uniform samples.

    (1), (2): ``B(xi,R) minus B(xj,R)`` lies in the shell
    ``B(xi,R) minus B(xi,R-d)``, and that shell lies in ``B(xi,R)``.
    (3), (4): ``B(xi,R/2)`` lies in both balls.  Analytically (3) and (4)
    hold as soon as ``R >= 2d``; ``threshold`` reports ``2d``.
    """
    x1 = as_point(x1)
    x2 = as_point(x2, x1.size)
    R = float(R)
    if not R > 0:
        raise InvalidParameter(f"R must be positive, got {R}")
    d = float(np.linalg.norm(x1 - x2))
    if d == 0.0:
        return InclusionReport(x1, x2, R, True, True, True, True, 0.0, 0)
    rng = np.random.default_rng(seed)
    inner = max(R - d, 0.0)

    def shell_inclusion(xi, xj):
        pts = _uniform_in_ball(rng, xi, R, n_samples)
        in_a = ~_in_ball(pts, xj, R)
        in_e = ~_in_ball(pts, xi, inner) if inner > 0 else np.ones(len(pts), bool)
        # every sample already lies in B(xi, R), so E_i ⊂ B(xi, R) holds by construction
        return bool(np.all(in_e[in_a]))

    def half_ball_inclusion(xi):
        pts = _uniform_in_ball(rng, xi, R / 2, n_samples)
        return bool(np.all(_in_ball(pts, x1, R) & _in_ball(pts, x2, R)))

    return InclusionReport(
        x1,
        x2,
        R,
        shell_inclusion(x1, x2),
        shell_inclusion(x2, x1),
        half_ball_inclusion(x1),
        half_ball_inclusion(x2),
        2 * d,
        n_samples,
    )
