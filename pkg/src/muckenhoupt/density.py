"""Analytic densities on R^n: constant, radial powers, products of radial
powers, powers of the distance to a set, and the exponential counterexample.

Every density is immutable.  ``eval`` works on a single point (returns a
float) or on an ``(N, n)`` batch (returns an array).  Values on the singular
set follow the extended-real convention: ``+inf`` where the exponent is
negative, ``0`` where it is positive.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import exp, log, log1p

import numpy as np
from scipy.special import ive

from .errors import DimensionMismatch, InvalidParameter, NotIntegrable
from .geometry import (
    Ball,
    Hyperplane,
    PointSet,
    Shell,
    Sphere,
    as_point,
    as_points,
    check_dim,
    sphere_area,
    unit_ball_volume,
)

MIN_CENTER_SEPARATION = 1e-9


class Membership(enum.Enum):
    MEMBER = "Member"
    NON_MEMBER = "NonMember"
    UNKNOWN = "Unknown"


def _set(obj, name, value):
    object.__setattr__(obj, name, value)


def _power(r: np.ndarray, beta: float) -> np.ndarray:
    """``r**beta`` with 0**negative = inf, 0**positive = 0, 0**0 = 1."""
    with np.errstate(divide="ignore"):
        return np.power(r, beta)


class Density:
    """Base class.  Subclasses define ``dim`` and ``_eval(points)``."""

    dim: int
    known_inhomogeneous = False

    def _eval(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(self.dim, x.shape[-1])
        out = self._eval(as_points(x, self.dim))
        return float(out[0]) if x.ndim == 1 else out

    __call__ = eval

    def dual_eval(self, x, p: float):
        """``rho(x) ** (-1/(p-1))``, mapping +inf to 0 and 0 to +inf."""
        if not p > 1:
            raise InvalidParameter(f"dual weight needs p > 1, got {p}")
        vals = self.eval(x)
        with np.errstate(divide="ignore"):
            return np.power(vals, -1.0 / (p - 1))

    def dual(self, p: float) -> "Density":
        """The dual weight ``rho**(-1/(p-1))`` as a density of the same family."""
        raise NotImplementedError

    # singular structure consumed by the integrators
    def point_singularities(self) -> list[tuple[np.ndarray, float]]:
        return []

    def surface_singularities(self) -> list[tuple[Hyperplane | Sphere, float]]:
        return []

    def cap_factor(self, pts: np.ndarray, index: int) -> np.ndarray:
        """``rho(x) / |x - c_index| ** beta_index`` near point singularity ``index``."""
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Constant(Density):
    value: float
    dim: int

    def __post_init__(self):
        v = float(self.value)
        if not (np.isfinite(v) and v > 0):
            raise InvalidParameter(f"constant density must be positive and finite, got {self.value}")
        _set(self, "value", v)
        _set(self, "dim", check_dim(self.dim))

    def _eval(self, pts):
        return np.full(len(pts), self.value)

    def dual(self, p):
        return Constant(self.value ** (-1.0 / (p - 1)), self.dim)


@dataclass(frozen=True, eq=False)
class RadialPower(Density):
    """``|x - center| ** beta``; locally integrable iff ``beta > -n``."""

    center: np.ndarray
    beta: float

    def __post_init__(self):
        c = as_point(self.center)
        _set(self, "center", c)
        _set(self, "beta", float(self.beta))
        n = c.size
        if not self.beta > -n:
            raise NotIntegrable(
                f"radial power exponent {self.beta} must exceed -n = {-n}",
                exponent=self.beta,
                limit=-n,
            )

    @property
    def dim(self):
        return self.center.size

    def _eval(self, pts):
        return _power(np.linalg.norm(pts - self.center, axis=1), self.beta)

    def dual(self, p):
        return _dual_radial(self.center, self.beta, p)

    def point_singularities(self):
        return [(self.center, self.beta)] if self.beta != 0 else []

    def cap_factor(self, pts, index):
        return np.ones(len(pts))


def _dual_radial(center, beta, p):
    b = -beta / (p - 1)
    n = center.size
    if not b > -n:
        raise NotIntegrable(
            f"dual weight non-integrable: exponent -beta/(p-1) = {b:g} must exceed -n = {-n}",
            exponent=b,
            limit=-n,
        )
    return RadialPower(center, b)


@dataclass(frozen=True, eq=False)
class ProductOfRadialPowers(Density):
    """``prod_i |x - c_i| ** beta_i`` over pairwise distinct centers."""

    factors: tuple

    def __post_init__(self):
        if len(self.factors) == 0:
            raise InvalidParameter("product density needs at least one factor")
        facs = []
        for c, b in self.factors:
            facs.append((as_point(c), float(b)))
        n = facs[0][0].size
        for c, _ in facs:
            if c.size != n:
                raise DimensionMismatch(n, c.size)
        for i in range(len(facs)):
            for j in range(i + 1, len(facs)):
                if np.linalg.norm(facs[i][0] - facs[j][0]) < MIN_CENTER_SEPARATION:
                    raise InvalidParameter(
                        f"product centers {i} and {j} closer than {MIN_CENTER_SEPARATION}"
                    )
        for c, b in facs:
            if not b > -n:
                raise NotIntegrable(f"factor exponent {b} must exceed -n = {-n}", exponent=b, limit=-n)
        neg = sum(b for _, b in facs if b < 0)
        if not neg > -n:
            raise NotIntegrable(
                f"sum of negative exponents {neg} must exceed -n = {-n}", exponent=neg, limit=-n
            )
        _set(self, "factors", tuple(facs))

    @property
    def dim(self):
        return self.factors[0][0].size

    @property
    def betas(self):
        return [b for _, b in self.factors]

    def _eval(self, pts):
        out = np.ones(len(pts))
        zero = np.zeros(len(pts), bool)
        pole = np.zeros(len(pts), bool)
        for c, b in self.factors:
            r = np.linalg.norm(pts - c, axis=1)
            hit = r == 0
            if b < 0:
                pole |= hit
            elif b > 0:
                zero |= hit
            out *= np.where(hit, 1.0, r**b if b else 1.0)
        out[zero] = 0.0
        out[pole] = np.inf
        return out

    def dual(self, p):
        duals = [(c, -b / (p - 1)) for c, b in self.factors]
        n = self.dim
        bad = [b for _, b in duals if not b > -n]
        neg = sum(b for _, b in duals if b < 0)
        if bad or not neg > -n:
            e = bad[0] if bad else neg
            raise NotIntegrable(
                f"dual weight non-integrable: exponent {e:g} must exceed -n = {-n}",
                exponent=e,
                limit=-n,
            )
        return ProductOfRadialPowers(tuple(duals))

    def point_singularities(self):
        return [(c, b) for c, b in self.factors if b != 0]

    def cap_factor(self, pts, index):
        sing = self.point_singularities()
        c0 = sing[index][0]
        out = np.ones(len(pts))
        for c, b in self.factors:
            if c is c0 or b == 0:
                continue
            out *= _power(np.linalg.norm(pts - c, axis=1), b)
        return out


@dataclass(frozen=True, eq=False)
class DistancePower(Density):
    """``dist(x, F) ** beta`` for a hyperplane, sphere, or finite point set."""

    set: Hyperplane | Sphere | PointSet
    beta: float

    def __post_init__(self):
        if not isinstance(self.set, (Hyperplane, Sphere, PointSet)):
            raise InvalidParameter(f"unsupported singular set {type(self.set).__name__}")
        b = float(self.beta)
        _set(self, "beta", b)
        check_dim(self.set.dim)
        if not b > -self.set.codim:
            raise NotIntegrable(
                f"distance power exponent {b} must exceed -codim = {-self.set.codim}",
                exponent=b,
                limit=-self.set.codim,
            )

    @property
    def dim(self):
        return self.set.dim

    def _eval(self, pts):
        return _power(self.set.distance(pts), self.beta)

    def dual(self, p):
        b = -self.beta / (p - 1)
        if not b > -self.set.codim:
            raise NotIntegrable(
                f"dual weight non-integrable: exponent -beta/(p-1) = {b:g} "
                f"must exceed -codim = {-self.set.codim}",
                exponent=b,
                limit=-self.set.codim,
            )
        return DistancePower(self.set, b)

    def point_singularities(self):
        if isinstance(self.set, PointSet) and self.beta != 0:
            return [(p, self.beta) for p in self.set.points]
        return []

    def surface_singularities(self):
        if isinstance(self.set, (Hyperplane, Sphere)) and self.beta != 0:
            return [(self.set, self.beta)]
        return []

    def cap_factor(self, pts, index):
        c = self.set.points[index]
        r = np.linalg.norm(pts - c, axis=1)
        d = self.set.distance(pts)
        with np.errstate(invalid="ignore", divide="ignore"):
            return _power(d / r, self.beta)


@dataclass(frozen=True, eq=False)
class Exponential(Density):
    """``exp(rate * <direction, x>)``: locally fine, globally not homogeneous."""

    direction: np.ndarray
    rate: float

    known_inhomogeneous = True

    def __post_init__(self):
        v = as_point(self.direction)
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise InvalidParameter("exponential direction must be a unit vector")
        _set(self, "direction", v)
        r = float(self.rate)
        if not np.isfinite(r):
            raise InvalidParameter("exponential rate must be finite")
        _set(self, "rate", r)

    @property
    def dim(self):
        return self.direction.size

    def _eval(self, pts):
        return np.exp(self.rate * (pts @ self.direction))

    def dual(self, p):
        return Exponential(self.direction, -self.rate / (p - 1))


# -- A_p membership ----------------------------------------------------------


def _power_weight_member(beta: float, codim: int, p: float) -> bool:
    """``dist**beta`` to a flat set of codimension ``codim``: A_p iff -codim < beta < codim(p-1)
    (and -codim < beta <= 0 for A_1)."""
    if p == 1:
        return -codim < beta <= 0
    return -codim < beta < codim * (p - 1)


def ap_membership(d: Density, p: float) -> Membership:
    """Analytic A_p verdict; ``Unknown`` where no criterion is available."""
    if not p >= 1:
        raise InvalidParameter(f"A_p needs p >= 1, got {p}")
    if isinstance(d, Constant):
        return Membership.MEMBER
    if isinstance(d, Exponential):
        return Membership.MEMBER if d.rate == 0 else Membership.NON_MEMBER
    if isinstance(d, RadialPower):
        ok = _power_weight_member(d.beta, d.dim, p)
        return Membership.MEMBER if ok else Membership.NON_MEMBER
    if isinstance(d, ProductOfRadialPowers):
        # locally each factor, at infinity the total exponent
        n = d.dim
        betas = d.betas + [sum(d.betas)]
        if all(_power_weight_member(b, n, p) for b in betas):
            return Membership.MEMBER
        return Membership.UNKNOWN
    if isinstance(d, DistancePower):
        s = d.set
        if isinstance(s, PointSet):
            # near each point and at infinity the weight is a radial power
            ok = _power_weight_member(d.beta, d.dim, p)
        elif isinstance(s, Hyperplane):
            ok = _power_weight_member(d.beta, 1, p)
        else:
            # transversal behaviour near the sphere, radial power of |x| at infinity
            ok = _power_weight_member(d.beta, 1, p) and _power_weight_member(d.beta, d.dim, p)
        return Membership.MEMBER if ok else Membership.UNKNOWN
    return Membership.UNKNOWN


# -- closed forms ------------------------------------------------------------


def _interval_power_integral(a: float, b: float, beta: float) -> float:
    """int_a^b |t|**beta dt for beta > -1."""

    def F(t):
        return np.sign(t) * abs(t) ** (beta + 1) / (beta + 1)

    return float(F(b) - F(a))


def _log_exp_ball(n: int, k: float, R: float) -> float:
    """log of int_{|y|<R} exp(k y_1) dy."""
    if k == 0:
        return log(unit_ball_volume(n)) + n * log(R)
    a = abs(k) * R
    return 0.5 * n * log(2 * np.pi * R / abs(k)) + log(ive(n / 2, a)) + a


def _log_diff(lo: float, la: float) -> float:
    """log(exp(la) - exp(lo)) for la > lo."""
    return la + log1p(-exp(lo - la))


def log_mass_parts(d: Density, region) -> tuple[float, float] | None:
    """Split the log of an exact region mass into a location part and a shape part.

    Two regions of equal shape then give mass ratios as the exponential of the
    location difference alone, with no cancellation in the shape part.
    """
    if region.dim != d.dim:
        raise DimensionMismatch(d.dim, region.dim)
    n = d.dim
    lo, hi = region.inner, region.outer
    if isinstance(d, Constant):
        shape = log(unit_ball_volume(n)) + n * log(hi) + log1p(-((lo / hi) ** n))
        return log(d.value), shape
    if isinstance(d, Exponential):
        shift = d.rate * float(region.center @ d.direction)
        la = _log_exp_ball(n, d.rate, hi)
        if lo == 0:
            return shift, la
        return shift, _log_diff(_log_exp_ball(n, d.rate, lo), la)
    if isinstance(d, RadialPower):
        off = region.center - d.center
        k = n + d.beta
        if not np.any(off):
            shape = log(sphere_area(n) / k) + k * log(hi) + log1p(-((lo / hi) ** k))
            return 0.0, shape
        if n == 1:
            t = float(off[0])
            m = _interval_power_integral(t - hi, t + hi, d.beta)
            if lo > 0:
                m -= _interval_power_integral(t - lo, t + lo, d.beta)
            return 0.0, log(m)
    return None


def closed_form_mass(d: Density, region) -> float | None:
    """Exact mass of a ball or shell when an elementary formula exists."""
    parts = log_mass_parts(d, region)
    if parts is None:
        return None
    with np.errstate(over="ignore"):
        return float(np.exp(parts[0] + parts[1]))


def closed_form_ball_mass(d: Density, b: Ball) -> float | None:
    return closed_form_mass(d, b)


__all__ = [
    "Density",
    "Constant",
    "RadialPower",
    "ProductOfRadialPowers",
    "DistancePower",
    "Exponential",
    "Membership",
    "ap_membership",
    "closed_form_ball_mass",
    "closed_form_mass",
    "log_mass_parts",
    "Shell",
]
