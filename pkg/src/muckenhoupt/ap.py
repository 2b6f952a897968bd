"""Empirical A_p products, A_p-constant scans, doubling ratios and subset-ratio
exponents for a density."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import exp, log

import numpy as np

from .density import Constant, Density, Membership, ap_membership, log_mass_parts
from .errors import InvalidParameter, NotIntegrable
from .geometry import Ball, Hyperplane, Shell, Sphere, as_point
from .integrate import MassEstimate, Method, derive_seed, mass


def _ball_dict(b: Ball):
    return {"center": b.center.tolist(), "radius": b.radius}


def _safe_exp(x: float) -> float:
    return exp(x) if x < 709.0 else float("inf")


def _log_average(d: Density, b: Ball):
    if isinstance(d, Constant):
        return log(d.value)
    parts = log_mass_parts(d, b)
    if parts is None:
        return None
    return parts[0] + parts[1] - log(b.volume)


@dataclass
class ApProduct:
    ball: Ball
    p: float
    avg_rho: MassEstimate
    avg_dual: MassEstimate
    product: float
    std_error: float

    def to_dict(self):
        return {
            **_ball_dict(self.ball),
            "p": self.p,
            "avg_rho": self.avg_rho.value,
            "avg_rho_se": self.avg_rho.std_error,
            "avg_dual": self.avg_dual.value,
            "avg_dual_se": self.avg_dual.std_error,
            "product": self.product,
            "std_error": self.std_error,
        }


def _normalized(m: MassEstimate, vol: float) -> MassEstimate:
    return MassEstimate(m.value / vol, m.std_error / vol, m.n_samples, m.method, resampled=m.resampled)


def ap_product(
    d: Density,
    b: Ball,
    p: float,
    n_samples: int = 100_000,
    seed: int = 0,
    *,
    workers: int = 1,
    closed_form: bool = True,
) -> ApProduct:
    """``avg_B(rho) * avg_B(rho**(-1/(p-1)))**(p-1)`` with a propagated MC error.

    Raises :class:`NotIntegrable` when the dual weight is not locally
    integrable; the message names the failing exponent.
    """
    if not p > 1:
        raise InvalidParameter(f"A_p product needs p > 1, got {p}")
    dual = d.dual(p)
    vol = b.volume
    if closed_form:
        la, lb = _log_average(d, b), _log_average(dual, b)
        if la is not None and lb is not None:
            a1 = MassEstimate(_safe_exp(la), 0.0, 0, Method.CLOSED_FORM)
            a2 = MassEstimate(_safe_exp(lb), 0.0, 0, Method.CLOSED_FORM)
            return ApProduct(b, p, a1, a2, _safe_exp(la + (p - 1) * lb), 0.0)
    m1 = mass(d, b, n_samples, derive_seed(seed, 0), workers=workers, closed_form=closed_form)
    m2 = mass(dual, b, n_samples, derive_seed(seed, 1), workers=workers, closed_form=closed_form)
    a1, a2 = _normalized(m1, vol), _normalized(m2, vol)
    prod = a1.value * a2.value ** (p - 1)
    rel = np.hypot(a1.std_error / a1.value, (p - 1) * a2.std_error / a2.value)
    return ApProduct(b, p, a1, a2, prod, float(prod * rel))


@dataclass
class BallFamily:
    """Centers crossed with radii; iteration is center-major."""

    centers: list
    radii: list

    def __post_init__(self):
        if not self.centers or not self.radii:
            raise InvalidParameter("ball family must be nonempty")
        self.centers = [as_point(c) for c in self.centers]
        self.radii = sorted(float(r) for r in self.radii)

    def balls(self):
        for c in self.centers:
            for r in self.radii:
                yield Ball(c, r)

    def __len__(self):
        return len(self.centers) * len(self.radii)


def _anchor_points(d: Density) -> list[np.ndarray]:
    pts = [c for c, _ in d.point_singularities()]
    for s, _ in d.surface_singularities():
        if isinstance(s, Hyperplane):
            pts.append(s.offset * s.normal)
        elif isinstance(s, Sphere):
            e1 = np.zeros(s.dim)
            e1[0] = 1.0
            pts.append(s.center + s.radius * e1)
    return pts


def default_family(d: Density, j_min: int = -6, j_max: int = 12, eps: float = 1e-6) -> BallFamily:
    """Balls at and near every singularity across log-spaced scales, plus a
    fixed far field."""
    n = d.dim
    e1 = np.zeros(n)
    e1[0] = 1.0
    anchors = _anchor_points(d)
    centers = []
    for c in anchors:
        centers.append(c)
        centers += [c + 10**k * eps * e1 for k in range(7)]
    origin = anchors[0] if anchors else np.zeros(n)
    if not anchors:
        centers.append(origin)
    centers += [origin + s * 10.0**k * e1 for k in (1, 2, 3, 4) for s in (1, -1)]
    return BallFamily(centers, [2.0**j for j in range(j_min, j_max + 1)])


@dataclass
class ApRecord:
    ball: Ball
    product: float | None
    std_error: float | None
    error: str | None = None

    def to_dict(self):
        return {**_ball_dict(self.ball), "product": self.product, "std_error": self.std_error, "error": self.error}


@dataclass
class ApScan:
    p: float
    sup_product: float
    argmax: Ball | None
    records: list
    violated: bool
    membership: Membership

    @property
    def verdict(self) -> str:
        return "A_p violated (empirical)" if self.violated else "A_p bounded (empirical)"

    @property
    def consistent(self) -> bool:
        """Empirical verdict agrees with the analytic one (vacuous when Unknown)."""
        if self.membership is Membership.UNKNOWN:
            return True
        return self.violated == (self.membership is Membership.NON_MEMBER)

    def to_dict(self):
        return {
            "p": self.p,
            "sup_product": self.sup_product,
            "argmax": _ball_dict(self.argmax) if self.argmax is not None else None,
            "verdict": self.verdict,
            "membership": self.membership.value,
            "consistent": self.consistent,
            "records": [r.to_dict() for r in self.records],
        }


def estimate_ap_constant(
    d: Density,
    p: float,
    family: BallFamily | None = None,
    n_samples: int = 20_000,
    seed: int = 0,
    *,
    workers: int = 1,
) -> ApScan:
    """Sup of the A_p product over a ball family.

    Non-integrable duals and infinite products are recorded as unbounded
    evidence.  The verdict is "violated" on any such record, or when the sup
    over the last three radius decades is at least twice the sup below them.
    """
    family = family or default_family(d)
    records = []
    for i, b in enumerate(family.balls()):
        try:
            ap = ap_product(d, b, p, n_samples, derive_seed(seed, i), workers=workers)
        except NotIntegrable as exc:
            records.append(ApRecord(b, None, None, str(exc)))
            continue
        if not np.isfinite(ap.product):
            records.append(ApRecord(b, None, None, "A_p product overflowed"))
            continue
        records.append(ApRecord(b, ap.product, ap.std_error))

    finite = [r for r in records if r.product is not None]
    unbounded = len(finite) < len(records)
    if finite:
        best = max(finite, key=lambda r: r.product)
        sup, argmax = best.product, best.ball
    else:
        sup, argmax = float("inf"), None
    r_cut = max(family.radii) / 1000.0
    early = [r.product for r in finite if r.ball.radius <= r_cut]
    doubled = bool(early) and sup >= 2 * max(early)
    return ApScan(p, sup, argmax, records, unbounded or doubled, ap_membership(d, p))


@dataclass
class DoublingReport:
    ball: Ball
    ratio: float
    std_error: float
    bound: float | None = None

    @property
    def within_bound(self) -> bool | None:
        if self.bound is None:
            return None
        return self.ratio <= self.bound + 3 * self.std_error

    def to_dict(self):
        return {**_ball_dict(self.ball), "ratio": self.ratio, "std_error": self.std_error, "bound": self.bound}


def doubling_bound(n: int, p: float, C: float) -> float:
    return 2.0 ** (n * p) * C**p


def doubling_ratio(
    d: Density,
    b: Ball,
    n_samples: int = 100_000,
    seed: int = 0,
    *,
    C: float | None = None,
    p: float | None = None,
    workers: int = 1,
    closed_form: bool = True,
) -> DoublingReport:
    """``rho(2B) / rho(B)``, with the bound ``2**(np) C**p`` when (C, p) are given."""
    big = b.scaled(2.0)
    bound = doubling_bound(d.dim, p, C) if (C is not None and p is not None) else None
    if closed_form:
        p_small, p_big = log_mass_parts(d, b), log_mass_parts(d, big)
        if p_small is not None and p_big is not None:
            ratio = exp((p_big[0] - p_small[0]) + (p_big[1] - p_small[1]))
            return DoublingReport(b, ratio, 0.0, bound)
    m_big = mass(d, big, n_samples, derive_seed(seed, 0), workers=workers, closed_form=closed_form)
    m_small = mass(d, b, n_samples, derive_seed(seed, 1), workers=workers, closed_form=closed_form)
    ratio = m_big.value / m_small.value
    se = ratio * np.hypot(m_big.std_error / m_big.value, m_small.std_error / m_small.value)
    return DoublingReport(b, ratio, float(se), bound)


@dataclass
class SubsetPoint:
    theta: float
    volume_ratio: float
    mass_ratio: float
    std_error: float
    lower_bound_holds: bool | None = None

    def to_dict(self):
        return {
            "theta": self.theta,
            "volume_ratio": self.volume_ratio,
            "mass_ratio": self.mass_ratio,
            "std_error": self.std_error,
            "lower_bound_holds": self.lower_bound_holds,
        }


@dataclass
class SubsetScan:
    """Shell-to-ball mass ratios and the fitted power law
    ``mass_ratio ~ c_tilde * volume_ratio**gamma``.

    ``c_tilde`` is the least-squares intercept; ``c_tilde_sup`` is the
    smallest constant for which the power law bounds every scanned point.
    """

    ball: Ball
    points: list
    gamma: float | None
    c_tilde: float | None
    c_tilde_sup: float | None
    fit_thetas: list = field(default_factory=list)

    def to_dict(self):
        return {
            **_ball_dict(self.ball),
            "gamma": self.gamma,
            "c_tilde": self.c_tilde,
            "c_tilde_sup": self.c_tilde_sup,
            "fit_thetas": self.fit_thetas,
            "points": [pt.to_dict() for pt in self.points],
        }


def subset_ratio_scan(
    d: Density,
    b: Ball,
    thetas,
    n_samples: int = 100_000,
    seed: int = 0,
    *,
    C: float | None = None,
    p: float | None = None,
    workers: int = 1,
    closed_form: bool = True,
) -> SubsetScan:
    """Scan the outer shells ``E = {(1-theta)R <= |x-c| < R}`` of ``b``.

    The exponent fit uses only ``theta <= 1/2`` when at least two such points
    exist.  With (C, p) given, each point also checks
    ``|E|/|B| <= C (rho(E)/rho(B))**(1/p)``.
    """
    thetas = [float(t) for t in thetas]
    for t in thetas:
        if not 0 < t < 1:
            raise InvalidParameter(f"shell fraction must lie in (0, 1), got {t}")
    n = d.dim
    R = b.radius
    whole = mass(d, b, n_samples, derive_seed(seed, 0), workers=workers, closed_form=closed_form)
    points = []
    for i, t in enumerate(thetas):
        shell = Shell(b.center, (1 - t) * R, R)
        m = mass(d, shell, n_samples, derive_seed(seed, i + 1), workers=workers, closed_form=closed_form)
        ratio = m.value / whole.value
        se = ratio * np.hypot(m.std_error / m.value, whole.std_error / whole.value) if m.value > 0 else 0.0
        vol_ratio = 1.0 - (1.0 - t) ** n
        holds = None
        if C is not None and p is not None:
            holds = bool(vol_ratio <= C * (ratio + 3 * se) ** (1.0 / p) * (1 + 1e-12))
        points.append(SubsetPoint(t, vol_ratio, ratio, float(se), holds))

    fit = [pt for pt in points if pt.theta <= 0.5]
    if len({pt.theta for pt in fit}) < 2:
        fit = points
    gamma = c_tilde = c_sup = None
    if len({pt.theta for pt in fit}) >= 2 and all(pt.mass_ratio > 0 for pt in fit):
        x = np.log([pt.volume_ratio for pt in fit])
        y = np.log([pt.mass_ratio for pt in fit])
        slope, intercept = np.polyfit(x, y, 1)
        gamma, c_tilde = float(slope), float(np.exp(intercept))
        c_sup = float(max(pt.mass_ratio / pt.volume_ratio**gamma for pt in points))
    return SubsetScan(b, points, gamma, c_tilde, c_sup, [pt.theta for pt in fit])
