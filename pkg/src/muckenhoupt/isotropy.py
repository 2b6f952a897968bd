"""Line masses along rays, their ratio for two observers looking in two
directions, and the closed-form sandwich for ``|x - x0|**(-alpha)``."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .density import Density, RadialPower
from .errors import InvalidParameter
from .geometry import as_point
from .homogeneity import trend_slope
from .integrate import line_mass

DEFAULT_TOL = 0.05


class IsotropyVerdict(enum.Enum):
    ISOTROPIC = "Isotropic"
    NOT_ISOTROPIC = "NotIsotropic"
    INCONCLUSIVE = "Inconclusive"


def lemma_bounds(x, x0, alpha: float, R: float) -> tuple[float, float]:
    """Lower and upper bounds on the line mass of ``|y - x0|**(-alpha)`` along any
    ray of length ``R > |x - x0|`` starting at ``x``.

    lower = [(D + R)^(1-a) - D^(1-a)] / (1-a)
    upper = [D^(1-a) + (R - D)^(1-a)] / (1-a),   D = |x - x0|
    """
    if not 0 < alpha < 1:
        raise InvalidParameter(f"alpha must lie in (0, 1), got {alpha}")
    x = as_point(x)
    D = float(np.linalg.norm(x - as_point(x0, x.size)))
    if not R > D:
        raise InvalidParameter(f"outside lemma regime: need R > |x - x0| = {D}, got R = {R}")
    k = 1.0 - alpha
    lower = ((D + R) ** k - D**k) / k
    upper = (D**k + (R - D) ** k) / k
    return lower, upper


def _singular_alpha(d: Density):
    if isinstance(d, RadialPower) and -1 < d.beta < 0:
        return -d.beta
    return None


@dataclass
class LineMassResult:
    x: np.ndarray
    v: np.ndarray
    R: float
    lam: float
    err_bound: float
    lower: float | None = None
    upper: float | None = None

    @property
    def within_bounds(self) -> bool | None:
        if self.lower is None:
            return None
        slack = 1e-6 * self.upper
        return self.lower - slack <= self.lam <= self.upper + slack


def line_mass_result(d: Density, x, v, R: float, *, abs_tol=1e-10, rel_tol=1e-8) -> LineMassResult:
    """Line mass plus the sandwich bounds when ``d`` is ``|x - x0|**(-alpha)``
    with ``0 < alpha < 1`` and ``R > |x - x0|``."""
    x = as_point(x, d.dim)
    v = as_point(v, d.dim)
    m = line_mass(d, x, v, R, abs_tol=abs_tol, rel_tol=rel_tol)
    res = LineMassResult(x, v, float(R), m.value, m.err_bound)
    alpha = _singular_alpha(d)
    if alpha is not None and R > np.linalg.norm(x - d.center):
        res.lower, res.upper = lemma_bounds(x, d.center, alpha, R)
    return res


@dataclass
class IsotropyCurve:
    x1: np.ndarray
    v1: np.ndarray
    x2: np.ndarray
    v2: np.ndarray
    radii: list
    lambda1: list
    lambda2: list
    ratios: list
    bracket_low: list
    bracket_high: list
    verdict: IsotropyVerdict
    tol: float = DEFAULT_TOL

    header = ["R", "lambda1", "lambda2", "ratio", "bracket_low", "bracket_high"]

    def rows(self):
        return [list(r) for r in zip(self.radii, self.lambda1, self.lambda2, self.ratios, self.bracket_low, self.bracket_high)]

    @property
    def bracket_width(self) -> list:
        return [
            None if lo is None else hi - lo for lo, hi in zip(self.bracket_low, self.bracket_high)
        ]

    def to_dict(self):
        return {
            "x1": self.x1.tolist(),
            "v1": self.v1.tolist(),
            "x2": self.x2.tolist(),
            "v2": self.v2.tolist(),
            "verdict": self.verdict.value,
            "tol": self.tol,
            "points": [dict(zip(self.header, row)) for row in self.rows()],
        }


def default_isotropy_schedule(d: Density, x1, x2) -> list[float]:
    anchors = [c for c, _ in d.point_singularities()]
    if anchors:
        scale = max(float(np.linalg.norm(x - c)) for c in anchors for x in (x1, x2))
    else:
        scale = float(np.linalg.norm(np.asarray(x1) - np.asarray(x2)))
    scale = scale if scale > 0 else 1.0
    return [scale * 10.0**k for k in range(1, 5)]


def classify_isotropy(radii, ratios, tol=DEFAULT_TOL) -> IsotropyVerdict:
    """Isotropic when the deviation at the largest radius is within ``tol`` and
    the deviations trend down (or vanish); NotIsotropic when it exceeds ``tol``
    with no downward trend."""
    dev = np.abs(np.asarray(ratios, float) - 1.0)
    tail = dev[-1:]
    slope = trend_slope(radii, dev)
    decreasing = slope < -1e-12 * max(1.0, float(dev.max()))
    flat = bool(np.all(dev <= 1e-9))
    if np.all(tail <= tol) and (decreasing or flat):
        return IsotropyVerdict.ISOTROPIC
    if np.all(tail > tol) and not decreasing:
        return IsotropyVerdict.NOT_ISOTROPIC
    return IsotropyVerdict.INCONCLUSIVE


def isotropy_ratio_curve(
    d: Density,
    ray1,
    ray2,
    schedule=None,
    *,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-8,
    tol: float = DEFAULT_TOL,
) -> IsotropyCurve:
    """``lambda(x1, v1, R) / lambda(x2, v2, R)`` over a radius schedule.

    For ``|x - x0|**(-alpha)`` densities each point also carries the bracket
    ``[lower1/upper2, upper1/lower2]`` built from :func:`lemma_bounds`.
    """
    x1, v1 = (as_point(a, d.dim) for a in ray1)
    x2, v2 = (as_point(a, d.dim) for a in ray2)
    radii = [float(R) for R in (schedule or default_isotropy_schedule(d, x1, x2))]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidParameter("radius schedule must be strictly increasing")
    lam1, lam2, ratios, lo, hi = [], [], [], [], []
    for R in radii:
        r1 = line_mass_result(d, x1, v1, R, abs_tol=abs_tol, rel_tol=rel_tol)
        r2 = line_mass_result(d, x2, v2, R, abs_tol=abs_tol, rel_tol=rel_tol)
        lam1.append(r1.lam)
        lam2.append(r2.lam)
        ratios.append(r1.lam / r2.lam)
        if r1.lower is not None and r2.lower is not None:
            lo.append(r1.lower / r2.upper)
            hi.append(r1.upper / r2.lower)
        else:
            lo.append(None)
            hi.append(None)
    verdict = classify_isotropy(radii, ratios, tol)
    return IsotropyCurve(x1, v1, x2, v2, radii, lam1, lam2, ratios, lo, hi, verdict, tol)
