"""Two observers weighing balls of growing radius: mass-ratio curves, the
convergence envelope ``K [1 - (1 - d/R)^n]^gamma`` and homogeneity verdicts."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from math import exp

import numpy as np

from .density import Density, log_mass_parts
from .errors import InvalidParameter
from .geometry import Ball, as_point
from .integrate import derive_seed, mass_pair

DEFAULT_TOL = 0.02


class Verdict(enum.Enum):
    HOMOGENEOUS = "Homogeneous"
    NOT_HOMOGENEOUS = "NotHomogeneous"
    INCONCLUSIVE = "Inconclusive"


def envelope(n: int, dist: float, R, K: float, gamma: float):
    """``K * (1 - (1 - dist/R)**n) ** gamma``, valid for ``R > dist > 0``."""
    R_arr = np.asarray(R, dtype=float)
    if not (dist > 0 and K > 0 and gamma > 0):
        raise InvalidParameter(f"envelope needs dist, K, gamma > 0; got {dist}, {K}, {gamma}")
    if np.any(R_arr <= dist):
        raise InvalidParameter(f"envelope needs R > dist = {dist}")
    out = K * (-np.expm1(n * np.log1p(-dist / R_arr))) ** gamma
    return float(out) if out.ndim == 0 else out


def _shape(n, dist, R):
    return -np.expm1(n * np.log1p(-dist / np.asarray(R, dtype=float)))


def default_schedule(dist: float, count: int = 8) -> list[float]:
    return [4.0 * dist * 2.0**j for j in range(count)]


def trend_slope(radii, values) -> float:
    """Least-squares slope of ``values`` against ``log R``."""
    x = np.log(np.asarray(radii, float))
    y = np.asarray(values, float)
    if len(x) < 2:
        return 0.0
    x = x - x.mean()
    return float((x @ (y - y.mean())) / (x @ x))


@dataclass
class EnvelopeFit:
    K: float | None
    gamma: float | None
    max_residual: float
    holds: bool
    status: str
    n_signal: int

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class RatioCurve:
    x1: np.ndarray
    x2: np.ndarray
    radii: list
    ratios: list
    std_errors: list
    mass1: list = field(default_factory=list)
    mass2: list = field(default_factory=list)
    verdict: Verdict = Verdict.INCONCLUSIVE
    fit: EnvelopeFit | None = None
    tol: float = DEFAULT_TOL

    @property
    def dim(self) -> int:
        return self.x1.size

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(self.x1 - self.x2))

    @property
    def deviations(self) -> np.ndarray:
        return np.abs(np.asarray(self.ratios) - 1.0)

    @property
    def envelope(self) -> list:
        """Fitted envelope per radius; ``None`` entries when nothing was fitted."""
        if self.fit is None or self.fit.K is None:
            return [None] * len(self.radii)
        shape = _shape(self.dim, self.distance, self.radii)
        return [float(v) for v in self.fit.K * shape**self.fit.gamma]

    def rows(self):
        env = self.envelope
        dev = self.deviations
        return [
            [R, r, s, e, a]
            for R, r, s, e, a in zip(self.radii, self.ratios, self.std_errors, env, dev)
        ]

    header = ["R", "ratio", "std_error", "envelope", "abs_ratio_minus_1"]

    def to_dict(self):
        return {
            "x1": self.x1.tolist(),
            "x2": self.x2.tolist(),
            "verdict": self.verdict.value,
            "tol": self.tol,
            "fit": self.fit.to_dict() if self.fit else None,
            "points": [dict(zip(self.header, row)) for row in self.rows()],
        }


def classify(radii, ratios, std_errors, tol=DEFAULT_TOL) -> Verdict:
    """Verdict from the tail of a ratio curve.

    Homogeneous: the last three deviations are within ``max(tol, 3 sigma)``
    and the deviations trend down (or are all noise / exactly zero).
    NotHomogeneous: the last three deviations exceed both ``tol`` and
    ``10 sigma`` and show no downward trend.
    """
    dev = np.abs(np.asarray(ratios, float) - 1.0)
    sig = np.asarray(std_errors, float)
    tail, tail_sig = dev[-3:], sig[-3:]
    slope = trend_slope(radii, dev)
    decreasing = slope < -1e-12 * max(1.0, float(dev.max()))
    noise_only = bool(np.all(tail <= 3 * tail_sig)) and np.any(tail_sig > 0)
    flat_zero = bool(np.all(dev <= 1e-12))
    if np.all(tail <= np.maximum(tol, 3 * tail_sig)) and (decreasing or noise_only or flat_zero):
        return Verdict.HOMOGENEOUS
    if np.all(tail > tol) and np.all(tail >= 10 * tail_sig) and not decreasing:
        return Verdict.NOT_HOMOGENEOUS
    return Verdict.INCONCLUSIVE


def ratio_curve(
    d: Density,
    x1,
    x2,
    schedule=None,
    n_samples: int = 1_000_000,
    seed: int = 0,
    *,
    workers: int = 1,
    tol: float = DEFAULT_TOL,
    closed_form: bool = True,
) -> RatioCurve:
    """``M1(R) / M2(R)`` for balls about ``x1`` and ``x2``.

    Closed forms are used when both masses have one; otherwise both balls are
    integrated from one shared sample cloud and the ratio error comes from
    first-order propagation including their covariance.
    """
    x1 = as_point(x1, d.dim)
    x2 = as_point(x2, d.dim)
    dist = float(np.linalg.norm(x1 - x2))
    if schedule is None:
        schedule = default_schedule(dist) if dist > 0 else [2.0**j for j in range(8)]
    radii = [float(R) for R in schedule]
    if len(radii) == 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidParameter("radius schedule must be nonempty and strictly increasing")
    if dist > 0 and not radii[0] > 2 * dist:
        raise InvalidParameter(f"first radius {radii[0]} must exceed 2|x1-x2| = {2 * dist}")

    curve = RatioCurve(x1, x2, radii, [], [], tol=tol)
    for j, R in enumerate(radii):
        b1, b2 = Ball(x1, R), Ball(x2, R)
        if dist == 0:
            curve.ratios.append(1.0)
            curve.std_errors.append(0.0)
            curve.mass1.append(None)
            curve.mass2.append(None)
            continue
        p1 = log_mass_parts(d, b1) if closed_form else None
        p2 = log_mass_parts(d, b2) if closed_form else None
        if p1 is not None and p2 is not None:
            curve.ratios.append(exp((p1[0] - p2[0]) + (p1[1] - p2[1])))
            curve.std_errors.append(0.0)
            curve.mass1.append(_safe_exp(p1[0] + p1[1]))
            curve.mass2.append(_safe_exp(p2[0] + p2[1]))
            continue
        m1, m2, cov = mass_pair(d, b1, b2, n_samples, derive_seed(seed, j), workers=workers)
        r = m1.value / m2.value
        rel_var = (
            (m1.std_error / m1.value) ** 2
            + (m2.std_error / m2.value) ** 2
            - 2 * cov / (m1.value * m2.value)
        )
        curve.ratios.append(r)
        curve.std_errors.append(float(abs(r) * np.sqrt(max(rel_var, 0.0))))
        curve.mass1.append(m1.value)
        curve.mass2.append(m2.value)

    curve.verdict = classify(radii, curve.ratios, curve.std_errors, tol)
    if dist > 0:
        curve.fit = fit_envelope(curve)
    return curve


def _safe_exp(x):
    return exp(x) if x < 709.0 else float("inf")


def fit_envelope(curve: RatioCurve, min_points: int = 4) -> EnvelopeFit:
    """Fit ``log|ratio - 1| = log K + gamma log[1 - (1 - d/R)^n]`` on the points
    whose deviation exceeds 3 sigma.

    With fewer than ``min_points`` such points the status is Inconclusive and
    the bound degenerates to the noise band: every deviation must stay within
    3 sigma.
    """
    dev = curve.deviations
    sig = np.asarray(curve.std_errors, float)
    shape = _shape(curve.dim, curve.distance, curve.radii)
    signal = (dev > 3 * sig) & (dev > 0)
    n_signal = int(signal.sum())
    if n_signal < min_points:
        resid = dev - 3 * sig
        return EnvelopeFit(None, None, float(resid.max()), bool(np.all(resid <= 0)), "Inconclusive", n_signal)
    gamma, logK = np.polyfit(np.log(shape[signal]), np.log(dev[signal]), 1)
    K = float(np.exp(logK))
    env = K * shape**gamma
    resid = dev - env
    holds = bool(np.all(dev <= env + 3 * sig + 1e-9 * env))
    return EnvelopeFit(K, float(gamma), float(resid.max()), holds, "Fitted", n_signal)
