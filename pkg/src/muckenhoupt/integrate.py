"""Masses of balls and shells, and line masses along rays.

Ball/shell masses come from closed forms when available, otherwise from a
stratified Monte Carlo estimator that flattens point and surface
singularities by importance sampling.  Samples are generated in fixed-size
chunks; every chunk owns an independent counter-based stream keyed by
``(seed, stratum, chunk)`` and chunk statistics are merged in index order,
so the result does not depend on the number of workers.
"""
from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .density import Density, closed_form_mass
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    LambdaUndefined,
    SingularHitError,
)
from .geometry import (
    Ball,
    Hyperplane,
    Shell,
    Sphere,
    as_point,
    sphere_area,
    unit_ball_volume,
)

CHUNK_SIZE = 1 << 15
MIN_SAMPLES = 100
MAX_RESAMPLE_FRACTION = 1e-6

Region = Ball | Shell


class Method(enum.Enum):
    CLOSED_FORM = "ClosedForm"
    MONTE_CARLO = "MonteCarlo"
    STRATIFIED_MC = "StratifiedMC"
    QUADRATURE = "Quadrature"


@dataclass
class MassEstimate:
    value: float
    std_error: float
    n_samples: int
    method: Method
    err_bound: float = 0.0
    resampled: int = 0

    def to_dict(self):
        return {
            "value": self.value,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "method": self.method.value,
            "err_bound": self.err_bound,
        }


def chunk_rng(seed: int, *key: int) -> np.random.Generator:
    """Philox stream for one chunk, keyed by the master seed and chunk coordinates."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """Deterministic 64-bit child seed, used to decorrelate sibling estimates."""
    ss = np.random.SeedSequence(int(seed) & 0xFFFF_FFFF_FFFF_FFFF, spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])


# -- sampling primitives -----------------------------------------------------


def _directions(rng, size, n):
    g = rng.standard_normal((size, n))
    norm = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero normal vector has probability zero; keep it finite anyway
    norm[norm == 0] = 1.0
    return g / norm


def _radial_power_radius(u, lo, hi, k):
    """Inverse CDF of a radius with density proportional to t**(k-1) on [lo, hi)."""
    return (lo**k + u * (hi**k - lo**k)) ** (1.0 / k)


def sample_uniform(region: Region, rng: np.random.Generator, size: int = 1) -> np.ndarray:
    """``size`` points uniform in a ball or shell, as an ``(size, n)`` array."""
    n = region.dim
    t = _radial_power_radius(rng.random(size), region.inner, region.outer, n)
    return region.center + _directions(rng, size, n) * t[:, None]


def _abs_power_sample(u, lo, hi, beta):
    """Inverse CDF for density proportional to |s|**beta on [lo, hi] (beta > -1)."""
    k = beta + 1.0

    def F(s):
        return np.sign(s) * np.abs(s) ** k / k

    y = F(lo) + u * (F(hi) - F(lo))
    return np.sign(y) * (np.abs(y) * k) ** (1.0 / k), float(F(hi) - F(lo))


# -- strata --------------------------------------------------------------------


class _Stratum:
    def weights(self, d, regions, rng, size):
        raise NotImplementedError


def _region_mask(region, pts):
    r = np.linalg.norm(pts - region.center, axis=1)
    return (r >= region.inner) & (r < region.outer)


class _PointCap(_Stratum):
    """Points around a singular center with radius density t**(n-1+beta)."""

    def __init__(self, index, center, beta, t_lo, t_hi):
        self.index = index
        self.center = center
        self.beta = beta
        self.t_lo = t_lo
        self.t_hi = t_hi
        self.k = center.size + beta
        self.norm = sphere_area(center.size) * (t_hi**self.k - t_lo**self.k) / self.k

    def weights(self, d, regions, rng, size):
        n = self.center.size
        t = _radial_power_radius(rng.random(size), self.t_lo, self.t_hi, self.k)
        pts = self.center + _directions(rng, size, n) * t[:, None]
        base = self.norm * d.cap_factor(pts, self.index)
        base[t == 0] = np.nan
        return np.stack([np.where(_region_mask(r, pts), base, 0.0) for r in regions], axis=1)


class _Slab(_Stratum):
    """Signed distance to a hyperplane drawn with density |s|**beta, the rest uniform."""

    def __init__(self, plane: Hyperplane, beta, regions):
        self.plane = plane
        self.beta = beta
        n = plane.dim
        s_c = np.array([float(r.center @ plane.normal - plane.offset) for r in regions])
        R = max(r.outer for r in regions)
        self.s_lo, self.s_hi = s_c.min() - R, s_c.max() + R
        feet = np.array([r.center - (r.center @ plane.normal - plane.offset) * plane.normal for r in regions])
        self.disk_center = feet.mean(axis=0)
        self.disk_radius = R + max(np.linalg.norm(f - self.disk_center) for f in feet)
        # orthonormal basis of the hyperplane directions
        q, _ = np.linalg.qr(np.column_stack([plane.normal, np.eye(n)]))
        self.tangent = q[:, 1:n]
        self.disk_volume = unit_ball_volume(n - 1) * self.disk_radius ** (n - 1) if n > 1 else 1.0

    def weights(self, d, regions, rng, size):
        n = self.plane.dim
        s, z = _abs_power_sample(rng.random(size), self.s_lo, self.s_hi, self.beta)
        pts = self.disk_center + s[:, None] * self.plane.normal
        if n > 1:
            m = n - 1
            t = self.disk_radius * rng.random(size) ** (1.0 / m)
            pts = pts + (_directions(rng, size, m) * t[:, None]) @ self.tangent.T
        with np.errstate(divide="ignore", invalid="ignore"):
            base = z * self.disk_volume * d.eval(pts) * np.abs(s) ** (-self.beta)
        base[s == 0] = np.nan
        return np.stack([np.where(_region_mask(r, pts), base, 0.0) for r in regions], axis=1)


class _Tube(_Stratum):
    """Radius about a sphere's center drawn with density |r - a|**beta."""

    def __init__(self, sphere: Sphere, beta, regions):
        self.sphere = sphere
        self.beta = beta
        dist = [float(np.linalg.norm(r.center - sphere.center)) for r in regions]
        R = max(r.outer for r in regions)
        self.r_lo = max(0.0, min(dist) - R)
        self.r_hi = max(dist) + R

    def weights(self, d, regions, rng, size):
        sph = self.sphere
        n = sph.dim
        s, z = _abs_power_sample(rng.random(size), self.r_lo - sph.radius, self.r_hi - sph.radius, self.beta)
        r = np.maximum(s + sph.radius, 0.0)
        pts = sph.center + _directions(rng, size, n) * r[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            base = z * sphere_area(n) * r ** (n - 1) * d.eval(pts) * np.abs(s) ** (-self.beta)
        base[s == 0] = np.nan
        return np.stack([np.where(_region_mask(rg, pts), base, 0.0) for rg in regions], axis=1)


class _Uniform(_Stratum):
    """Uniform samples in each region (shared offsets), minus the point caps."""

    def __init__(self, shape: Shell, caps):
        self.shape = shape
        self.caps = caps

    def weights(self, d, regions, rng, size):
        offs = sample_uniform(self.shape, rng, size)
        cols = []
        for r in regions:
            pts = r.center + offs
            keep = np.ones(size, bool)
            for cap in self.caps:
                keep &= np.linalg.norm(pts - cap.center, axis=1) >= cap.t_hi
            vals = np.zeros(size)
            vals[keep] = self.shape.volume * d.eval(pts[keep])
            cols.append(vals)
        return np.stack(cols, axis=1)


def _plan(d: Density, regions: list) -> list[_Stratum]:
    """Partition the sampling work; every region must share one (inner, outer) shape."""
    outer, inner = regions[0].outer, regions[0].inner
    shape = Shell(np.zeros(d.dim), inner, outer)

    surf = [(s, b) for s, b in d.surface_singularities() if b < 0]
    if surf:
        s, b = surf[0]
        if min(float(s.distance(r.center)[0]) for r in regions) < 2 * outer:
            return [_Slab(s, b, regions) if isinstance(s, Hyperplane) else _Tube(s, b, regions)]
        return [_Uniform(shape, [])]

    sing = d.point_singularities()
    caps: list[_PointCap] = []
    if sing:
        centers = np.array([c for c, _ in sing])
        if len(centers) > 1:
            dd = np.linalg.norm(centers[:, None] - centers[None], axis=2)
            half_sep = 0.5 * dd[np.triu_indices(len(centers), 1)].min()
        else:
            half_sep = np.inf
        r_cap = min(outer, half_sep)
        for i, (c, b) in enumerate(sing):
            dists = [float(np.linalg.norm(c - r.center)) for r in regions]
            if min(dists) >= outer + r_cap:
                continue
            if max(dists) + r_cap <= inner:
                continue
            t_lo = 0.0
            if len(regions) == 1:
                t_lo = inner if dists[0] == 0 else max(0.0, dists[0] - outer)
            if t_lo < r_cap:
                caps.append(_PointCap(i, c, b, t_lo, r_cap))
    strata: list[_Stratum] = list(caps)
    covered = (
        len(regions) == 1
        and any(np.array_equal(cap.center, regions[0].center) and cap.t_hi >= outer for cap in caps)
    )
    if not covered:
        strata.append(_Uniform(shape, caps))
    return strata


@dataclass
class _Moments:
    count: int
    mean: np.ndarray
    m2: np.ndarray
    resampled: int = 0

    def merge(self, other: "_Moments") -> "_Moments":
        # Chan et al. pairwise update; fixed order keeps the result bit-stable
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + np.outer(delta, delta) * (self.count * other.count / n)
        return _Moments(n, mean, m2, self.resampled + other.resampled)


def _run_chunk(d, regions, stratum, seed, s_idx, c_idx, size):
    rng = chunk_rng(seed, s_idx, c_idx)
    w = stratum.weights(d, regions, rng, size)
    bad = ~np.all(np.isfinite(w), axis=1)
    resampled = 0
    tries = 0
    while bad.any():
        k = int(bad.sum())
        resampled += k
        tries += 1
        if tries > 50:
            raise SingularHitError(
                f"stratum {type(stratum).__name__} keeps producing non-finite weights; "
                "the integrand is not finite off the singular set"
            )
        w[bad] = stratum.weights(d, regions, rng, k)
        bad = ~np.all(np.isfinite(w), axis=1)
    mean = w.mean(axis=0)
    dev = w - mean
    return _Moments(size, mean, dev.T @ dev, resampled)


@dataclass
class _JointEstimate:
    values: np.ndarray
    cov: np.ndarray
    n_samples: int
    stratified: bool
    resampled: int = 0


def _estimate(d, regions, n_samples, seed, workers=1, chunk_size=CHUNK_SIZE) -> _JointEstimate:
    strata = _plan(d, regions)
    k = len(strata)
    alloc = [n_samples // k] * k
    alloc[-1] += n_samples - sum(alloc)
    tasks = []
    for s_idx, (stratum, n_s) in enumerate(zip(strata, alloc)):
        n_chunks = -(-n_s // chunk_size)
        for c_idx in range(n_chunks):
            size = min(chunk_size, n_s - c_idx * chunk_size)
            tasks.append((stratum, s_idx, c_idx, size))

    def job(t):
        stratum, s_idx, c_idx, size = t
        return s_idx, _run_chunk(d, regions, stratum, seed, s_idx, c_idx, size)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(job, tasks))
    else:
        results = [job(t) for t in tasks]

    per_stratum: dict[int, _Moments] = {}
    for s_idx, mom in results:
        per_stratum[s_idx] = mom if s_idx not in per_stratum else per_stratum[s_idx].merge(mom)

    J = len(regions)
    values = np.zeros(J)
    cov = np.zeros((J, J))
    resampled = 0
    for s_idx in range(k):
        mom = per_stratum[s_idx]
        values += mom.mean
        if mom.count > 1:
            cov += mom.m2 / (mom.count - 1) / mom.count
        resampled += mom.resampled
    if resampled > MAX_RESAMPLE_FRACTION * n_samples:
        raise SingularHitError(
            f"{resampled} of {n_samples} samples hit the singular set "
            f"(limit fraction {MAX_RESAMPLE_FRACTION:g})"
        )
    stratified = any(not isinstance(s, _Uniform) for s in strata)
    return _JointEstimate(values, cov, n_samples, stratified, resampled)


def _check(d, regions, n_samples):
    for r in regions:
        if r.dim != d.dim:
            raise DimensionMismatch(d.dim, r.dim)
    if n_samples < MIN_SAMPLES:
        raise InvalidParameter(f"n_samples must be at least {MIN_SAMPLES}, got {n_samples}")


def mass(
    d: Density,
    region: Region,
    n_samples: int = 100_000,
    seed: int = 0,
    *,
    workers: int = 1,
    closed_form: bool = True,
    chunk_size: int = CHUNK_SIZE,
) -> MassEstimate:
    """Estimate ``int_region rho dx``.

    Uses the exact value when one is known (unless ``closed_form=False``),
    else stratified Monte Carlo with ``n_samples`` draws.
    """
    _check(d, [region], n_samples)
    if closed_form:
        exact = closed_form_mass(d, region)
        if exact is not None:
            return MassEstimate(exact, 0.0, 0, Method.CLOSED_FORM)
    est = _estimate(d, [region], n_samples, seed, workers, chunk_size)
    return MassEstimate(
        float(est.values[0]),
        float(np.sqrt(est.cov[0, 0])),
        n_samples,
        Method.STRATIFIED_MC if est.stratified else Method.MONTE_CARLO,
        resampled=est.resampled,
    )


def mass_pair(
    d: Density,
    r1: Region,
    r2: Region,
    n_samples: int = 100_000,
    seed: int = 0,
    *,
    workers: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> tuple[MassEstimate, MassEstimate, float]:
    """Masses of two congruent regions from one shared sample cloud.

    Returns both estimates and their covariance; each estimate is unbiased,
    and the positive correlation shrinks the variance of their ratio.
    """
    _check(d, [r1, r2], n_samples)
    if (r1.inner, r1.outer) != (r2.inner, r2.outer):
        raise InvalidParameter("common random numbers need congruent regions")
    est = _estimate(d, [r1, r2], n_samples, seed, workers, chunk_size)
    method = Method.STRATIFIED_MC if est.stratified else Method.MONTE_CARLO
    m1 = MassEstimate(float(est.values[0]), float(np.sqrt(est.cov[0, 0])), n_samples, method)
    m2 = MassEstimate(float(est.values[1]), float(np.sqrt(est.cov[1, 1])), n_samples, method)
    return m1, m2, float(est.cov[0, 1])


# -- line masses ---------------------------------------------------------------

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1]
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KW = np.concatenate([_WK[:-1], _WK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def gauss_kronrod(f, a: float, b: float, abs_tol=1e-10, rel_tol=1e-8, max_panels=100_000):
    """Adaptive G7/K15 quadrature of a vectorized ``f`` on ``[a, b]``.

    Panels are bisected level by level; a panel is accepted once its
    Kronrod-Gauss difference is within its length-proportional share of the
    tolerance.  Returns ``(integral, error_bound, panels_used)``.
    """
    if b <= a:
        return 0.0, 0.0, 0
    lo = np.array([a], float)
    hi = np.array([b], float)
    total_len = b - a
    acc_val = 0.0
    acc_err = 0.0
    used = 0
    while lo.size:
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        fx = np.asarray(f(x.ravel()), float).reshape(x.shape)
        fx[~np.isfinite(fx)] = 0.0
        k = half * (fx @ _KW)
        g = half * (fx @ _GW)
        err = np.abs(k - g)
        used += lo.size
        tol = max(abs_tol, rel_tol * abs(acc_val + k.sum()))
        ok = err <= tol * (2 * half) / total_len
        # floor on panel width: nothing more to gain from splitting
        ok |= half <= 1e-15 * max(abs(a), abs(b), 1.0)
        if used + 2 * int((~ok).sum()) > max_panels:
            ok[:] = True
        acc_val += float(k[ok].sum())
        acc_err += float(err[ok].sum())
        lo, hi, mid = lo[~ok], hi[~ok], mid[~ok]
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
    return acc_val, acc_err, used


def _ray_singularities(d: Density, x, v, R, tol=1e-12):
    """Ray parameters in [0, R] where the density blows up or vanishes, with the
    local exponent of |t - t_s|, plus closest-approach parameters for peaks."""
    from .density import DistancePower

    sing = []
    peaks = []
    for c, b in d.point_singularities():
        rel = c - x
        t_star = float(rel @ v)
        perp2 = float(rel @ rel) - t_star**2
        scale = max(1.0, float(rel @ rel))
        if perp2 <= (tol**2) * scale and -tol * scale <= t_star <= R:
            sing.append((max(t_star, 0.0), b))
        elif 0 < t_star < R:
            peaks.append(t_star)
    if isinstance(d, DistancePower) and d.beta != 0:
        s = d.set
        if isinstance(s, Hyperplane):
            nv = float(s.normal @ v)
            nx = float(s.normal @ x - s.offset)
            if abs(nv) < tol:
                if abs(nx) < tol:
                    if d.beta < 0:
                        raise LambdaUndefined(
                            "lambda undefined: the ray runs inside the singular hyperplane",
                            exponent=d.beta,
                            limit=-1,
                        )
                    return None, []
            else:
                t_s = -nx / nv
                if -tol <= t_s <= R:
                    sing.append((max(t_s, 0.0), d.beta))
        elif isinstance(s, Sphere):
            rel = x - s.center
            bq = float(rel @ v)
            cq = float(rel @ rel) - s.radius**2
            disc = bq * bq - cq
            scale = max(1.0, s.radius**2)
            if abs(disc) <= tol * scale:
                t_s = -bq
                if -tol <= t_s <= R:
                    sing.append((max(t_s, 0.0), 2 * d.beta))
            elif disc > 0:
                for t_s in (-bq - np.sqrt(disc), -bq + np.sqrt(disc)):
                    if -tol <= t_s <= R:
                        sing.append((max(float(t_s), 0.0), d.beta))
            if 0 < -bq < R:
                peaks.append(-bq)
    return sing, peaks


def line_mass(
    d: Density,
    x,
    v,
    R: float,
    *,
    abs_tol: float = 1e-10,
    rel_tol: float = 1e-8,
    max_panels: int = 100_000,
) -> MassEstimate:
    """``int_0^R rho(x + t v) dt`` by adaptive quadrature.

    Endpoint singularities ``|t - t_s|**beta`` are removed with the change of
    variables ``u = |t - t_s|**(1 + beta)``.  A singular exponent ``<= -1``
    raises :class:`LambdaUndefined`.
    """
    x = as_point(x, d.dim)
    v = as_point(v, d.dim)
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise InvalidParameter(f"direction must be a unit vector, |v| = {np.linalg.norm(v)!r}")
    R = float(R)
    if not (np.isfinite(R) and R > 0):
        raise InvalidParameter(f"R must be positive and finite, got {R}")

    sing, peaks = _ray_singularities(d, x, v, R)
    if sing is None:
        return MassEstimate(0.0, 0.0, 0, Method.QUADRATURE)
    for t_s, b in sing:
        if b <= -1:
            raise LambdaUndefined(
                f"lambda undefined: singularity of exponent {b:g} at t = {t_s:g} is not integrable "
                "along the ray",
                exponent=b,
                limit=-1,
            )
    exps: dict[float, float] = {}
    for t_s, b in sing:
        exps[t_s] = min(b, exps.get(t_s, b))
    cuts = sorted({0.0, R, *exps.keys(), *peaks})
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a <= 0:
            continue
        ea, eb = exps.get(a), exps.get(b)
        if ea is not None and eb is not None:
            m = 0.5 * (a + b)
            pieces += [(a, m, ea, None), (m, b, None, eb)]
        else:
            pieces.append((a, b, ea, eb))

    total = 0.0
    err = 0.0
    panels = 0
    piece_tol = abs_tol / max(len(pieces), 1)
    for a, b, ea, eb in pieces:
        if ea is not None or eb is not None:
            anchor, sign, beta = (a, 1.0, ea) if ea is not None else (b, -1.0, eb)
            k = 1.0 + beta
            base = x + anchor * v

            def g(u, base=base, sign=sign, k=k):
                h = u ** (1.0 / k)
                return d.eval(base + (sign * h)[:, None] * v) * u ** ((1.0 - k) / k) / k

            val, e, used = gauss_kronrod(g, 0.0, (b - a) ** k, piece_tol, rel_tol, max_panels)
        else:
            base = x + a * v

            def g(t, base=base):
                return d.eval(base + t[:, None] * v)

            val, e, used = gauss_kronrod(g, 0.0, b - a, piece_tol, rel_tol, max_panels)
        total += val
        err += e
        panels += used
    return MassEstimate(total, 0.0, panels, Method.QUADRATURE, err_bound=err)
