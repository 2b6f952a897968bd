"""Independent reference computations used by the tests.

Nothing here calls into the package's samplers or quadrature.
"""
import numpy as np
from scipy import integrate


def plain_mc_ball_mass(f, center, radius, n, seed, batch=1 << 20):
    """Rejection sampling from the bounding cube; returns (mean, std_error)."""
    rng = np.random.default_rng(seed)
    center = np.asarray(center, float)
    dim = center.size
    cube = (2 * radius) ** dim
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n:
        m = min(batch, n - done)
        pts = center + radius * (2 * rng.random((m, dim)) - 1)
        inside = np.linalg.norm(pts - center, axis=1) < radius
        vals = np.zeros(m)
        vals[inside] = cube * f(pts[inside])
        total += vals.sum()
        total_sq += (vals**2).sum()
        done += m
    mean = total / n
    var = total_sq / n - mean**2
    return mean, np.sqrt(var / n)


def radial_integral(profile, r_lo, r_hi, dim):
    """int over r_lo <= |x| < r_hi of profile(|x|) via the polar formula."""
    from math import gamma, pi

    area = 2 * pi ** (dim / 2) / gamma(dim / 2)
    val, _ = integrate.quad(lambda r: profile(r) * r ** (dim - 1), r_lo, r_hi, limit=200)
    return area * val


def midpoint(f, a, b, n):
    h = (b - a) / n
    t = a + h * (np.arange(n) + 0.5)
    return h * np.sum(f(t))
