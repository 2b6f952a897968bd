# Mass seen along a ray, lambda(x, v, R), for |x|^(-1/2) in the plane, and
# the closed-form sandwich that pins it down.
import numpy as np

from muckenhoupt import RadialPower, isotropy_ratio_curve, lemma_bounds, line_mass_result

d = RadialPower(np.zeros(2), -0.5)

# Three rays from (1, 0): away from, across, and through the singularity.
for v in ([1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]):
    res = line_mass_result(d, [1.0, 0.0], v, 4.0)
    print(f"v={v}: lambda={res.lam:.6f}  in [{res.lower:.4f}, {res.upper:.4f}]")
print("sandwich at R=4:", lemma_bounds([1.0, 0.0], [0.0, 0.0], 0.5, 4.0))

# Two observers looking in different directions.  The bracket closes in on 1.
curve = isotropy_ratio_curve(d, ([1.0, 0.0], [0.0, 1.0]), ([3.0, 0.0], [1.0, 0.0]), [1e2, 1e3, 1e4, 1e5])
for R, l1, l2, r, lo, hi in curve.rows():
    print(f"R={R:8.0f}  ratio={r:.5f}  bracket=[{lo:.5f}, {hi:.5f}]")
print("verdict:", curve.verdict.value)
