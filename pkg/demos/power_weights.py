# Power weights |x - x0|^beta: which ones are A_p, and what the A_p product
# looks like on balls at and away from the singularity.
import numpy as np

from muckenhoupt import Ball, RadialPower, ap_membership, ap_product, estimate_ap_constant

origin = np.zeros(2)

# The analytic test: -n < beta < n(p - 1).
for beta in (-1.5, -1.0, 0.0, 1.0, 2.0, 3.0):
    d = RadialPower(origin, beta)
    print(f"beta={beta:5.1f}  p=2: {ap_membership(d, 2).value:10s}  p=4: {ap_membership(d, 4).value}")

# At the singularity the product is the same for every radius.
d = RadialPower(origin, -1.0)
for R in (0.01, 1.0, 100.0):
    print("B(0, %g): product = %.6f" % (R, ap_product(d, Ball(origin, R), 2).product))

# Off the singularity there is no closed form, so the averages are sampled.
ap = ap_product(d, Ball(np.array([1.0, 0.0]), 1.2), 2, n_samples=200_000, seed=1)
print("off-centre ball: %.4f +- %.4f" % (ap.product, ap.std_error))

# Scanning a whole family of balls gives an empirical A_2 constant.
scan = estimate_ap_constant(d, 2, n_samples=5_000)
print("sup over", len(scan.records), "balls:", round(scan.sup_product, 4), "->", scan.verdict)

# beta = 3 is too large for p = 2: the dual weight stops being integrable.
scan = estimate_ap_constant(RadialPower(origin, 3.0), 2, n_samples=5_000)
print("beta=3:", scan.verdict, "| first failure:", scan.records[0].error)
