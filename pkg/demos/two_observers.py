# Two observers weigh balls of the same radius around themselves.  For an A_p
# density the two masses agree more and more as the balls grow; for an
# exponential density they never do.
import numpy as np

from muckenhoupt import Exponential, RadialPower, ratio_curve

d = RadialPower(np.zeros(2), -0.5)

# One observer sits on the singularity, the other two units away.
curve = ratio_curve(d, [0.0, 0.0], [2.0, 0.0], [5, 6, 8, 10, 12, 16, 24, 48], n_samples=200_000, seed=3)
print("R        ratio       sigma      envelope")
for R, r, s, env, _ in curve.rows():
    print(f"{R:5.0f}  {r:.6f}  {s:.2e}  {env:.2e}")
print("verdict:", curve.verdict.value)
print("fitted K=%.3g gamma=%.3g, bound holds: %s" % (curve.fit.K, curve.fit.gamma, curve.fit.holds))

# Mirror-image observers see exactly the same mass, so only noise is left.
sym = ratio_curve(d, [1.0, 0.0], [-1.0, 0.0], [8 * 2**j for j in range(7)], n_samples=1_000_000, seed=1)
print("symmetric pair, max |ratio - 1| =", max(sym.deviations), "->", sym.verdict.value)

# Exponential growth: the ratio is stuck at e^distance.
exp_curve = ratio_curve(Exponential(np.array([1.0]), 1.0), [1.0], [0.0])
print("exponential ratios:", set(round(r, 12) for r in exp_curve.ratios), "->", exp_curve.verdict.value)
