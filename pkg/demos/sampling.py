# Why the integrator stratifies: plain uniform sampling of a ball that holds
# a strong singularity has a huge spread, importance sampling does not.
import time

import numpy as np

from muckenhoupt import Ball, RadialPower, mass
from muckenhoupt.integrate import chunk_rng, sample_uniform

d = RadialPower(np.zeros(3), -2.5)
ball = Ball(np.array([0.2, 0.0, 0.0]), 1.0)

rng = chunk_rng(0, 0)
pts = sample_uniform(ball, rng, 1_000_000)
vals = ball.volume * d(pts)
print("plain MC:      %.4f +- %.4f" % (vals.mean(), vals.std() / np.sqrt(vals.size)))

t0 = time.perf_counter()
est = mass(d, ball, 1_000_000, seed=0)
print("stratified MC: %.4f +- %.4f  (%s, %.2fs)" % (est.value, est.std_error, est.method.value, time.perf_counter() - t0))

# Same seed, any number of threads: the same bits.
again = mass(d, ball, 1_000_000, seed=0, workers=4)
print("workers=4 identical:", again.value == est.value and again.std_error == est.std_error)
