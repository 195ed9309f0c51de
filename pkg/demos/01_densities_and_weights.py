"""Densities and detection weights on a single 2x3 matrix observation.

Walks through the building blocks: the matrix-normal log-density, its
contaminated two-part version, and the posterior probability that an
observation is a "good" point of its cluster.
"""

import numpy as np

from cmvmix import CmvnParams, MvnParams
from cmvmix.distributions import (
    cmvn_log_density,
    h_weight,
    mvn_log_density,
    posterior_good_prob,
    w_weight,
)

rng = np.random.default_rng(0)

m = np.zeros((2, 3))
sigma = np.array([[1.0, 0.3], [0.3, 2.0]])
psi = np.array([[1.0, 0.2, 0.0], [0.2, 1.0, 0.2], [0.0, 0.2, 1.0]])
base = MvnParams(m, sigma, psi)

x = rng.standard_normal((2, 3))
print("log f(x) under the plain matrix normal:", mvn_log_density(x, base))

# The contaminated version mixes the same density with an inflated copy:
# a fraction (1 - alpha) of each cluster is allowed variance eta * Sigma.
params = CmvnParams(base, alpha=0.9, eta=10.0)
print("log f(x) under the contaminated version:", cmvn_log_density(x, params))
print("posterior good-point probability at x:   ", posterior_good_prob(x, params))

# An observation far from the mean is claimed by the inflated part.
far = m + 6.0
print("same probability six units out:          ", posterior_good_prob(far, params))

# h and w as functions of the squared distance delta: h is the good-point
# probability, w the weight a point keeps in the mean/scatter updates.
print("\n delta      h(delta)     w(delta)")
for delta in (0.0, 5.0, 10.0, 20.0, 40.0, 80.0):
    h = h_weight(delta, 0.9, 10.0, 2, 3)
    w = w_weight(delta, 0.9, 10.0, 2, 3)
    print(f"{delta:6.1f}   {h:10.3e}   {w:10.3e}")
print("\nw never falls below 1/eta =", 1 / 10.0, "- bad points are downweighted,")
print("not discarded, which is what makes the estimates robust yet efficient.")
