"""Fit a contaminated mixture to two-group data with one corrupted unit.

Generates 150 units of 2x4 matrices from the built-in two-group model,
shifts every entry of unit 6 by 10, fits a two-component contaminated
mixture, and shows that the corrupted unit is flagged automatically --
no trimming threshold needed.
"""

import numpy as np

from cmvmix import FitConfig, Kind, fit, outlier_report
from cmvmix.metrics import adjusted_rand_index
from cmvmix.simulate import generate, perturb, reference_model

data = generate(reference_model(), n=150, seed=7)
data = perturb(data, obs=6, c=10.0)

result = fit(data, FitConfig(g=2, n_starts=10, seed=0), Kind.CMVN)

print(f"converged after {result.iterations} iterations, "
      f"log-likelihood {result.loglik:.2f}")
for j, comp in enumerate(result.model.components):
    print(f"  cluster {j}: pi={result.model.weights[j]:.3f} "
          f"alpha={comp.alpha:.3f} eta={comp.eta:.2f}")

ari = adjusted_rand_index(data.true_labels, result.hard_labels,
                          mask=data.good_flags)
print(f"ARI on the uncorrupted units: {ari:.3f}")

# The report lists, per cluster, every unit whose posterior good-point
# probability fell below one half, sorted worst first.
report = outlier_report(result)
for cluster in report["clusters"]:
    for bp in cluster["bad_points"]:
        print(f"flagged: unit {bp['unit']} in cluster {cluster['cluster']} "
              f"with v = {bp['v']:.3e}")

flagged = {bp["unit"] for c in report["clusters"] for bp in c["bad_points"]}
assert 6 in flagged, "the corrupted unit should always be caught at c=10"
print("the corrupted unit was detected; everything else stayed clean"
      if flagged == {6} else f"also flagged: {sorted(flagged - {6})}")
