"""Pick the number of groups (and the family) by BIC.

Fits plain and contaminated matrix-normal mixtures for G in {1, 2, 3}
on clean two-group data and prints the BIC table; the best cell should
land on G = 2.
"""

from cmvmix import FitConfig, Kind
from cmvmix.selection import sweep
from cmvmix.simulate import generate, reference_model

data = generate(reference_model(), n=150, seed=42)

result = sweep(data, kinds=[Kind.MVN, Kind.CMVN], g_range=[1, 2, 3],
               config=FitConfig(n_starts=10, seed=0))

print(f"{'kind':<6} {'G':>2} {'BIC':>14}")
for i, entry in enumerate(result.entries):
    mark = "  <- best" if i == result.best else ""
    bic = "failed" if entry.bic is None else f"{entry.bic:14.2f}"
    print(f"{entry.kind.value:<6} {entry.g:>2} {bic:>14}{mark}")

best = result.best_entry
print(f"\nselected: {best.kind.value} with G = {best.g}")
print("on clean data both families agree on G = 2; the contaminated family")
print("pays its 2 extra parameters per group only when outliers are present.")
