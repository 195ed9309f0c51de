"""Run reduced versions of the two sensitivity studies.

Study 1 grows a constant shift on one unit and tracks when it gets
flagged and how the inflation estimate reacts.  Study 2 replaces 10%
of the units with uniform noise and scores recovery of the clean
structure.  Reduced settings keep this to about a minute; the full
versions run through `cmvmix replicate`.
"""

from cmvmix.studies import run_single_outlier_study, run_uniform_noise_study

print("=== single corrupted unit, growing shift ===")
report = run_single_outlier_study(seed=1, starts=6, shifts=(2, 6, 12, 20))
print(" shift  selected G   v(unit 6)    flagged   eta of its cluster")
for row in report.rows:
    print(f"{row['c']:6d}  {row['cmvn_g']:10d}   {row['v_perturbed']:.3e}"
          f"   {str(row['perturbed_flagged_bad']):>7}   {row['eta_hat']:10.2f}")
for check in report.checks:
    status = {True: "ok", False: "FAIL", None: "noted"}[check.passed]
    print(f"  [{status}] {check.name}")

print("\n=== 10% of units replaced by uniform noise ===")
report = run_uniform_noise_study(seed=1, starts=6)
row = report.rows[0]
print(f"selected G = {row['cmvn_g']}, ARI on clean units = {row['ari_good']:.3f}")
print(f"noise units flagged bad: {row['noise_flagged_bad']}/{row['n_noise']}, "
      f"their v in [{row['noise_v_min']:.2e}, {row['noise_v_max']:.2e}]")
for check in report.checks:
    status = {True: "ok", False: "FAIL", None: "noted"}[check.passed]
    print(f"  [{status}] {check.name}")
