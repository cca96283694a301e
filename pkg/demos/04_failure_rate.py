"""
How often does single-cell recovery fail?
=========================================

A trimmed version of the full experiment: one group of v rows and y columns,
one uniformly replaced cell per trial. Recovery fails when the row digest of
the modified row happens to match its stored bits, so the rate tracks 2^-y.

The full grid is ``tabmark experiment --out results.csv`` (about four minutes).
"""

from tabmark.experiment import TrialConfig, run_trials

config = TrialConfig(v_list=(10,), y_list=(4, 6, 8, 10), trials=2000, seed=1)
for row in run_trials(config):
    print(f"v={row.v:2d} y={row.y:2d}  failures {row.failures:4d}/{row.trials}"
          f"  rate {row.failure_probability:.4f}  2^-y {2.0 ** -row.y:.4f}")
