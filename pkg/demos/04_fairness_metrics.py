"""
Measuring the ten group-fairness metrics on predictions
========================================================

The metric suite works on plain arrays: protected class a, outcome y,
decision d, score s, and an optional stratum column.  Signed differences are
always group 1 minus group 0; conditional cells that are empty in either
group are flagged undefined rather than silently zeroed.
"""

import numpy as np

from causalfair import LabeledPredictions, MetricId, conditional_dp, full_metric_report

# A small hand-checkable table: group 0 decides positive at 1/4, group 1 at
# 3/4, so the demographic-parity difference is exactly 0.5.
predictions = LabeledPredictions(
    a=np.array([0, 0, 0, 0, 1, 1, 1, 1]),
    y=np.array([1, 0, 1, 0, 1, 1, 0, 0]),
    d=np.array([1, 0, 0, 0, 1, 1, 1, 0]),
    s=np.array([0.9, 0.1, 0.4, 0.2, 0.8, 0.9, 0.7, 0.3]),
    l=np.array(["urban", "rural", "urban", "rural", "urban", "urban", "rural", "rural"]),
)

report = full_metric_report(predictions)
print(report.as_text())
print()

# Conditional demographic parity at one stratum level:
print("conditional DP at l='urban':", conditional_dp(predictions, "urban"))

# Swapping group labels negates every signed difference exactly.
swapped = full_metric_report(predictions.swap_groups())
print("DP after group swap:", swapped.aggregate(MetricId.DEMOGRAPHIC_PARITY))

# Undefined cells: group 1 here has no negative-label rows, so balance for
# the negative class cannot be estimated and says so.
partial = LabeledPredictions(
    a=np.array([0, 0, 1, 1]),
    y=np.array([0, 1, 1, 1]),
    d=np.array([0, 1, 1, 1]),
    s=np.array([0.2, 0.8, 0.7, 0.9]),
)
value = full_metric_report(partial).value(MetricId.BALANCE_NEGATIVE_CLASS)
print("balance for negative class:", value.aggregate, "| flagged:", value.undefined)

# Everything is also serializable for downstream tooling.
print()
print("JSON keys:", sorted(full_metric_report(predictions).as_json())[:5], "...")
