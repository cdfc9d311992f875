"""Walkthrough: VAR order selection and a 7-day joint forecast.

Models the synthetic case counts jointly with the driving discourse
component so each variable's forecast feeds the other's.
"""

import json
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from signalcast import fit_var, forecast_var, select_var_order

MINI = Path(__file__).resolve().parent.parent / "data" / "mini"
manifest = json.loads((MINI / "manifest.json").read_text())

cases_rows = (MINI / "cases.csv").read_text().strip().splitlines()[1:]
cases = np.array([int(r.split(",")[1]) for r in cases_rows], dtype=float)
driver = np.array(manifest["component_counts"]["sick/0"], dtype=float)
matrix = np.column_stack([cases, driver])

fit, table = select_var_order(matrix, p_max=8, variable_names=("cases", "sick_negative"))
print("order selection (common-sample AIC):")
for p, aic in sorted(table.items()):
    marker = "  <- chosen" if p == fit.p else ""
    print(f"  p={p}: aic {aic:9.2f}{marker}")

last = matrix[len(matrix) - fit.p:]
out = forecast_var(fit, last, horizon=7)
start = date(2021, 1, 1) + timedelta(days=len(cases))
print(f"\n7-day joint forecast from {start}:")
for h in range(7):
    day = start + timedelta(days=h)
    print(f"  {day}: cases {out[h, 0]:7.1f}   sick/negative posts {out[h, 1]:6.1f}")

intercept_only = fit_var(matrix, 0)
print(f"\nfor reference, the no-dynamics model would forecast a flat "
      f"{intercept_only.c[0]:.1f} cases every day.")
