"""Linear fit of electrolyser output against load.

Hydrogen power per unit capacity is ``f * eta(f)``. Fitting it against the
load fraction ``f`` shows how close the part-load curve is to a constant
efficiency, which is what the dispatch LP assumes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from typing import Iterable

import numpy as np
from scipy import stats


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class EfficiencyFit:
    slope: float
    intercept: float
    slope_pvalue: float
    intercept_pvalue: float
    slope_through_origin: float  # refit with the intercept omitted
    n_points: int


def _pvalue(estimate: float, stderr: float, dof: int) -> float:
    if stderr == 0.0:
        return 0.0 if estimate != 0.0 else float("nan")
    return float(2.0 * stats.t.sf(abs(estimate / stderr), dof))


def linearize_efficiency(curve: Iterable[tuple[float, float]]) -> EfficiencyFit:
    """OLS of ``f * eta`` on ``f`` with two-sided t-test p-values."""
    pts = np.asarray(list(curve), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise ValueError("need at least three (capacity factor, efficiency) points")
    f, eta = pts[:, 0], pts[:, 1]
    if np.any(f <= 0) or np.any(f > 1):
        raise ValueError("capacity factors must lie in (0, 1]")
    if np.ptp(f) == 0:
        raise DegenerateInput("all capacity factors are equal")
    y = f * eta
    n = len(f)
    X = np.column_stack([np.ones(n), f])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    intercept, slope = float(coef[0]), float(coef[1])
    resid = y - X @ coef
    dof = n - 2
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    se_int, se_slope = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return EfficiencyFit(
        slope=slope,
        intercept=intercept,
        slope_pvalue=_pvalue(slope, float(se_slope), dof),
        intercept_pvalue=_pvalue(intercept, float(se_int), dof),
        slope_through_origin=float(f @ y / (f @ f)),
        n_points=n,
    )


def reference_curve() -> list[tuple[float, float]]:
    """Digitised part-load efficiency curve shipped with the package (f in 0.2..1.0)."""
    text = resources.files("h2plan").joinpath("data/electrolyser_efficiency_curve.csv").read_text()
    return [(float(r["capacity_factor"]), float(r["efficiency"])) for r in csv.DictReader(text.splitlines())]
