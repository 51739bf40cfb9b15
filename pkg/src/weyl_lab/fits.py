"""Log-log regression helpers used by every growth-rate check."""

from __future__ import annotations

import numpy as np


def loglog_fit(x, y):
    """Least-squares line through (log x, log y); returns (slope, intercept)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        raise ValueError("need at least two positive points for a log-log fit")
    slope, intercept = np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)
    return float(slope), float(intercept)


def running_sup(values):
    return np.maximum.accumulate(np.asarray(values, dtype=float))


def tail_slope(radii, values, tail=0.5):
    """Slope of the running sup against radius, fitted on the upper part of
    the log-radius range (the last `tail` fraction).

    Bounded quantities that approach their limit slowly (like 1 - c/R) have
    a running sup whose early log-log slope is visibly positive; only the
    tail says anything about growth.
    """
    radii = np.asarray(radii, dtype=float)
    sup = running_sup(values)
    lr = np.log(radii)
    cut = lr.max() - tail * (lr.max() - lr.min())
    sel = lr >= cut - 1e-12
    if sel.sum() < 2:
        sel = slice(-2, None)
    return loglog_fit(radii[sel], sup[sel])[0]
