"""Empirical IR and truthfulness checks for batch mechanisms.

A mechanism is any callable mapping a (S, n) bid array to (winners, payments)
with winner -1 meaning no sale.
"""

import numpy as np

GRID = np.linspace(0.0, 1.5, 61)


def utilities(mechanism, values, bids):
    winners, pay = mechanism(bids)
    rows = np.arange(len(values))
    u = np.zeros(values.shape)
    won = winners >= 0
    u[rows[won], winners[won]] = values[rows[won], winners[won]] - pay[won]
    return u


def ir_violation(mechanism, values):
    """Largest loss suffered by a truthful bidder (0 when IR holds)."""
    return float(max(0.0, -utilities(mechanism, values, values).min()))


def dsic_violation(mechanism, values, grid=GRID):
    """Largest utility gain any bidder gets from a unilateral misreport on ``grid``."""
    truthful = utilities(mechanism, values, values)
    worst = 0.0
    for i in range(values.shape[1]):
        for b in grid:
            bids = values.copy()
            bids[:, i] = b
            gain = utilities(mechanism, values, bids)[:, i] - truthful[:, i]
            worst = max(worst, float(gain.max()))
    return worst
