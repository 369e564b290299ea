"""Closed-form proximal operators for the l0 and l2,0 penalties.

Both operators compare, per entry or per row, the cost of keeping the value
against the cost of zeroing it; ties at the threshold boundary resolve to
zero.
"""

import numpy as np


def _check_weight(t):
    t = float(t)
    if t < 0:
        raise ValueError(f"prox weight must be nonnegative, got {t}")
    return t


def hard_threshold_l0(x, t):
    """Entrywise hard threshold: zero where x**2 <= 2*t, keep otherwise.

    Minimizes t * ||z||_0 + 0.5 * ||z - x||_F**2 entrywise.
    """
    t = _check_weight(t)
    x = np.asarray(x, dtype=float)
    return np.where(x * x <= 2.0 * t, 0.0, x)


def group_hard_threshold_l20(m, t):
    """Row-wise hard threshold: zero rows with ||row||_2**2 <= 2*t.

    Minimizes t * ||Y||_{2,0} + 0.5 * ||Y - M||_F**2 row by row.
    """
    t = _check_weight(t)
    m = np.asarray(m, dtype=float)
    keep = np.einsum("ij,ij->i", m, m) > 2.0 * t
    out = np.zeros_like(m)
    out[keep] = m[keep]
    return out
