"""Second-order finite differences on the cell-centred Lagrangian grid.

Axis treatment: a ghost row ``f[-1] = parity * f[0]`` mirrors the field
across y2 = 0 (``parity=+1`` for even quantities such as W1 and the
scalars, ``-1`` for W2 and W3).  The interface row and both axial ends use
one-sided three-point formulas.
"""

import numpy as np

EVEN = 1.0
ODD = -1.0


def d1(f: np.ndarray, h: float) -> np.ndarray:
    """Derivative along axis 0 (y1)."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out


def d2(f: np.ndarray, h: float, parity: float) -> np.ndarray:
    """Derivative along the last axis (y2) with an axis ghost of given parity."""
    out = np.empty_like(f)
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h)
    out[..., 0] = (f[..., 1] - parity * f[..., 0]) / (2.0 * h)
    out[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * h)
    return out
