"""Deviation from the background grows linearly with the inlet perturbation.

For each amplitude the state deviation and the contact displacement are
divided by the amplitude; the quotients settle to constants, which are
the measured stability constants of the problem.

Run with ``python demos/sigma_sweep.py``.
"""

import numpy as np

from axicontact import GasConstants, Grid, Perturbation, make_background, make_inlet, newton_solve

background = make_background(GasConstants(), 1.0, 5.0, 1.0)
grid = Grid(1.0, 48, 48)

print(" sigma     |W|/sigma   |g - 1/2|/sigma")
for sigma in (1e-3, 2e-3, 4e-3, 8e-3, 1.6e-2):
    inlet = make_inlet(background, Perturbation({"J": ("bump", 1.0), "B": ("bump", 0.5)}), sigma)
    result = newton_solve(inlet, background, grid)
    st = result.state
    W = max(np.max(np.abs(f)) for f in (st.W1, st.W2, st.W3))
    g = np.max(np.abs(result.contact.g_nodes - 0.5))
    print(f"{sigma:7.4f}   {W / sigma:9.4f}   {g / sigma:9.4f}")
