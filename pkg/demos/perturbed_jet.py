"""Solve one perturbed jet and report where the contact surface moves.

A subsonic jet of radius 1/2 enters a nozzle of length 1 and is
surrounded by gas at rest at the same pressure.  Raising the entropy
function near the axis by one percent lowers the density there, so the
same mass flux needs more area: the contact surface moves outward until
the pressure is continuous across it again.

Run with ``python demos/perturbed_jet.py``.
"""

import numpy as np

from axicontact import GasConstants, Grid, Perturbation, make_background, make_inlet, newton_solve
from axicontact.lagrangian import to_physical
from axicontact.verify import conservation_checks, rankine_hugoniot_check

background = make_background(GasConstants(gamma=1.4), rho_minus=1.0, P_b=5.0, rho_plus=1.0)
inlet = make_inlet(background, Perturbation({"A": ("bump", 1.0)}), sigma=1e-2)

result = newton_solve(inlet, background, Grid(L=1.0, N1=64, N2=64))
print(f"outer iterations: {result.outer_iterations}")
print(f"largest Picard contraction ratio: {result.contraction_ratio:.3f}")

curve = result.contact
print("\n   x       g(x) - 1/2")
for x in np.linspace(0.0, 1.0, 9):
    print(f"{x:6.3f}   {float(curve.g(x)) - 0.5: .3e}")

sol = to_physical(result.state, curve, background, result.grid.y1, np.linspace(0.0, 0.8, 129))
rh = rankine_hugoniot_check(sol, slope=curve.w)
cons = conservation_checks(sol, result.grid.m**2, inlet)
print(f"\nnormal velocity on the curve  {rh.normal_velocity:.2e}")
print(f"pressure jump across it       {rh.pressure_jump:.2e}")
print(f"tangential velocity jump      {rh.tangential_jump:.4f}")
print(f"mass flux drift               {cons['mass_flux']:.2e}")
