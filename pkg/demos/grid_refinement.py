"""Second-order convergence of the discretisation.

Prints the manufactured-solution errors of both potential solvers and the
interior residual of the nonlinear equations for a perturbed jet as the
grid is refined.

Run with ``python demos/grid_refinement.py``.
"""

from axicontact import GasConstants, Grid, Perturbation, make_background, make_inlet, newton_solve
from axicontact.elliptic import manufactured_errors, observed_orders
from axicontact.verify import lagrangian_residual

background = make_background(GasConstants(), 1.0, 5.0, 1.0)
inlet = make_inlet(background, Perturbation({"nu": ("swirl", 1.0), "A": ("bump", 1.0)}), 1e-2)
sizes = (16, 32, 64, 128)

mms = [manufactured_errors(Grid(1.0, N, N), background.mach_sq) for N in sizes]
interior = []
for N in sizes:
    result = newton_solve(inlet, background, Grid(1.0, N, N))
    res = lagrangian_residual(result.state, result.contact, result.tilde, background)
    interior.append(max(res.interior.values()))

print("   N   div-free err   curl-free err   interior residual")
for N, e, r in zip(sizes, mms, interior):
    print(f"{N:4d}   {e['div_free']:.3e}      {e['curl_free']:.3e}       {r:.3e}")
for name, errs in (("div-free", [e["div_free"] for e in mms]),
                   ("curl-free", [e["curl_free"] for e in mms]),
                   ("interior residual", interior)):
    print(f"observed orders, {name}: " + ", ".join(f"{p:.2f}" for p in observed_orders(errs)))
