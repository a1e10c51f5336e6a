"""The limit curve s -> rho(ell^{-1}(s)) and the branching process behind it.

For each black fraction theta, the curve starts at 1/(1+gamma) for tiny s
and rises (or falls) to theta as s -> 1.  A CSV table of the curve is
written next to this script; plotting is left to the reader.
"""
from pathlib import Path

from bipartite_prim import (
    extinction_probabilities,
    linear_limit_curve,
    simulate_two_type_bp,
    sublinear_limit,
)
from bipartite_prim.limits import default_grid

for theta in (0.1, 0.3, 0.7):
    curve = linear_limit_curve(theta, default_grid(128))
    out = Path(__file__).with_name(f"curve_theta_{theta}.csv")
    curve.to_csv(out)
    print(f"theta={theta}: rho from {curve.rho[0]:.4f} (1/(1+gamma)={sublinear_limit(theta):.4f}) "
          f"to {curve.rho[-1]:.4f}; written {out.name}")

# extinction of the two-type process, solver vs simulation
for lam in (0.8, 1.5, 2.0, 3.0):
    q = extinction_probabilities(0.3, lam)
    sim = simulate_two_type_bp(0.3, lam, 200, 20_000, seed=1)
    print(f"lambda={lam}: q1={q.q1:.4f} q2={q.q2:.4f} simulated={sim:.4f}")
