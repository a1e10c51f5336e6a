"""How the black share of the Prim tree evolves as it grows.

Runs one Prim walk on K_{n_b, n_w} with a small black fraction and prints
the share of black vertices among the first k ranked vertices, next to the
two limit predictions: the constant 1/(1+gamma) while k is o(n), and the
curve rho(ell^{-1}(k/n)) once k is a positive fraction of n.
"""
from bipartite_prim import GraphSpec, colour_ratio, linear_limit, run_prim, sublinear_limit

n_b, n_w = 2000, 18000
spec = GraphSpec(n_b, n_w, seed=2024)
theta = n_b / spec.n

trace = run_prim(spec)
print(f"theta = {theta}, early-phase limit = {sublinear_limit(theta):.4f}")
print(f"{'k':>7} {'k/n':>7} {'ratio':>8} {'limit':>8}")
for k in sorted((50, 200, 1000, int(spec.n ** (2 / 3)), 2000, 5000, 10000, 16000, 19990)):
    s = k / spec.n
    limit = linear_limit(theta, s) if s >= 0.01 else sublinear_limit(theta)
    print(f"{k:>7} {s:>7.3f} {colour_ratio(trace, k):>8.4f} {limit:>8.4f}")

# the whole tree is a spanning tree, so every black eventually joins
assert trace.black_prefix[-1] == n_b
