"""Exact moment theory: the closed-form mean and its three growth regimes.

With rate = p(beta+1), the mean number of unit steps E[Xi_n] is known in
closed form for every n.  Below the line beta = p/(1-p) it grows like
C(p,beta) n^(rate-beta); on the line it grows like beta log n; above it,
it converges: the walk takes only finitely many steps.
"""

import math

import numpy as np

from erwalk import (
    ModelParams,
    asymptotic_constant,
    classify_phase,
    exact_mean_xi,
    fit_exponent,
    l2_diagnostic,
    limit_mean_xi,
    propagate_moments,
)

print("=== one line of the phase diagram at p = 0.5 (boundary beta = 1) ===")
for beta in (-0.5, 0.0, 0.5, 1.0, 2.0):
    pms = ModelParams(0.5, beta)
    label = classify_phase(pms)
    mean_1e5 = exact_mean_xi(10**5, pms)
    print(f"beta = {beta:+.1f}  regime = {label.regime.value:<22} "
          f"E[Xi] at n=1e5: {mean_1e5:12.3f}")
print()

print("=== growth exponents recovered from the exact mean ===")
for p, beta in [(0.5, 0.0), (0.5, 0.5), (0.7, -0.5)]:
    pms = ModelParams(p, beta)
    ns = np.unique(np.geomspace(10**3, 10**5, 25).astype(np.int64))
    means = np.array([exact_mean_xi(int(n), pms) for n in ns])
    fit = fit_exponent(ns, means)
    amp = asymptotic_constant(pms)
    print(f"(p, beta) = ({p}, {beta:+.1f}): fitted slope {fit.slope:.4f} "
          f"(theory {pms.growth_exponent:.2f}), amplitude C = {amp:.4f}")
print()

print("=== the localized phase: a finite limit ===")
pms = ModelParams(0.5, 2.0)
print(f"limit of E[Xi_n] = beta/(beta - rate) = {limit_mean_xi(pms):.1f}")
for n in (10, 10**3, 10**5, 10**7):
    m = exact_mean_xi(n, pms)
    print(f"  n = {n:>9,d}: E[Xi_n] = {m:.6f}   gap to 4: {4 - m:.2e}")
print("the gap decays like n^(-1/2) - slow algebra, not exponential.\n")

print("=== critical case: harmonic numbers and log growth ===")
pms = ModelParams(0.5, 1.0)
for n in (10, 10**4, 10**6):
    m = exact_mean_xi(n, pms)
    print(f"  n = {n:>8,d}: E[Xi_n] = {m:.6f} = H_n;  /log n = {m / math.log(n):.4f}")
print()

print("=== the martingale's second moment detects the boundary ===")
for beta in (0.5, 1.0, 1.5):
    d = l2_diagnostic(ModelParams(0.5, beta), 10**5)
    print(f"beta = {beta:.1f}: sup E[M^2] = {d.sup_m2:9.3f}  bounded = {d.bounded!s:<5} "
          f"increment slope {d.increment_exponent:.3f} (theory {d.expected_exponent:.2f})")
print()

print("=== critical mixed moments stabilize under (log n)-power scaling ===")
pms = ModelParams(0.5, 1.0)
tables = propagate_moments(pms, 10**6, 3, checkpoints=[10**4, 10**5, 10**6])
print("E[Xi^2] / (log n)^3 at n = 1e4, 1e5, 1e6:",
      "  ".join(f"{t.m[2, 0] / math.log(t.n) ** 3:.4f}" for t in tables))
print("E[Xi^3] / (log n)^5 at n = 1e4, 1e5, 1e6:",
      "  ".join(f"{t.m[3, 0] / math.log(t.n) ** 5:.4f}" for t in tables))
