"""Consolidated pass/fail gates mapping each phase regime to its checks.

The gate battery re-derives its own data (exact engine plus light Monte
Carlo), so a report run is self-contained.  Sizes scale with the `scale`
parameter; defaults complete in about a minute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analysis, branching, exact
from .walkers import (
    ModelParams,
    geometric_checkpoints,
    run_coupled_ensemble,
    run_ensemble,
)

__all__ = ["Gate", "run_gates", "REGIMES"]

REGIMES = (
    "negative_beta",
    "zero_beta",
    "sub_critical_positive",
    "critical",
    "localized",
)

#: reference values the gates check against; tests corrupt these to verify
#: that a broken harness is reported loudly
GOLDEN = {
    "localized_limit_mean": 4.0,  # beta/(beta - p(beta+1)) at (0.5, 2)
    "critical_log_slope": 1.0,  # E[Xi_n]/log n -> beta at (0.5, 1)
    "negative_beta_exponent": 0.75,  # p(beta+1) - beta at (0.5, -0.5)
    "zero_beta_exponent": 0.5,  # at (0.5, 0)
    "sub_critical_exponent": 0.25,  # at (0.5, 0.5)
}


@dataclass
class Gate:
    regime: str
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        self.passed = bool(self.passed)


def _exponent_gate(regime, params, target, n_max=10**5, tol=0.05):
    cps = geometric_checkpoints(n_max)
    means = np.array([exact.exact_mean_xi(int(n), params) for n in cps])
    fit = analysis.fit_exponent(cps, means, window=(10**3, n_max))
    ok = abs(fit.slope - target) <= tol
    return Gate(
        regime,
        "mean growth exponent",
        ok,
        f"slope {fit.slope:.4f} vs {target} (tol {tol})",
    )


def _l2_gate(regime, params, expect_bounded, n_max=10**4):
    d = exact.l2_diagnostic(params, n_max)
    ok = d.bounded == expect_bounded
    return Gate(
        regime,
        "martingale second moment",
        ok,
        f"bounded={d.bounded} (expected {expect_bounded}), "
        f"increment slope {d.increment_exponent:.3f} vs {d.expected_exponent:.3f}",
    )


def _coupling_gate(regime, params, direction, seed, n_steps, n_reps):
    try:
        res = run_coupled_ensemble(
            params, n_steps, n_reps, seed, checkpoints=[n_steps]
        )
    except AssertionError as err:
        return Gate(regime, "pathwise coupling order", False, str(err))
    if direction == "ge":
        ok = bool(np.all(res.xi[:, -1] >= res.xi_lerw[:, -1]))
    else:
        ok = bool(np.all(res.xi[:, -1] <= res.xi_lerw[:, -1]))
    return Gate(
        regime,
        "pathwise coupling order",
        ok,
        f"order {direction} held on {n_reps} paths to n = {n_steps}",
    )


def _mc_mean_gate(regime, params, seed, n_steps, n_reps, level):
    res = run_ensemble(
        params, n_steps, n_reps, seed, checkpoints=[n_steps], record=("xi",)
    )
    rep = analysis.build_report(res, confidence_z=level)
    g = analysis.compare_mc_exact(rep, exact.exact_mean_xi(n_steps, params), n_steps, level)
    return Gate(regime, "MC mean vs exact", g.passed, g.detail)


def run_gates(regimes=None, seed: int = 20240801, scale: float = 1.0, level: float = 4.0):
    """Run the gate battery for the requested regimes (all by default)."""
    if regimes is None:
        regimes = REGIMES
    unknown = set(regimes) - set(REGIMES)
    if unknown:
        raise ValueError(f"unknown regimes: {sorted(unknown)}")
    reps = max(200, int(2000 * scale))
    gates: list[Gate] = []

    if "negative_beta" in regimes:
        pms = ModelParams(0.5, -0.5)
        gates.append(
            _exponent_gate("negative_beta", pms, GOLDEN["negative_beta_exponent"])
        )
        gates.append(_coupling_gate("negative_beta", pms, "ge", seed, 2000, reps))
        res = run_ensemble(
            pms, 4000, reps, seed + 1, checkpoints=[2000, 4000], record=("xi",)
        )
        stag = analysis.stagnation_profile(res, [(2000, 4000)])[0]
        gates.append(
            Gate(
                "negative_beta",
                "no late stagnation",
                stag.fraction < 0.02,
                f"stagnant fraction {stag.fraction:.4f} on [2000, 4000]",
            )
        )

    if "zero_beta" in regimes:
        pms = ModelParams(0.5, 0.0)
        gates.append(_exponent_gate("zero_beta", pms, GOLDEN["zero_beta_exponent"]))
        gates.append(_l2_gate("zero_beta", pms, expect_bounded=True))
        gates.append(_mc_mean_gate("zero_beta", pms, seed + 2, 2000, reps, level))

    if "sub_critical_positive" in regimes:
        pms = ModelParams(0.5, 0.5)
        gates.append(
            _exponent_gate(
                "sub_critical_positive", pms, GOLDEN["sub_critical_exponent"]
            )
        )
        gates.append(_l2_gate("sub_critical_positive", pms, expect_bounded=True))
        amp = exact.asymptotic_constant(pms)
        n_ref = 10**5
        ratio = exact.exact_mean_xi(n_ref, pms) / (
            amp * n_ref**pms.growth_exponent
        )
        gates.append(
            Gate(
                "sub_critical_positive",
                "amplitude ratio",
                0.9 <= ratio <= 1.1,
                f"exact mean / (C n^kappa) = {ratio:.4f} at n = {n_ref}",
            )
        )

    if "critical" in regimes:
        pms = ModelParams(0.5, 1.0)
        n_ref = 10**5
        mean = exact.exact_mean_xi(n_ref, pms)
        ratio = mean / np.log(n_ref)
        ok = 0.9 <= ratio / GOLDEN["critical_log_slope"] <= 1.15
        gates.append(
            Gate(
                "critical",
                "log-growth of the mean",
                ok,
                f"E[Xi_n]/log n = {ratio:.4f} at n = {n_ref}",
            )
        )
        gates.append(_l2_gate("critical", pms, expect_bounded=False))
        bound = exact.lower_bound_prob_one(pms, 10**5)
        n_mc = 2000
        res = run_ensemble(
            pms, n_mc, reps, seed + 3, checkpoints=[n_mc], record=("xi",)
        )
        freq = float(np.mean(res.arrays["xi"][:, -1] == 1))
        se = np.sqrt(max(freq * (1 - freq), 1e-12) / reps)
        ok = freq >= bound.certified_lower - level * se
        gates.append(
            Gate(
                "critical",
                "localization probability bound",
                ok,
                f"freq(Xi = 1) = {freq:.4f} >= certified {bound.certified_lower:.4f}"
                f" - {level} se",
            )
        )

    if "localized" in regimes:
        pms = ModelParams(0.5, 2.0)
        lim = exact.limit_mean_xi(pms)
        ok = abs(lim - GOLDEN["localized_limit_mean"]) <= 1e-12
        gates.append(
            Gate("localized", "limit of the mean", ok, f"limit {lim} vs 4")
        )
        gates.append(_mc_mean_gate("localized", pms, seed + 4, 2000, reps, level))
        res = run_ensemble(
            pms, 4000, reps, seed + 5, checkpoints=[2000, 4000], record=("xi",)
        )
        stag = analysis.stagnation_profile(res, [(2000, 4000)])[0]
        gates.append(
            Gate(
                "localized",
                "late-window stagnation",
                stag.fraction > 0.95,
                f"stagnant fraction {stag.fraction:.4f} on [2000, 4000]",
            )
        )
        bp = branching.BranchingParams(0.5, 2.0, max_gen=40)
        rng = np.random.default_rng(seed + 6)
        n_runs = max(200, int(1000 * scale))
        extinct = sum(
            branching.simulate(bp, rng).extinct for _ in range(n_runs)
        )
        frac = extinct / n_runs
        gates.append(
            Gate(
                "localized",
                "branching extinction",
                frac >= 0.99,
                f"extinct fraction {frac:.4f} over {n_runs} runs (mean offspring 0.75)",
            )
        )

    return gates
