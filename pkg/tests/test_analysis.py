import numpy as np
import pytest

from erwalk.analysis import (
    Regime,
    build_report,
    chi_square_two_sample,
    chi_square_vs_law,
    classify_phase,
    compare_mc_exact,
    fit_exponent,
    mean_gate,
    stagnation_profile,
)
from erwalk.exact import enumerate_law, exact_mean_xi, l2_diagnostic
from erwalk.walkers import ModelParams, geometric_checkpoints, run_ensemble


class TestClassify:
    @pytest.mark.parametrize(
        "p,beta,regime",
        [
            (0.5, -0.5, Regime.NEGATIVE_BETA),
            (0.5, 0.0, Regime.ZERO_BETA),
            (0.5, 0.5, Regime.SUB_CRITICAL_POSITIVE),
            (0.5, 1.0, Regime.CRITICAL),
            (0.5, 2.0, Regime.LOCALIZED),
            (0.2, 0.25, Regime.CRITICAL),
            (0.8, 3.9, Regime.SUB_CRITICAL_POSITIVE),
            (0.8, 4.1, Regime.LOCALIZED),
        ],
    )
    def test_regimes(self, p, beta, regime):
        assert classify_phase(ModelParams(p, beta)).regime is regime

    def test_exactly_one_regime(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = float(rng.uniform(0.05, 0.95))
            beta = float(rng.uniform(-0.99, 6.0))
            label = classify_phase(ModelParams(p, beta))
            assert isinstance(label.regime, Regime)

    def test_growth_exponent_below_boundary(self):
        label = classify_phase(ModelParams(0.5, -0.5))
        assert label.growth_exponent == pytest.approx(0.75)
        assert label.amplitude is not None
        assert classify_phase(ModelParams(0.5, 2.0)).growth_exponent is None

    def test_critical_tolerance(self):
        assert classify_phase(ModelParams(0.5, 1.0 + 1e-13)).regime is Regime.CRITICAL
        assert (
            classify_phase(ModelParams(0.5, 1.0 + 1e-6)).regime is Regime.LOCALIZED
        )

    def test_consistent_with_l2_verdict(self):
        bounded_regimes = {
            Regime.NEGATIVE_BETA,
            Regime.ZERO_BETA,
            Regime.SUB_CRITICAL_POSITIVE,
        }
        for p, beta in [(0.5, -0.5), (0.5, 0.0), (0.5, 0.5), (0.5, 1.0),
                        (0.5, 2.0), (0.3, 0.2), (0.7, 4.0)]:
            pms = ModelParams(p, beta)
            diag = l2_diagnostic(pms, 10**4)
            assert diag.bounded == (classify_phase(pms).regime in bounded_regimes)


class TestFitExponent:
    def test_pure_power_law(self):
        ns = np.array([10, 20, 50, 100, 500, 1000, 5000])
        vals = 3.0 * ns.astype(float) ** 0.7
        fit = fit_exponent(ns, vals)
        assert fit.slope == pytest.approx(0.7, abs=1e-10)
        assert fit.stderr < 1e-10
        assert np.exp(fit.intercept) == pytest.approx(3.0, rel=1e-10)

    def test_exact_mean_feed(self):
        pms = ModelParams(0.5, 0.0)
        cps = geometric_checkpoints(10**5)
        means = np.array([exact_mean_xi(int(n), pms) for n in cps])
        fit = fit_exponent(cps, means, window=(10**3, 10**5))
        assert fit.slope == pytest.approx(0.5, abs=0.02)

    def test_critical_slope_vanishes(self):
        pms = ModelParams(0.5, 1.0)
        cps = geometric_checkpoints(10**6)
        means = np.array([exact_mean_xi(int(n), pms) for n in cps])
        fit = fit_exponent(cps, means, window=(10**4, 10**6))
        assert abs(fit.slope) < 0.1  # log growth, not a power law
        assert means[-1] / np.log(10**6) == pytest.approx(1.0, abs=0.1)

    def test_requires_five_points(self):
        ns = np.array([10, 20, 50, 100])
        with pytest.raises(ValueError):
            fit_exponent(ns, ns.astype(float))

    def test_requires_positive_values(self):
        ns = np.array([10, 20, 50, 100, 200])
        vals = np.array([1.0, 2.0, -1.0, 3.0, 4.0])
        with pytest.raises(ValueError):
            fit_exponent(ns, vals)


class TestGates:
    def test_exact_match_passes(self):
        g = mean_gate(4.0, 1.0, 1000, 4.0)
        assert g.passed and g.z == 0.0

    def test_bias_fails(self):
        # a 10-sigma bias must fail a 4-sigma gate
        se = np.sqrt(1.0 / 1000)
        g = mean_gate(4.0 + 10 * se, 1.0, 1000, 4.0)
        assert not g.passed
        assert g.z == pytest.approx(10.0)

    def test_degenerate_reported(self):
        g = mean_gate(4.0, 0.0, 1000, 4.0)
        assert g.degenerate and g.passed
        g = mean_gate(4.0, 0.0, 1000, 5.0)
        assert g.degenerate and not g.passed

    def test_compare_with_report(self):
        pms = ModelParams(0.5, 2.0)
        res = run_ensemble(pms, 500, 3000, seed=42, checkpoints=[100, 500])
        rep = build_report(res)
        g = compare_mc_exact(rep, exact_mean_xi(500, pms), 500)
        assert g.passed
        with pytest.raises(ValueError):
            compare_mc_exact(rep, 1.0, 123)


class TestStagnation:
    def test_localized_windows_freeze(self):
        pms = ModelParams(0.5, 2.0)
        res = run_ensemble(pms, 4000, 2000, seed=9,
                           checkpoints=[100, 200, 2000, 4000])
        prof = stagnation_profile(res, [(100, 200), (2000, 4000)])
        assert prof[0].fraction < prof[1].fraction or prof[1].fraction > 0.9
        assert prof[1].fraction > 0.9

    def test_growing_walk_never_freezes(self):
        pms = ModelParams(0.5, -0.5)
        res = run_ensemble(pms, 2000, 1000, seed=9, checkpoints=[1000, 2000])
        prof = stagnation_profile(res, [(1000, 2000)])
        assert prof[0].fraction < 0.01

    def test_requires_checkpoints(self):
        res = run_ensemble(ModelParams(0.5, 1.0), 100, 10, seed=1,
                           checkpoints=[50, 100])
        with pytest.raises(ValueError):
            stagnation_profile(res, [(25, 50)])


class TestReports:
    def test_report_roundtrip(self):
        pms = ModelParams(0.5, 0.5)
        res = run_ensemble(pms, 1000, 500, seed=3,
                           checkpoints=[1, 10, 50, 100, 200, 500, 1000])
        rep = build_report(res, fit_window=(10, 1000),
                           stagnation_windows=[(500, 1000)])
        d = rep.to_dict()
        assert d["params"] == {"p": 0.5, "beta": 0.5}
        assert len(d["mean_xi"]) == len(rep.checkpoints)
        assert "exponent" in d and "stagnation" in d
        assert d["mean_m"] is not None

    def test_martingale_columns(self):
        pms = ModelParams(0.5, 0.5)
        res = run_ensemble(pms, 200, 400, seed=3, checkpoints=[1, 200])
        rep = build_report(res)
        assert rep.mean_m[0] == pytest.approx(1.0)  # M_1 = 1 exactly
        se = np.sqrt(rep.var_m[1] / rep.n_replicates)
        assert rep.mean_m[1] == pytest.approx(1.0, abs=4.5 * se)


class TestChiSquareHelpers:
    def test_goodness_of_fit_calibrated(self, rng):
        pms = ModelParams(0.5, 1.0)
        law, _ = enumerate_law(pms, 8)
        samples = rng.choice(np.arange(9), size=50000, p=law.probs)
        assert chi_square_vs_law(samples, law) > 1e-3

    def test_goodness_of_fit_detects_bias(self, rng):
        pms = ModelParams(0.5, 1.0)
        law, _ = enumerate_law(pms, 8)
        biased = law.probs.copy()
        biased[1] *= 0.8
        biased /= biased.sum()
        samples = rng.choice(np.arange(9), size=50000, p=biased)
        assert chi_square_vs_law(samples, law) < 1e-3

    def test_two_sample_same_law(self):
        rng = np.random.default_rng(987)
        a = rng.binomial(20, 0.3, size=20000)
        b = rng.binomial(20, 0.3, size=30000)
        assert chi_square_two_sample(a, b) > 1e-3

    def test_two_sample_different_laws(self):
        rng = np.random.default_rng(987)
        a = rng.binomial(20, 0.3, size=20000)
        b = rng.binomial(20, 0.33, size=20000)
        assert chi_square_two_sample(a, b) < 1e-3
