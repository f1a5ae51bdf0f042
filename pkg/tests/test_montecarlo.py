"""Monte Carlo estimator correctness, reproducibility, and convergence."""

import pytest

from ccdl.analytic import RateInputs, mf_rate, rzf_rate, zf_rate
from ccdl.channel import RngSeed
from ccdl.montecarlo import (
    McConfig,
    convergence_report,
    deterministic_equivalent_check,
    estimate_sum_rate,
)
from ccdl.precoding import PrecoderKind
from ccdl.scheme import scheme_for_gain


def mc(precoder: str, L: int, Q: int, G: int, trials: int, seed: int = 0, snr_db: float = 10.0) -> McConfig:
    scheme = scheme_for_gain(L, snr_db, G, Q, precoder=precoder)
    kind = {"MF": PrecoderKind.mf, "ZF": PrecoderKind.zf, "RZF": PrecoderKind.rzf}[precoder]()
    return McConfig(trials=trials, seed=RngSeed(seed), scheme=scheme, precoder=kind)


class TestEstimateSumRate:
    def test_zf_matches_exact_formula_with_zero_variance(self):
        est = estimate_sum_rate(mc("ZF", 20, 10, 5, trials=500))
        exact = zf_rate(RateInputs.from_streams(5, 10, 20, 10.0))
        assert abs(est.mean - exact) / exact < 1e-12
        assert est.std_error < 1e-10 * exact

    def test_mf_matches_asymptotic_at_large_l(self):
        est = estimate_sum_rate(mc("MF", 256, 64, 5, trials=400))
        ana = mf_rate(RateInputs.from_streams(5, 64, 256, 10.0))
        assert abs(est.mean - ana) / ana < 0.02

    def test_rzf_matches_asymptotic(self):
        est = estimate_sum_rate(mc("RZF", 128, 64, 5, trials=800))
        ana = rzf_rate(RateInputs.from_streams(5, 64, 128, 10.0))
        assert abs(est.mean - ana) / ana < 0.02

    def test_reproducible(self):
        a = estimate_sum_rate(mc("MF", 32, 8, 3, trials=200, seed=17))
        b = estimate_sum_rate(mc("MF", 32, 8, 3, trials=200, seed=17))
        assert a == b

    def test_worker_count_invariance(self, monkeypatch):
        monkeypatch.setenv("CCDL_THREADS", "1")
        serial = estimate_sum_rate(mc("RZF", 32, 16, 3, trials=150, seed=4))
        monkeypatch.setenv("CCDL_THREADS", "3")
        threaded = estimate_sum_rate(mc("RZF", 32, 16, 3, trials=150, seed=4))
        assert serial == threaded

    def test_seed_changes_estimate(self):
        a = estimate_sum_rate(mc("MF", 32, 8, 3, trials=200, seed=1))
        b = estimate_sum_rate(mc("MF", 32, 8, 3, trials=200, seed=2))
        assert a.mean != b.mean

    def test_std_error_scales_with_trials(self):
        small = estimate_sum_rate(mc("MF", 16, 4, 2, trials=400, seed=9))
        large = estimate_sum_rate(mc("MF", 16, 4, 2, trials=1600, seed=9))
        ratio = small.std_error / large.std_error
        assert ratio == pytest.approx(2.0, rel=0.2)

    def test_small_trial_warning(self):
        with pytest.warns(UserWarning):
            mc("MF", 16, 4, 2, trials=50)


class TestConvergenceReport:
    def test_mf_gap_shrinks_with_l(self):
        # the asymptotic MF formula is approached like ~1.8/L at c=1/4
        rows = convergence_report([32, 64, 128], 0.25, 5, 10.0, PrecoderKind.mf(), 600, RngSeed(21))
        gaps = [r.rel_gap for r in rows]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[-1] < 0.02

    def test_zf_gap_machine_precision(self):
        rows = convergence_report([16, 32, 64], 0.5, 5, 10.0, PrecoderKind.zf(), 200, RngSeed(21))
        assert all(r.rel_gap < 1e-12 for r in rows)

    def test_rzf_gap_shrinks_below_one_percent(self):
        rows = convergence_report([16, 32, 64], 0.5, 5, 10.0, PrecoderKind.rzf(), 400, RngSeed(21))
        gaps = [r.rel_gap for r in rows]
        noise = [2 * r.std_error / r.analytic for r in rows]
        assert all(gaps[i + 1] <= gaps[i] + noise[i + 1] for i in range(len(gaps) - 1))
        assert gaps[-1] < 0.01

    def test_non_integer_streams_rejected(self):
        with pytest.raises(ValueError):
            convergence_report([16, 24], 0.3, 5, 10.0, PrecoderKind.mf(), 100, RngSeed(0))


class TestDeterministicEquivalent:
    def test_half_ratio(self):
        a_emp, a_theory, gap = deterministic_equivalent_check(0.5, 10.0, 256, 200, RngSeed(31))
        assert a_theory == pytest.approx(5.74166, abs=1e-5)
        assert gap < 0.02

    def test_vanishing_ratio_approaches_power(self):
        a_emp, _, _ = deterministic_equivalent_check(1 / 256, 10.0, 256, 200, RngSeed(32))
        assert a_emp == pytest.approx(10.0, rel=0.03)

    def test_vanishing_power(self):
        a_emp, _, _ = deterministic_equivalent_check(0.5, 1e-6, 64, 100, RngSeed(33))
        assert a_emp == pytest.approx(0.0, abs=1e-5)
