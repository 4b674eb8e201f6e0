import math

import numpy as np
import pytest

from _gen import hermitian, rng
from coslaw.cosine_families import MatrixCosineFamily, ScalarCosineFamily
from coslaw.errors import ConfigError
from coslaw.laws import (
    Approach,
    Dichotomy,
    ScanConfig,
    Trend,
    classify_scalar_dichotomy,
    contraction_S_iteration,
    default_scan_config,
    gelfand_check,
    golden_max,
    law_check_limsup_infinity,
    scaled_gap_witness,
    shrinking_scan,
    windowed_sup_scan,
)


class TestScanConfig:
    @pytest.mark.parametrize("kwargs", [
        {"t_start": 5, "t_end": 1},
        {"step": 0},
        {"step": 100, "window_len": 50},
        {"window_len": 5000},
        {"t_end": math.inf},
        {"tail_windows": 0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            ScanConfig(**kwargs)

    def test_grid(self):
        cfg = ScanConfig(0, 1, 0.25, 0.5)
        assert cfg.grid() == pytest.approx([0, 0.25, 0.5, 0.75, 1.0])

    def test_grid_guard(self):
        with pytest.raises(ConfigError):
            ScanConfig(0, 1e9, 1e-3, 1).grid()

    def test_default_hermitian_has_no_roundoff_growth(self):
        f = MatrixCosineFamily(hermitian(rng(31), 5, norm=3.0))
        cfg = default_scan_config(f)
        assert cfg.t_end == pytest.approx(1e3)


class TestWindowedScan:
    def test_zero_family(self):
        est = windowed_sup_scan(ScalarCosineFamily(0), ScanConfig())
        assert est.limsup_estimate == 0 and all(v == 0 for _, v in est.window_sups)

    def test_dense_grid_reaches_two(self):
        est = windowed_sup_scan(ScalarCosineFamily(1), ScanConfig(0, 1000, 1e-3, 50))
        assert est.limsup_estimate >= 1.999 and not est.overflowed
        assert est.grid_error == pytest.approx(1e-3)
        assert est.trend is Trend.STABLE

    def test_cosh_overflows_early(self):
        est = windowed_sup_scan(ScalarCosineFamily(1j), ScanConfig(0, 100, 1e-2, 5))
        assert est.overflowed and math.isinf(est.limsup_estimate)
        assert est.times[-1] < 20
        assert est.to_json()["limsup"] is None

    def test_thread_count_does_not_change_result(self, monkeypatch):
        f = MatrixCosineFamily(hermitian(rng(32), 3))
        cfg = ScanConfig(0, 200, 0.01, 10)
        monkeypatch.setenv("COSLAW_THREADS", "1")
        a = windowed_sup_scan(f, cfg)
        monkeypatch.setenv("COSLAW_THREADS", "4")
        b = windowed_sup_scan(f, cfg)
        assert a.window_sups == b.window_sups and np.array_equal(a.norms, b.norms)

    def test_shrinking_scan_goes_to_zero(self):
        est = shrinking_scan(ScalarCosineFamily(3.0))
        assert est.limsup_estimate < 1e-20
        assert est.window_sups[0][0] == 0.5


class TestDichotomy:
    def test_zero(self):
        assert classify_scalar_dichotomy(0).category is Dichotomy.ZERO

    def test_two(self):
        res = classify_scalar_dichotomy(1)
        assert res.category is Dichotomy.TWO and res.to_json()["class"] == "two"

    def test_infinite(self):
        assert classify_scalar_dichotomy(1j).category is Dichotomy.INFINITE

    def test_zero_at_origin_recovers_frequency(self):
        res = classify_scalar_dichotomy(2.5, Approach.ZERO)
        assert res.category is Dichotomy.ZERO
        assert abs(res.recovered_a - 2.5) <= 1e-6

    def test_complex_frequency_at_origin(self):
        res = classify_scalar_dichotomy(-1.0 + 0.5j, Approach.ZERO)
        assert abs(res.recovered_a - (1.0 - 0.5j)) <= 1e-6

    def test_short_horizon_is_indeterminate(self):
        res = classify_scalar_dichotomy(1, cfg=ScanConfig(0, 1, 0.01, 0.5))
        assert res.category is Dichotomy.INDETERMINATE and res.diagnostics


class TestLawCheck:
    def test_zero_generator(self):
        v = law_check_limsup_infinity(MatrixCosineFamily(np.zeros((2, 2))))
        assert v.premise_holds and v.conclusion_holds and not v.counterexample

    def test_scalar_one(self):
        v = law_check_limsup_infinity(ScalarCosineFamily(1), r=2.0)
        assert not v.premise_holds and not v.counterexample
        assert set(v.to_json()) == {"r", "premise", "conclusion", "limsup", "overflowed", "worst"}

    def test_series_strategy(self):
        v = law_check_limsup_infinity(MatrixCosineFamily(hermitian(rng(33), 3, norm=2.0), "series"), r=1.95)
        assert v.evidence.limsup_estimate >= 1.95

    def test_threshold_range(self):
        with pytest.raises(ConfigError):
            law_check_limsup_infinity(ScalarCosineFamily(1), r=2.5)


class TestGelfand:
    def test_zero(self):
        assert gelfand_check([0, 0], 3.0) == (0.0, 0.0)

    def test_pi(self):
        lhs, rhs = gelfand_check([1, 2], math.pi)
        assert lhs == pytest.approx(2, abs=1e-14) and rhs == pytest.approx(2, abs=1e-14)

    def test_beyond_series_domain(self):
        lhs, rhs = gelfand_check([30.0, 1.0], 5.0)
        assert abs(lhs - rhs) <= 1e-10 * (1 + rhs)


class TestContraction:
    def test_fixed_point(self):
        assert contraction_S_iteration(0.0) == (0.0, 1)

    @pytest.mark.parametrize("S0", [1.0, 0.5])
    def test_decay(self, S0):
        S, it = contraction_S_iteration(S0)
        assert S <= 1e-12 and it <= 60

    def test_first_step(self):
        S, _ = contraction_S_iteration(1.0, tol=1.0)
        assert S == pytest.approx(1 - math.sqrt(0.5), rel=1e-15)

    def test_range(self):
        with pytest.raises(ValueError):
            contraction_S_iteration(1.5)


class TestWitness:
    def test_golden_max(self):
        x, v = golden_max(lambda t: -(t - 0.3) ** 2, 0, 1)
        assert x == pytest.approx(0.3, abs=1e-8) and v == pytest.approx(0, abs=1e-15)

    def test_equal_frequencies(self):
        assert scaled_gap_witness(1, 1) == 0.0

    def test_one_three(self):
        # calculus oracle: cos 3t - cos t = 4c^3 - 4c, maximal at c = 1/sqrt(3)
        c = 1 / math.sqrt(3)
        assert scaled_gap_witness(1, 3) == pytest.approx(abs(4 * c**3 - 4 * c), abs=1e-9)

    def test_near_resonant(self):
        eps = 1e-3
        cfg = ScanConfig(0, 2 * math.pi / eps, 1e-2, 2 * math.pi / eps)
        assert scaled_gap_witness(1, 1 + eps, cfg) > 1.999
