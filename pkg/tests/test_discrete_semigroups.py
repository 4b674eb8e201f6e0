import math
import threading

import numpy as np
import pytest

from _gen import ginibre, hermitian, rng
from coslaw.errors import ConfigError, DomainError, Overflowed
from coslaw.discrete_semigroups import (
    DiscreteCosineSequence,
    ExpSemigroup,
    PowerSemigroup,
    cesaro_wallen,
    discrete_eval,
    discrete_law_check,
    expm_taylor,
    matrix_exp_semigroup_check,
    semigroup_eval,
    semigroup_law_check,
)
from coslaw.linalg_core import operator_norm

GOLDEN = (1 + math.sqrt(5)) / 2


def mean_chord(points=200_000):
    """Midpoint rule for (1/2pi) int_0^2pi |e^{i phi} - 1| d phi."""
    phi = (np.arange(points) + 0.5) * 2 * math.pi / points
    return float(np.mean(2 * np.abs(np.sin(phi / 2))))


class TestDiscreteSequence:
    def test_identity(self):
        seq = DiscreteCosineSequence(np.eye(2))
        assert np.array_equal(seq[57], np.eye(2))

    def test_third_roots_cycle(self):
        seq = DiscreteCosineSequence(-0.5)
        vals = [seq[n][0, 0].real for n in range(9)]
        assert vals == [1, -0.5, -0.5, 1, -0.5, -0.5, 1, -0.5, -0.5]

    def test_chebyshev_oracle(self):
        theta = 0.7
        seq = DiscreteCosineSequence(math.cos(theta))
        d, _ = seq.distances(10_000)
        n = np.arange(10_001)
        assert d == pytest.approx(np.abs(np.cos(n * theta) - 1), abs=1e-9)

    def test_matrix_against_spectrum(self):
        X = hermitian(rng(41), 4, norm=0.95)
        lam, V = np.linalg.eigh(X)
        seq = DiscreteCosineSequence(X)
        for n in (5, 123, 999):
            oracle = (V * np.cos(n * np.arccos(lam))) @ V.conj().T
            assert operator_norm(seq[n] - oracle) <= 1e-9

    def test_even(self):
        seq = DiscreteCosineSequence(ginibre(rng(42), 3) * 0.3)
        assert np.array_equal(seq[-7], seq[7])

    def test_index_limit(self):
        with pytest.raises(DomainError):
            discrete_eval(DiscreteCosineSequence(0.5), 10**6 + 1)

    def test_overflow(self):
        with pytest.raises(Overflowed):
            DiscreteCosineSequence(2.0)[2000]

    def test_concurrent_reads(self):
        seq = DiscreteCosineSequence(math.cos(0.1))
        out = {}

        def read(n):
            out[n] = seq[n][0, 0].real

        threads = [threading.Thread(target=read, args=(n,)) for n in (500, 1500, 1000, 2000)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        assert all(v == pytest.approx(math.cos(0.1 * n), abs=1e-10) for n, v in out.items())


class TestDiscreteLaw:
    def test_identity(self):
        v = discrete_law_check(DiscreteCosineSequence(np.eye(2)), r=0.5)
        assert v.premise_holds and v.conclusion_holds

    def test_third_root_witness(self):
        v = discrete_law_check(DiscreteCosineSequence(-0.5), r=1.5)
        assert v.evidence.limsup_estimate == 1.5 and not v.premise_holds

    def test_equidistributed(self):
        v = discrete_law_check(DiscreteCosineSequence(math.cos(0.3) * np.eye(2)), r=1.5)
        assert v.evidence.limsup_estimate > 1.99 and not v.premise_holds

    def test_growth(self):
        v = discrete_law_check(DiscreteCosineSequence(2.0), r=1.5)
        assert v.evidence.overflowed and not v.premise_holds

    @pytest.mark.parametrize("r, N", [(1.6, 1000), (1.0, 10)])
    def test_bad_arguments(self, r, N):
        with pytest.raises(ConfigError):
            discrete_law_check(DiscreteCosineSequence(0.5), r=r, N=N)


class TestPowerSemigroup:
    def test_identity_large_power(self):
        assert np.array_equal(semigroup_eval(PowerSemigroup(np.eye(3)), 10**9), np.eye(3))

    def test_eighth_root(self):
        P = semigroup_eval(PowerSemigroup(np.diag([np.exp(1j * math.pi / 4)])), 8)
        assert P[0, 0] == pytest.approx(1, abs=1e-14)

    def test_binary_against_sequential(self):
        T = ginibre(rng(43), 4) / 2
        P = np.eye(4, dtype=complex)
        for _ in range(37):
            P = P @ T
        Q = semigroup_eval(PowerSemigroup(T), 37)
        assert operator_norm(Q - P) <= 1e-10 * operator_norm(P)

    def test_negative_index(self):
        with pytest.raises(DomainError):
            semigroup_eval(PowerSemigroup(0.5), -1)


class TestCesaro:
    def test_identity(self):
        liminf, avg = cesaro_wallen(PowerSemigroup(np.eye(2)), 1000)
        assert liminf == 0 and not np.any(avg)

    def test_quadrature_oracle(self):
        assert mean_chord() == pytest.approx(4 / math.pi, abs=1e-10)

    def test_irrational_rotation_averages_to_four_over_pi(self):
        liminf, _ = cesaro_wallen(PowerSemigroup(np.exp(2j * math.pi / GOLDEN)), 100_000)
        assert liminf == pytest.approx(mean_chord(), abs=1e-2)

    def test_eighth_root_period_average(self):
        # exact mean over one period of the rotation by pi/4 is cot(pi/16)/4
        liminf, avg = cesaro_wallen(PowerSemigroup(np.exp(1j * math.pi / 4)), 100_000)
        assert avg[-1] == pytest.approx(1 / (4 * math.tan(math.pi / 16)), abs=1e-9)
        assert liminf == pytest.approx(1 / (4 * math.tan(math.pi / 16)), abs=1e-4)

    def test_contraction_averages_below_one(self):
        liminf, avg = cesaro_wallen(PowerSemigroup(0.5), 10_000)
        assert liminf < 1 and np.all(np.diff(avg) > 0)

    def test_overflow(self):
        liminf, _ = cesaro_wallen(PowerSemigroup(1.5), 10_000)
        assert math.isinf(liminf)


class TestSemigroupLaw:
    def test_identity(self):
        v = semigroup_law_check(PowerSemigroup(np.eye(2)), r=1.0)
        assert v.premise_holds and v.conclusion_holds

    def test_golden_rotation(self):
        v = semigroup_law_check(PowerSemigroup(np.exp(2j * math.pi / GOLDEN)), r=0.95)
        assert v.evidence.limsup_estimate > 1.99 and not v.premise_holds

    def test_threshold_range(self):
        with pytest.raises(ConfigError):
            semigroup_law_check(PowerSemigroup(0.5), r=1.5)


class TestExpSemigroup:
    def test_expm_against_eigh(self):
        H = hermitian(rng(44), 5, norm=4.0)
        lam, V = np.linalg.eigh(H)
        oracle = (V * np.exp(1j * lam)) @ V.conj().T
        assert operator_norm(expm_taylor(1j * H) - oracle) <= 1e-12

    def test_zero(self):
        v = matrix_exp_semigroup_check(np.zeros((2, 2)))
        assert v.premise_holds and v.conclusion_holds

    def test_rotation(self):
        v = matrix_exp_semigroup_check(1j * np.eye(2), r=1.0)
        assert v.evidence.limsup_estimate > 1.99 and not v.premise_holds

    def test_decay(self):
        v = matrix_exp_semigroup_check(-0.1 * np.eye(2), r=0.95)
        assert v.evidence.limsup_estimate == pytest.approx(1, abs=1e-3) and not v.premise_holds

    def test_domain(self):
        with pytest.raises(DomainError):
            ExpSemigroup(np.eye(2)).evaluate(101)
