import math

import numpy as np
import pytest

from socp_phase.numerics import DomainError
from socp_phase.order_stats import (
    ThetaGeneral,
    ThetaSigned,
    limit_normsq_lower_block,
    limit_normsq_upper_block,
    limit_normsq_zero_block,
    limit_sums,
    quantiles,
    signed_limits,
)

from oracles import sorted_blocks

BW = 0.2
N_MC = 10**6


@pytest.fixture(scope="module")
def mc_draw():
    rng = np.random.default_rng(20240601)
    return sorted_blocks(N_MC, BW, rng)


@pytest.fixture(scope="module")
def mc_draw_signed():
    rng = np.random.default_rng(20240602)
    return sorted_blocks(N_MC, BW, rng, signed=True)


class TestZeroBlock:
    def test_full_block(self):
        assert limit_normsq_zero_block(1.0, BW) == pytest.approx(0.8, abs=1e-14)

    def test_empty_block(self):
        assert limit_normsq_zero_block(BW, BW) == 0.0

    def test_monte_carlo(self, mc_draw):
        zero, _ = mc_draw
        theta1 = 0.6
        c1 = int(round((1.0 - theta1) * N_MC))
        est = float(np.sum(zero[c1:] ** 2)) / N_MC
        assert limit_normsq_zero_block(theta1, BW) == pytest.approx(est, rel=0.01)


class TestUpperBlock:
    def test_median_split(self):
        assert limit_normsq_upper_block(1.0 - BW / 2, BW) == pytest.approx(0.1, abs=1e-14)

    def test_full_sparse_block(self):
        assert limit_normsq_upper_block(1.0, BW) == pytest.approx(BW, abs=1e-14)

    def test_monte_carlo(self, mc_draw):
        _, sparse = mc_draw
        theta2 = 0.92
        count = int(round((theta2 - 1.0 + BW) * N_MC))
        est = float(np.sum(sparse[:count] ** 2)) / N_MC
        assert limit_normsq_upper_block(theta2, BW) == pytest.approx(est, rel=0.01)


class TestLowerBlock:
    def test_empty(self):
        assert limit_normsq_lower_block(0.0, BW) == 0.0

    def test_half(self):
        assert limit_normsq_lower_block(BW / 2, BW) == pytest.approx(0.1, abs=1e-14)

    def test_monte_carlo(self, mc_draw):
        _, sparse = mc_draw
        theta3 = 0.05
        count = int(round(theta3 * N_MC))
        est = float(np.sum(sparse[-count:] ** 2)) / N_MC
        assert limit_normsq_lower_block(theta3, BW) == pytest.approx(est, rel=0.01)


class TestSums:
    def test_degenerate_corner(self):
        s_zero, s_upper, s_lower, s_middle = limit_sums(ThetaGeneral(1.0, 1.0, 0.0), BW)
        assert s_zero == pytest.approx(0.8 * math.sqrt(2 / math.pi), abs=1e-14)
        assert s_upper == 0.0 and s_lower == 0.0 and s_middle == 0.0

    def test_median_upper(self):
        _, s_upper, _, _ = limit_sums(ThetaGeneral(1.0, 1.0 - BW / 2, 0.0), BW)
        assert s_upper == pytest.approx(BW / math.sqrt(2 * math.pi), abs=1e-14)

    def test_monte_carlo(self, mc_draw):
        zero, sparse = mc_draw
        theta = ThetaGeneral(0.6, 0.92, 0.05)
        c1 = int(round((1.0 - theta.theta1) * N_MC))
        up = int(round((theta.theta2 - 1.0 + BW) * N_MC))
        lo = int(round(theta.theta3 * N_MC))
        s_zero, s_upper, s_lower, s_middle = limit_sums(theta, BW)
        assert s_zero == pytest.approx(float(np.sum(zero[c1:])) / N_MC, rel=0.01)
        assert s_upper == pytest.approx(float(np.sum(sparse[:up])) / N_MC, rel=0.01)
        assert s_lower == pytest.approx(float(np.sum(sparse[-lo:])) / N_MC, rel=0.01)
        assert s_middle == pytest.approx(float(np.sum(sparse[up:-lo])) / N_MC, rel=0.01)

    def test_signs(self):
        for th in (ThetaGeneral(0.5, 0.9, 0.1), ThetaGeneral(0.3, 0.85, 0.02)):
            s_zero, s_upper, s_lower, _ = limit_sums(th, BW)
            assert s_zero >= 0.0 and s_upper >= 0.0 and s_lower <= 0.0


class TestQuantiles:
    def test_trivial_zeros(self):
        F, _, _ = quantiles(ThetaGeneral(1.0, 0.95, 0.05), BW)
        assert F == 0.0
        _, G, H = quantiles(ThetaGeneral(0.6, 1.0 - BW / 2, BW / 2), BW)
        assert abs(G) <= 1e-14 and abs(H) <= 1e-14

    def test_against_erfinv(self):
        from socp_phase.numerics import erfinv

        F, _, _ = quantiles(ThetaGeneral(0.6, 0.95, 0.02), BW)
        assert F == pytest.approx(math.sqrt(2) * erfinv(0.5), abs=1e-13)

    def test_quantile_matches_sorted_sample(self, mc_draw):
        zero, _ = mc_draw
        theta1 = 0.6
        c1 = int(round((1.0 - theta1) * N_MC))
        F, _, _ = quantiles(ThetaGeneral(theta1, 0.95, 0.02), BW)
        assert F == pytest.approx(float(zero[c1]), rel=0.01)


class TestInvariants:
    def test_completeness(self):
        total = (
            limit_normsq_zero_block(1.0, BW)
            + limit_normsq_upper_block(1.0, BW)
            + limit_normsq_lower_block(BW, BW)
        )
        # full blocks double-count the sparse part: zero 0.8 + upper 0.2 + lower 0.2
        assert total == pytest.approx(1.0 + BW, abs=1e-12)
        # unit second moment split at any interior theta2 boundary
        for theta2 in (0.85, 0.9, 0.95):
            theta3 = 1.0 - theta2  # complementary tail cut
            if theta3 > BW:
                continue
            parts = limit_normsq_upper_block(theta2, BW) + limit_normsq_lower_block(theta3, BW)
            assert parts == pytest.approx(BW, abs=1e-12)

    def test_monotone_blocks(self):
        grid = np.linspace(0.0, 1.0, 100)
        z = [limit_normsq_zero_block(BW + (1 - BW) * g, BW) for g in grid]
        assert all(b >= a - 1e-12 for a, b in zip(z, z[1:]))
        u = [limit_normsq_upper_block(1.0 - BW + BW * g, BW) for g in grid]
        assert all(b >= a - 1e-12 for a, b in zip(u, u[1:]))  # widens as theta2 grows
        lo = [limit_normsq_lower_block(BW * g, BW) for g in grid]
        assert all(b >= a - 1e-12 for a, b in zip(lo, lo[1:]))

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            limit_normsq_zero_block(0.1, BW)
        with pytest.raises(DomainError):
            limit_normsq_upper_block(0.5, BW)
        with pytest.raises(DomainError):
            limit_normsq_lower_block(0.5, BW)
        with pytest.raises(DomainError):
            ThetaGeneral(0.5, 0.7, 0.01).validate(BW)  # theta2 below 1-beta_w


class TestSignedLimits:
    def test_full_blocks(self):
        lim = signed_limits(ThetaSigned(1.0, 1.0), BW)
        assert lim.normsq_zero == pytest.approx(1.0 - BW, abs=1e-14)
        assert lim.normsq_upper == pytest.approx(BW, abs=1e-14)
        # both erfinv arguments sit at the -1 limit: exponential terms vanish
        assert lim.s_zero == 0.0 and lim.s_upper == 0.0 and lim.s_tail == 0.0
        assert lim.G_plus == -math.inf

    def test_remark_midpoint(self):
        lim = signed_limits(ThetaSigned((1.0 + BW) / 2, 0.95), BW)
        assert abs(lim.F_plus) <= 1e-15
        assert lim.s_zero == pytest.approx((1 - BW) / math.sqrt(2 * math.pi), abs=1e-14)

    def test_monte_carlo(self, mc_draw_signed):
        zero, sparse = mc_draw_signed
        theta = ThetaSigned(0.7, 0.9)
        lim = signed_limits(theta, BW)
        c1 = int(round((1.0 - theta.theta1p) * N_MC))
        up = int(round((theta.theta2p - 1.0 + BW) * N_MC))
        assert lim.normsq_zero == pytest.approx(float(np.sum(zero[c1:] ** 2)) / N_MC, rel=0.01)
        assert lim.normsq_upper == pytest.approx(float(np.sum(sparse[:up] ** 2)) / N_MC, rel=0.01)
        assert lim.s_zero == pytest.approx(float(np.sum(zero[c1:])) / N_MC, rel=0.01)
        assert lim.s_upper == pytest.approx(float(np.sum(sparse[:up])) / N_MC, rel=0.01)
        assert lim.s_tail == pytest.approx(float(np.sum(sparse[up:])) / N_MC, rel=0.01)
