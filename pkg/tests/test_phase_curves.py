import math

import numpy as np
import pytest

from socp_phase.phase_curves import (
    characterization_residual,
    design_from_rho,
    fundamental_beta,
    tabulate_curve,
)

from oracles import curve_beta_grid_scan

ALPHAS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


class TestFundamentalBeta:
    @pytest.mark.parametrize("signed", [False, True])
    def test_residuals(self, signed):
        for aw in ALPHAS:
            bw = fundamental_beta(aw, signed)
            assert 0.0 < bw < aw
            assert abs(characterization_residual(aw, bw, signed)) <= 1e-10

    @pytest.mark.parametrize("signed", [False, True])
    def test_grid_scan_oracle(self, signed):
        bw = fundamental_beta(0.5, signed)
        assert bw == pytest.approx(curve_beta_grid_scan(0.5, signed), abs=1e-5)

    @pytest.mark.parametrize("signed", [False, True])
    def test_monotone_in_alpha_w(self, signed):
        assert fundamental_beta(0.3, signed) < fundamental_beta(0.6, signed)

    def test_signed_dominates_general(self):
        for aw in np.linspace(0.05, 0.95, 20):
            assert fundamental_beta(float(aw), True) >= fundamental_beta(float(aw), False)

    def test_bad_alpha_w(self):
        with pytest.raises(ValueError):
            fundamental_beta(1.5)


class TestRhoDesign:
    def test_rho2_medium(self):
        d = design_from_rho(0.5, 2.0, 1.0)
        assert d.alpha_w == pytest.approx(0.4, abs=1e-15)
        assert d.r_opt_sc == pytest.approx(math.sqrt(0.1), abs=1e-15)
        assert d.r_opt_sc == pytest.approx(math.sqrt(0.2 * 0.5), abs=1e-15)

    def test_rho3_medium(self):
        d = design_from_rho(0.5, 3.0, 1.0)
        assert d.alpha_w == pytest.approx(0.45, abs=1e-15)
        assert d.r_opt_sc == pytest.approx(math.sqrt(0.05), abs=1e-15)

    def test_rho3_high(self):
        d = design_from_rho(0.7, 3.0, 1.0)
        assert d.alpha_w == pytest.approx(0.63, abs=1e-15)
        assert d.r_opt_sc == pytest.approx(math.sqrt(0.07), abs=1e-12)

    @pytest.mark.parametrize("alpha,rho,sigma", [(0.5, 2.0, 1.0), (0.7, 3.0, 2.0), (0.3, 1.5, 0.5)])
    def test_radius_identity(self, alpha, rho, sigma):
        d = design_from_rho(alpha, rho, sigma)
        assert d.r_opt_sc**2 + sigma**2 * d.alpha_w == pytest.approx(
            sigma**2 * alpha, abs=1e-12
        )

    def test_design_point_on_curve(self):
        for signed in (False, True):
            d = design_from_rho(0.5, 2.0, 1.0, signed)
            assert abs(characterization_residual(d.alpha_w, d.beta_w, signed)) <= 1e-10


class TestTabulation:
    def test_point_count_and_residuals(self):
        pts = tabulate_curve(points=32)
        assert len(pts) == 32
        for p in pts:
            assert abs(characterization_residual(p.alpha_w, p.beta_w, False)) <= 1e-10
        assert all(a.alpha_w < b.alpha_w for a, b in zip(pts, pts[1:]))
