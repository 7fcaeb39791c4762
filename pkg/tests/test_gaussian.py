"""Covariance-matrix channel, Gaussian QFI, and squeezed-vacuum closed forms."""

import numpy as np
import pytest

from thermoprobe.errors import PureStateError
from thermoprobe.gaussian import (
    BathSpec,
    GaussianState,
    evolve_cm,
    evolved_cm_qfi,
    gaussian_qfi,
    svs_qfi_evolved,
    svs_qfi_short_time,
    thermal_nu,
    thermal_qfi,
)

BATH = BathSpec(omega=1.0, temperature=0.4, gamma=0.2)


class TestBath:
    def test_nu_value(self):
        nu, dnu = thermal_nu(BATH)
        # high-precision coth(1.25) and (omega/2T^2) csch^2(omega/2T)
        assert nu == pytest.approx(1.1788509796677, abs=1e-12)
        assert dnu == pytest.approx(1.2177801008235, abs=1e-10)

    def test_nu_equals_2nbar_plus_1(self):
        for T in (0.1, 0.4, 1.0, 5.0):
            bath = BathSpec(1.0, T, 0.1)
            assert bath.nu == pytest.approx(2 * bath.nbar + 1, abs=1e-12)

    def test_nu_slope_against_finite_difference(self):
        h = 1e-6
        up = BathSpec(1.0, 0.4 + h, 0.2).nu
        down = BathSpec(1.0, 0.4 - h, 0.2).nu
        assert BATH.nu_slope == pytest.approx((up - down) / (2 * h), rel=1e-7)

    def test_zero_temperature_limit(self):
        assert BathSpec(1.0, 1e-3, 0.1).nu == pytest.approx(1.0, abs=1e-12)

    def test_invalid_bath(self):
        with pytest.raises(ValueError):
            BathSpec(1.0, -0.1, 0.2)
        with pytest.raises(ValueError):
            BathSpec(0.0, 0.4, 0.2)


class TestChannel:
    def test_identity_at_t_zero(self):
        s0 = GaussianState.squeezed_vacuum(0.8)
        out = evolve_cm(s0, BATH, 0.0)
        assert np.allclose(out.cov, s0.cov)

    def test_fixed_point(self):
        s0 = GaussianState.squeezed_vacuum(1.0)
        out = evolve_cm(s0, BATH, 1e4)
        assert np.allclose(out.cov, BATH.nu * np.eye(2), atol=1e-10)
        assert np.allclose(out.mean, 0.0)

    def test_evolved_entry_value(self):
        # sigma_11(t=1) = e^{-0.2} e^{2*1.443} + (1 - e^{-0.2}) nu = 14.887
        s0 = GaussianState.squeezed_vacuum(1.443)
        out = evolve_cm(s0, BATH, 1.0)
        expected = np.exp(-0.2) * np.exp(2 * 1.443) + (1 - np.exp(-0.2)) * BATH.nu
        assert out.cov[0, 0] == pytest.approx(expected, abs=1e-12)
        assert out.cov[0, 0] == pytest.approx(14.893, abs=0.01)

    def test_semigroup_property(self):
        s0 = GaussianState.squeezed_thermal(0.6, 0.3)
        for t1, t2 in [(0.3, 0.9), (1.5, 2.5)]:
            two_step = evolve_cm(evolve_cm(s0, BATH, t1), BATH, t2)
            one_step = evolve_cm(s0, BATH, t1 + t2)
            assert np.max(np.abs(two_step.cov - one_step.cov)) < 1e-12

    def test_mean_decay(self):
        s0 = GaussianState.coherent(2.0)
        out = evolve_cm(s0, BATH, 3.0)
        assert out.mean[0] == pytest.approx(np.exp(-0.3) * np.sqrt(2) * 2.0, abs=1e-12)


class TestGaussianQfi:
    def test_thermal_state_qfi(self):
        nu, dnu = thermal_nu(BATH)
        state = GaussianState.thermal(nu)
        value = gaussian_qfi(state, dnu * np.eye(2))
        assert value == pytest.approx(thermal_qfi(1.0, 0.4), rel=1e-12)
        assert value == pytest.approx(3.80556, abs=1e-4)

    def test_zero_derivatives_give_zero(self):
        state = GaussianState.thermal(1.5)
        assert gaussian_qfi(state, np.zeros((2, 2))) == 0.0

    def test_displacement_term(self):
        state = GaussianState.thermal(2.0)
        value = gaussian_qfi(state, np.zeros((2, 2)), dmean=np.array([0.5, 0.0]))
        assert value == pytest.approx(0.25 / 2.0)

    def test_pure_state_singularity_rejected(self):
        with pytest.raises(PureStateError):
            gaussian_qfi(GaussianState.vacuum(), np.eye(2))
        with pytest.raises(PureStateError):
            gaussian_qfi(GaussianState.squeezed_vacuum(1.0), np.eye(2))

    def test_matches_svs_closed_form_at_t1(self):
        r = 1.443
        direct = evolved_cm_qfi(GaussianState.squeezed_vacuum(r), BATH, 1.0)
        closed = svs_qfi_evolved(r, BATH, 1.0)
        assert direct == pytest.approx(closed, rel=1e-10)

    def test_closed_form_identity_on_grid(self):
        # same quantity through two independent code paths
        for r in np.linspace(0.0, 2.0, 10):
            for gt in np.linspace(1.0, 10.0, 10):
                t = gt / BATH.gamma
                direct = evolved_cm_qfi(GaussianState.squeezed_vacuum(r), BATH, t)
                closed = svs_qfi_evolved(r, BATH, t)
                assert direct == pytest.approx(closed, rel=1e-10)


class TestSvsClosedForms:
    def test_zero_at_t_zero(self):
        assert svs_qfi_evolved(1.0, BATH, 0.0) == 0.0
        assert svs_qfi_short_time(4.0, BATH, 0.0) == 0.0

    def test_short_time_slope_value(self):
        slope = svs_qfi_short_time(4.0, BATH, 1.0)
        assert slope == pytest.approx(1.2500137682, abs=1e-9)
        assert slope == pytest.approx(1.25002, abs=1e-3)
        assert svs_qfi_short_time(4.0, BATH, 0.01) == pytest.approx(0.0125002, abs=1e-6)

    def test_vacuum_reduction(self):
        nu, dnu = thermal_nu(BATH)
        t = 0.3
        expected = 0.5 * BATH.gamma * t * dnu**2 / (nu - 1.0)
        assert svs_qfi_short_time(0.0, BATH, t) == pytest.approx(expected, rel=1e-12)

    def test_long_time_thermal_limit(self):
        value = svs_qfi_evolved(1.4436354751788103, BATH, 20.0 / BATH.gamma)
        assert value == pytest.approx(3.80556, abs=1e-3)
        assert value == pytest.approx(thermal_qfi(1.0, 0.4), abs=1e-3)

    def test_short_time_law_converges_linearly(self):
        # the leading-order law overshoots by O(gamma t); ratio -> 1 as t -> 0
        r = np.arcsinh(2.0)
        n_sv = 4.0
        gaps = []
        for t in (0.04, 0.02, 0.01, 0.005):
            exact = svs_qfi_evolved(r, BATH, t)
            approx = svs_qfi_short_time(n_sv, BATH, t)
            gaps.append(abs(approx / exact - 1.0))
        gaps = np.array(gaps)
        assert np.all(gaps[1:] < gaps[:-1])
        assert gaps[-1] < 0.012
        # slope ratio between successive halvings is ~2 (first-order remainder)
        assert gaps[0] / gaps[2] == pytest.approx(4.0, rel=0.25)

    def test_purity_from_cm(self):
        state = GaussianState.thermal(2.0)
        assert state.purity == pytest.approx(0.5)
