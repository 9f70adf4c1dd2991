import numpy as np
import pytest

from parityqec import analytics as an


class TestSteadyStateAmplitude:
    def test_odd_sector_reference(self):
        a = an.steady_state_amplitude(0.0, 2.0, 1.4)
        assert a == pytest.approx(-1.4j)
        assert 2 * a.imag == pytest.approx(-2.8)

    def test_zero_drive(self):
        assert an.steady_state_amplitude(8.08, 2.0, 0.0) == 0.0

    def test_even_sectors_mirror_in_x(self):
        chi = 4.04
        a00 = an.steady_state_amplitude(+2 * chi, 2.0, 1.4)
        a11 = an.steady_state_amplitude(-2 * chi, 2.0, 1.4)
        assert a00.real == pytest.approx(-a11.real)
        assert a00.imag == pytest.approx(a11.imag)

    def test_is_fixed_point_of_drive_on_dynamics(self):
        chi_ij, kappa, eps = 8.08, 2.0, 1.4
        a_ss = an.steady_state_amplitude(chi_ij, kappa, eps)
        residual = -1j * eps - (1j * chi_ij + kappa / 2) * a_ss
        assert abs(residual) < 1e-12

    def test_sector_shift_table(self):
        chi = 4.04
        assert [an.sector_shift(s, chi) for s in an.SECTOR_LABELS] == \
            [2 * chi, 0.0, 0.0, -2 * chi]
        with pytest.raises(ValueError):
            an.sector_shift("02", chi)


class TestSemiclassicalAmplitude:
    def test_long_time_limit_is_steady_state(self):
        # amplitude converges as exp(-kappa t / 2): 1e-9 needs t ~ 45/kappa
        a = an.semiclassical_amplitude(45.0 / 2.0, 0.3 + 0.1j, 8.08, 2.0, 1.4)
        assert a == pytest.approx(an.steady_state_amplitude(8.08, 2.0, 1.4),
                                  abs=1e-9)

    def test_drive_off_envelope(self):
        alpha0 = -1.4j
        t = 2.0 / 2.0  # 2 / kappa
        a = an.semiclassical_amplitude(t, alpha0, 8.08, 2.0, 1.4, drive_on=False)
        assert abs(a) == pytest.approx(1.4 * np.exp(-1.0), rel=1e-12)

    def test_vectorized_time(self):
        ts = np.linspace(0, 3, 7)
        vals = an.semiclassical_amplitude(ts, -1.4j, 0.0, 2.0, 1.4)
        assert vals.shape == (7,)


class TestCoherenceLoss:
    def test_reference_point(self):
        zeta, factor = an.coherence_loss_factor(4.04, 2.0, 0.7, 1.96)
        assert zeta == pytest.approx(0.579, abs=5e-4)
        assert factor == pytest.approx(0.560, abs=5e-4)

    def test_perfect_detector(self):
        zeta, factor = an.coherence_loss_factor(5.0, 2.0, 1.0, 2.0)
        assert zeta == 0.0 and factor == 1.0

    @pytest.mark.parametrize("chi,kappa,eta,a2", [
        (4.04, 2.0, 0.7, 1.96),
        (8.0, 2.0, 0.3, 1.5),
        (2.0, 1.0, 0.9, 0.8),
        (6.0, 3.0, 0.5, 1.2),
        (3.0, 0.5, 0.0, 1.0),
    ])
    def test_quadrature_matches_closed_form(self, chi, kappa, eta, a2):
        z_exact, _ = an.coherence_loss_factor(chi, kappa, eta, a2)
        z_num = an.coherence_loss_numerical(chi, kappa, eta, a2)
        assert z_num == pytest.approx(z_exact, rel=1e-6)

    def test_large_chi_limit(self):
        # 16 chi^2 >= 50 kappa^2: exact zeta within 2% of (1-eta)|alpha0|^2
        chi, kappa = 4.0, 2.0
        assert 16 * chi ** 2 >= 50 * kappa ** 2
        zeta, _ = an.coherence_loss_factor(chi, kappa, 0.4, 1.5)
        assert zeta == pytest.approx(an.zeta_shorthand(0.4, 1.5), rel=0.02)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            an.coherence_loss_factor(1.0, 1.0, 1.5, 1.0)


class TestSpectra:
    def test_engineered_even_splitting(self):
        eng, _ = an.engineered_vs_native_spectrum(4.04, 2.0)
        assert eng[0] - eng[3] == pytest.approx(4 * 4.04 * 2.0)

    def test_engineered_odd_degenerate_at_zero(self):
        eng, _ = an.engineered_vs_native_spectrum(4.04, 2.0)
        assert eng[1] == 0.0 and eng[2] == 0.0

    def test_native_parity_degeneracy_exact(self):
        _, nat = an.engineered_vs_native_spectrum(4.04, 2.0)
        assert nat[0] == nat[3]
        assert nat[1] == nat[2]
        assert nat[0] - nat[1] == pytest.approx(2 * 4.04 * 2.0)
