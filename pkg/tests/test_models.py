import numpy as np
import pytest

from parityqec import hilbert as hb
from parityqec.models import (
    Encoding,
    EffectiveParams,
    MeasurementParams,
    ModelError,
    SingularityError,
    build_dispersive_parity_model,
    build_meter_qubit_model,
    chi_second_order,
    encoding_states,
)

EFF = EffectiveParams(chi1=4.04, chi2=4.04)
EFF4 = EffectiveParams(chi1=6.44, chi2=6.44, nu1=-0.20, nu2=-0.20,
                       alpha_r=-0.04, zeta12=0.23, xi12=-0.47)
MEAS = MeasurementParams(epsilon=1.4, kappa=2.0, eta=0.7, gamma=0.02)


def sector_block(ham, sector, n_max):
    """Resonator block of the Hamiltonian within one two-qubit sector."""
    i = {"00": 0, "01": 1, "10": 2, "11": 3}[sector]
    full = ham.reshape(4, n_max, 4, n_max)
    return full[i, :, i, :]


class TestChiSecondOrder:
    def test_reference_value(self):
        # g, alpha, Delta from the quasidispersive set, qubit 1
        assert chi_second_order(94.84, 232.27, 420.0) == pytest.approx(7.626, abs=5e-4)

    def test_zero_anharmonicity(self):
        assert chi_second_order(50.0, 0.0, 400.0) == 0.0

    def test_zero_coupling(self):
        assert chi_second_order(0.0, 200.0, 400.0) == 0.0

    def test_resonance_raises(self):
        with pytest.raises(SingularityError):
            chi_second_order(50.0, 200.0, 0.0)
        with pytest.raises(SingularityError):
            chi_second_order(50.0, -400.0, 400.0)


class TestMeasurementParams:
    def test_gamma_q_default(self):
        m = MeasurementParams(epsilon=1.0, kappa=2.0, eta=0.5, gamma=0.02)
        assert m.gamma_q == (0.04, 0.0)

    def test_zero_gamma_removes_flip_channels(self):
        m = MeasurementParams(epsilon=1.0, kappa=2.0, eta=0.5, gamma=0.0)
        model = build_dispersive_parity_model(EFF, m, n_max=10)
        assert len(model.collapse_ops) == 1

    def test_invariants(self):
        with pytest.raises(ModelError):
            MeasurementParams(epsilon=1.0, kappa=0.0, eta=0.5)
        with pytest.raises(ModelError):
            MeasurementParams(epsilon=1.0, kappa=1.0, eta=1.5)


class TestEncoding:
    def test_even(self):
        enc = Encoding("even")
        rho0, rho1, stab = encoding_states(enc)
        assert enc.codewords == ("00", "11")
        for rho in (rho0, rho1):
            assert hb.expectation(stab, rho, hermitian=True) == pytest.approx(1.0)

    def test_odd(self):
        enc = Encoding("odd")
        rho0, rho1, stab = encoding_states(enc)
        assert enc.codewords == ("01", "10")
        assert enc.stabilizer_sign == -1
        for rho in (rho0, rho1):
            assert hb.expectation(stab, rho, hermitian=True) == pytest.approx(1.0)

    def test_error_words_preserve_order(self):
        assert Encoding("odd").error_words == ("11", "00")
        assert Encoding("even").error_words == ("10", "01")


class TestDispersiveParityModel:
    def test_hamiltonian_hermitian(self):
        for order, eff in (("second", EFF), ("fourth", EFF4)):
            model = build_dispersive_parity_model(eff, MEAS, n_max=12, order=order)
            h = model.hamiltonian.matrix
            assert np.max(np.abs(h - h.conj().T)) <= 1e-12

    def test_orders_agree_without_fourth_order_terms(self):
        m2 = build_dispersive_parity_model(EFF, MEAS, n_max=12, order="second")
        m4 = build_dispersive_parity_model(EFF, MEAS, n_max=12, order="fourth")
        assert np.allclose(m2.hamiltonian.matrix, m4.hamiltonian.matrix, atol=1e-14)

    def test_parity_block_structure(self):
        # [H, Z1 Z2] = 0 exactly: the measurement never mixes parity sectors
        for order, eff in (("second", EFF), ("fourth", EFF4)):
            model = build_dispersive_parity_model(eff, MEAS, n_max=12, order=order)
            dims = model.dims
            zz = (hb.embed(hb.pauli("Z"), 0, dims) @ hb.embed(hb.pauli("Z"), 1, dims)).matrix
            h = model.hamiltonian.matrix
            assert np.max(np.abs(h @ zz - zz @ h)) == 0.0

    def test_odd_sector_degeneracy_second_order(self):
        model = build_dispersive_parity_model(EFF, MEAS, n_max=12, order="second")
        h = model.hamiltonian.matrix
        b01 = sector_block(h, "01", 12)
        b10 = sector_block(h, "10", 12)
        assert np.array_equal(b01, b10)

    def test_odd_sector_block_is_pure_drive(self):
        model = build_dispersive_parity_model(EFF, MEAS, n_max=12, order="second")
        a = hb.destroy(12).matrix
        expected = MEAS.epsilon * (a + a.conj().T)
        block = sector_block(model.hamiltonian.matrix, "01", 12)
        assert np.allclose(block, expected, atol=1e-12)

    def test_even_sector_block_has_shift(self):
        model = build_dispersive_parity_model(EFF, MEAS, n_max=12, order="second")
        a = hb.destroy(12).matrix
        n = np.diag(np.arange(12.0))
        expected = MEAS.epsilon * (a + a.conj().T) + 2 * 4.04 * n
        block = sector_block(model.hamiltonian.matrix, "00", 12)
        assert np.allclose(block, expected, atol=1e-12)

    def test_fourth_order_three_body_coefficient(self):
        # coefficient of Z1 Z2 a^dag a: difference of the n-linear parts of
        # the 00 and 01 sector blocks isolates 2(chi1 + xi12 ...) structure;
        # read it directly from the diagonal instead
        model = build_dispersive_parity_model(EFF4, MEAS, n_max=12, order="fourth")
        h = model.hamiltonian.matrix
        diag = {s: np.real(np.diag(sector_block(h, s, 12))) for s in
                ("00", "01", "10", "11")}
        # zz-weighted combination (+1, -1, -1, +1)/4 isolates zeta12 + xi12 n
        combo = (diag["00"] - diag["01"] - diag["10"] + diag["11"]) / 4
        slope = combo[1] - combo[0]
        assert slope == pytest.approx(-0.47, abs=1e-12)
        assert combo[0] == pytest.approx(0.23, abs=1e-12)

    def test_second_order_chi_mismatch_rejected(self):
        eff = EffectiveParams(chi1=4.04, chi2=4.05)
        with pytest.raises(ModelError):
            build_dispersive_parity_model(eff, MEAS, n_max=12, order="second")

    def test_small_truncation_rejected(self):
        with pytest.raises(ModelError):
            build_dispersive_parity_model(EFF, MEAS, n_max=8)

    def test_collapse_channels(self):
        model = build_dispersive_parity_model(EFF, MEAS, n_max=10)
        rates = [r for _, r in model.collapse_ops]
        assert rates == [2.0, 0.04]
        assert model.homodyne_channel == 0

    def test_observable_is_y_quadrature(self):
        model = build_dispersive_parity_model(EFF, MEAS, n_max=10)
        a = hb.embed(hb.destroy(10), 2, model.dims).matrix
        assert np.allclose(model.observable.matrix, 1j * (a.conj().T - a))


class TestMeterQubitModel:
    def test_x_coupled_sector_blocks(self):
        model = build_meter_qubit_model("x_coupled_z_measured", 4.04, MEAS)
        h = model.hamiltonian.matrix
        xm = hb.pauli("X").matrix
        assert np.allclose(sector_block(h, "01", 2), 0.0)
        assert np.allclose(sector_block(h, "10", 2), 0.0)
        assert np.allclose(sector_block(h, "00", 2), +2 * 4.04 * xm)
        assert np.allclose(sector_block(h, "11", 2), -2 * 4.04 * xm)

    def test_x_coupled_x_expectation_conserved(self):
        # [X_m, H] = 0, so <X_m> is a constant of closed motion
        model = build_meter_qubit_model("x_coupled_z_measured", 4.04, MEAS)
        xm = hb.embed(hb.pauli("X"), 2, model.dims).matrix
        h = model.hamiltonian.matrix
        assert np.max(np.abs(h @ xm - xm @ h)) == 0.0

    def test_z_coupled_driven_structure(self):
        model = build_meter_qubit_model("z_coupled_driven", 3.0, MEAS)
        h = model.hamiltonian.matrix
        zm = hb.pauli("Z").matrix
        xm = hb.pauli("X").matrix
        assert np.allclose(sector_block(h, "00", 2), MEAS.epsilon * xm + 2 * 3.0 * zm)
        assert np.allclose(sector_block(h, "01", 2), MEAS.epsilon * xm)
        # lowering collapse operator
        op, rate = model.collapse_ops[model.homodyne_channel]
        assert rate == MEAS.kappa
        assert np.count_nonzero(op.matrix) == 4  # sigma^- on the meter site

    def test_z_collapse_variant(self):
        model = build_meter_qubit_model("z_coupled_z_collapse", 3.0, MEAS)
        op, _ = model.collapse_ops[0]
        zm = hb.embed(hb.pauli("Z"), 2, model.dims).matrix
        assert np.allclose(op.matrix, zm)
        assert model.homodyne_phase == 0.0

    def test_rejects_nonpositive_chi(self):
        with pytest.raises(ModelError):
            build_meter_qubit_model("x_coupled_z_measured", 0.0, MEAS)
