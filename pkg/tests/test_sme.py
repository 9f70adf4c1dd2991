import math

import numpy as np
import pytest

from parityqec import analytics
from parityqec import sme
from parityqec.hilbert import (
    DensityMatrix,
    basis_ket,
    coherent_state,
    coherent_vector,
    fidelity,
    partial_trace,
    pure_state,
)
from parityqec.models import (
    Encoding,
    EffectiveParams,
    MeasurementParams,
    ModelError,
    build_dispersive_parity_model,
    qubit_sector_kets,
)
from parityqec.controller import ProtocolConfig

EFF = EffectiveParams(chi1=4.04, chi2=4.04)
KETS = qubit_sector_kets()


def parity_model(eta=0.7, gamma=0.0, n_max=12, epsilon=1.4, kappa=2.0, order="second",
                 eff=EFF):
    meas = MeasurementParams(epsilon=epsilon, kappa=kappa, eta=eta, gamma=gamma)
    return build_dispersive_parity_model(eff, meas, n_max=n_max, order=order), meas


def sector_state(sector, resonator_alpha, n_max):
    if resonator_alpha is None:
        ket = basis_ket(0, n_max)
    else:
        ket = coherent_vector(resonator_alpha, n_max)
    return pure_state(np.kron(KETS[sector], ket), (2, 2, n_max))


class TestStep:
    def test_dark_state_is_stationary(self):
        # eta = 0, gamma = 0, eps = 0: vacuum x |01> is annihilated by all
        # generators
        model, meas = parity_model(eta=0.0, epsilon=0.0)
        rho = sector_state("01", None, 12)
        rng = np.random.default_rng(0)
        new, dw, _ = sme.step(rho, model, meas, 1e-3, rng)
        assert dw == 0.0
        assert np.max(np.abs(new.matrix - rho.matrix)) < 1e-14

    def test_trace_renormalized(self):
        model, meas = parity_model(eta=0.7)
        rho = sector_state("01", -1.4j, 12)
        rng = np.random.default_rng(1)
        state = rho
        for _ in range(50):
            state, _, _ = sme.step(state, model, meas, 1e-3, rng)
            assert abs(np.trace(state.matrix).real - 1.0) <= 1e-9

    def test_current_sample_matches_formula(self):
        model, meas = parity_model(eta=0.7)
        rho = sector_state("01", -1.4j, 12)
        rng = np.random.default_rng(2)
        y = float(np.real(np.trace(model.observable.matrix @ rho.matrix)))
        _, dw, i_inst = sme.step(rho, model, meas, 1e-3, rng)
        expected = y + dw / (math.sqrt(2.0 * 0.7) * 1e-3)
        assert i_inst == pytest.approx(expected, rel=1e-9)
        assert y == pytest.approx(-2.8, abs=1e-4)


class TestHomodyneCurrent:
    def test_odd_steady_value(self):
        model, meas = parity_model(eta=0.7, n_max=20)
        rho = sector_state("01", -1.4j, 20)
        assert sme.homodyne_current(rho, 0.0, 1e-3, meas, model) == pytest.approx(
            -2.8, abs=1e-6)

    def test_vacuum_zero(self):
        model, meas = parity_model(eta=0.7)
        rho = sector_state("01", None, 12)
        assert sme.homodyne_current(rho, 0.0, 1e-3, meas, model) == pytest.approx(
            0.0, abs=1e-12)

    def test_eta_zero_rejected(self):
        model, meas = parity_model(eta=0.0)
        rho = sector_state("01", None, 12)
        with pytest.raises(ModelError):
            sme.homodyne_current(rho, 0.0, 1e-3, meas, model)

    def test_windowed_mean_variance(self):
        # Var[mean over T_w of I] ~ 1/(kappa eta T_w) from the Wiener part
        model, meas = parity_model(eta=0.7, n_max=10)
        rho = sector_state("01", -1.4j, 10)
        t_w = 5.0
        sim = sme.SimConfig(dt=1e-3, t_final=t_w, seed=77, record_stride=10 ** 9,
                            n_max=10, store_noise=True)
        trajs = sme.run_ensemble(model, meas, sim, rho, n_traj=200)
        gain = math.sqrt(meas.kappa * meas.eta)
        means = []
        for tr in trajs:
            i_raw = tr.y_full + tr.dw / (gain * tr.dt)
            means.append(i_raw.mean())
        var = np.var(means, ddof=1)
        assert var == pytest.approx(1.0 / (meas.kappa * meas.eta * t_w), rel=0.2)


class TestFilter:
    def test_step_response(self):
        tau = 2.0
        i_int = 0.0
        dt = 1e-3
        for _ in range(int(tau / dt)):
            i_int = sme.filter_update(i_int, 1.0, dt, tau)
        assert i_int == pytest.approx(1 - math.exp(-1), rel=0.01)

    def test_reference_time_constant(self):
        assert 3.0 / (2.0 * 0.7) == pytest.approx(2.142857, abs=1e-6)

    def test_fixed_point(self):
        assert sme.filter_update(0.7, 0.7, 1e-3, 2.0) == pytest.approx(0.7)

    def test_requires_positive_tau(self):
        with pytest.raises(ModelError):
            sme.filter_update(0.0, 1.0, 1e-3, 0.0)


class TestApplyInstantaneous:
    def test_x1_moves_sector(self):
        rho = sector_state("00", None, 12)
        out = sme.apply_instantaneous(rho, "X1")
        red = partial_trace(out, [0, 1])
        assert red.matrix[2, 2] == pytest.approx(1.0)  # |10>

    def test_involution(self):
        rho = sector_state("01", -1.4j, 12)
        out = sme.apply_instantaneous(sme.apply_instantaneous(rho, "X1"), "X1")
        assert np.max(np.abs(out.matrix - rho.matrix)) < 1e-12

    def test_displacement_returns_to_vacuum(self):
        alpha = -1.4j
        rho = sector_state("01", alpha, 20)
        out = sme.apply_instantaneous(rho, ("displace", -alpha))
        res = partial_trace(out, [2])
        vac = coherent_state(0.0, 20)
        assert fidelity(res, vac) > 0.999

    def test_displacement_rejected_on_meter(self):
        from parityqec.models import build_meter_qubit_model
        model = build_meter_qubit_model(
            "x_coupled_z_measured", 4.0,
            MeasurementParams(epsilon=0.0, kappa=2.0, eta=0.0))
        rho = pure_state(np.kron(KETS["00"], basis_ket(0, 2)), (2, 2, 2))
        with pytest.raises(ModelError):
            sme.apply_instantaneous(rho, ("displace", 1.0))


class TestRunTrajectory:
    def test_deterministic_given_seed(self):
        model, meas = parity_model(eta=0.7, gamma=0.02)
        enc = Encoding("odd")
        prot = ProtocolConfig(encoding=enc, i_bar_odd=-2.8, tau=3 / 1.4)
        rho = sector_state("01", -1.4j, 12)
        sim = sme.SimConfig(dt=1e-3, t_final=2.0, seed=5, record_stride=25, n_max=12)
        a = sme.run_trajectory(model, meas, sim, rho, protocol=prot)
        b = sme.run_trajectory(model, meas, sim, rho, protocol=prot)
        assert np.array_equal(a.i_raw[1:], b.i_raw[1:])
        assert np.array_equal(a.i_filtered, b.i_filtered)
        assert np.array_equal(a.dw, b.dw)
        assert np.array_equal(a.final_state.matrix, b.final_state.matrix)

    def test_batch_split_does_not_change_streams(self):
        model, meas = parity_model(eta=0.7)
        rho = sector_state("01", -1.4j, 12)
        sim = sme.SimConfig(dt=1e-3, t_final=0.5, seed=12, record_stride=50, n_max=12)
        together = sme.run_ensemble(model, meas, sim, rho, n_traj=4)
        second_half = sme.run_ensemble(model, meas, sim, rho, n_traj=2, first_index=2)
        for a, b in zip(together[2:], second_half):
            assert np.array_equal(a.dw, b.dw)
            assert np.array_equal(a.final_state.matrix, b.final_state.matrix)

    def test_driven_cavity_reaches_steady_amplitude(self):
        # eta = 0 run against the drive-on semiclassical fixed point
        model, meas = parity_model(eta=0.0)
        rho = sector_state("01", None, 12)
        sim = sme.SimConfig(dt=1e-3, t_final=8.0, seed=0, record_stride=400,
                            n_max=12, store_noise=False)
        traj = sme.run_trajectory(model, meas, sim, rho)
        a_op = np.kron(np.eye(4), np.diag(np.sqrt(np.arange(1, 12)), 1))
        a_mean = np.trace(a_op @ traj.final_state.matrix)
        target = analytics.steady_state_amplitude(0.0, meas.kappa, meas.epsilon)
        assert abs(a_mean - target) / abs(target) < 0.01

    def test_semiclassical_transient_tracks_ode(self):
        # full dynamics after a flip vs the drive-on amplitude solution,
        # probed at several times via state snapshots
        model, meas = parity_model(eta=0.0, n_max=14)
        rho = sector_state("00", -1.4j, 14)
        probes = (0.5, 1.0, 2.0, 3.0)
        sim = sme.SimConfig(dt=5e-4, t_final=3.0, seed=0, record_stride=100,
                            n_max=14, store_noise=False, snapshot_times=probes)
        traj = sme.run_trajectory(model, meas, sim, rho)
        a_op = np.kron(np.eye(4), np.diag(np.sqrt(np.arange(1, 14)), 1))
        scale = 2 * meas.epsilon / meas.kappa
        for t_probe, snap in traj.snapshots:
            a_mean = np.trace(a_op @ snap.matrix)
            target = analytics.semiclassical_amplitude(
                t_probe, -1.4j, analytics.sector_shift("00", 4.04), meas.kappa,
                meas.epsilon, drive_on=True)
            assert abs(a_mean - target) / scale < 0.02

    def test_schedule_applies_flip(self):
        model, meas = parity_model(eta=0.0)
        rho = sector_state("01", None, 12)
        sim = sme.SimConfig(dt=1e-3, t_final=0.2, seed=0, record_stride=20, n_max=12)
        traj = sme.run_trajectory(model, meas, sim, rho, schedule=[(0.1, "X1")])
        kinds = [e.kind for e in traj.events]
        assert kinds == ["scheduled_flip"]
        assert traj.populations[-1][3] == pytest.approx(1.0, abs=1e-9)  # |11>

    def test_populations_sum_to_one(self):
        model, meas = parity_model(eta=0.7, gamma=0.02)
        enc = Encoding("odd")
        prot = ProtocolConfig(encoding=enc, i_bar_odd=-2.8, tau=3 / 1.4)
        rho = sector_state("01", -1.4j, 12)
        sim = sme.SimConfig(dt=1e-3, t_final=3.0, seed=8, record_stride=50, n_max=12)
        traj = sme.run_trajectory(model, meas, sim, rho, protocol=prot)
        sums = traj.populations.sum(axis=1)
        assert np.max(np.abs(sums - 1.0)) <= 1e-9

    def test_recorded_states_valid(self):
        # deterministic runs satisfy the strict state invariants at every
        # recorded step
        model, meas = parity_model(eta=0.0, gamma=0.02)
        rho = sector_state("01", -1.4j, 12)
        sim = sme.SimConfig(dt=1e-3, t_final=5.0, seed=0, record_stride=1000,
                            n_max=12, store_noise=False,
                            snapshot_times=(1.0, 3.0, 5.0))
        traj = sme.run_trajectory(model, meas, sim, rho)
        for _, snap in traj.snapshots:
            DensityMatrix(snap.matrix, snap.dims, check=True)
        assert traj.min_eigenvalue > -1e-8

    def test_guard_rejects_coarse_dt(self):
        model, meas = parity_model(eta=0.0)
        rho = sector_state("01", None, 12)
        sim = sme.SimConfig(dt=5e-3, t_final=1.0, seed=0, n_max=12)
        with pytest.raises(sme.StepSizeError):
            sme.run_trajectory(model, meas, sim, rho)


class TestEnsembleConsistency:
    def test_eta_zero_matches_half_step(self):
        # deterministic (Lindblad) evolution converges in dt: relative
        # difference of final states under dt halving < 1e-4
        model, meas = parity_model(eta=0.0, gamma=0.02)
        rho = sector_state("01", -1.4j, 12)
        finals = []
        for dt in (1e-3, 5e-4):
            sim = sme.SimConfig(dt=dt, t_final=4.0, seed=0, record_stride=10 ** 9,
                                n_max=12, store_noise=False)
            finals.append(sme.run_trajectory(model, meas, sim, rho).final_state.matrix)
        num = np.max(np.abs(finals[0] - finals[1]))
        den = np.max(np.abs(finals[1]))
        assert num / den < 1e-4

    def test_noise_refinement_convergence(self):
        # frozen Brownian path, halved dt via bridge refinement: trace
        # distance of finals below 1e-3
        model, meas = parity_model(eta=0.7, gamma=0.0)
        enc = Encoding("odd")
        rho = sector_state("01", -1.4j, 12)
        sim = sme.SimConfig(dt=1e-3, t_final=5.0, seed=21, record_stride=10 ** 9,
                            n_max=12, store_noise=True)
        coarse = sme.run_trajectory(model, meas, sim, rho)
        rng = np.random.default_rng(99)
        dw2, dt2 = sme.refine_noise(coarse.dw, sim.dt, rng)
        sim2 = sme.SimConfig(dt=dt2, t_final=5.0, seed=21, record_stride=10 ** 9,
                             n_max=12, store_noise=False)
        fine = sme.run_trajectory(model, meas, sim2, rho, noise=dw2)
        diff = coarse.final_state.matrix - fine.final_state.matrix
        trace_dist = 0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff)))
        assert trace_dist < 1e-3

    def test_refined_noise_sums_to_original(self):
        rng = np.random.default_rng(5)
        dw = rng.normal(0, math.sqrt(1e-3), size=100)
        dw2, dt2 = sme.refine_noise(dw, 1e-3, rng)
        assert dt2 == pytest.approx(5e-4)
        assert np.allclose(dw2[0::2] + dw2[1::2], dw)
