"""Release acceptance suite: every criterion below runs at its stated
tolerance and prints one pass/fail line. The suite is callable through the
CLI (`parityqec validate`) and mirrored one-to-one by tests/test_acceptance.py.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from . import analytics, perturbation, sme
from .controller import ProtocolConfig, estimate_phase
from .hilbert import (
    basis_ket,
    coherent_state,
    coherent_vector,
    fidelity,
    partial_trace,
)
from .models import (
    EffectiveParams,
    Encoding,
    MeasurementParams,
    build_dispersive_parity_model,
    build_meter_qubit_model,
    qubit_sector_kets,
)
from .scenarios import (
    BARE_QUASIDISPERSIVE,
    codeword_plus_state,
    default_config,
    protocol_from_config,
    run_ensemble_parallel,
    sector_initial_state,
    sim_from_config,
)

__all__ = ["CriterionResult", "CRITERIA", "run_criterion", "run_all"]


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    elapsed: float
    budget: float


def _result(name, budget, started, passed, detail) -> CriterionResult:
    return CriterionResult(name, bool(passed), detail, time.time() - started, budget)


EFF_COL2 = EffectiveParams(chi1=4.04, chi2=4.04)


def odd_steady_signal(threads: int = 1) -> CriterionResult:
    """Odd-sector eta=0 long-time homodyne signal <Y> = -2.8 +- 0.03."""
    t0 = time.time()
    meas = MeasurementParams(epsilon=1.4, kappa=2.0, eta=0.0)
    model = build_dispersive_parity_model(EFF_COL2, meas, n_max=12, order="second")
    rho0 = sector_initial_state("01", basis_ket(0, 12), 12)
    sim = sme.SimConfig(dt=1e-3, t_final=8.0, seed=1, record_stride=400,
                        n_max=12, store_noise=False)
    traj = sme.run_trajectory(model, meas, sim, rho0)
    y = float(traj.y_expect[-1])
    return _result("odd_steady_signal", 10.0, t0, abs(y + 2.8) <= 0.03,
                   f"<Y> = {y:+.4f} (target -2.8 +- 0.03)")


def eq9_steady_state_oracle(threads: int = 1) -> CriterionResult:
    """eta=0 steady resonator states match the closed-form coherent
    amplitudes with fidelity > 0.99 in all four qubit sectors (second
    order, n_max = 20)."""
    t0 = time.time()
    n_max = 20
    meas = MeasurementParams(epsilon=1.4, kappa=2.0, eta=0.0)
    model = build_dispersive_parity_model(EFF_COL2, meas, n_max=n_max, order="second")
    sim = sme.SimConfig(dt=5e-4, t_final=8.0, seed=1, record_stride=16000,
                        n_max=n_max, store_noise=False)
    worst = 1.0
    details = []
    for sector in ("00", "01", "10", "11"):
        rho0 = sector_initial_state(sector, basis_ket(0, n_max), n_max)
        traj = sme.run_trajectory(model, meas, sim, rho0)
        res = partial_trace(traj.final_state, [2])
        alpha = analytics.steady_state_amplitude(
            analytics.sector_shift(sector, 4.04), meas.kappa, meas.epsilon)
        f = fidelity(res, coherent_state(alpha, n_max))
        worst = min(worst, f)
        details.append(f"{sector}: {f:.5f}")
    return _result("eq9_steady_state_oracle", 60.0, t0, worst > 0.99,
                   "fidelity " + ", ".join(details))


def table1_reproduction(threads: int = 1) -> CriterionResult:
    """Fourth-order coefficients of the quasidispersive parameter set match
    the reference values to +-0.005; the (a^dag a)^2 Z1 Z2 probe vanishes."""
    t0 = time.time()
    c = perturbation.extract_coefficients(BARE_QUASIDISPERSIVE, "fourth")
    targets = {"chi1": 6.44, "chi2": 6.44, "nu1": -0.20, "nu2": -0.20,
               "alpha_r": -0.04, "zeta12": 0.23, "xi12": -0.47}
    errs = {k: abs(getattr(c, k) - v) for k, v in targets.items()}
    ok = all(e <= 0.005 for e in errs.values()) and abs(c.probe) <= 1e-9
    worst = max(errs, key=errs.get)
    return _result("table1_reproduction", 10.0, t0, ok,
                   f"worst |err| = {errs[worst]:.4f} ({worst}); probe = {c.probe:.1e}")


def pt_vs_oracle(threads: int = 1) -> CriterionResult:
    """Fourth-order chi agrees with exact diagonalization within 5%; the
    second-order chi disagreement shrinks as g^2 under g -> g/2 (factor 4
    within x1.5)."""
    t0 = time.time()
    pt4 = perturbation.extract_coefficients(BARE_QUASIDISPERSIVE, "fourth")
    ex = perturbation.exact_dressed_coefficients(BARE_QUASIDISPERSIVE)
    rel1 = abs(pt4.chi1 - ex.chi1) / abs(ex.chi1)
    rel2 = abs(pt4.chi2 - ex.chi2) / abs(ex.chi2)

    half = replace(BARE_QUASIDISPERSIVE, g1=BARE_QUASIDISPERSIVE.g1 / 2,
                   g2=BARE_QUASIDISPERSIVE.g2 / 2)
    pt2_full = perturbation.extract_coefficients(BARE_QUASIDISPERSIVE, "second")
    pt2_half = perturbation.extract_coefficients(half, "second")
    ex_half = perturbation.exact_dressed_coefficients(half)
    mis_full = abs(pt2_full.chi1 - ex.chi1) / abs(ex.chi1)
    mis_half = abs(pt2_half.chi1 - ex_half.chi1) / abs(ex_half.chi1)
    ratio = mis_full / mis_half
    ok = rel1 <= 0.05 and rel2 <= 0.05 and 4.0 / 1.5 <= ratio <= 4.0 * 1.5
    return _result(
        "pt_vs_oracle", 60.0, t0, ok,
        f"chi rel err = ({rel1:.3%}, {rel2:.3%}); g^2-scaling ratio = {ratio:.2f}")


def coherence_loss_recovery(threads: int = 1, n_traj: int = 500) -> CriterionResult:
    """Quadrature of the dephasing rate reproduces the closed-form zeta to
    1e-6 relative on a 5-point grid, and the 500-trajectory phase-corrected
    decay ensemble recovers exp(-zeta) within 10%."""
    t0 = time.time()
    grid = [(4.04, 2.0, 0.7, 1.96), (8.0, 2.0, 0.3, 1.5), (2.0, 1.0, 0.9, 0.8),
            (6.0, 3.0, 0.5, 1.2), (3.0, 0.5, 0.0, 1.0)]
    worst_quad = 0.0
    for chi, kappa, eta, a2 in grid:
        z_exact, _ = analytics.coherence_loss_factor(chi, kappa, eta, a2)
        z_num = analytics.coherence_loss_numerical(chi, kappa, eta, a2)
        if z_exact > 0:
            worst_quad = max(worst_quad, abs(z_num - z_exact) / z_exact)

    cfg = default_config("appB_coherence")
    chi = cfg.effective["chi1"]
    meas = cfg.measurement_params()
    model = build_dispersive_parity_model(
        EffectiveParams(chi1=chi, chi2=chi), meas,
        n_max=cfg.sim["n_max"], order="second")
    sim = sim_from_config(cfg)
    n_max = cfg.sim["n_max"]
    alpha0 = analytics.steady_state_amplitude(0.0, meas.kappa, meas.epsilon)
    rho0 = codeword_plus_state(Encoding("odd"), coherent_vector(alpha0, n_max), n_max)
    trajs = run_ensemble_parallel(model, meas, sim, rho0, schedule=[(0.0, "X1")],
                                  n_traj=n_traj, threads=threads)
    zeta, factor = analytics.coherence_loss_factor(chi, meas.kappa, meas.eta,
                                                   abs(alpha0) ** 2)
    corrected = []
    for tr in trajs:
        red = np.einsum("abmcdm->abcd",
                        tr.final_state.matrix.reshape(2, 2, n_max, 2, 2, n_max)
                        ).reshape(4, 4)
        est = estimate_phase(tr, chi=chi, meas=meas, t0=0.0, alpha_t0=alpha0)
        corrected.append(2.0 * red[0, 3] * np.exp(-1j * est.phi_total))
    ratio = abs(np.mean(corrected)) / factor
    ok = worst_quad < 1e-6 and 0.9 <= ratio <= 1.1
    return _result(
        "coherence_loss_recovery", 600.0, t0, ok,
        f"quadrature rel err = {worst_quad:.1e}; ensemble/exp(-zeta) = {ratio:.3f} "
        f"(zeta = {zeta:.3f}, {len(trajs)} trajectories)")


def odd_backaction_free(threads: int = 1) -> CriterionResult:
    """gamma = 0, second-order model, odd codeword, 30 us: logical purity
    stays >= 0.999 and |logical phase| <= 0.01 rad."""
    t0 = time.time()
    meas = MeasurementParams(epsilon=1.4, kappa=2.0, eta=0.7, gamma=0.0)
    model = build_dispersive_parity_model(EFF_COL2, meas, n_max=12, order="second")
    enc = Encoding("odd")
    prot = ProtocolConfig(encoding=enc, i_bar_odd=-2.8, tau=3.0 / (2.0 * 0.7))
    rho0 = codeword_plus_state(enc, coherent_vector(-1.4j, 12), 12)
    sim = sme.SimConfig(dt=1e-3, t_final=30.0, seed=9, record_stride=50,
                        n_max=12, store_noise=False)
    traj = sme.run_trajectory(model, meas, sim, rho0, protocol=prot)
    min_pur = float(np.nanmin(traj.purity))
    max_phase = float(np.nanmax(np.abs(traj.logical_phase)))
    ok = min_pur >= 0.999 and max_phase <= 0.01
    return _result("odd_backaction_free", 60.0, t0, ok,
                   f"min purity = {min_pur:.6f}; max |phase| = {max_phase:.2e} rad")


def _post_detection_trough(traj: sme.Trajectory,
                           window: float = 3.0) -> Optional[float]:
    """Purity level the first detected error drops the trajectory to.

    Only fresh events count: the logical state must still be intact shortly
    before the error transient (otherwise the detection tags coherence that
    earlier undetected flips already destroyed, and every such trajectory
    sits at the 0.5 floor regardless of detector efficiency). The trough is
    the windowed median right after the detection: the pointwise minimum
    degenerates to the majority-crossing instant, where the reported sector
    momentarily looks maximally mixed for every efficiency.
    """
    dets = traj.event_times("detection")
    if not dets:
        return None
    t_det = dets[0]
    pre = (traj.times >= t_det - 4.0) & (traj.times <= t_det - 3.0)
    pre_vals = traj.purity[pre]
    pre_vals = pre_vals[~np.isnan(pre_vals)]
    if pre_vals.size == 0 or pre_vals.max() < 0.9:
        return None
    mask = (traj.times >= t_det) & (traj.times <= t_det + window)
    vals = traj.purity[mask]
    vals = vals[~np.isnan(vals)]
    return float(np.median(vals)) if vals.size else None


def odd_even_dephasing_band(threads: int = 1, n_traj: int = 160) -> CriterionResult:
    """Continuous-QEC runs with odd encoding: the median post-detection
    minimum logical purity sits in [0.45, 0.70] at eta = 0.7, and the eta = 1
    median exceeds it."""
    t0 = time.time()
    medians = {}
    counts = {}
    for eta in (0.7, 1.0):
        cfg = default_config("fig2_odd")
        cfg.measurement["eta"] = eta
        cfg.protocol["tau"] = 3.0 / (cfg.measurement["kappa"] * eta)
        meas = cfg.measurement_params()
        model = build_dispersive_parity_model(EFF_COL2, meas,
                                              n_max=cfg.sim["n_max"], order="second")
        prot = protocol_from_config(cfg, meas)
        sim = replace(sim_from_config(cfg), store_noise=False, record_stride=20)
        rho0 = codeword_plus_state(prot.encoding,
                                   coherent_vector(-1.4j, cfg.sim["n_max"]),
                                   cfg.sim["n_max"])
        trajs = run_ensemble_parallel(model, meas, sim, rho0, protocol=prot,
                                      n_traj=n_traj, threads=threads)
        troughs = [m for m in (_post_detection_trough(t) for t in trajs)
                   if m is not None]
        medians[eta] = float(np.median(troughs)) if troughs else math.nan
        counts[eta] = len(troughs)
    ok = (0.45 <= medians[0.7] <= 0.70) and (medians[1.0] > medians[0.7])
    return _result(
        "odd_even_dephasing_band", 1800.0, t0, ok,
        f"median min purity: eta=0.7 -> {medians[0.7]:.3f} ({counts[0.7]} detected), "
        f"eta=1.0 -> {medians[1.0]:.3f} ({counts[1.0]} detected)")


def even_phase_tracking(threads: int = 1) -> CriterionResult:
    """eta = 0, even encoding, no errors: the logical-phase drift rate over
    a 5 us steady window matches 4 chi Re[alpha_ss^2] within 5%."""
    t0 = time.time()
    meas = MeasurementParams(epsilon=1.4, kappa=2.0, eta=0.0, gamma=0.0)
    model = build_dispersive_parity_model(EFF_COL2, meas, n_max=12, order="second")
    enc = Encoding("even")
    prot = ProtocolConfig(encoding=enc, i_bar_odd=-2.8, tau=3.0 / 1.4)
    rho0 = codeword_plus_state(enc, basis_ket(0, 12), 12)
    sim = sme.SimConfig(dt=1e-3, t_final=10.0, seed=2, record_stride=20,
                        n_max=12, store_noise=False)
    traj = sme.run_trajectory(model, meas, sim, rho0, protocol=prot, feedback=False)
    mask = traj.times >= 5.0
    slope = float(np.polyfit(traj.times[mask], traj.logical_phase[mask], 1)[0])
    alpha_ss = analytics.steady_state_amplitude(2 * 4.04, meas.kappa, meas.epsilon)
    rate = 4 * 4.04 * float(np.real(alpha_ss ** 2))
    rel = abs(slope - rate) / abs(rate)
    return _result("even_phase_tracking", 60.0, t0, rel <= 0.05,
                   f"measured {slope:.5f} vs analytic rate {rate:.5f} rad/us "
                   f"(rel err {rel:.2%})")


def estimator_deviation(threads: int = 1) -> CriterionResult:
    """A seeded even-encoding run with an undetected double flip: the
    assume-no-flips phase estimate tracks the true logical phase within
    0.05 rad before the flip interval and diverges after it."""
    t0 = time.time()
    meas = MeasurementParams(epsilon=1.4, kappa=2.0, eta=0.7, gamma=0.0)
    model = build_dispersive_parity_model(EFF_COL2, meas, n_max=12, order="second")
    enc = Encoding("even")
    prot = ProtocolConfig(encoding=enc, i_bar_odd=-2.8, tau=3.0 / 1.4)
    rho0 = codeword_plus_state(enc, basis_ket(0, 12), 12)
    sim = sme.SimConfig(dt=1e-3, t_final=12.0, seed=23, record_stride=10,
                        n_max=12, store_noise=True)
    schedule = [(3.0, "X1"), (7.0, "X1")]
    traj = sme.run_trajectory(model, meas, sim, rho0, protocol=prot,
                              schedule=schedule, feedback=True)
    detections = [t for t in traj.event_times("detection") if t <= 7.0]
    est = estimate_phase(traj, chi=4.04, meas=meas, t0=0.0, alpha_t0=0.0,
                         assume_no_flips=True)
    est_at = np.interp(traj.times, est.times, est.phi_total_series)
    err = np.abs(est_at - traj.logical_phase)
    before = traj.times <= 3.0
    after = (traj.times >= 8.0) & (traj.times <= 12.0)
    err_before = float(np.nanmax(err[before]))
    err_after = float(np.nanmean(err[after]))
    ok = (not detections) and err_before <= 0.05 and err_after > 0.1
    return _result(
        "estimator_deviation", 300.0, t0, ok,
        f"pre-flip max err = {err_before:.3f} rad; post-interval mean err = "
        f"{err_after:.3f} rad; detections in window: {len(detections)}")


def spectrum_check(threads: int = 1) -> CriterionResult:
    """Engineered two-body coupling splits the even sector by exactly
    4 chi m; the native three-body coupling leaves both parities degenerate."""
    t0 = time.time()
    chi, m = 4.04, 1.0
    eng, nat = analytics.engineered_vs_native_spectrum(chi, m)
    split = eng[0] - eng[3]
    ok = (split == 4 * chi * m and eng[1] == 0.0 and eng[2] == 0.0
          and nat[0] == nat[3] and nat[1] == nat[2])
    return _result("spectrum_check", 10.0, t0, ok,
                   f"even splitting = {split} (4 chi m = {4 * chi * m}); "
                   f"native sectors degenerate: {nat[0] == nat[3] and nat[1] == nat[2]}")


def meter_x_conservation(threads: int = 1) -> CriterionResult:
    """x-coupled meter qubit from |0>_m: <X_m>(t) stays zero (<= 1e-9) under
    closed evolution over 10 us."""
    t0 = time.time()
    meas = MeasurementParams(epsilon=0.0, kappa=2.0, eta=0.0)
    model = build_meter_qubit_model("x_coupled_z_measured", 4.04, meas)
    kets = qubit_sector_kets()
    plus = (kets["00"] + kets["11"]) / math.sqrt(2)
    psi0 = np.kron(plus, basis_ket(0, 2))
    h = model.hamiltonian.matrix
    from .hilbert import embed, pauli
    xm = embed(pauli("X"), 2, model.dims).matrix
    worst = 0.0
    for t in np.linspace(0.0, 10.0, 101):
        u = scipy.linalg.expm(-1j * h * t)
        psi = u @ psi0
        worst = max(worst, abs(float(np.real(psi.conj() @ xm @ psi))))
    return _result("meter_x_conservation", 60.0, t0, worst <= 1e-9,
                   f"max |<X_m>| = {worst:.2e}")


def unraveling_consistency(threads: int = 1, n_traj: int = 500) -> CriterionResult:
    """The mean of 500 eta = 0.7 trajectories matches the deterministic
    Lindblad solution on <Y> and the qubit-sector populations within three
    Monte-Carlo standard errors at 10 probe times."""
    t0 = time.time()
    meas = MeasurementParams(epsilon=1.4, kappa=2.0, eta=0.7, gamma=0.02)
    model = build_dispersive_parity_model(EFF_COL2, meas, n_max=12, order="second")
    enc = Encoding("odd")
    rho0 = codeword_plus_state(enc, coherent_vector(-1.4j, 12), 12)
    sim = sme.SimConfig(dt=1e-3, t_final=5.0, seed=31, record_stride=500,
                        n_max=12, store_noise=False)
    trajs = run_ensemble_parallel(model, meas, sim, rho0, n_traj=n_traj,
                                  threads=threads)
    meas0 = replace(meas, eta=0.0)
    det = sme.run_trajectory(model, meas0, sim, rho0)

    probe = slice(1, 11)
    worst_sigma = 0.0
    labels = ["Y"] + [f"p{s}" for s in ("00", "01", "10", "11")]
    series = [np.stack([t.y_expect for t in trajs])] + [
        np.stack([t.populations[:, i] for t in trajs]) for i in range(4)
    ]
    reference = [det.y_expect] + [det.populations[:, i] for i in range(4)]
    for label, ens, ref in zip(labels, series, reference):
        mean = ens.mean(axis=0)[probe]
        se = ens.std(axis=0, ddof=1)[probe] / math.sqrt(ens.shape[0])
        se = np.maximum(se, 1e-12)
        nsig = np.max(np.abs(mean - ref[probe]) / se)
        worst_sigma = max(worst_sigma, float(nsig))
    return _result(
        "unraveling_consistency", 900.0, t0, worst_sigma <= 3.0,
        f"worst deviation = {worst_sigma:.2f} standard errors "
        f"({len(trajs)} trajectories, 10 probe times)")


CRITERIA: dict[str, Callable[..., CriterionResult]] = {
    "odd_steady_signal": odd_steady_signal,
    "eq9_steady_state_oracle": eq9_steady_state_oracle,
    "table1_reproduction": table1_reproduction,
    "pt_vs_oracle": pt_vs_oracle,
    "coherence_loss_recovery": coherence_loss_recovery,
    "odd_backaction_free": odd_backaction_free,
    "odd_even_dephasing_band": odd_even_dephasing_band,
    "even_phase_tracking": even_phase_tracking,
    "estimator_deviation": estimator_deviation,
    "spectrum_check": spectrum_check,
    "meter_x_conservation": meter_x_conservation,
    "unraveling_consistency": unraveling_consistency,
}


def run_criterion(name: str, threads: int = 1) -> CriterionResult:
    return CRITERIA[name](threads=threads)


def run_all(threads: int = 1, only=None, report=print) -> list[CriterionResult]:
    results = []
    for name, fn in CRITERIA.items():
        if only and name not in only:
            continue
        res = fn(threads=threads)
        status = "PASS" if res.passed else "FAIL"
        budget = " (over budget)" if res.elapsed > res.budget else ""
        report(f"[{status}] {res.name:28s} {res.elapsed:7.1f}s{budget}  {res.detail}")
        results.append(res)
    return results
