"""Euler-Maruyama integration of the homodyne stochastic master equation

    d rho = -i [H, rho] dt + sum_q gamma_q D[X_q] rho dt + kappa D[a] rho dt
            + sqrt(eta kappa) H[-i a] rho dW,

with the normalized homodyne current I = <Y> + dW / (sqrt(kappa eta) dt),
the first-order filter I_int' = (I - I_int)/tau, scheduled instantaneous
operations, threshold feedback, and trajectory recording.

The engine evolves vectorized density matrices: a batch of K trajectories is
a (d^2, K) array advanced by one sparse deterministic propagator application
and one sparse stochastic-superoperator application per step. The bit-flip
channel enters as a deterministic dissipator exactly as written above (it is
not unraveled into jumps); per-trajectory "flips" emerge through
measurement-induced localization, and deliberate flips for scenario
reproduction use the schedule.

Noise streams are counter-based (Philox) and derived from (master seed,
trajectory index), so ensembles are reproducible for any batch or worker
splitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import controller as ctl
from .hilbert import DensityMatrix, Operator, SubsystemDims, pauli, embed, displacement_batch
from .models import MeasurementParams, ModelSpec, ModelError

__all__ = [
    "StepSizeError",
    "SimConfig",
    "TrajectoryEvent",
    "Trajectory",
    "Integrator",
    "step",
    "filter_update",
    "apply_instantaneous",
    "run_trajectory",
    "run_ensemble",
    "refine_noise",
    "trajectory_seed_sequence",
]


class StepSizeError(RuntimeError):
    """Integration step too coarse for the model timescales."""


@dataclass(frozen=True)
class SimConfig:
    """Integration settings for one stochastic run.

    dt and t_final in microseconds; record_stride thins the recorded series;
    n_max is the resonator truncation the model was built with; renorm keeps
    the trace pinned to one after every step. store_noise retains the
    full-resolution Wiener increments and signal expectation per trajectory
    (needed by the phase estimator and by noise-refinement tests).
    """

    dt: float
    t_final: float
    seed: int = 0
    record_stride: int = 1
    n_max: int = 0
    renorm: bool = True
    store_noise: bool = True
    snapshot_times: tuple[float, ...] = ()
    positivity_guard: float = 1e-2

    def __post_init__(self):
        if self.dt <= 0 or self.t_final <= 0:
            raise ModelError("dt and t_final must be positive")
        if self.record_stride < 1:
            raise ModelError("record_stride must be >= 1")
        if self.positivity_guard <= 0:
            raise ModelError("positivity_guard must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))


@dataclass(frozen=True)
class TrajectoryEvent:
    t: float
    kind: Literal["scheduled_flip", "detection", "correction"]
    payload: str


@dataclass
class Trajectory:
    """Recorded time series and events of a single stochastic run."""

    times: np.ndarray
    i_raw: np.ndarray
    i_filtered: np.ndarray
    purity: np.ndarray
    logical_phase: np.ndarray
    sector: np.ndarray          # 0 = code sector, 1 = error sector, -1 = n/a
    populations: np.ndarray     # (R, 4) ordered 00, 01, 10, 11
    y_expect: np.ndarray
    events: list[TrajectoryEvent]
    seed: Optional[int]
    final_state: DensityMatrix
    dt: float
    dw: Optional[np.ndarray] = None
    y_full: Optional[np.ndarray] = None
    snapshots: list[tuple[float, DensityMatrix]] = field(default_factory=list)
    min_eigenvalue: float = 0.0

    def event_times(self, kind: str) -> list[float]:
        return [e.t for e in self.events if e.kind == kind]


def trajectory_seed_sequence(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based per-trajectory stream from (master seed, index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((master_seed, index))))


def stability_guard(model: ModelSpec, sim: SimConfig) -> float:
    """dt times the fastest model rate; must stay at or below 0.05."""
    chi = float(model.meta.get("chi", 0.0))
    kappa = float(model.meta.get("kappa", max(r for _, r in model.collapse_ops)))
    eps = float(model.meta.get("epsilon", 0.0))
    product = sim.dt * max(kappa, abs(2 * chi), abs(4 * chi), abs(eps))
    if product > 0.05:
        raise StepSizeError(
            f"dt * max(kappa, 2 chi, 4 chi, eps) = {product:.3f} exceeds 0.05; "
            f"reduce dt below {0.05 * sim.dt / product:.2e}"
        )
    return product


# ---------------------------------------------------------------------------
# superoperator assembly (row-major vec convention: vec(A rho B) = (A x B^T) vec rho)


def _sp_left(op: np.ndarray) -> sp.csr_matrix:
    d = op.shape[0]
    return sp.kron(sp.csr_matrix(op), sp.identity(d, format="csr", dtype=complex), format="csr")


def _sp_right(op: np.ndarray) -> sp.csr_matrix:
    d = op.shape[0]
    return sp.kron(sp.identity(d, format="csr", dtype=complex), sp.csr_matrix(op.T), format="csr")


def _sp_sandwich(left: np.ndarray, right: np.ndarray) -> sp.csr_matrix:
    return sp.kron(sp.csr_matrix(left), sp.csr_matrix(right.T), format="csr")


def liouvillian(model: ModelSpec) -> sp.csr_matrix:
    """Deterministic generator: -i[H, .] plus all dissipators at their rates."""
    h = model.hamiltonian.matrix
    gen = -1j * (_sp_left(h) - _sp_right(h))
    for op, rate in model.collapse_ops:
        c = op.matrix
        cdc = c.conj().T @ c
        gen = gen + rate * (
            _sp_sandwich(c, c.conj().T)
            - 0.5 * (_sp_left(cdc) + _sp_right(cdc))
        )
    return gen.tocsr()


def _stochastic_superop(model: ModelSpec) -> sp.csr_matrix:
    """vec form of c rho + rho c^dag for the monitored channel,
    c = exp(-i phase) L."""
    mon, _rate = model.monitored
    c = np.exp(-1j * model.homodyne_phase) * mon.matrix
    return (_sp_left(c) + _sp_right(c.conj().T)).tocsr()


def _conjugation_superop(u: np.ndarray) -> sp.csr_matrix:
    """vec form of U rho U^dag."""
    return _sp_sandwich(u, u.conj().T)


def _unitary_for_label(label, dims: SubsystemDims) -> tuple[np.ndarray, str]:
    if label == "X1":
        return embed(pauli("X"), 0, dims).matrix, "X1"
    if label == "X2":
        return embed(pauli("X"), 1, dims).matrix, "X2"
    if isinstance(label, tuple) and len(label) == 2 and label[0] == "displace":
        if len(dims) != 3 or dims[2] <= 2:
            raise ModelError("displacement requires a bosonic third subsystem")
        disp = displacement_batch(np.array([label[1]]), dims[2])[0]
        return embed(Operator(disp, SubsystemDims((dims[2],)), ), 2, dims).matrix, \
            f"displace({label[1]:.6g})"
    raise ModelError(f"unknown instantaneous operation {label!r}")


def apply_instantaneous(state: DensityMatrix, label) -> DensityMatrix:
    """rho -> U rho U^dag for U in {X1, X2, ('displace', beta)}."""
    u, _ = _unitary_for_label(label, state.dims)
    return DensityMatrix(u @ state.matrix @ u.conj().T, state.dims, check=False)


def filter_update(i_filtered: float, i_raw: float, dt: float, tau: float) -> float:
    """Forward-Euler update of the integrator I_int' = (I - I_int)/tau."""
    if tau <= 0:
        raise ModelError("filter constant tau must be positive")
    return i_filtered + dt * (i_raw - i_filtered) / tau


def refine_noise(dw: np.ndarray, dt: float, rng: np.random.Generator):
    """Brownian-bridge split of each increment into two half-step increments."""
    half = 0.5 * dw + rng.normal(0.0, 0.5 * math.sqrt(dt), size=dw.shape)
    out = np.empty(dw.shape[0] * 2 if dw.ndim == 1 else (dw.shape[0] * 2,) + dw.shape[1:],
                   dtype=float)
    out[0::2] = half
    out[1::2] = dw - half
    return out, dt / 2


# ---------------------------------------------------------------------------
# integrator


class Integrator:
    """Compiled stepper for one ModelSpec: advances a (d^2, K) batch of
    vectorized density matrices by Euler-Maruyama steps."""

    def __init__(self, model: ModelSpec, meas: MeasurementParams, sim: SimConfig):
        stability_guard(model, sim)
        self.model = model
        self.meas = meas
        self.sim = sim
        self.dims = model.dims
        d = model.dims.total
        self.d = d
        self.propagator = (sp.identity(d * d, format="csr", dtype=complex)
                           + sim.dt * liouvillian(model)).tocsr()
        self.stoch = _stochastic_superop(model)
        self.diag_idx = np.arange(d) * d + np.arange(d)
        self.obs_vec = model.observable.matrix.T.reshape(-1)  # tr(O rho) = vec(O^T) . vec(rho)
        mon_rate = model.monitored[1]
        self.noise_gain = math.sqrt(meas.eta * mon_rate)
        self.unitaries: dict[str, sp.csr_matrix] = {}

    def conjugation(self, label) -> tuple[sp.csr_matrix, str]:
        u, name = _unitary_for_label(label, self.dims)
        if name not in self.unitaries:
            self.unitaries[name] = _conjugation_superop(u)
        return self.unitaries[name], name

    def observable_expectation(self, x: np.ndarray) -> np.ndarray:
        return np.real(self.obs_vec @ x)

    def step_batch(self, x: np.ndarray, dw: np.ndarray, step_index: int = 0) -> np.ndarray:
        """One Euler-Maruyama step of the whole batch (renormalizing).

        The input buffer is consumed (clobbered) and the advanced batch is
        returned; callers must rebind, never reuse, the argument.
        """
        if self.noise_gain > 0.0:
            s = self.stoch @ x
            tr_c = np.real(s[self.diag_idx].sum(axis=0))  # <c + c^dag>
            gain = self.noise_gain * dw
            y = self.propagator @ x
            s *= gain
            y += s
            x *= gain * tr_c
            y -= x
            x = y
        else:
            x = self.propagator @ x
        trace = np.real(x[self.diag_idx].sum(axis=0))
        if np.max(np.abs(trace - 1.0)) > 1e-3:
            raise StepSizeError(
                f"trace drifted to {trace[int(np.argmax(np.abs(trace - 1)))]:.6f} "
                f"at step {step_index}; reduce dt"
            )
        if self.sim.renorm:
            x *= 1.0 / trace
        return x


def _vec(state: DensityMatrix) -> np.ndarray:
    return state.matrix.reshape(-1)


def _reduced_qubits(x: np.ndarray, dims: SubsystemDims) -> np.ndarray:
    """(K, 4, 4) reduced qubit states from a (d^2, K) batch."""
    d1, d2, dm = dims.dims
    k = x.shape[1]
    rho = np.ascontiguousarray(x.T).reshape(k, d1, d2, dm, d1, d2, dm)
    red = np.einsum("kabmcdm->kabcd", rho).reshape(k, d1 * d2, d1 * d2)
    return red


def step(state: DensityMatrix, model: ModelSpec, meas: MeasurementParams,
         dt: float, rng: np.random.Generator):
    """Single Euler-Maruyama update of one state.

    Returns (state', dW, i_instant) with i_instant the normalized homodyne
    current sample of this step. With eta = 0 the stochastic term vanishes
    and the current is undefined (an error is raised if requested there).
    """
    sim = SimConfig(dt=dt, t_final=dt, n_max=model.dims[-1])
    integ = Integrator(model, meas, sim)
    x = _vec(state)[:, None].astype(complex)
    dw = float(rng.normal(0.0, math.sqrt(dt))) if meas.eta > 0 else 0.0
    y = float(integ.observable_expectation(x)[0])
    x = integ.step_batch(x, np.array([dw]))
    new = DensityMatrix(x[:, 0].reshape(integ.d, integ.d), model.dims, check=False)
    if meas.eta > 0:
        i_inst = y + dw / (integ.noise_gain * dt)
    else:
        i_inst = math.nan
    return new, dw, i_inst


def homodyne_current(state: DensityMatrix, dw: float, dt: float,
                     meas: MeasurementParams, model: ModelSpec) -> float:
    """Normalized current I = <observable> + dW / (sqrt(kappa eta) dt)."""
    if meas.eta <= 0:
        raise ModelError("homodyne current undefined at eta = 0 (no signal channel)")
    obs = model.observable.matrix
    y = float(np.real(np.trace(obs @ state.matrix)))
    rate = model.monitored[1]
    return y + dw / (math.sqrt(rate * meas.eta) * dt)


# ---------------------------------------------------------------------------
# trajectory runner


def _schedule_by_step(schedule, dt: float, n_steps: int):
    table: dict[int, list] = {}
    for t, label in schedule or ():
        idx = int(round(t / dt))
        if not 0 <= idx <= n_steps:
            raise ModelError(f"scheduled operation at t={t} outside the run horizon")
        table.setdefault(idx, []).append(label)
    return table


def run_ensemble(
    model: ModelSpec,
    meas: MeasurementParams,
    sim: SimConfig,
    initial_state: DensityMatrix,
    protocol: Optional["ctl.ProtocolConfig"] = None,
    schedule: Sequence[tuple[float, object]] = (),
    n_traj: int = 1,
    feedback: bool = True,
    noise: Optional[np.ndarray] = None,
    first_index: int = 0,
) -> list[Trajectory]:
    """Integrate n_traj independent trajectories as one vectorized batch.

    All trajectories share the initial state, model, and schedule; each has
    its own noise stream (trajectory index = first_index + column). A
    supplied ``noise`` array of shape (n_steps, n_traj) freezes the Wiener
    increments instead.
    """
    integ = Integrator(model, meas, sim)
    d = integ.d
    n_steps = sim.n_steps
    k = n_traj
    x = np.repeat(_vec(initial_state)[:, None], k, axis=1).astype(complex)

    use_rng = noise is None and meas.eta > 0
    rngs = [trajectory_seed_sequence(sim.seed, first_index + i) for i in range(k)] \
        if use_rng else []
    if noise is not None and noise.shape != (n_steps, k):
        raise ModelError(f"noise shape {noise.shape} != {(n_steps, k)}")

    sched = _schedule_by_step(schedule, sim.dt, n_steps)
    con = ctl.BatchController(protocol, k) if (protocol is not None) else None
    tau = protocol.tau if protocol is not None else None
    i_filt = np.full(k, protocol.initial_filter_value() if protocol else np.nan)

    enc = protocol.encoding if protocol is not None else None
    record_steps = list(range(0, n_steps + 1, sim.record_stride))
    if record_steps[-1] != n_steps:
        record_steps.append(n_steps)
    n_rec = len(record_steps)
    rec_pos = 0

    times = np.array([s * sim.dt for s in record_steps])
    r_iraw = np.full((n_rec, k), np.nan)
    r_ifil = np.full((n_rec, k), np.nan)
    r_y = np.full((n_rec, k), np.nan)
    r_pur = np.full((n_rec, k), np.nan)
    r_phase = np.full((n_rec, k), np.nan)
    r_sector = np.full((n_rec, k), -1, dtype=np.int8)
    r_pop = np.full((n_rec, 4, k), np.nan)
    dw_store = np.zeros((n_steps, k)) if sim.store_noise and meas.eta > 0 else None
    y_store = np.zeros((n_steps, k)) if sim.store_noise else None
    events: list[list[TrajectoryEvent]] = [[] for _ in range(k)]
    unwrap = ctl.PhaseUnwrapper(k)

    snapshot_steps = {int(round(t / sim.dt)): t for t in sim.snapshot_times}
    snapshots: list[list[tuple[float, DensityMatrix]]] = [[] for _ in range(k)]

    gain = integ.noise_gain

    def apply_labels(labels, mask, t, kind):
        nonlocal x
        for label in labels:
            conj, name = integ.conjugation(label)
            if mask is None:
                x = conj @ x
                for traj in range(k):
                    events[traj].append(TrajectoryEvent(t, kind, name))
            else:
                cols = np.nonzero(mask)[0]
                x[:, cols] = conj @ x[:, cols]
                for traj in cols:
                    events[traj].append(TrajectoryEvent(t, kind, name))

    def record(pos, step_idx, i_raw_now):
        t = step_idx * sim.dt
        r_iraw[pos] = i_raw_now
        r_ifil[pos] = i_filt
        y_now = integ.observable_expectation(x)
        r_y[pos] = y_now
        red = _reduced_qubits(x, model.dims)
        r_pop[pos] = np.real(red[:, (0, 1, 2, 3), (0, 1, 2, 3)]).T
        if enc is not None:
            pur, phase, sector = ctl.sector_metrics_batch(red, enc)
            r_pur[pos] = pur
            r_phase[pos] = unwrap.update(phase)
            r_sector[pos] = sector
        if step_idx in snapshot_steps:
            for traj in range(k):
                mat = x[:, traj].reshape(d, d)
                snapshots[traj].append(
                    (snapshot_steps[step_idx],
                     DensityMatrix(0.5 * (mat + mat.conj().T), model.dims, check=False))
                )

    # t = 0: schedule entries at step 0 apply before anything is recorded
    if 0 in sched:
        apply_labels(sched.pop(0), None, 0.0, "scheduled_flip")
    record(0, 0, np.nan)
    rec_pos = 1

    chunk = 2000
    step_idx = 0
    while step_idx < n_steps:
        m = min(chunk, n_steps - step_idx)
        if use_rng:
            dws = np.empty((m, k))
            for i, rng in enumerate(rngs):
                dws[:, i] = rng.normal(0.0, math.sqrt(sim.dt), size=m)
        elif noise is not None:
            dws = noise[step_idx:step_idx + m]
        else:
            dws = np.zeros((m, k))
        for i in range(m):
            s_now = step_idx + i
            t_next = (s_now + 1) * sim.dt
            dw = dws[i]
            y_now = integ.observable_expectation(x)
            if y_store is not None:
                y_store[s_now] = y_now
            if dw_store is not None:
                dw_store[s_now] = dw
            x = integ.step_batch(x, dw, s_now)
            if meas.eta > 0:
                i_raw_now = y_now + dw / (gain * sim.dt)
            else:
                i_raw_now = y_now
            if tau is not None:
                i_filt = i_filt + sim.dt * (i_raw_now - i_filt) / tau
            if con is not None and feedback:
                fire = con.observe(t_next, i_filt)
                if fire.any():
                    for traj in np.nonzero(fire)[0]:
                        events[traj].append(TrajectoryEvent(
                            t_next, "detection",
                            f"{con.direction};i={i_filt[traj]:.6f}"))
                    apply_labels(["X1"], fire, t_next, "correction")
                    con.notify_corrected(t_next, fire)
            if (s_now + 1) in sched:
                apply_labels(sched.pop(s_now + 1), None, t_next, "scheduled_flip")
            if rec_pos < n_rec and record_steps[rec_pos] == s_now + 1:
                record(rec_pos, s_now + 1, i_raw_now)
                rec_pos += 1
        step_idx += m

    out = []
    for traj in range(k):
        mat = x[:, traj].reshape(d, d)
        mat = 0.5 * (mat + mat.conj().T)
        mat = mat / np.trace(mat).real
        # Euler-Maruyama does not preserve positivity exactly; the worst
        # eigenvalue is reported as a quality diagnostic and only gross
        # violations (beyond the per-step noise-defect scale) abort.
        eig_min = float(np.linalg.eigvalsh(mat)[0])
        if eig_min < -sim.positivity_guard:
            raise StepSizeError(
                f"trajectory {first_index + traj}: state eigenvalue {eig_min:.2e} "
                "indicates an unstable step size; reduce dt or n_max"
            )
        final = DensityMatrix(mat, model.dims, check=False)
        out.append(Trajectory(
            times=times,
            i_raw=r_iraw[:, traj].copy(),
            i_filtered=r_ifil[:, traj].copy(),
            purity=r_pur[:, traj].copy(),
            logical_phase=r_phase[:, traj].copy(),
            sector=r_sector[:, traj].copy(),
            populations=r_pop[:, :, traj].copy(),
            y_expect=r_y[:, traj].copy(),
            events=events[traj],
            seed=sim.seed if noise is None else None,
            final_state=final,
            dt=sim.dt,
            dw=dw_store[:, traj].copy() if dw_store is not None else None,
            y_full=y_store[:, traj].copy() if y_store is not None else None,
            snapshots=snapshots[traj],
            min_eigenvalue=eig_min,
        ))
    return out


def run_trajectory(
    model: ModelSpec,
    meas: MeasurementParams,
    sim: SimConfig,
    initial_state: DensityMatrix,
    protocol: Optional["ctl.ProtocolConfig"] = None,
    schedule: Sequence[tuple[float, object]] = (),
    feedback: bool = True,
    noise: Optional[np.ndarray] = None,
) -> Trajectory:
    """Single-trajectory convenience wrapper around `run_ensemble`."""
    noise2 = noise[:, None] if noise is not None and noise.ndim == 1 else noise
    return run_ensemble(model, meas, sim, initial_state, protocol=protocol,
                        schedule=schedule, n_traj=1, feedback=feedback,
                        noise=noise2)[0]
