"""Continuous-QEC decision layer: threshold detection on the filtered
homodyne signal, instantaneous correction bookkeeping, logical-sector
metrics (purity and phase of the reduced two-qubit state), and the
measurement-induced phase estimator built from the interaction-induced and
information-induced contributions

    phi_det(t)   =  4 chi  int_{t0}^{t} Re[alpha00(s)^2] ds,
    phi_stoch(t) = -2 sqrt(kappa eta) int_{t0}^{t} Re[alpha00(s)] dW(s),

with dW reconstructed from the stored current under an assumed sector
history. The logical phase is the unwrapped argument of the sector
coherence <u| rho |v> for the ordered codeword pair (u, v); with that
convention the even-sector steady drift equals +d phi_det / dt.

Detection semantics: a detection fires on the first sample strictly beyond
the threshold after arming; hysteresis is provided solely by the arm delay
(default 2 tau). Thresholds are theta = frac * I_bar_odd between 0 and the
odd-sector steady signal I_bar_odd: the odd encoding fires when the
filtered signal crosses 0.1 I_bar_odd toward zero, the even encoding when
it crosses 0.9 I_bar_odd toward I_bar_odd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .analytics import semiclassical_amplitude
from .models import Encoding, MeasurementParams, ModelError

__all__ = [
    "UndefinedPurityError",
    "UndefinedPhaseError",
    "MissingDataError",
    "ProtocolConfig",
    "DetectionEvent",
    "PhaseEstimate",
    "detect",
    "detect_events",
    "correct_state",
    "BatchController",
    "PhaseUnwrapper",
    "sector_metrics_batch",
    "logical_purity",
    "logical_phase",
    "estimate_phase",
]

_SECTOR_INDEX = {"00": 0, "01": 1, "10": 2, "11": 3}
COHERENCE_FLOOR = 1e-9
POPULATION_FLOOR = 1e-6


class UndefinedPurityError(ValueError):
    """Sector population too small for a meaningful purity."""


class UndefinedPhaseError(ValueError):
    """Sector coherence too small for a meaningful phase."""


class MissingDataError(ValueError):
    """Trajectory record lacks the series the estimator needs."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Threshold-feedback protocol settings.

    Thresholds derive from the odd-sector steady signal: theta_u =
    theta_u_frac * i_bar_odd (the detection threshold of the odd encoding)
    and theta_l = theta_l_frac * i_bar_odd (even encoding). The controller
    is armed arm_delay after the run starts and after every correction.
    """

    encoding: Encoding
    i_bar_odd: float
    tau: float
    theta_l_frac: float = 0.9
    theta_u_frac: float = 0.1
    arm_delay: Optional[float] = None
    initial_filter: Optional[float] = None

    def __post_init__(self):
        if self.i_bar_odd >= 0:
            raise ModelError("i_bar_odd must be negative (odd-sector homodyne signal)")
        if not 0.0 < self.theta_u_frac < self.theta_l_frac < 1.0:
            raise ModelError(
                "threshold fractions must satisfy 0 < theta_u_frac < theta_l_frac < 1"
            )
        if self.tau <= 0:
            raise ModelError("filter constant tau must be positive")
        if self.arm_delay is None:
            object.__setattr__(self, "arm_delay", 2.0 * self.tau)
        if self.arm_delay < 0:
            raise ModelError("arm_delay must be nonnegative")

    @property
    def theta_upper(self) -> float:
        return self.theta_u_frac * self.i_bar_odd

    @property
    def theta_lower(self) -> float:
        return self.theta_l_frac * self.i_bar_odd

    @property
    def direction(self) -> str:
        return "odd->even" if self.encoding.variant == "odd" else "even->odd"

    def initial_filter_value(self) -> float:
        if self.initial_filter is not None:
            return self.initial_filter
        return self.i_bar_odd if self.encoding.variant == "odd" else 0.0

    def fires(self, i_filtered):
        """Vectorized strict threshold test for this encoding."""
        if self.encoding.variant == "odd":
            return np.asarray(i_filtered) > self.theta_upper
        return np.asarray(i_filtered) < self.theta_lower


@dataclass(frozen=True)
class DetectionEvent:
    t_detect: float
    direction: Literal["odd->even", "even->odd"]
    i_value: float


def detect(t: float, i_filtered: float, cfg: ProtocolConfig,
           armed_at: float = 0.0) -> Optional[DetectionEvent]:
    """Single-sample detection: fires when armed and strictly beyond the
    encoding's threshold; inside the uncertainty region nothing fires."""
    if t < armed_at:
        return None
    if bool(cfg.fires(i_filtered)):
        return DetectionEvent(t, cfg.direction, float(i_filtered))
    return None


def detect_events(times, i_filtered, cfg: ProtocolConfig) -> list[DetectionEvent]:
    """Offline replay of the controller over a stored filtered record,
    reproducing the engine's arm/fire/re-arm semantics."""
    events = []
    armed_at = cfg.arm_delay
    for t, value in zip(times, i_filtered):
        ev = detect(t, value, cfg, armed_at)
        if ev is not None:
            events.append(ev)
            armed_at = t + cfg.arm_delay
    return events


def correct_state(state, event: Optional[DetectionEvent]):
    """Apply the X1 correction to a detected error (qubit 1 is the faulty
    qubit of the single-parity restriction)."""
    if event is None:
        raise ModelError("no detection event to correct")
    from .sme import apply_instantaneous

    return apply_instantaneous(state, "X1")


class BatchController:
    """Vectorized per-trajectory threshold controller used by the engine."""

    def __init__(self, cfg: ProtocolConfig, n_traj: int):
        self.cfg = cfg
        self.armed_until = np.full(n_traj, cfg.arm_delay, dtype=float)

    @property
    def direction(self) -> str:
        return self.cfg.direction

    def observe(self, t: float, i_filtered: np.ndarray) -> np.ndarray:
        return (t >= self.armed_until) & self.cfg.fires(i_filtered)

    def notify_corrected(self, t: float, mask: np.ndarray) -> None:
        self.armed_until[mask] = t + self.cfg.arm_delay


class PhaseUnwrapper:
    """Cumulative phase unwrapping across a recorded series, tolerating NaN
    gaps where the coherence vanished."""

    def __init__(self, n_traj: int):
        self.last_raw = np.full(n_traj, np.nan)
        self.last_out = np.full(n_traj, np.nan)

    def update(self, raw: np.ndarray) -> np.ndarray:
        out = np.full_like(raw, np.nan)
        fresh = np.isnan(self.last_raw) & ~np.isnan(raw)
        out[fresh] = raw[fresh]
        cont = ~np.isnan(self.last_raw) & ~np.isnan(raw)
        delta = raw[cont] - self.last_raw[cont]
        delta = (delta + math.pi) % (2 * math.pi) - math.pi
        out[cont] = self.last_out[cont] + delta
        keep = ~np.isnan(raw)
        self.last_raw[keep] = raw[keep]
        self.last_out[keep] = out[keep]
        return out


def _sector_pairs(enc: Encoding):
    (cu, cv), (eu, ev) = enc.codewords, enc.error_words
    return ((_SECTOR_INDEX[cu], _SECTOR_INDEX[cv]),
            (_SECTOR_INDEX[eu], _SECTOR_INDEX[ev]))


def sector_metrics_batch(red: np.ndarray, enc: Encoding):
    """Majority-sector purity, raw coherence phase, and sector flag for a
    (K, 4, 4) batch of reduced two-qubit states.

    The error-sector codeword pair is the X1 image of the code pair with
    order preserved, which keeps the coherence phase continuous across
    flips and corrections.
    """
    (cu, cv), (eu, ev) = _sector_pairs(enc)
    pops = np.real(red[:, (cu, cv, eu, ev), (cu, cv, eu, ev)])
    p_code = pops[:, 0] + pops[:, 1]
    p_err = pops[:, 2] + pops[:, 3]
    sector = (p_err > p_code).astype(np.int8)

    def metrics(iu, iv):
        a = np.real(red[:, iu, iu])
        b = np.real(red[:, iv, iv])
        c = red[:, iu, iv]
        pop = a + b
        with np.errstate(divide="ignore", invalid="ignore"):
            # clamped into [0, 1] at reporting time only
            pur = np.clip((a * a + b * b + 2 * np.abs(c) ** 2) / (pop * pop), 0.0, 1.0)
            coh = np.abs(c) / pop
        phase = np.where(coh > COHERENCE_FLOOR, np.angle(c), np.nan)
        pur = np.where(pop > POPULATION_FLOOR, pur, np.nan)
        phase = np.where(pop > POPULATION_FLOOR, phase, np.nan)
        return pur, phase

    pur_c, ph_c = metrics(cu, cv)
    pur_e, ph_e = metrics(eu, ev)
    purity = np.where(sector == 0, pur_c, pur_e)
    phase = np.where(sector == 0, ph_c, ph_e)
    return purity, phase, sector


def _reduce_to_qubits(state) -> np.ndarray:
    mat, dims = state.matrix, state.dims
    if len(dims) == 2 and dims.dims == (2, 2):
        return mat
    if len(dims) == 3 and dims[0] == 2 and dims[1] == 2:
        m = dims[2]
        return np.einsum("abmcdm->abcd", mat.reshape(2, 2, m, 2, 2, m)).reshape(4, 4)
    raise ModelError(f"expected a (2, 2) or (2, 2, meter) state, got dims {dims.dims}")


def _sector_block(state, sector: str, enc: Encoding):
    red = _reduce_to_qubits(state)
    (cu, cv), (eu, ev) = _sector_pairs(enc)
    iu, iv = (cu, cv) if sector == "code" else (eu, ev)
    pop = float(np.real(red[iu, iu] + red[iv, iv]))
    block = np.array([[red[iu, iu], red[iu, iv]], [red[iv, iu], red[iv, iv]]])
    return block, pop


def logical_purity(state, sector: str, enc: Encoding) -> float:
    """Purity of the reduced two-qubit state projected onto one sector span
    (code or error) and renormalized."""
    block, pop = _sector_block(state, sector, enc)
    if pop <= POPULATION_FLOOR:
        raise UndefinedPurityError(
            f"{sector}-sector population {pop:.2e} below {POPULATION_FLOOR}"
        )
    block = block / pop
    return float(np.clip(np.real(np.trace(block @ block)), 0.0, 1.0))


def logical_phase(state, sector: str, enc: Encoding) -> float:
    """Argument of the sector coherence <u| rho_sector |v> (single sample;
    series unwrapping is the recorder's job)."""
    block, pop = _sector_block(state, sector, enc)
    if pop <= POPULATION_FLOOR:
        raise UndefinedPhaseError(f"{sector}-sector population vanishes")
    coh = block[0, 1] / pop
    if abs(coh) <= COHERENCE_FLOOR:
        raise UndefinedPhaseError(
            f"{sector}-sector coherence {abs(coh):.2e} below {COHERENCE_FLOOR}"
        )
    return float(np.angle(coh))


# ---------------------------------------------------------------------------
# measurement-induced phase estimator


@dataclass(frozen=True)
class PhaseEstimate:
    """Estimated measurement-induced phase from t0 to the record end.

    phi_det / phi_stoch / phi_total are the final values; the *_series
    arrays sample the running integrals at the integration resolution
    (times relative to the record start).
    """

    phi_det: float
    phi_stoch: float
    phi_total: float
    t0_assumed: float
    times: np.ndarray
    phi_det_series: np.ndarray
    phi_stoch_series: np.ndarray

    @property
    def phi_total_series(self) -> np.ndarray:
        return self.phi_det_series + self.phi_stoch_series

    def at(self, t: float) -> float:
        return float(np.interp(t, self.times, self.phi_total_series))


def _flip_steps(record, dt: float) -> list[int]:
    steps = []
    for ev in record.events:
        if ev.kind in ("scheduled_flip", "correction") and "X1" in ev.payload:
            steps.append(int(round(ev.t / dt)))
    return sorted(steps)


def estimate_phase(
    record,
    chi,
    meas: MeasurementParams,
    t0: float = 0.0,
    alpha_t0: complex = 0.0,
    assume_no_flips: bool = True,
) -> PhaseEstimate:
    """Reconstruct the even-sector induced phase from a stored record.

    ``chi`` is the dispersive shift, given either as a float or as an
    EffectiveParams bundle (whose chi1/chi2 mean is used). The semiclassical
    amplitude alpha00 starts from alpha_t0 at t0 and follows the
    driven-cavity solution in the 00 sector (shift +2 chi).
    dW is reconstructed from the stored current as
    sqrt(kappa eta) (I(s) - <Y>_model(s)) ds. With assume_no_flips the
    sector history is taken as even throughout (exactly the assumption
    whose failure after an undetected flip interval the estimator-deviation
    test exhibits); otherwise the recorded flip events toggle the sector,
    and accumulation pauses during odd intervals.
    """
    if hasattr(chi, "chi1"):
        chi = 0.5 * (chi.chi1 + chi.chi2)
    if record.dw is None or record.y_full is None:
        raise MissingDataError(
            "record lacks full-resolution noise/signal series; rerun with "
            "store_noise enabled"
        )
    dt = record.dt
    n_steps = record.dw.shape[0]
    i0 = int(round(t0 / dt))
    if not 0 <= i0 < n_steps:
        raise MissingDataError(f"t0 = {t0} outside the recorded horizon")

    kappa, eta, eps = meas.kappa, meas.eta, meas.epsilon
    sqk = math.sqrt(kappa * eta)
    shift = 2.0 * chi

    steps = np.arange(i0, n_steps)
    rel_t = (steps - i0) * dt

    if assume_no_flips:
        alpha = semiclassical_amplitude(rel_t, alpha_t0, shift, kappa, eps, drive_on=True)
        even = np.ones(steps.size, dtype=bool)
    else:
        flips = [s - i0 for s in _flip_steps(record, dt) if s > i0]
        alpha = np.empty(steps.size, dtype=complex)
        even = np.empty(steps.size, dtype=bool)
        bounds = [0] + flips + [steps.size]
        in_even = True
        a_run = alpha_t0
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi <= lo:
                in_even = not in_even
                continue
            seg_t = (np.arange(lo, hi) - lo) * dt
            seg_shift = shift if in_even else 0.0
            seg = semiclassical_amplitude(seg_t, a_run, seg_shift, kappa, eps, drive_on=True)
            alpha[lo:hi] = seg
            even[lo:hi] = in_even
            a_run = semiclassical_amplitude((hi - lo) * dt, a_run, seg_shift,
                                            kappa, eps, drive_on=True)
            in_even = not in_even

    y_model = 2.0 * np.imag(alpha)
    dw_est = record.dw[i0:] + sqk * (record.y_full[i0:] - y_model) * dt

    det_rate = np.where(even, 4.0 * chi * np.real(alpha**2), 0.0)
    stoch_kernel = np.where(even, -2.0 * sqk * np.real(alpha), 0.0)
    phi_det_series = np.cumsum(det_rate) * dt
    phi_stoch_series = np.cumsum(stoch_kernel * dw_est)

    return PhaseEstimate(
        phi_det=float(phi_det_series[-1]),
        phi_stoch=float(phi_stoch_series[-1]),
        phi_total=float(phi_det_series[-1] + phi_stoch_series[-1]),
        t0_assumed=t0,
        times=t0 + rel_t + dt,
        phi_det_series=phi_det_series,
        phi_stoch_series=phi_stoch_series,
    )
