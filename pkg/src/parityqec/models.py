"""Builders for the Hamiltonians, encodings, and collapse-operator sets of the
continuous parity-measurement setup: two qubits dispersively coupled to one
readout resonator (or to a two-level meter), packaged as ModelSpec values
consumed by the stochastic-master-equation engine.

All frequencies are angular, in rad/us, used directly in the Hamiltonian
(no 2 pi). That convention makes the odd-sector steady homodyne signal
<Y> = -4 epsilon / kappa, i.e. -2.8 for epsilon = 1.4, kappa = 2.

The rotating frame co-rotates with the dressed one-body frequencies and with
the drive, so no bare omega terms appear; the drive detuning delta_d is the
only one-body resonator term (recommended value -xi12 when running the
fourth-order model, which centers the drive between the two even-sector
resonances).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi
from typing import Literal, Optional

import numpy as np

from .hilbert import (
    Operator,
    SubsystemDims,
    basis_ket,
    destroy,
    embed,
    identity,
    number,
    pauli,
    pure_state,
    sigma_minus,
    tensor,
)

__all__ = [
    "ModelError",
    "SingularityError",
    "BareParams",
    "EffectiveParams",
    "MeasurementParams",
    "Encoding",
    "ModelSpec",
    "chi_second_order",
    "build_dispersive_parity_model",
    "build_meter_qubit_model",
    "encoding_states",
    "qubit_sector_kets",
]


class ModelError(ValueError):
    """Invalid model construction."""


class SingularityError(ModelError):
    """Resonant denominator in a dispersive formula."""


@dataclass(frozen=True)
class BareParams:
    """Physical circuit parameters of two transmons coupled to one resonator.

    g1, g2: qubit-resonator couplings; alpha1, alpha2: transmon
    anharmonicities; delta_r = omega_r - omega_1; delta_2 = omega_2 - omega_1.
    All in rad/us. transmon_levels bounds the anharmonic-ladder truncation
    used by the perturbation engine.
    """

    g1: float
    g2: float
    alpha1: float
    alpha2: float
    delta_r: float
    delta_2: float
    transmon_levels: int = 5

    def __post_init__(self):
        if self.transmon_levels < 3:
            raise ModelError("transmon_levels must be >= 3")
        r1 = abs(self.g1 / self.delta_r)
        r2 = abs(self.g2 / (self.delta_r - self.delta_2))
        if r1 >= 0.5 or r2 >= 0.5:
            raise ModelError(
                f"outside the perturbative regime: g1/Delta_r = {r1:.3f}, "
                f"g2/(Delta_r - Delta_2) = {r2:.3f} (both must be < 0.5)"
            )


@dataclass(frozen=True)
class EffectiveParams:
    """Effective-Hamiltonian couplings (rad/us).

    chi1, chi2: dispersive shifts; nu1, nu2: qubit-dependent resonator
    anharmonicities; alpha_r: qubit-independent resonator anharmonicity;
    zeta12: ZZ coupling; xi12: three-body coupling. Dressed one-body
    frequencies are absorbed by the rotating frame; an optional report
    field keeps them for documentation only.
    """

    chi1: float
    chi2: float
    nu1: float = 0.0
    nu2: float = 0.0
    alpha_r: float = 0.0
    zeta12: float = 0.0
    xi12: float = 0.0
    dressed_shift_note: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "chi1": self.chi1, "chi2": self.chi2, "nu1": self.nu1, "nu2": self.nu2,
            "alpha_r": self.alpha_r, "zeta12": self.zeta12, "xi12": self.xi12,
        }


@dataclass(frozen=True)
class MeasurementParams:
    """Drive, decay, detection, and noise parameters of one measurement run.

    gamma is the base bit-flip rate; per-qubit rates default to the
    single-parity-measurement convention gamma_1 = 2 gamma, gamma_2 = 0
    (only qubit 1 flips, standing in for the identified faulty qubit of the
    full three-qubit code). drive_detuning is the resonator drive detuning
    delta_d in the rotating frame.
    """

    epsilon: float
    kappa: float
    eta: float
    gamma: float = 0.0
    gamma_q: Optional[tuple[float, float]] = None
    drive_detuning: float = 0.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ModelError("kappa must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ModelError("eta must lie in [0, 1]")
        if self.gamma < 0:
            raise ModelError("gamma must be nonnegative")
        if self.gamma_q is None:
            object.__setattr__(self, "gamma_q", (2.0 * self.gamma, 0.0))
        if any(g < 0 for g in self.gamma_q):
            raise ModelError("per-qubit flip rates must be nonnegative")


@dataclass(frozen=True)
class Encoding:
    """Logical encoding restricted to the measured qubit pair.

    even: codewords |00>, |11>, stabilizer +Z1 Z2;
    odd:  codewords |01>, |10>, stabilizer -Z1 Z2.
    """

    variant: Literal["even", "odd"]

    def __post_init__(self):
        if self.variant not in ("even", "odd"):
            raise ModelError(f"unknown encoding {self.variant!r}")

    @property
    def codewords(self) -> tuple[str, str]:
        return ("00", "11") if self.variant == "even" else ("01", "10")

    @property
    def stabilizer_sign(self) -> int:
        return +1 if self.variant == "even" else -1

    @property
    def error_words(self) -> tuple[str, str]:
        """Images of the codewords under the X1 error, order preserved."""
        flip = {"0": "1", "1": "0"}
        return tuple(flip[w[0]] + w[1] for w in self.codewords)  # type: ignore[return-value]


@dataclass(frozen=True)
class ModelSpec:
    """One stochastic-master-equation instance.

    collapse_ops are (operator, rate) pairs; homodyne_channel indexes the
    monitored one. The stochastic superoperator uses exp(-i homodyne_phase)
    times the monitored operator (phase pi/2 reproduces the -i a convention
    of resonator homodyne detection); observable is the signal operator
    whose expectation the homodyne current fluctuates around.
    """

    dims: SubsystemDims
    hamiltonian: Operator
    collapse_ops: tuple[tuple[Operator, float], ...]
    homodyne_channel: int
    observable: Operator
    homodyne_phase: float = pi / 2
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.hamiltonian.is_hermitian(1e-10):
            raise ModelError("hamiltonian is not Hermitian")
        if any(rate < 0 for _, rate in self.collapse_ops):
            raise ModelError("collapse rates must be nonnegative")
        if not 0 <= self.homodyne_channel < len(self.collapse_ops):
            raise ModelError(
                f"homodyne_channel {self.homodyne_channel} outside collapse list"
            )

    @property
    def monitored(self) -> tuple[Operator, float]:
        return self.collapse_ops[self.homodyne_channel]


def chi_second_order(g: float, alpha: float, delta: float) -> float:
    """Second-order dispersive shift chi = g^2 alpha / [Delta (Delta + alpha)]."""
    if abs(delta) < 1e-9 or abs(delta + alpha) < 1e-9:
        raise SingularityError(
            f"resonant denominator: Delta = {delta}, Delta + alpha = {delta + alpha}"
        )
    return g * g * alpha / (delta * (delta + alpha))


def qubit_sector_kets() -> dict[str, np.ndarray]:
    """Two-qubit computational basis kets keyed '00', '01', '10', '11'."""
    out = {}
    for i, label in enumerate(("00", "01", "10", "11")):
        out[label] = basis_ket(i, 4)
    return out


def encoding_states(enc: Encoding):
    """Codeword projectors and the signed stabilizer for an encoding.

    Returns (rho_0bar, rho_1bar, stabilizer) on the two-qubit space;
    <S> = +1 on both codewords.
    """
    qdims = SubsystemDims((2, 2))
    kets = qubit_sector_kets()
    u, v = enc.codewords
    rho_u = pure_state(kets[u], qdims)
    rho_v = pure_state(kets[v], qdims)
    stab = float(enc.stabilizer_sign) * tensor(pauli("Z"), pauli("Z"))
    return rho_u, rho_v, stab


def build_dispersive_parity_model(
    eff: EffectiveParams,
    meas: MeasurementParams,
    n_max: int,
    order: Literal["second", "fourth"] = "second",
) -> ModelSpec:
    """Parity-measurement model of two qubits dispersively coupled to a
    driven, decaying resonator.

    second order:
        H = eps (a^dag + a) + chi (Z1 + Z2) a^dag a + delta_d a^dag a,
        requiring chi1 == chi2 (to 1e-9).
    fourth order adds
        [nu1 Z1 + nu2 Z2] (a^dag a)^2 + alpha_r (a^dag a)^2
        + [zeta12 + xi12 a^dag a] Z1 Z2.

    Collapse channels: (a, kappa) monitored by homodyne detection of
    Y = i(a^dag - a), plus (X1, gamma_1) and (X2, gamma_2) bit-flip noise.
    """
    if n_max < 10:
        raise ModelError("n_max must be >= 10 for the parity model")
    dims = SubsystemDims((2, 2, n_max))
    a = embed(destroy(n_max), 2, dims)
    n_op = embed(number(n_max), 2, dims)
    z1 = embed(pauli("Z"), 0, dims)
    z2 = embed(pauli("Z"), 1, dims)

    if order == "second":
        if abs(eff.chi1 - eff.chi2) > 1e-9:
            raise ModelError(
                f"second-order parity model needs chi1 == chi2, got "
                f"{eff.chi1} vs {eff.chi2}"
            )
        chi = eff.chi1
        ham = meas.epsilon * (a.dag() + a) + chi * ((z1 + z2) @ n_op) \
            + meas.drive_detuning * n_op
    elif order == "fourth":
        n_sq = n_op @ n_op
        ham = (
            meas.epsilon * (a.dag() + a)
            + (eff.chi1 * z1 + eff.chi2 * z2) @ n_op
            + (eff.nu1 * z1 + eff.nu2 * z2) @ n_sq
            + eff.alpha_r * n_sq
            + (z1 @ z2) @ (eff.zeta12 * identity(dims) + eff.xi12 * n_op)
            + meas.drive_detuning * n_op
        )
    else:
        raise ModelError(f"unknown order {order!r}")

    collapses = [(a, meas.kappa)]
    for site, gq in zip((0, 1), meas.gamma_q):
        if gq > 0:
            collapses.append((embed(pauli("X"), site, dims), gq))
    y_obs = 1j * (a.dag() - a)
    return ModelSpec(
        dims=dims,
        hamiltonian=ham,
        collapse_ops=tuple(collapses),
        homodyne_channel=0,
        observable=y_obs,
        homodyne_phase=pi / 2,
        meta={
            "kind": "dispersive_parity",
            "order": order,
            "chi": max(abs(eff.chi1), abs(eff.chi2)),
            "epsilon": meas.epsilon,
            "kappa": meas.kappa,
            "n_max": n_max,
        },
    )


def build_meter_qubit_model(
    variant: Literal["z_coupled_driven", "z_coupled_z_collapse", "x_coupled_z_measured"],
    chi: float,
    meas: MeasurementParams,
) -> ModelSpec:
    """Parity measurement with a two-level meter instead of a resonator.

    z_coupled_driven:      H = eps X_m + chi (Z1 + Z2) Z_m, collapse sigma^-_m
                           (driven meter probed through its emitted light);
    z_coupled_z_collapse:  same coupling without drive, collapse Z_m
                           (meter collapses toward Z eigenstates);
    x_coupled_z_measured:  H = chi (Z1 + Z2) X_m, collapse and observable Z_m
                           (modulated coupling drives meter Rabi cycling in
                           the even subspace, none in the odd).
    """
    if chi <= 0:
        raise ModelError("meter coupling chi must be positive")
    dims = SubsystemDims((2, 2, 2))
    z1 = embed(pauli("Z"), 0, dims)
    z2 = embed(pauli("Z"), 1, dims)
    zm = embed(pauli("Z"), 2, dims)
    xm = embed(pauli("X"), 2, dims)
    zz_sum = z1 + z2

    if variant == "z_coupled_driven":
        ham = meas.epsilon * xm + chi * (zz_sum @ zm)
        collapse = (embed(sigma_minus(), 2, dims), meas.kappa)
        observable = 1j * (collapse[0].dag() - collapse[0])
        phase = pi / 2
    elif variant == "z_coupled_z_collapse":
        ham = chi * (zz_sum @ zm)
        collapse = (zm, meas.kappa)
        observable = zm
        phase = 0.0
    elif variant == "x_coupled_z_measured":
        ham = chi * (zz_sum @ xm)
        collapse = (zm, meas.kappa)
        observable = zm
        phase = 0.0
    else:
        raise ModelError(f"unknown meter variant {variant!r}")

    return ModelSpec(
        dims=dims,
        hamiltonian=ham,
        collapse_ops=(collapse,),
        homodyne_channel=0,
        observable=observable,
        homodyne_phase=phase,
        meta={
            "kind": f"meter_qubit:{variant}",
            "chi": chi,
            "epsilon": meas.epsilon,
            "kappa": meas.kappa,
            "n_max": 2,
        },
    )
