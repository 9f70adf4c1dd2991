"""Desk-scale simulator of continuous parity-measurement quantum error
correction in dispersive circuit QED.

The package integrates the homodyne stochastic master equation for two
qubits coupled to a readout resonator, runs the threshold-feedback QEC
protocol on the filtered current, derives effective Hamiltonian couplings
from bare circuit parameters by fourth-order perturbation theory, and
verifies measurement-backaction physics against built-in analytic oracles.
"""

from .analytics import (
    coherence_loss_factor,
    coherence_loss_numerical,
    engineered_vs_native_spectrum,
    semiclassical_amplitude,
    steady_state_amplitude,
)
from .controller import (
    DetectionEvent,
    PhaseEstimate,
    ProtocolConfig,
    detect,
    detect_events,
    estimate_phase,
    logical_phase,
    logical_purity,
)
from .hilbert import (
    DensityMatrix,
    Operator,
    SubsystemDims,
    WignerGrid,
    coherent_state,
    destroy,
    embed,
    expectation,
    partial_trace,
    pauli,
    wigner,
)
from .models import (
    BareParams,
    EffectiveParams,
    Encoding,
    MeasurementParams,
    ModelSpec,
    build_dispersive_parity_model,
    build_meter_qubit_model,
    chi_second_order,
    encoding_states,
)
from .perturbation import (
    LevelIndex,
    PTCoefficients,
    energy_correction_4,
    exact_dressed_coefficients,
    extract_coefficients,
    tune_parameters,
    unperturbed_energy,
)
from .sme import (
    SimConfig,
    Trajectory,
    apply_instantaneous,
    filter_update,
    homodyne_current,
    refine_noise,
    run_ensemble,
    run_trajectory,
    step,
)

__version__ = "0.1.0"
