"""Composite-Hilbert-space operator and state algebra.

Dense complex matrices over a tensor product of finite subsystems, with
constructors for bosonic ladder and Pauli operators, tensor embedding,
partial trace, coherent states, expectation values, and Wigner functions.

Subsystem ordering is fixed as (qubit 1, qubit 2, resonator/meter)
throughout the package; every builder and trace operation documents
indices against that order.

The Wigner convention is the displaced-parity form

    W(beta) = (2/pi) Tr[rho D(beta) P D(beta)^dag],

sampled on a grid of (Re beta, Im beta), so that a numerical integral of
W over phase space is 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "HilbertError",
    "InvalidDimensionError",
    "TruncationError",
    "SubsystemDims",
    "Operator",
    "DensityMatrix",
    "WignerGrid",
    "destroy",
    "create",
    "number",
    "identity",
    "pauli",
    "sigma_minus",
    "basis_ket",
    "embed",
    "tensor",
    "partial_trace",
    "coherent_vector",
    "coherent_state",
    "pure_state",
    "expectation",
    "purity",
    "fidelity",
    "wigner",
]

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = -1e-8


class HilbertError(ValueError):
    """Base error for operator-algebra misuse."""


class InvalidDimensionError(HilbertError):
    """Dimension mismatch or invalid subsystem dimension."""


class TruncationError(HilbertError):
    """Requested state does not fit in the truncated Fock space."""


@dataclass(frozen=True)
class SubsystemDims:
    """Ordered subsystem dimensions of a composite Hilbert space."""

    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int]):
        dims = tuple(int(d) for d in dims)
        if len(dims) == 0 or any(d < 2 for d in dims):
            raise InvalidDimensionError(f"all subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.dims)

    def __getitem__(self, i: int) -> int:
        return self.dims[i]

    def __iter__(self):
        return iter(self.dims)


def _as_dims(dims) -> SubsystemDims:
    return dims if isinstance(dims, SubsystemDims) else SubsystemDims(dims)


@dataclass(frozen=True)
class Operator:
    """Dense operator on a composite Hilbert space."""

    matrix: np.ndarray
    dims: SubsystemDims

    def __init__(self, matrix: np.ndarray, dims):
        matrix = np.asarray(matrix, dtype=complex)
        dims = _as_dims(dims)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidDimensionError(f"operator matrix must be square, got {matrix.shape}")
        if matrix.shape[0] != dims.total:
            raise InvalidDimensionError(
                f"matrix side {matrix.shape[0]} != product of dims {dims.dims}"
            )
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", dims)

    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.dims)

    def is_hermitian(self, tol: float = HERMITICITY_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same_dims(self.dims, other.dims)
        return Operator(self.matrix @ other.matrix, self.dims)

    def __add__(self, other: "Operator") -> "Operator":
        _check_same_dims(self.dims, other.dims)
        return Operator(self.matrix + other.matrix, self.dims)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same_dims(self.dims, other.dims)
        return Operator(self.matrix - other.matrix, self.dims)

    def __mul__(self, scalar: complex) -> "Operator":
        return Operator(self.matrix * scalar, self.dims)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return Operator(-self.matrix, self.dims)


def _check_same_dims(a: SubsystemDims, b: SubsystemDims) -> None:
    if a.dims != b.dims:
        raise InvalidDimensionError(f"dimension mismatch: {a.dims} vs {b.dims}")


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix: Hermitian, unit trace, positive to tolerance.

    Construction enforces the type invariants (Hermiticity to 1e-10,
    trace 1 +- 1e-9, minimum eigenvalue >= -1e-8). Stochastic integration
    produces small negative eigenvalues within the tolerance; states are
    never clamped during evolution.
    """

    matrix: np.ndarray
    dims: SubsystemDims

    def __init__(self, matrix: np.ndarray, dims, check: bool = True):
        matrix = np.asarray(matrix, dtype=complex)
        dims = _as_dims(dims)
        if matrix.shape != (dims.total, dims.total):
            raise InvalidDimensionError(
                f"state shape {matrix.shape} incompatible with dims {dims.dims}"
            )
        if check:
            herm = np.max(np.abs(matrix - matrix.conj().T))
            if herm > HERMITICITY_TOL:
                raise HilbertError(f"state not Hermitian: deviation {herm:.2e}")
            tr = np.trace(matrix).real
            if abs(tr - 1.0) > TRACE_TOL:
                raise HilbertError(f"state trace {tr} != 1")
            w = np.linalg.eigvalsh(0.5 * (matrix + matrix.conj().T))
            if w[0] < POSITIVITY_TOL:
                raise HilbertError(f"state has negative eigenvalue {w[0]:.2e}")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "dims", dims)


@dataclass
class WignerGrid:
    """Wigner function samples W(x, y) on a rectangular phase-space grid.

    Axes are dimensionless coherent-amplitude coordinates (Re beta, Im beta);
    ``values[i, j]`` is W at (x_axis[i], y_axis[j]).
    """

    x_axis: np.ndarray
    y_axis: np.ndarray
    values: np.ndarray
    undersized: bool = False

    def integral(self) -> float:
        """Trapezoidal integral of W over the grid."""
        return float(np.trapezoid(np.trapezoid(self.values, self.y_axis, axis=1), self.x_axis))


# ---------------------------------------------------------------------------
# single-subsystem constructors


def destroy(n_max: int) -> Operator:
    """Bosonic annihilation operator on an n_max-level Fock space."""
    if n_max < 2:
        raise InvalidDimensionError(f"Fock truncation must be >= 2, got {n_max}")
    return Operator(np.diag(np.sqrt(np.arange(1, n_max)), 1), SubsystemDims((n_max,)))


def create(n_max: int) -> Operator:
    return destroy(n_max).dag()


def number(n_max: int) -> Operator:
    if n_max < 2:
        raise InvalidDimensionError(f"Fock truncation must be >= 2, got {n_max}")
    return Operator(np.diag(np.arange(n_max, dtype=float)), SubsystemDims((n_max,)))


def identity(dims) -> Operator:
    dims = _as_dims(dims)
    return Operator(np.eye(dims.total), dims)


_PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> Operator:
    """Single-qubit Pauli operator, axis in {'X', 'Y', 'Z'}."""
    try:
        mat = _PAULI[axis.upper()]
    except KeyError:
        raise HilbertError(f"unknown Pauli axis {axis!r}") from None
    return Operator(mat, SubsystemDims((2,)))


def sigma_minus() -> Operator:
    """Qubit lowering operator |0><1| (ground state is index 0)."""
    return Operator(np.array([[0, 1], [0, 0]], dtype=complex), SubsystemDims((2,)))


def basis_ket(index: int, dim: int) -> np.ndarray:
    ket = np.zeros(dim, dtype=complex)
    ket[index] = 1.0
    return ket


# ---------------------------------------------------------------------------
# composite-space operations


def embed(op: Operator, site: int, dims) -> Operator:
    """Tensor ``op`` with identities on all other subsystems.

    ``site`` indexes into ``dims`` with the fixed package ordering
    (qubit 1, qubit 2, resonator/meter).
    """
    dims = _as_dims(dims)
    if not 0 <= site < len(dims):
        raise InvalidDimensionError(f"site {site} out of range for dims {dims.dims}")
    if op.dims.total != dims[site]:
        raise InvalidDimensionError(
            f"operator dimension {op.dims.total} != dims[{site}] = {dims[site]}"
        )
    mat = np.eye(1, dtype=complex)
    for i, d in enumerate(dims):
        mat = np.kron(mat, op.matrix if i == site else np.eye(d))
    return Operator(mat, dims)


def tensor(*ops: Operator) -> Operator:
    """Kronecker product of operators, left-to-right."""
    mat = np.eye(1, dtype=complex)
    dims: list[int] = []
    for op in ops:
        mat = np.kron(mat, op.matrix)
        dims.extend(op.dims.dims)
    return Operator(mat, SubsystemDims(dims))


def partial_trace(state: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Reduced density matrix on the kept subsystems (trace preserved)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(state.dims)
    if not keep:
        raise HilbertError("keep set must be nonempty")
    if any(k < 0 or k >= n for k in keep):
        raise InvalidDimensionError(f"keep sites {keep} out of range for {n} subsystems")
    dims = state.dims.dims
    tens = state.matrix.reshape(dims + dims)
    remaining = list(range(n))
    for site in reversed([i for i in range(n) if i not in keep]):
        m = len(remaining)
        pos = remaining.index(site)
        tens = np.trace(tens, axis1=pos, axis2=pos + m)
        remaining.remove(site)
    kept_dims = tuple(dims[k] for k in keep)
    side = int(np.prod(kept_dims))
    return DensityMatrix(tens.reshape(side, side), SubsystemDims(kept_dims), check=False)


def coherent_vector(alpha: complex, n_max: int) -> np.ndarray:
    """Normalized truncated coherent-state ket from the Fock series."""
    n = np.arange(n_max)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amps = np.exp(-0.5 * abs(alpha) ** 2 + n * np.log(complex(alpha)) - 0.5 * log_fact) \
        if alpha != 0 else basis_ket(0, n_max)
    amps = np.asarray(amps, dtype=complex)
    return amps / np.linalg.norm(amps)


def coherent_state(alpha: complex, n_max: int) -> DensityMatrix:
    """Truncated coherent state projector, renormalized after truncation.

    Raises TruncationError unless |alpha|^2 <= n_max / 4 so the Poisson
    photon-number distribution fits well inside the truncation.
    """
    if abs(alpha) ** 2 > n_max / 4:
        raise TruncationError(
            f"|alpha|^2 = {abs(alpha)**2:.3f} exceeds n_max/4 = {n_max / 4:.3f}"
        )
    ket = coherent_vector(alpha, n_max)
    return DensityMatrix(np.outer(ket, ket.conj()), SubsystemDims((n_max,)), check=False)


def pure_state(ket: np.ndarray, dims) -> DensityMatrix:
    """Density matrix |ket><ket| (ket is normalized first)."""
    ket = np.asarray(ket, dtype=complex)
    ket = ket / np.linalg.norm(ket)
    return DensityMatrix(np.outer(ket, ket.conj()), _as_dims(dims), check=False)


def expectation(op: Operator, state: DensityMatrix, hermitian: bool = False):
    """Tr[op . state]; with hermitian=True returns the real part after
    checking the imaginary part is at roundoff level."""
    _check_same_dims(op.dims, state.dims)
    val = complex(np.trace(op.matrix @ state.matrix))
    if hermitian:
        scale = max(1.0, abs(val))
        if abs(val.imag) > 1e-9 * scale:
            raise HilbertError(
                f"expectation of declared-Hermitian operator has Im = {val.imag:.2e}"
            )
        return val.real
    return val


def purity(state: DensityMatrix) -> float:
    return float(np.trace(state.matrix @ state.matrix).real)


def fidelity(state: DensityMatrix, target: DensityMatrix) -> float:
    """Uhlmann fidelity; fast path when the target is (numerically) pure."""
    _check_same_dims(state.dims, target.dims)
    if abs(purity(target) - 1.0) < 1e-8:
        w, v = np.linalg.eigh(target.matrix)
        ket = v[:, -1]
        return float(np.real(ket.conj() @ state.matrix @ ket))
    import scipy.linalg as sla

    sq = sla.sqrtm(target.matrix)
    inner = sla.sqrtm(sq @ state.matrix @ sq)
    return float(np.trace(inner).real ** 2)


# ---------------------------------------------------------------------------
# Wigner function


def _raising_coeffs(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Static pieces of <m| exp(beta a^dag) |n>: exponent j = m - n and the
    coefficient sqrt(m!/n!)/j! on the lower triangle (zero elsewhere)."""
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, n_max)))))
    m = np.arange(n_max)[:, None]
    n = np.arange(n_max)[None, :]
    j = np.where(m >= n, m - n, 0)
    coeff = np.where(m >= n, np.exp(0.5 * (log_fact[m] - log_fact[n]) - log_fact[j]), 0.0)
    return j, coeff


def displacement_batch(betas: np.ndarray, n_max: int) -> np.ndarray:
    """Exact Fock matrix elements of D(beta) for a batch of amplitudes.

    Normal-ordered product with the lowering factor acting first, so no
    intermediate index exceeds the truncation and every retained matrix
    element equals the untruncated one.
    """
    betas = np.asarray(betas, dtype=complex).ravel()
    j, coeff = _raising_coeffs(n_max)
    b = betas[:, None, None]
    up = np.where(j > 0, b, 1.0) ** j * coeff
    lo = (np.where(j > 0, -b.conj(), 1.0) ** j * coeff).transpose(0, 2, 1)
    return np.exp(-0.5 * np.abs(betas)[:, None, None] ** 2) * (up @ lo)


def wigner(state: DensityMatrix, x_axis: np.ndarray, y_axis: np.ndarray) -> WignerGrid:
    """Displaced-parity Wigner function of a single bosonic mode.

    W(beta) = (2/pi) Tr[rho D(beta) P D(beta)^dag] = (2/pi) Tr[rho D(2 beta) P],
    evaluated on the grid beta = x + i y. The result is flagged undersized
    when the grid extent is smaller than |<a>| + 2.
    """
    if len(state.dims) != 1:
        raise InvalidDimensionError(
            "wigner expects a single-mode state; partial_trace composites first"
        )
    n_max = state.dims[0]
    x_axis = np.asarray(x_axis, dtype=float)
    y_axis = np.asarray(y_axis, dtype=float)
    a_mean = complex(np.trace(destroy(n_max).matrix @ state.matrix))
    extent = min(np.max(np.abs(x_axis)), np.max(np.abs(y_axis)))
    undersized = extent < abs(a_mean) + 2.0
    parity = (-1.0) ** np.arange(n_max)
    rho_p = (parity[:, None] * state.matrix).T  # (P rho) transposed for the trace
    betas = (x_axis[:, None] + 1j * y_axis[None, :]).ravel()
    vals = np.empty(betas.size)
    chunk = 2048
    for start in range(0, betas.size, chunk):
        disp = displacement_batch(2.0 * betas[start : start + chunk], n_max)
        vals[start : start + chunk] = (2.0 / pi) * np.real(
            np.einsum("mn,gmn->g", rho_p, disp)
        )
    return WignerGrid(x_axis, y_axis, vals.reshape(x_axis.size, y_axis.size),
                      undersized=undersized)
