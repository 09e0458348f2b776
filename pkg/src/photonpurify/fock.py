"""Truncated multimode Fock-space linear algebra.

States live on a register of ``n_modes`` optical modes, each truncated at
``max_photons`` photons.  Basis vectors are occupation tuples
``(n_0, ..., n_{M-1})`` ordered lexicographically with mode 0 as the most
significant digit::

    index = sum_k n_k * (max_photons + 1) ** (M - 1 - k)

All operators are dense complex matrices; the intended regime is desk
scale (register dimension up to 10**6, a few thousand in practice).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial, sqrt
from string import ascii_letters

import numpy as np

from .errors import (
    BasisSizeError,
    ConfigurationError,
    TruncationOverflowError,
)

DEFAULT_DIMENSION_CAP = 10**6

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
NORM_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


@dataclass(frozen=True)
class FockBasis:
    """Occupation-number basis for ``n_modes`` modes truncated at
    ``max_photons`` photons per mode."""

    n_modes: int
    max_photons: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise ConfigurationError("n_modes must be >= 1")
        if self.max_photons < 1:
            raise ConfigurationError("max_photons must be >= 1")

    @property
    def levels(self) -> int:
        """Number of occupation levels per mode (max_photons + 1)."""
        return self.max_photons + 1

    @property
    def dimension(self) -> int:
        return self.levels**self.n_modes

    @property
    def occupations(self) -> np.ndarray:
        """Array of shape (dimension, n_modes): row i is the occupation
        tuple of basis index i."""
        cached = self.__dict__.get("_occupations")
        if cached is None:
            grids = np.meshgrid(
                *([np.arange(self.levels)] * self.n_modes), indexing="ij"
            )
            cached = np.stack(grids, axis=-1).reshape(self.dimension, self.n_modes)
            cached.setflags(write=False)
            self.__dict__["_occupations"] = cached
        return cached

    @property
    def weights(self) -> np.ndarray:
        """Positional weight of each mode in the index formula."""
        cached = self.__dict__.get("_weights")
        if cached is None:
            cached = self.levels ** np.arange(self.n_modes - 1, -1, -1)
            cached.setflags(write=False)
            self.__dict__["_weights"] = cached
        return cached

    def index_of(self, occupation) -> int:
        occ = tuple(int(n) for n in occupation)
        if len(occ) != self.n_modes:
            raise ConfigurationError(
                f"occupation has {len(occ)} entries, basis has {self.n_modes} modes"
            )
        if any(n < 0 or n > self.max_photons for n in occ):
            raise ConfigurationError(
                f"occupation {occ} outside [0, {self.max_photons}]"
            )
        return int(np.dot(occ, self.weights))

    def occupation_of(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dimension:
            raise ConfigurationError(f"index {index} outside basis of size {self.dimension}")
        return tuple(int(n) for n in self.occupations[index])

    def mode_occupation(self, mode: int) -> np.ndarray:
        """Vector of length ``dimension`` giving mode ``mode``'s photon
        count in each basis state (the diagonal of the number operator)."""
        self._check_mode(mode)
        return self.occupations[:, mode]

    def total_occupation(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def _check_mode(self, mode: int) -> None:
        if not 0 <= mode < self.n_modes:
            raise ConfigurationError(
                f"mode {mode} outside register of {self.n_modes} modes"
            )


def make_basis(
    n_modes: int, max_photons: int = 2, dim_cap: int = DEFAULT_DIMENSION_CAP
) -> FockBasis:
    """Construct a FockBasis, refusing dimensions above ``dim_cap``.

    The error message names the offending product so that oversize
    requests are easy to diagnose.
    """
    if n_modes < 1 or max_photons < 1:
        raise ConfigurationError("need n_modes >= 1 and max_photons >= 1")
    dim = (max_photons + 1) ** n_modes
    if dim > dim_cap:
        raise BasisSizeError(
            f"Fock dimension (max_photons+1)**n_modes = "
            f"{max_photons + 1}**{n_modes} = {dim} exceeds cap {dim_cap}"
        )
    return FockBasis(n_modes=n_modes, max_photons=max_photons)


@dataclass(frozen=True)
class PureState:
    """Normalized state vector over a FockBasis."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.basis.dimension:
            raise ConfigurationError(
                f"amplitude vector has length {amps.shape[0]}, "
                f"basis dimension is {self.basis.dimension}"
            )
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise ConfigurationError(
                f"state squared norm {norm_sq!r} differs from 1 by more than {NORM_TOL}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, basis: FockBasis, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ConfigurationError("cannot normalize the zero vector")
        return cls(basis, amps / norm)

    def density(self) -> "DensityOperator":
        return DensityOperator(self.basis, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityOperator:
    """Trace-one Hermitian operator over a FockBasis.

    Construction validates hermiticity and unit trace.  Sub-normalized
    conditional states are never stored here; conditioning operations
    return a ``(DensityOperator, probability)`` pair instead.
    """

    basis: FockBasis
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        dim = self.basis.dimension
        if mat.shape != (dim, dim):
            raise ConfigurationError(
                f"matrix shape {mat.shape} does not match basis dimension {dim}"
            )
        herm_dev = float(np.abs(mat - mat.conj().T).max())
        if herm_dev > HERMITICITY_TOL:
            raise ConfigurationError(
                f"matrix deviates from Hermitian by {herm_dev:.3e} (> {HERMITICITY_TOL})"
            )
        trace_dev = abs(complex(np.trace(mat)) - 1.0)
        if trace_dev > TRACE_TOL:
            raise ConfigurationError(
                f"trace deviates from 1 by {trace_dev:.3e} (> {TRACE_TOL})"
            )
        mat = (mat + mat.conj().T) / 2.0
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])

    def validate_positive(self) -> None:
        """Full positivity check (O(d^3)); used by tests and debugging."""
        lo = self.min_eigenvalue()
        if lo < EIGENVALUE_FLOOR:
            raise ConfigurationError(f"minimum eigenvalue {lo:.3e} below {EIGENVALUE_FLOOR}")

    def mix(self, other: "DensityOperator", weight: float) -> "DensityOperator":
        """Convex combination weight*self + (1-weight)*other."""
        if other.basis != self.basis:
            raise ConfigurationError("cannot mix states on different bases")
        if not 0.0 <= weight <= 1.0:
            raise ConfigurationError("mixing weight must lie in [0, 1]")
        return DensityOperator(
            self.basis, weight * self.matrix + (1.0 - weight) * other.matrix
        )


def fock_state(basis: FockBasis, occupation) -> PureState:
    """Basis state |n_0, ..., n_{M-1}>."""
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.index_of(occupation)] = 1.0
    return PureState(basis, amps)


def vacuum_state(basis: FockBasis) -> PureState:
    return fock_state(basis, (0,) * basis.n_modes)


def split_photon_state(
    basis: FockBasis, modes: tuple[int, int], relative_phase: float = 0.0
) -> PureState:
    """Single photon shared coherently between two modes:

        (|1 at a> + exp(i*phi) |1 at b>) / sqrt(2)

    with all other modes in vacuum.  ``relative_phase = 0`` gives the
    symmetric combination, ``pi`` the antisymmetric one.
    """
    a, b = modes
    basis._check_mode(a)
    basis._check_mode(b)
    if a == b:
        raise ConfigurationError("modes must be distinct")
    occ_a = [0] * basis.n_modes
    occ_b = [0] * basis.n_modes
    occ_a[a] = 1
    occ_b[b] = 1
    amps = np.zeros(basis.dimension, dtype=complex)
    amps[basis.index_of(occ_a)] = 1.0 / sqrt(2.0)
    amps[basis.index_of(occ_b)] = np.exp(1j * relative_phase) / sqrt(2.0)
    return PureState(basis, amps)


def tensor(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    """Tensor product; a's modes come first in the combined register."""
    if a.basis.max_photons != b.basis.max_photons:
        raise ConfigurationError(
            "tensor requires equal per-mode truncation on both factors"
        )
    basis = make_basis(
        a.basis.n_modes + b.basis.n_modes,
        a.basis.max_photons,
    )
    return DensityOperator(basis, np.kron(a.matrix, b.matrix))


def partial_trace(rho: DensityOperator, keep_modes) -> DensityOperator:
    """Trace out every mode not listed in ``keep_modes``.

    Kept modes appear in the result in ascending original order and are
    relabeled 0..K-1.
    """
    keep = sorted(set(int(m) for m in keep_modes))
    M = rho.basis.n_modes
    if not keep:
        raise ConfigurationError("keep_modes must be nonempty")
    if keep[0] < 0 or keep[-1] >= M:
        raise ConfigurationError(f"keep_modes {keep} outside register of {M} modes")
    if len(keep) == M:
        return rho
    q = rho.basis.levels
    tensor_form = rho.matrix.reshape((q,) * (2 * M))
    row = list(ascii_letters[:M])
    col = []
    out_col = {}
    next_idx = M
    for k in range(M):
        if k in keep:
            c = ascii_letters[next_idx]
            next_idx += 1
            col.append(c)
            out_col[k] = c
        else:
            col.append(row[k])  # same letter on row and column: traced
    subscript = (
        "".join(row) + "".join(col)
        + "->"
        + "".join(row[k] for k in keep) + "".join(out_col[k] for k in keep)
    )
    reduced = np.einsum(subscript, tensor_form)
    dim = q ** len(keep)
    out_basis = make_basis(len(keep), rho.basis.max_photons)
    return DensityOperator(out_basis, reduced.reshape(dim, dim))


def overlap_fidelity(rho: DensityOperator, psi: PureState) -> float:
    """<psi| rho |psi>, clipped to [0, 1]."""
    if psi.basis != rho.basis:
        raise ConfigurationError("state and operator live on different bases")
    val = complex(psi.amplitudes.conj() @ (rho.matrix @ psi.amplitudes))
    if abs(val.imag) > 1e-10:
        raise ConfigurationError(f"fidelity has imaginary residue {val.imag:.3e}")
    return float(min(max(val.real, 0.0), 1.0))


def annihilation_operator(basis: FockBasis, mode: int) -> np.ndarray:
    """Dense matrix of the annihilation operator on ``mode``.

    Matrix elements follow <n-1| a |n> = sqrt(n); transitions that would
    leave the truncated space simply do not occur (a lowers occupation).
    """
    basis._check_mode(mode)
    dim = basis.dimension
    occ = basis.occupations
    w = int(basis.weights[mode])
    a = np.zeros((dim, dim), dtype=complex)
    src = np.nonzero(occ[:, mode] > 0)[0]
    dst = src - w
    a[dst, src] = np.sqrt(occ[src, mode])
    return a


@dataclass(frozen=True)
class FockUnitary:
    """A unitary on the truncated register together with the set of basis
    indices on which its action is not faithful to the untruncated
    physics (occupation overflow through the element)."""

    basis: FockBasis
    matrix: np.ndarray
    overflow: np.ndarray  # boolean mask over basis indices
    modes: tuple[int, ...]

    def apply(self, rho: DensityOperator, support_tol: float = 1e-12) -> DensityOperator:
        """U rho U(dag), rejecting states with support on overflow rows."""
        if rho.basis != self.basis:
            raise ConfigurationError("unitary and state bases differ")
        if self.overflow.any():
            weight = float(rho.diagonal[self.overflow].sum())
            if weight > support_tol:
                raise TruncationOverflowError(
                    f"state carries probability {weight:.3e} on occupation "
                    f"sectors that overflow the truncation through modes {self.modes}"
                )
        return DensityOperator(self.basis, self.matrix @ rho.matrix @ self.matrix.conj().T)


def _two_mode_unitary_block(u: np.ndarray, max_photons: int) -> tuple[np.ndarray, np.ndarray]:
    """Lift a 2x2 mode matrix to the two-mode truncated Fock space.

    Uses the closed-form transition amplitudes obtained by expanding the
    transformed creation operators binomially.  Photon-number sectors
    with total occupation above ``max_photons`` cannot scatter inside
    the truncation; they are left untouched (identity) and flagged.
    Returns (matrix, overflow mask) over the two-mode basis ordered with
    the first mode as the most significant digit.
    """
    q = max_photons + 1
    dim = q * q
    block = np.zeros((dim, dim), dtype=complex)
    overflow = np.zeros(dim, dtype=bool)
    # A diagonal mode matrix never scatters photons between the modes,
    # so its per-mode phase action is exact on every sector.
    diagonal = abs(u[0, 1]) < 1e-15 and abs(u[1, 0]) < 1e-15
    if diagonal:
        for n1 in range(q):
            for n2 in range(q):
                col = n1 * q + n2
                block[col, col] = u[0, 0] ** n1 * u[1, 1] ** n2
        return block, overflow
    for n1 in range(q):
        for n2 in range(q):
            col = n1 * q + n2
            if n1 + n2 > max_photons:
                overflow[col] = True
                block[col, col] = 1.0
                continue
            for k in range(n1 + 1):
                for l in range(n2 + 1):
                    m1 = k + l
                    m2 = n1 + n2 - m1
                    amp = (
                        comb(n1, k) * comb(n2, l)
                        * u[0, 0] ** k * u[1, 0] ** (n1 - k)
                        * u[0, 1] ** l * u[1, 1] ** (n2 - l)
                    )
                    scale = sqrt(
                        factorial(m1) * factorial(m2)
                        / (factorial(n1) * factorial(n2))
                    )
                    block[m1 * q + m2, col] += amp * scale
    return block, overflow


def lift_mode_unitary(u, basis: FockBasis, modes: tuple[int, int]) -> FockUnitary:
    """Lift a 2x2 unitary acting on a pair of modes to the full register.

    The single-photon action equals ``u`` itself: the amplitudes of
    |1,0> and |0,1> on the addressed pair transform with the columns of
    ``u``.  Basis states whose total occupation on the addressed pair
    exceeds the truncation are flagged as overflow and left unchanged,
    which keeps the stored matrix exactly unitary.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ConfigurationError("mode matrix must be 2x2")
    unitary_dev = float(np.abs(u.conj().T @ u - np.eye(2)).max())
    if unitary_dev > 1e-12:
        raise ConfigurationError(
            f"mode matrix deviates from unitarity by {unitary_dev:.3e}"
        )
    i, j = modes
    basis._check_mode(i)
    basis._check_mode(j)
    if i == j:
        raise ConfigurationError("modes must be distinct")

    q = basis.levels
    block, block_overflow = _two_mode_unitary_block(u, basis.max_photons)

    occ = basis.occupations
    rest_mask = (occ[:, i] == 0) & (occ[:, j] == 0)
    rest_indices = np.nonzero(rest_mask)[0]
    wi = int(basis.weights[i])
    wj = int(basis.weights[j])

    dim = basis.dimension
    full = np.zeros((dim, dim), dtype=complex)
    offsets = [a * wi + b * wj for a in range(q) for b in range(q)]
    for p, off_p in enumerate(offsets):
        rows = rest_indices + off_p
        for s, off_s in enumerate(offsets):
            val = block[p, s]
            if val != 0:
                full[rows, rest_indices + off_s] = val
    if block_overflow.any():
        overflow = occ[:, i] + occ[:, j] > basis.max_photons
    else:
        overflow = np.zeros(dim, dtype=bool)
    return FockUnitary(basis=basis, matrix=full, overflow=overflow, modes=(i, j))
