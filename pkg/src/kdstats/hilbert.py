"""Finite-dimensional Hilbert space substrate.

States, orthonormal bases, Hermitian observables with explicit spectral
decompositions, unitaries, and the elementary algebra on them (products,
commutators, expectation values, Schroedinger/Heisenberg transport).
All values are immutable after construction and every operation is a pure
function, so everything here is safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectrum, DimensionMismatch, NotHermitian
from .tolerances import DEFAULT_TOLERANCES, Tolerances

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_complex_vector(values) -> np.ndarray:
    vec = np.array(values, dtype=complex).reshape(-1)
    if vec.size < 2:
        raise ValueError("need dimension >= 2")
    return vec


def _as_complex_matrix(values) -> np.ndarray:
    mat = np.array(values, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
        raise ValueError(f"need a square matrix of dimension >= 2, got shape {mat.shape}")
    return mat


def dagger(matrix: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return matrix.conj().T


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized complex amplitude vector |psi>."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _as_complex_vector(self.amplitudes)
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > DEFAULT_TOLERANCES.state_norm:
            raise ValueError(f"state vector norm is {norm!r}, not 1 within tolerance")
        object.__setattr__(self, "amplitudes", _freeze(amps))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    @classmethod
    def from_amplitudes(cls, values) -> "StateVector":
        """Build a state from arbitrary amplitudes, normalizing them first."""
        vec = _as_complex_vector(values)
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(vec / norm)


def braket(bra: StateVector, ket: StateVector) -> complex:
    """Inner product <bra|ket>."""
    if bra.dim != ket.dim:
        raise DimensionMismatch(f"braket of dim {bra.dim} with dim {ket.dim}")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def projector(state: StateVector) -> np.ndarray:
    """Rank-one projector |psi><psi|."""
    return np.outer(state.amplitudes, state.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Ordered orthonormal basis; ``matrix`` holds the vectors as columns."""

    vectors: tuple
    matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        vectors = tuple(self.vectors)
        if not vectors:
            raise ValueError("basis needs at least one vector")
        dim = vectors[0].dim
        if len(vectors) != dim or any(v.dim != dim for v in vectors):
            raise DimensionMismatch("basis must hold exactly dim vectors of equal dimension")
        mat = np.column_stack([v.amplitudes for v in vectors])
        gram_dev = float(np.abs(dagger(mat) @ mat - np.eye(dim)).max())
        if gram_dev > DEFAULT_TOLERANCES.orthonormal:
            raise ValueError(f"basis is not orthonormal: max Gram deviation {gram_dev:.3e}")
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def state(self, k: int) -> StateVector:
        return self.vectors[k]

    @classmethod
    def from_columns(cls, matrix) -> "OrthonormalBasis":
        mat = _as_complex_matrix(matrix)
        return cls(tuple(StateVector(mat[:, k]) for k in range(mat.shape[1])))

    @classmethod
    def computational(cls, dim: int) -> "OrthonormalBasis":
        return cls.from_columns(np.eye(dim, dtype=complex))

    @classmethod
    def fourier(cls, dim: int) -> "OrthonormalBasis":
        """Discrete Fourier basis, column j has entries exp(2*pi*i*j*n/dim)/sqrt(dim)."""
        n = np.arange(dim)
        mat = np.exp(2j * np.pi * np.outer(n, n) / dim) / np.sqrt(dim)
        return cls.from_columns(mat)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian matrix together with its explicit spectral decomposition.

    ``eigenvalues[k]`` belongs to ``eigenbasis.vectors[k]``; the matrix must
    reconstruct from the spectral sum within tolerance. Eigenvalues are not
    required to be sorted (lattice momentum operators keep DFT order), but
    :func:`spectral_decompose` always produces them ascending.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenbasis: OrthonormalBasis

    def __post_init__(self):
        mat = _as_complex_matrix(self.matrix)
        eig = np.array(self.eigenvalues, dtype=float).reshape(-1)
        if eig.size != mat.shape[0] or self.eigenbasis.dim != mat.shape[0]:
            raise DimensionMismatch("matrix, eigenvalues and eigenbasis sizes disagree")
        herm_dev = float(np.abs(mat - dagger(mat)).max())
        if herm_dev > DEFAULT_TOLERANCES.hermitian:
            raise NotHermitian(f"max |H - H^dag| = {herm_dev:.3e}")
        v = self.eigenbasis.matrix
        rebuilt = (v * eig) @ dagger(v)
        recon_dev = float(np.abs(mat - rebuilt).max())
        if recon_dev > DEFAULT_TOLERANCES.reconstruction:
            raise ValueError(f"spectral reconstruction off by {recon_dev:.3e}")
        object.__setattr__(self, "matrix", _freeze(mat))
        object.__setattr__(self, "eigenvalues", _freeze(eig))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def min_gap(self) -> float:
        """Smallest gap between (sorted) eigenvalues."""
        lam = np.sort(self.eigenvalues)
        return float(np.diff(lam).min()) if lam.size > 1 else np.inf

    @classmethod
    def from_spectrum(cls, eigenvalues, basis: OrthonormalBasis, *,
                      allow_degenerate: bool = False,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> "Observable":
        """Synthesize sum_k lambda_k |k><k| from explicit spectral data."""
        eig = np.array(eigenvalues, dtype=float).reshape(-1)
        if eig.size != basis.dim:
            raise DimensionMismatch("one eigenvalue per basis vector required")
        gaps = np.diff(np.sort(eig))
        if not allow_degenerate and gaps.size and float(gaps.min()) < tol.degeneracy_gap:
            raise DegenerateSpectrum(
                f"smallest eigenvalue gap {float(gaps.min()):.3e} below {tol.degeneracy_gap:.1e}")
        v = basis.matrix
        mat = (v * eig) @ dagger(v)
        mat = 0.5 * (mat + dagger(mat))
        return cls(mat, eig, basis)


@dataclass(frozen=True, eq=False)
class UnitaryMap:
    """Unitary matrix acting on states (Schroedinger) or observables (Heisenberg)."""

    matrix: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.matrix)
        dev = float(np.abs(mat @ dagger(mat) - np.eye(mat.shape[0])).max())
        if dev > DEFAULT_TOLERANCES.unitary:
            raise ValueError(f"matrix is not unitary: max |U U^dag - I| = {dev:.3e}")
        object.__setattr__(self, "matrix", _freeze(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "UnitaryMap":
        return cls(np.eye(dim, dtype=complex))


def spectral_decompose(matrix, tol: float | None = None, *,
                       allow_degenerate: bool = False) -> Observable:
    """Diagonalize a Hermitian matrix into an :class:`Observable`.

    Eigenvalues come out ascending. Each eigenvector's global phase is fixed
    by making its largest-magnitude component real and positive, which keeps
    decompositions reproducible across runs.

    Raises :class:`NotHermitian` if ``max |H - H^dag|`` exceeds ``tol`` and
    :class:`DegenerateSpectrum` if any eigenvalue gap falls below the
    degeneracy threshold without ``allow_degenerate``.
    """
    mat = _as_complex_matrix(matrix)
    herm_tol = DEFAULT_TOLERANCES.hermitian if tol is None else float(tol)
    herm_dev = float(np.abs(mat - dagger(mat)).max())
    if herm_dev > herm_tol:
        raise NotHermitian(f"max |H - H^dag| = {herm_dev:.3e} exceeds {herm_tol:.1e}")
    herm = 0.5 * (mat + dagger(mat))
    eigenvalues, vecs = np.linalg.eigh(herm)
    gaps = np.diff(eigenvalues)
    if not allow_degenerate and gaps.size and float(gaps.min()) < DEFAULT_TOLERANCES.degeneracy_gap:
        raise DegenerateSpectrum(
            f"smallest eigenvalue gap {float(gaps.min()):.3e} below "
            f"{DEFAULT_TOLERANCES.degeneracy_gap:.1e}; pass allow_degenerate=True "
            "only for projector-consuming operations")
    for k in range(vecs.shape[1]):
        lead = int(np.argmax(np.abs(vecs[:, k])))
        phase = vecs[lead, k] / abs(vecs[lead, k])
        vecs[:, k] = vecs[:, k] * phase.conjugate()
    basis = OrthonormalBasis.from_columns(vecs)
    return Observable(herm, eigenvalues, basis)


def require_nondegenerate(observable: Observable,
                          tol: Tolerances = DEFAULT_TOLERANCES) -> None:
    """Raise :class:`DegenerateSpectrum` when outcome labels would be ambiguous."""
    gap = observable.min_gap()
    if gap < tol.degeneracy_gap:
        raise DegenerateSpectrum(f"eigenvalue gap {gap:.3e} below {tol.degeneracy_gap:.1e}")


def expectation(observable: Observable, psi: StateVector) -> float:
    """<psi|A|psi>; the imaginary residue must vanish and is discarded."""
    if observable.dim != psi.dim:
        raise DimensionMismatch(f"observable dim {observable.dim} vs state dim {psi.dim}")
    raw = complex(np.vdot(psi.amplitudes, observable.matrix @ psi.amplitudes))
    if abs(raw.imag) > DEFAULT_TOLERANCES.imag_residue:
        raise ValueError(f"expectation value has imaginary residue {raw.imag:.3e}")
    return raw.real


def variance(observable: Observable, psi: StateVector) -> float:
    """<A^2> - <A>^2, clipped at zero against roundoff.

    Uses <A^2> = ||A psi||^2, exact for Hermitian A.
    """
    if observable.dim != psi.dim:
        raise DimensionMismatch(f"observable dim {observable.dim} vs state dim {psi.dim}")
    image = observable.matrix @ psi.amplitudes
    second_moment = float(np.vdot(image, image).real)
    mean = expectation(observable, psi)
    return max(second_moment - mean * mean, 0.0)


def commutator(a: Observable, b: Observable) -> np.ndarray:
    """AB - BA. The result is anti-Hermitian (checked)."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"commutator of dim {a.dim} with dim {b.dim}")
    c = a.matrix @ b.matrix - b.matrix @ a.matrix
    dev = float(np.abs(c + dagger(c)).max())
    if dev > DEFAULT_TOLERANCES.hermitian:
        raise ValueError(f"commutator lost anti-Hermiticity by {dev:.3e}")
    return c


def evolve(u: UnitaryMap, psi: StateVector) -> StateVector:
    """Schroedinger transport U|psi>."""
    if u.dim != psi.dim:
        raise DimensionMismatch(f"unitary dim {u.dim} vs state dim {psi.dim}")
    return StateVector(u.matrix @ psi.amplitudes)


def evolve_heisenberg(u: UnitaryMap, observable: Observable) -> Observable:
    """Heisenberg transport U^dag A U; the spectrum is carried over unchanged."""
    if u.dim != observable.dim:
        raise DimensionMismatch(f"unitary dim {u.dim} vs observable dim {observable.dim}")
    ud = dagger(u.matrix)
    mat = ud @ observable.matrix @ u.matrix
    mat = 0.5 * (mat + dagger(mat))
    basis = OrthonormalBasis.from_columns(ud @ observable.eigenbasis.matrix)
    return Observable(mat, observable.eigenvalues, basis)


def evolution_operator(hamiltonian: Observable, t: float, hbar: float = 1.0) -> UnitaryMap:
    """exp(-i H t / hbar) through the stored eigendecomposition (no integrator)."""
    v = hamiltonian.eigenbasis.matrix
    phases = np.exp(-1j * hamiltonian.eigenvalues * t / hbar)
    return UnitaryMap((v * phases) @ dagger(v))
