"""Seeded random instances for property tests and scenario sweeps.

Haar-like unitaries come from QR orthonormalization of complex Gaussian
matrices with the R-diagonal phase fix, so the distribution is exactly Haar
and reproducible for a fixed ``numpy.random.Generator``.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateSpectrum
from .hilbert import Observable, OrthonormalBasis, StateVector, dagger, spectral_decompose


def random_state(dim: int, rng: np.random.Generator) -> StateVector:
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector.from_amplitudes(vec)


def random_unitary_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    ginibre = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases[None, :]


def random_basis(dim: int, rng: np.random.Generator) -> OrthonormalBasis:
    return OrthonormalBasis.from_columns(random_unitary_matrix(dim, rng))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (g + dagger(g))


def random_observable(dim: int, rng: np.random.Generator, *, max_tries: int = 8) -> Observable:
    """Random non-degenerate Hermitian observable (degeneracy has measure zero,
    but retry a few times to be safe)."""
    for _ in range(max_tries):
        try:
            return spectral_decompose(random_hermitian(dim, rng))
        except DegenerateSpectrum:
            continue
    raise DegenerateSpectrum(f"no non-degenerate sample after {max_tries} tries")


def _exp_i_hermitian(k: np.ndarray, scale: float) -> np.ndarray:
    """exp(i * scale * K) for Hermitian K, via eigendecomposition."""
    lam, v = np.linalg.eigh(0.5 * (k + dagger(k)))
    return (v * np.exp(1j * scale * lam)) @ dagger(v)


def mub_perturbed_bases(dim: int, rng: np.random.Generator,
                        eps: float = 0.08) -> tuple[OrthonormalBasis, OrthonormalBasis]:
    """A mutually-unbiased pair (computational, Fourier), each kicked by a small
    random unitary so instances differ while every cross overlap stays well
    away from zero (|<b|a>| ~ 1/sqrt(dim) + O(eps))."""
    p1 = _exp_i_hermitian(random_hermitian(dim, rng), eps)
    p2 = _exp_i_hermitian(random_hermitian(dim, rng), eps)
    fourier = OrthonormalBasis.fourier(dim).matrix
    return (OrthonormalBasis.from_columns(p1),
            OrthonormalBasis.from_columns(p2 @ fourier))
