"""Finite-model dynamics: Heisenberg transport, the equation-of-motion
identity, two-time imaginary correlations, and the lattice free-particle
propagator with coarse-graining to the classical limit.

Two finite stand-ins for the free particle are used, each preserving the
structure its checks need: a periodic lattice (exact unitarity, discrete
Fourier momentum) for the propagator and coarse-graining, and a truncated
oscillator ladder (canonical [x, p] away from the top levels) for the
two-time correlation. Time stepping is always exact, through the stored
eigendecomposition of the Hamiltonian, never a finite-difference integrator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, KernelTooNarrow, TruncationViolated
from .hilbert import (
    Observable,
    OrthonormalBasis,
    StateVector,
    dagger,
    evolution_operator,
    evolve,
    evolve_heisenberg,
    expectation,
    require_nondegenerate,
    spectral_decompose,
)
from .quasiprob import ComplexConditional, kd_joint
from .tolerances import DEFAULT_TOLERANCES


@dataclass(frozen=True, eq=False)
class LatticeParticle:
    """Free particle on a periodic position lattice.

    Positions are j*L/d for j = 0..d-1; momentum is diagonal in the discrete
    Fourier basis with eigenvalues 2*pi*hbar*f/L for DFT frequencies f in
    [-d/2, d/2) (standard fftfreq order).
    """

    dim: int
    length: float
    mass: float
    hbar: float
    position_op: Observable
    momentum_op: Observable

    def __post_init__(self):
        if self.dim < 16:
            raise ValueError("lattice needs dim >= 16")
        if self.length <= 0 or self.mass <= 0 or self.hbar <= 0:
            raise ValueError("length, mass and hbar must be positive")
        fourier = OrthonormalBasis.fourier(self.dim).matrix
        dev = float(np.abs(self.momentum_op.eigenbasis.matrix - fourier).max())
        if dev > DEFAULT_TOLERANCES.orthonormal:
            raise ValueError(f"momentum eigenbasis deviates from the DFT by {dev:.3e}")

    @property
    def spacing(self) -> float:
        return self.length / self.dim

    @classmethod
    def build(cls, dim: int, length: float, mass: float = 1.0,
              hbar: float = 1.0) -> "LatticeParticle":
        positions = np.arange(dim) * (length / dim)
        position_op = Observable.from_spectrum(
            positions, OrthonormalBasis.computational(dim))
        momenta = 2.0 * np.pi * hbar * np.fft.fftfreq(dim, d=length / dim)
        momentum_op = Observable.from_spectrum(
            momenta, OrthonormalBasis.fourier(dim))
        return cls(dim, length, mass, hbar, position_op, momentum_op)


@dataclass(frozen=True, eq=False)
class TruncatedOscillatorPair:
    """Position/momentum pair from truncated ladder operators.

    [x, p] equals i*hbar*identity exactly outside the top two levels; states
    kept away from the truncation edge behave canonically.
    """

    dim: int
    hbar: float
    mass: float
    frequency: float
    x_op: Observable
    p_op: Observable

    def __post_init__(self):
        if self.dim < 4:
            raise ValueError("oscillator ladder needs dim >= 4")
        comm = self.x_op.matrix @ self.p_op.matrix - self.p_op.matrix @ self.x_op.matrix
        guard = self.dim - 2
        dev = float(np.abs(comm[:guard, :guard]
                           - 1j * self.hbar * np.eye(self.dim)[:guard, :guard]).max())
        if dev > 1e-9:
            raise ValueError(f"[x, p] deviates from i*hbar below the guard by {dev:.3e}")

    @classmethod
    def build(cls, dim: int, hbar: float = 1.0, mass: float = 1.0,
              frequency: float = 1.0) -> "TruncatedOscillatorPair":
        lower = np.zeros((dim, dim), dtype=complex)
        steps = np.sqrt(np.arange(1, dim, dtype=float))
        lower[np.arange(dim - 1), np.arange(1, dim)] = steps
        raise_op = dagger(lower)
        x_scale = np.sqrt(hbar / (2.0 * mass * frequency))
        p_scale = np.sqrt(mass * hbar * frequency / 2.0)
        x_mat = x_scale * (lower + raise_op)
        p_mat = 1j * p_scale * (raise_op - lower)
        return cls(dim, hbar, mass, frequency,
                   spectral_decompose(x_mat), spectral_decompose(p_mat))


def free_hamiltonian(sys: TruncatedOscillatorPair) -> Observable:
    """p^2 / (2m) on the truncated ladder (spectrum is nearly twofold degenerate)."""
    h = sys.p_op.matrix @ sys.p_op.matrix / (2.0 * sys.mass)
    return spectral_decompose(h, allow_degenerate=True)


def heisenberg_at(observable: Observable, hamiltonian: Observable, t: float,
                  hbar: float = 1.0) -> Observable:
    """Heisenberg-picture observable U(t)^dag A U(t) with U = exp(-iHt/hbar)."""
    if observable.dim != hamiltonian.dim:
        raise DimensionMismatch("observable and Hamiltonian dims must agree")
    if t == 0.0:
        return observable
    return evolve_heisenberg(evolution_operator(hamiltonian, t, hbar), observable)


def motion_identity_check(observable: Observable, hamiltonian: Observable,
                          psi: StateVector, dt: float,
                          hbar: float = 1.0) -> tuple[float, float]:
    """Rate of change of <A> versus the imaginary energy correlation.

    lhs is the central finite difference of <psi(t)|A|psi(t)> at t = 0 with
    step dt (O(dt^2) error); rhs is (2/hbar) * sum_{n,a} E_n A_a Im rho(n,a|psi)
    over the joint quasiprobability of energy and A outcomes.
    """
    require_nondegenerate(observable)
    require_nondegenerate(hamiltonian)
    if observable.dim != psi.dim or hamiltonian.dim != psi.dim:
        raise DimensionMismatch("operator and state dims must agree")
    if dt <= 0.0:
        raise ValueError("need a positive finite-difference step")
    forward = expectation(observable, evolve(evolution_operator(hamiltonian, dt, hbar), psi))
    backward = expectation(observable, evolve(evolution_operator(hamiltonian, -dt, hbar), psi))
    lhs = (forward - backward) / (2.0 * dt)
    rho = kd_joint(hamiltonian.eigenbasis, observable.eigenbasis, psi)
    rhs = (2.0 / hbar) * float(np.einsum("n,a,na->", hamiltonian.eigenvalues,
                                         observable.eigenvalues, rho.values.imag))
    return lhs, rhs


def _guard_leak(state: np.ndarray, guard_level: int) -> float:
    return float(np.sum(np.abs(state[guard_level:]) ** 2))


def two_time_imag_correlation(sys: TruncatedOscillatorPair, h_free: Observable,
                              psi: StateVector, t1: float,
                              t2: float) -> tuple[float, float]:
    """Imaginary part of the two-time position correlation under free motion.

    measured = Im <psi| x(t1) x(t2) |psi> with the chronologically earlier
    operator on the left; predicted = hbar * (t2 - t1) / (2 m). The initial
    state must live below level dim/2 and the evolved states must not leak
    into the top two ladder levels, where the canonical commutator breaks.
    """
    if h_free.dim != sys.dim or psi.dim != sys.dim:
        raise DimensionMismatch("system, Hamiltonian and state dims must agree")
    leak_tol = DEFAULT_TOLERANCES.truncation_leak
    initial_leak = _guard_leak(psi.amplitudes, sys.dim // 2)
    if initial_leak > leak_tol:
        raise TruncationViolated(
            f"initial population above level {sys.dim // 2} is {initial_leak:.3e}")
    for t in (t1, t2):
        evolved = evolve(evolution_operator(h_free, t, sys.hbar), psi)
        leak = _guard_leak(evolved.amplitudes, sys.dim - 2)
        if leak > leak_tol:
            raise TruncationViolated(
                f"evolution to t={t} leaks {leak:.3e} into the top two levels")
    x1 = heisenberg_at(sys.x_op, h_free, t1, sys.hbar)
    x2 = heisenberg_at(sys.x_op, h_free, t2, sys.hbar)
    raw = complex(np.vdot(psi.amplitudes, x1.matrix @ x2.matrix @ psi.amplitudes))
    predicted = sys.hbar * (t2 - t1) / (2.0 * sys.mass)
    return raw.imag, predicted


def free_propagator_conditional(sys: LatticeParticle, x0_index: int, p0_index: int,
                                t: float) -> ComplexConditional:
    """Complex conditional p(x_t | x_0, p_0) for free motion on the lattice.

    p(x_t|x_0,p_0) = <p_0|U(t)^dag|x_t><x_t|U(t)|x_0> / <p_0|x_0> with
    U(t) = exp(-i p^2 t / (2 m hbar)). Sums to 1 exactly (resolution of the
    identity); on the lattice every <p_0|x_0> has modulus 1/sqrt(d).
    """
    d = sys.dim
    if not (0 <= x0_index < d and 0 <= p0_index < d):
        raise ValueError("x0_index and p0_index must be valid lattice indices")
    fourier = sys.momentum_op.eigenbasis.matrix
    phases = np.exp(-1j * sys.momentum_op.eigenvalues ** 2 * t / (2.0 * sys.mass * sys.hbar))
    u = (fourier * phases) @ dagger(fourier)
    ket_evolved = u[:, x0_index]                      # <x_t|U|x_0>
    bra_evolved = (u @ fourier[:, p0_index]).conj()   # <p_0|U^dag|x_t>
    denom = fourier[x0_index, p0_index].conjugate()   # <p_0|x_0>
    return ComplexConditional(bra_evolved * ket_evolved / denom)


def classical_position(sys: LatticeParticle, x0_index: int, p0_index: int,
                       t: float) -> float:
    """x_0 + p_0 t / m wrapped onto the periodic lattice."""
    x0 = x0_index * sys.spacing
    p0 = float(sys.momentum_op.eigenvalues[p0_index])
    return float((x0 + p0 * t / sys.mass) % sys.length)


def modular_distance(a: float, b: float, period: float) -> float:
    """Shortest distance on a circle of the given period."""
    delta = abs(a - b) % period
    return min(delta, period - delta)


def stationary_phase_index(conditional: ComplexConditional, window: int = 5) -> int:
    """Lattice site where the complex phase varies slowest.

    Scores each site by the mean magnitude of the wrapped phase increment over
    a centered window and returns the argmin (ties go to the lowest index).
    The winner tracks the classically predicted position.
    """
    values = conditional.values
    if values.ndim != 1:
        raise ValueError("need a rank-1 conditional over lattice sites")
    d = values.size
    increments = np.abs(np.angle(np.roll(values, -1) * values.conj()))
    half = max(window // 2, 1)
    offsets = np.arange(-half, half + 1)
    scores = np.zeros(d)
    for k in offsets:
        scores += increments[(np.arange(d) + k) % d]
    return int(np.argmin(scores))


def coarse_grain(conditional: ComplexConditional, kernel_width: float,
                 sys: LatticeParticle) -> np.ndarray:
    """Finite-resolution view of a complex lattice conditional.

    Convolves the complex values with a periodic Gaussian kernel of standard
    deviation ``kernel_width`` (position units), takes the modulus and
    renormalizes to sum 1. Rapid phase oscillations cancel under the
    convolution, so the surviving weight concentrates near the classical
    trajectory.
    """
    values = conditional.values
    if values.ndim != 1 or values.size != sys.dim:
        raise DimensionMismatch("conditional must be rank 1 over the lattice sites")
    h = sys.spacing
    if kernel_width < 2.0 * h:
        raise KernelTooNarrow(
            f"kernel width {kernel_width:.3g} below two lattice spacings {2 * h:.3g}")
    offsets = np.arange(sys.dim) * h
    wrapped = np.minimum(offsets, sys.length - offsets)
    kernel = np.exp(-0.5 * (wrapped / kernel_width) ** 2)
    kernel /= kernel.sum()
    smoothed = np.fft.ifft(np.fft.fft(values) * np.fft.fft(kernel))
    weights = np.abs(smoothed)
    return weights / weights.sum()
