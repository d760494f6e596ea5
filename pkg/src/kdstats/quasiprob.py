"""Kirkwood-Dirac engine: weak values, complex conditional and joint
quasiprobabilities, and the operator-algebra identities built on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, OrthogonalBasisPair, OrthogonalPostselection
from .hilbert import (
    Observable,
    OrthonormalBasis,
    StateVector,
    braket,
    commutator,
    dagger,
    expectation,
    require_nondegenerate,
    variance,
)
from .tolerances import DEFAULT_TOLERANCES


@dataclass(frozen=True, eq=False)
class ComplexJointDistribution:
    """Complex joint quasiprobability rho[a, b] over two outcome indices.

    The total sums to 1 and both marginals are real and non-negative when the
    distribution comes from a valid state. Finite-strength measurement
    estimates carry O(g) bias, so they are constructed with ``strict=False``
    and skip the sum/marginal checks.
    """

    values: np.ndarray
    labels: tuple = ("a", "b")
    strict: bool = True

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 2:
            raise ValueError("joint distribution must be a 2-d array")
        if self.strict:
            tol = DEFAULT_TOLERANCES.identity_check
            total = complex(vals.sum())
            if abs(total - 1.0) > tol:
                raise ValueError(f"distribution sums to {total!r}, not 1")
            for axis, name in ((0, "a"), (1, "b")):
                marg = vals.sum(axis=axis)
                if float(np.abs(marg.imag).max()) > tol:
                    raise ValueError(f"marginal over {name} is not real")
                if float(marg.real.min()) < -tol:
                    raise ValueError(f"marginal over {name} is negative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def dims(self) -> tuple:
        return self.values.shape

    def marginal_over_a(self) -> np.ndarray:
        """Real distribution over b, summing out a."""
        return self.values.sum(axis=0).real

    def marginal_over_b(self) -> np.ndarray:
        """Real distribution over a, summing out b."""
        return self.values.sum(axis=1).real

    def negativity(self) -> float:
        """Total weight of negative real parts, a nonclassicality witness."""
        return float(np.clip(-self.values.real, 0.0, None).sum())

    def imaginarity(self) -> float:
        """Total absolute imaginary weight, a nonclassicality witness."""
        return float(np.abs(self.values.imag).sum())


@dataclass(frozen=True, eq=False)
class ComplexConditional:
    """Complex conditional probability tensor.

    Two layouts: ``(d_m, d_a, d_b)`` for p(m|a,b) with sum over m equal to 1
    for every (a, b), and ``(d_a,)`` for the pre/post-selected form p(a|psi,m)
    with sum over a equal to 1.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.ndim not in (1, 3):
            raise ValueError("conditional must be rank 1 or rank 3")
        sums = vals.sum(axis=0)
        if float(np.abs(sums - 1.0).max()) > DEFAULT_TOLERANCES.identity_check:
            raise ValueError("conditional does not sum to 1 along the outcome axis")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def dims(self) -> tuple:
        return self.values.shape


@dataclass(frozen=True, eq=False)
class WeakValueRecord:
    """Weak value <m|A|psi>/<m|psi> together with its conditioning data."""

    value: complex
    overlap: complex
    pre_state: StateVector
    post_state: StateVector
    observable: Observable


def weak_value(observable: Observable, psi: StateVector, post: StateVector) -> WeakValueRecord:
    """<m|A|psi> / <m|psi> for pre-selection psi and post-selection m."""
    if observable.dim != psi.dim or psi.dim != post.dim:
        raise DimensionMismatch("observable, pre- and post-selection dims must agree")
    overlap = braket(post, psi)
    if abs(overlap) <= DEFAULT_TOLERANCES.overlap_cutoff:
        raise OrthogonalPostselection(
            f"|<m|psi>| = {abs(overlap):.3e}; weak value undefined")
    numerator = complex(np.vdot(post.amplitudes, observable.matrix @ psi.amplitudes))
    return WeakValueRecord(numerator / overlap, overlap, psi, post, observable)


def conditional_pre_post(a_basis: OrthonormalBasis, psi: StateVector,
                         post: StateVector) -> ComplexConditional:
    """p(a|psi,m) = <m|a><a|psi> / <m|psi>, the weak value of each projector."""
    if a_basis.dim != psi.dim or psi.dim != post.dim:
        raise DimensionMismatch("basis and state dims must agree")
    overlap = braket(post, psi)
    if abs(overlap) <= DEFAULT_TOLERANCES.overlap_cutoff:
        raise OrthogonalPostselection(
            f"|<m|psi>| = {abs(overlap):.3e}; conditional undefined")
    v = a_basis.matrix
    post_in_a = dagger(v) @ post.amplitudes       # <a|m>
    psi_in_a = dagger(v) @ psi.amplitudes         # <a|psi>
    return ComplexConditional(post_in_a.conj() * psi_in_a / overlap)


def kd_joint(a_basis: OrthonormalBasis, b_basis: OrthonormalBasis,
             psi: StateVector, labels: tuple = ("a", "b")) -> ComplexJointDistribution:
    """Kirkwood-Dirac joint quasiprobability rho[a, b] = <b|a><a|psi><psi|b>."""
    if a_basis.dim != b_basis.dim or a_basis.dim != psi.dim:
        raise DimensionMismatch("bases and state dims must agree")
    cross = dagger(b_basis.matrix) @ a_basis.matrix          # <b|a>
    amps_a = dagger(a_basis.matrix) @ psi.amplitudes         # <a|psi>
    amps_b = dagger(b_basis.matrix) @ psi.amplitudes         # <b|psi>
    values = cross.T * amps_a[:, None] * amps_b.conj()[None, :]
    return ComplexJointDistribution(values, labels=labels)


def second_moment_identity(observable: Observable, psi: StateVector,
                           m_basis: OrthonormalBasis) -> tuple[float, float]:
    """Second moment of A versus its weak-value fluctuation decomposition.

    lhs = <psi|A^2|psi>. rhs accumulates |weak value|^2 * |<m|psi>|^2 over the
    final basis; outcomes with vanishing overlap contribute their finite limit
    |<m|A|psi>|^2 directly, removing the 0/0 ambiguity.
    """
    if observable.dim != psi.dim or psi.dim != m_basis.dim:
        raise DimensionMismatch("observable, state and basis dims must agree")
    image = observable.matrix @ psi.amplitudes
    lhs = float(np.vdot(image, image).real)
    overlaps = dagger(m_basis.matrix) @ psi.amplitudes       # <m|psi>
    cross = dagger(m_basis.matrix) @ image                   # <m|A|psi>
    rhs = 0.0
    for amp, num in zip(overlaps, cross):
        if abs(amp) > DEFAULT_TOLERANCES.overlap_cutoff:
            wv = num / amp
            rhs += abs(wv) ** 2 * abs(amp) ** 2
        else:
            rhs += abs(num) ** 2
    return lhs, rhs


def commutator_imag_identity(a: Observable, b: Observable,
                             psi: StateVector) -> tuple[float, float]:
    """Expectation of (i/2)[A,B] versus the imaginary correlation of the KD joint.

    rhs = sum_{a,b} A_a B_b Im rho(a,b|psi).
    """
    require_nondegenerate(a)
    require_nondegenerate(b)
    if a.dim != psi.dim:
        raise DimensionMismatch("observable and state dims must agree")
    comm = commutator(a, b)
    raw = 0.5j * complex(np.vdot(psi.amplitudes, comm @ psi.amplitudes))
    if abs(raw.imag) > DEFAULT_TOLERANCES.imag_residue:
        raise ValueError(f"commutator expectation has imaginary residue {raw.imag:.3e}")
    rho = kd_joint(a.eigenbasis, b.eigenbasis, psi)
    rhs = float(np.einsum("a,b,ab->", a.eigenvalues, b.eigenvalues, rho.values.imag))
    return raw.real, rhs


def uncertainty_bound_check(a: Observable, b: Observable,
                            psi: StateVector) -> tuple[float, float, float]:
    """Uncertainty product against the commutator bound |<[A,B]>|/2."""
    if a.dim != b.dim or a.dim != psi.dim:
        raise DimensionMismatch("observables and state dims must agree")
    delta_a = float(np.sqrt(variance(a, psi)))
    delta_b = float(np.sqrt(variance(b, psi)))
    comm_mean = complex(np.vdot(psi.amplitudes, commutator(a, b) @ psi.amplitudes))
    return delta_a, delta_b, 0.5 * abs(comm_mean)


def kd_three_way(a_basis: OrthonormalBasis, b_basis: OrthonormalBasis,
                 m_basis: OrthonormalBasis) -> np.ndarray:
    """State-free three-basis tensor T[a,b,m] = <b|a><a|m><m|b>.

    Relabeling which basis plays the conditioning state permutes the same
    complex product, so T equals rho(a,b|m), rho(m,a|b) and rho(b,m|a); see
    :func:`cyclic_orderings` for the explicit three-way comparison.
    """
    if not (a_basis.dim == b_basis.dim == m_basis.dim):
        raise DimensionMismatch("all three bases must share one dimension")
    g_ba = dagger(b_basis.matrix) @ a_basis.matrix
    g_am = dagger(a_basis.matrix) @ m_basis.matrix
    g_mb = dagger(m_basis.matrix) @ b_basis.matrix
    return np.einsum("ba,am,mb->abm", g_ba, g_am, g_mb)


def cyclic_orderings(a_basis: OrthonormalBasis, b_basis: OrthonormalBasis,
                     m_basis: OrthonormalBasis) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three-way tensor computed via its three conditioning orderings.

    Each ordering is evaluated as a stack of state-conditioned KD joints and
    aligned to [a, b, m] index order; agreement is exact up to float noise.
    """
    d = a_basis.dim
    rho_ab_m = np.stack([kd_joint(a_basis, b_basis, m_basis.state(m)).values
                         for m in range(d)], axis=2)
    rho_ma_b = np.stack([kd_joint(m_basis, a_basis, b_basis.state(b)).values
                         for b in range(d)], axis=2)
    rho_bm_a = np.stack([kd_joint(b_basis, m_basis, a_basis.state(a)).values
                         for a in range(d)], axis=2)
    return (rho_ab_m,
            np.transpose(rho_ma_b, (1, 2, 0)),   # [m,a,b] -> [a,b,m]
            np.transpose(rho_bm_a, (2, 0, 1)))   # [b,m,a] -> [a,b,m]


def universal_conditional(m_basis: OrthonormalBasis, a_basis: OrthonormalBasis,
                          b_basis: OrthonormalBasis) -> ComplexConditional:
    """State-independent conditional p(m|a,b) = <b|m><m|a> / <b|a>.

    Defined only when every pair of conditioning outcomes has non-zero
    overlap; otherwise :class:`OrthogonalBasisPair` reports the first
    offending (a, b) pair.
    """
    if not (m_basis.dim == a_basis.dim == b_basis.dim):
        raise DimensionMismatch("all three bases must share one dimension")
    g_ba = dagger(b_basis.matrix) @ a_basis.matrix
    mods = np.abs(g_ba)
    if float(mods.min()) <= DEFAULT_TOLERANCES.overlap_cutoff:
        b_idx, a_idx = np.unravel_index(int(np.argmin(mods)), mods.shape)
        raise OrthogonalBasisPair(
            f"<b|a> vanishes for (a={a_idx}, b={b_idx}); conditional undefined")
    g_bm = dagger(b_basis.matrix) @ m_basis.matrix
    g_ma = dagger(m_basis.matrix) @ a_basis.matrix
    values = np.einsum("bm,ma->mab", g_bm, g_ma) / g_ba.T[None, :, :]
    return ComplexConditional(values)


def predict_born(universal: ComplexConditional,
                 rho: ComplexJointDistribution) -> np.ndarray:
    """Outcome probabilities p(m) = sum_{a,b} p(m|a,b) rho(a,b|psi).

    The result must land on a genuine probability vector (real, in [0, 1],
    summing to 1); anything else means the inputs were inconsistent.
    """
    if universal.values.ndim != 3:
        raise DimensionMismatch("need the rank-3 conditional p(m|a,b)")
    if universal.values.shape[1:] != rho.values.shape:
        raise DimensionMismatch(
            f"conditional (a,b) block {universal.values.shape[1:]} does not match "
            f"joint distribution shape {rho.values.shape}")
    raw = np.einsum("mab,ab->m", universal.values, rho.values)
    tol = DEFAULT_TOLERANCES.identity_check
    if float(np.abs(raw.imag).max()) > tol:
        raise ValueError("predicted probabilities are not real")
    probs = raw.real
    if float(probs.min()) < -tol or float(probs.max()) > 1.0 + tol:
        raise ValueError("predicted probabilities leave [0, 1]")
    if abs(float(probs.sum()) - 1.0) > tol:
        raise ValueError("predicted probabilities do not sum to 1")
    return probs


def reconstruct_operator(m_values, universal: ComplexConditional,
                         a_basis: OrthonormalBasis,
                         b_basis: OrthonormalBasis) -> np.ndarray:
    """Rebuild sum_m M_m |m><m| from eigenvalues and weak-value statistics.

    Returns sum_{a,b,m} M_m p(m|a,b) |b><b|a><a|.
    """
    vals = np.asarray(m_values, dtype=float).reshape(-1)
    if universal.values.ndim != 3 or universal.values.shape[0] != vals.size:
        raise DimensionMismatch("one eigenvalue per conditioned outcome required")
    if universal.values.shape[1:] != (a_basis.dim, b_basis.dim):
        raise DimensionMismatch("conditional block does not match the bases")
    g_ba = dagger(b_basis.matrix) @ a_basis.matrix
    return np.einsum("m,mab,ba,ib,ja->ij", vals, universal.values, g_ba,
                     b_basis.matrix, a_basis.matrix.conj())
