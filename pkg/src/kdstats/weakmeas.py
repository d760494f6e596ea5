"""Von Neumann pointer simulation of weak measurements.

The meter is a discretized Gaussian wave packet. Coupling at strength g
displaces the pointer by g per unit eigenvalue of the measured observable,
entangling system and meter; post-selecting the system then leaves a pointer
wave whose position mean encodes the real part of the weak value and whose
momentum mean (read off via the discrete Fourier transform of the profile)
encodes the imaginary part. The momentum proportionality constant is not
hardcoded: it is calibrated by running the same simulation on a reference
case with exactly known, purely imaginary weak value, and only cross-checked
against the Gaussian linear-response value 1/(2 sigma^2) in the tests.

Everything in exact mode is deterministic; Monte Carlo readouts draw from the
exact post-selected distributions with a counter-based Philox generator and
one jumped substream per measurement channel, so results do not depend on
execution order.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, GridTooCoarse, OrthogonalPostselection
from .hilbert import Observable, OrthonormalBasis, StateVector, dagger
from .quasiprob import ComplexJointDistribution
from .tolerances import DEFAULT_TOLERANCES

# Coupling used for the momentum-response calibration runs, relative to the
# pointer spread. Small enough that the quadratic finite-g correction is
# below 1e-9 after the two-point elimination.
_CALIBRATION_COUPLING_FRACTION = 1.0 / 128.0


@dataclass(frozen=True, eq=False)
class PointerModel:
    """Discretized Gaussian meter.

    ``grid`` is uniform and spans at least +-8 spreads around zero;
    ``coupling`` is the displacement per unit eigenvalue.
    """

    grid: np.ndarray
    spread: float
    coupling: float
    grid_points: int

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float).reshape(-1)
        if self.grid_points < 256 or grid.size != self.grid_points:
            raise ValueError("need grid_points >= 256 matching the grid length")
        if self.spread <= 0.0:
            raise ValueError("pointer spread must be positive")
        if self.coupling < 0.0:
            raise ValueError("coupling must be non-negative")
        steps = np.diff(grid)
        if float(steps.min()) <= 0.0 or float(np.abs(steps - steps[0]).max()) > 1e-9 * steps[0]:
            raise ValueError("grid must be uniformly spaced and ascending")
        if grid[0] > -8.0 * self.spread or grid[-1] < 8.0 * self.spread:
            raise ValueError("grid must span at least +-8 spreads around 0")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        norm = float(np.sum(np.abs(self.initial_profile()) ** 2) * self.spacing)
        if abs(norm - 1.0) > DEFAULT_TOLERANCES.pointer_norm:
            raise ValueError(f"discrete norm of the initial profile is {norm!r}")

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def extent(self) -> float:
        return float(self.grid[-1] - self.grid[0])

    def initial_profile(self) -> np.ndarray:
        """Gaussian amplitude with position variance spread^2, centered at 0."""
        s = self.spread
        return (2.0 * np.pi * s * s) ** (-0.25) * np.exp(-self.grid ** 2 / (4.0 * s * s))

    def with_coupling(self, coupling: float) -> "PointerModel":
        return dataclasses.replace(self, coupling=coupling)

    @classmethod
    def gaussian(cls, spread: float = 1.0, coupling: float = 0.1,
                 grid_points: int = 1024, half_width: float = 10.0) -> "PointerModel":
        """Standard meter: ``grid_points`` samples covering +-``half_width`` spreads."""
        w = half_width * spread
        h = 2.0 * w / grid_points
        grid = (np.arange(grid_points) - grid_points / 2) * h
        return cls(grid, spread, coupling, grid_points)


@dataclass(frozen=True)
class PostselectedReadout:
    """Post-selected pointer statistics.

    Exact (non-sampled) computations carry ``sample_count`` 0 and zero
    standard errors; Monte Carlo readouts report the accepted sample count
    and standard errors of the two means.
    """

    postselection_probability: float
    mean_position_shift: float
    mean_momentum_shift: float
    sample_count: int
    standard_errors: tuple

    def __post_init__(self):
        p = self.postselection_probability
        if p < -1e-10 or p > 1.0 + 1e-10:
            raise ValueError(f"postselection probability {p!r} outside [0, 1]")


def _branch_weights(observable: Observable, psi: StateVector,
                    post: StateVector) -> np.ndarray:
    """w_a = <m|a><a|psi> for the eigenbranches of the coupled observable."""
    v = observable.eigenbasis.matrix
    return (dagger(v) @ post.amplitudes).conj() * (dagger(v) @ psi.amplitudes)


def _postselected_wave(observable: Observable, psi: StateVector, post: StateVector,
                       pointer: PointerModel, *, allow_rare: bool) -> np.ndarray:
    if observable.dim != psi.dim or psi.dim != post.dim:
        raise DimensionMismatch("observable, state and post-selection dims must agree")
    overlap_prob = abs(complex(np.vdot(post.amplitudes, psi.amplitudes))) ** 2
    if overlap_prob < DEFAULT_TOLERANCES.overlap_cutoff and not allow_rare:
        raise OrthogonalPostselection(
            f"|<m|psi>|^2 = {overlap_prob:.3e}; pass allow_rare=True to force")
    g = pointer.coupling
    max_shift = g * float(np.abs(observable.eigenvalues).max())
    if max_shift > pointer.extent / 4.0:
        raise GridTooCoarse(
            f"displacement {max_shift:.3g} exceeds a quarter of the grid extent "
            f"{pointer.extent:.3g}")
    s = pointer.spread
    x = pointer.grid
    profiles = (2.0 * np.pi * s * s) ** (-0.25) * np.exp(
        -(x[None, :] - g * observable.eigenvalues[:, None]) ** 2 / (4.0 * s * s))
    return _branch_weights(observable, psi, post) @ profiles


def _wave_statistics(wave: np.ndarray, pointer: PointerModel):
    h = pointer.spacing
    pos_density = np.abs(wave) ** 2 * h
    prob = float(pos_density.sum())
    if prob <= 0.0:
        raise OrthogonalPostselection("post-selected pointer norm vanished")
    mean_x = float(np.sum(pointer.grid * pos_density) / prob)
    spectrum = np.fft.fft(wave)
    k = 2.0 * np.pi * np.fft.fftfreq(pointer.grid_points, d=h)
    mom_density = np.abs(spectrum) ** 2
    mean_k = float(np.sum(k * mom_density) / mom_density.sum())
    return prob, mean_x, mean_k, pos_density, mom_density, k


def couple_and_postselect(observable: Observable, psi: StateVector, post: StateVector,
                          pointer: PointerModel, *,
                          allow_rare: bool = False) -> PostselectedReadout:
    """Exact finite-strength coupling followed by post-selection.

    Entangles the system with the meter (pointer displaced by
    ``coupling * eigenvalue`` per branch), projects the system onto the
    post-selection state, and returns the exact pointer position and momentum
    means together with the post-selection probability.
    """
    wave = _postselected_wave(observable, psi, post, pointer, allow_rare=allow_rare)
    prob, mean_x, mean_k, _, _, _ = _wave_statistics(wave, pointer)
    return PostselectedReadout(min(prob, 1.0 + 1e-12), mean_x, mean_k, 0, (0.0, 0.0))


def _calibration_kappa(pointer: PointerModel) -> float:
    """Momentum response per unit (coupling * Im weak value).

    Reference run: a two-level system prepared in the symmetric superposition
    of the eigenstates of diag(+1, -1) and post-selected on (|0> + i|1>)/sqrt2
    has weak value exactly i. Two runs at small couplings with one quadratic
    elimination give the zero-coupling response of this meter geometry.
    """
    basis = OrthonormalBasis.computational(2)
    ref_obs = Observable.from_spectrum([1.0, -1.0], basis)
    ref_psi = StateVector.from_amplitudes([1.0, 1.0])
    ref_post = StateVector.from_amplitudes([1.0, 1.0j])
    g_cal = pointer.spread * _CALIBRATION_COUPLING_FRACTION

    def response(g: float) -> float:
        readout = couple_and_postselect(ref_obs, ref_psi, ref_post,
                                        pointer.with_coupling(g))
        return readout.mean_momentum_shift / g

    k1 = response(g_cal)
    k2 = response(g_cal / 2.0)
    return (4.0 * k2 - k1) / 3.0


_kappa_cache: dict = {}


def momentum_calibration(pointer: PointerModel) -> float:
    """Cached momentum-response coefficient for this meter geometry."""
    key = (pointer.spread, pointer.grid_points,
           float(pointer.grid[0]), pointer.spacing)
    if key not in _kappa_cache:
        _kappa_cache[key] = _calibration_kappa(pointer)
    return _kappa_cache[key]


def weak_value_readout(observable: Observable, psi: StateVector, post: StateVector,
                       pointer: PointerModel, *, allow_rare: bool = False) -> complex:
    """Finite-strength weak-value estimate Re + i*Im from one exact run."""
    g = pointer.coupling
    if g <= 0.0:
        raise ValueError("weak-value readout needs a positive coupling")
    readout = couple_and_postselect(observable, psi, post, pointer,
                                    allow_rare=allow_rare)
    kappa = momentum_calibration(pointer)
    return complex(readout.mean_position_shift / g,
                   readout.mean_momentum_shift / (g * kappa))


def richardson_extrapolate(values, factor: float = 2.0, power: int = 2) -> complex:
    """One Richardson elimination pass along a geometric ladder.

    ``values[i]`` is the estimate at step ``g0 / factor**i`` (finest last);
    the leading bias term scales as g**power. The exact Gaussian meter has a
    readout bias even in the coupling, so the default eliminates g^2.
    """
    v = np.asarray(values, dtype=complex)
    if v.size < 2:
        raise ValueError("need at least two rungs to extrapolate")
    w = float(factor) ** power
    refined = (w * v[1:] - v[:-1]) / (w - 1.0)
    return complex(refined[-1])


def weak_value_extrapolated(observable: Observable, psi: StateVector, post: StateVector,
                            pointer: PointerModel, *, rungs: int = 5,
                            factor: float = 2.0) -> tuple[complex, list]:
    """Zero-coupling weak value via a geometric coupling ladder.

    Runs the exact simulation at couplings g0/factor**i for i < rungs
    (g0 = ``pointer.coupling``) and extrapolates. Returns the extrapolated
    complex estimate and the per-rung ladder [(g, estimate), ...].
    """
    g0 = pointer.coupling
    if g0 <= 0.0 or rungs < 2:
        raise ValueError("need a positive base coupling and at least two rungs")
    ladder = []
    for i in range(rungs):
        g = g0 / factor ** i
        ladder.append((g, weak_value_readout(observable, psi, post,
                                             pointer.with_coupling(g))))
    estimate = richardson_extrapolate([est for _, est in ladder], factor=factor)
    return estimate, ladder


def _sample_discrete(rng: np.random.Generator, values: np.ndarray,
                     weights: np.ndarray, count: int) -> np.ndarray:
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    return values[np.searchsorted(cdf, rng.random(count), side="right")]


def _monte_carlo_readout(wave: np.ndarray, pointer: PointerModel, samples: int,
                         rng: np.random.Generator) -> PostselectedReadout:
    prob, _, _, pos_density, mom_density, k = _wave_statistics(wave, pointer)
    accepted = int(rng.binomial(samples, min(prob, 1.0)))
    if accepted < 2:
        raise OrthogonalPostselection(
            f"only {accepted} of {samples} trials survived post-selection")
    xs = _sample_discrete(rng, pointer.grid, pos_density, accepted)
    ks = _sample_discrete(rng, k, mom_density, accepted)
    se_x = float(np.std(xs, ddof=1) / np.sqrt(accepted))
    se_k = float(np.std(ks, ddof=1) / np.sqrt(accepted))
    return PostselectedReadout(accepted / samples, float(xs.mean()), float(ks.mean()),
                               accepted, (se_x, se_k))


def sample_readouts(observable: Observable, psi: StateVector, post: StateVector,
                    pointer: PointerModel, samples: int, seed: int, *,
                    allow_rare: bool = False) -> PostselectedReadout:
    """Monte Carlo pointer readouts drawn from the exact post-selected model.

    Each trial post-selects with the exact probability; accepted trials yield
    one position readout and (in an independent run) one momentum readout.
    Deterministic for a fixed seed (counter-based Philox stream).
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    wave = _postselected_wave(observable, psi, post, pointer, allow_rare=allow_rare)
    rng = np.random.Generator(np.random.Philox(key=seed))
    return _monte_carlo_readout(wave, pointer, samples, rng)


def projector_observable(basis: OrthonormalBasis, index: int) -> Observable:
    """|a><a| for one basis vector, as a (degenerate) observable."""
    eigenvalues = np.zeros(basis.dim)
    eigenvalues[index] = 1.0
    return Observable.from_spectrum(eigenvalues, basis, allow_degenerate=True)


def direct_kd_measurement(a_basis: OrthonormalBasis, b_basis: OrthonormalBasis,
                          psi: StateVector, pointer: PointerModel, *,
                          samples: int = 0, seed: int = 0) -> ComplexJointDistribution:
    """Direct measurement of the KD joint distribution.

    For each outcome a the projector |a><a| is weakly coupled to the meter and
    the second observable is then measured strongly; the joint entry is the
    per-channel weak-value estimate times the observed probability of b.
    ``samples`` 0 runs the exact (non-sampled) protocol; otherwise each
    a-channel draws Monte Carlo readouts from its own jumped Philox substream.
    Estimates converge to :func:`kdstats.quasiprob.kd_joint` as the coupling
    and 1/samples go to zero.
    """
    if a_basis.dim != b_basis.dim or a_basis.dim != psi.dim:
        raise DimensionMismatch("bases and state dims must agree")
    d = a_basis.dim
    kappa = momentum_calibration(pointer)
    g = pointer.coupling
    if g <= 0.0:
        raise ValueError("direct measurement needs a positive coupling")
    values = np.zeros((d, d), dtype=complex)
    errors = []
    base = np.random.Philox(key=seed)
    for a in range(d):
        proj = projector_observable(a_basis, a)
        for b in range(d):
            post = b_basis.state(b)
            try:
                if samples:
                    # One jumped substream per (a, b) channel: results do not
                    # depend on channel execution order.
                    rng = np.random.Generator(base.jumped(a * d + b + 1))
                    wave = _postselected_wave(proj, psi, post, pointer,
                                              allow_rare=True)
                    readout = _monte_carlo_readout(wave, pointer, samples, rng)
                else:
                    readout = couple_and_postselect(proj, psi, post, pointer,
                                                    allow_rare=True)
            except OrthogonalPostselection as exc:
                errors.append(f"channel (a={a}, b={b}): {exc}")
                continue
            estimate = complex(readout.mean_position_shift / g,
                               readout.mean_momentum_shift / (g * kappa))
            values[a, b] = estimate * readout.postselection_probability
    if errors:
        raise OrthogonalPostselection("; ".join(errors))
    return ComplexJointDistribution(values, labels=("a", "b"), strict=False)


def direct_kd_extrapolated(a_basis: OrthonormalBasis, b_basis: OrthonormalBasis,
                           psi: StateVector, pointer: PointerModel, *,
                           rungs: int = 5, factor: float = 2.0) -> np.ndarray:
    """Zero-coupling limit of the exact direct-measurement protocol.

    Runs :func:`direct_kd_measurement` in exact mode on a geometric coupling
    ladder and Richardson-extrapolates entry-wise.
    """
    g0 = pointer.coupling
    stack = np.stack([
        direct_kd_measurement(a_basis, b_basis, psi,
                              pointer.with_coupling(g0 / factor ** i)).values
        for i in range(rungs)])
    w = factor ** 2
    refined = (w * stack[1:] - stack[:-1]) / (w - 1.0)
    return refined[-1]
