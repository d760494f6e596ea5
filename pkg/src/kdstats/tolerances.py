"""Single knob for every numerical tolerance used by the toolkit.

Construction invariants (norms, hermiticity, unitarity) and identity checks
read their thresholds from one frozen record so that property tests and
scenario configs can tighten or relax them in one place.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    state_norm: float = 1e-12          # | ||psi|| - 1 |
    orthonormal: float = 1e-10         # max |V^dag V - I|
    hermitian: float = 1e-10           # max |H - H^dag|
    unitary: float = 1e-10             # max |U U^dag - I|
    reconstruction: float = 1e-10      # max |H - sum_k lambda_k P_k|
    degeneracy_gap: float = 1e-9       # smallest admissible eigenvalue gap
    imag_residue: float = 1e-10        # imaginary part of nominally real results
    overlap_cutoff: float = 1e-12      # |<m|psi>| or |<b|a>| below this is "zero"
    identity_check: float = 1e-10      # algebraic identities (floating-point noise budget)
    exact_rearrangement: float = 1e-12 # same product evaluated in different orders
    pointer_norm: float = 1e-8         # discrete norm of the initial pointer profile
    truncation_leak: float = 1e-6      # population allowed in oscillator guard levels

    def replace(self, **overrides: float) -> "Tolerances":
        return dataclasses.replace(self, **overrides)


DEFAULT_TOLERANCES = Tolerances()
