"""Exact lattice bound states in the continuum and their closed-form properties.

At the band centre (k0 = pi/2) and even separation d, the single-excitation
eigenvalue problem at energy omega0 is solved exactly by a sinusoid confined to
the feedback region with a node at every emitter site:

* mirror + one emitter at site d:  phi(x) ~ sin(k0 x) on 1..d-1, zero elsewhere,
  and the hopping balance at the emitter site fixes g*eps = J*phi(d-1).
  Normalization gives |eps_b|^2 = 1 / (1 + d g^2 / (2 J^2)) = 1 / (1 + Gamma*tau/2).

* two emitters separated by d:  phi(x) ~ sin(k0 (x - x1)) between them, with
  emitter amplitudes eps_2 = (-1)^(m+1) eps_1 (m = d/2): the symmetric
  combination for odd m, antisymmetric for even m, and
  |eps_b|^2 = 1 / (1 + Gamma*tau/4).

The residual of the constructed state is zero to rounding, far below the 1e-10
contract.  The overall phase is canonicalized so the (first) emitter amplitude
is real positive, removing the sign freedom of the continuum expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import enumerate_basis
from .errors import ConsistencyError, NoBicError
from .model import Boundary, ModelSpec
from .states import StateVector


@dataclass(frozen=True)
class BicState:
    """Normalized dressed bound state in the N = 1 sector."""

    emitter_amps: tuple[complex, ...]
    photon_sites: tuple[int, ...]       # sites carrying the confined photon
    photon_amps: tuple[complex, ...]
    energy: float
    geometry: str                        # "single_qubit" | "two_qubit"
    sign: int | None = None              # +1 symmetric / -1 antisymmetric (two-qubit)

    @property
    def eps_sq(self) -> float:
        """Total emitter weight |eps_b|^2."""
        return float(sum(abs(a) ** 2 for a in self.emitter_amps))

    def to_state(self, model: ModelSpec) -> StateVector:
        basis = enumerate_basis(model, 1)
        amps = np.zeros(basis.dim, dtype=np.complex128)
        n_em = len(model.emitters)
        for i, a in enumerate(self.emitter_amps):
            occs = tuple(1 if k == i else 0 for k in range(n_em))
            amps[basis.index_of[(occs, ())]] = a
        ground = (0,) * n_em
        for x, a in zip(self.photon_sites, self.photon_amps):
            amps[basis.index_of[(ground, (x,))]] = a
        return StateVector(basis, amps)


def _require_even(d: int) -> int:
    if d % 2 != 0:
        raise NoBicError(
            f"no bound state in the continuum: separation d = {d} is odd "
            f"(resonance requires k0*a = m*pi, i.e. even d at k0 = pi/2)"
        )
    return d // 2


def single_qubit_bic(model: ModelSpec) -> BicState:
    """BIC of the mirror geometry; requires semi-infinite boundary and even d."""
    if model.boundary is not Boundary.SEMI_INFINITE:
        raise NoBicError("single-qubit BIC requires the semi-infinite (mirror) geometry")
    em = model.emitters[0]
    d = em.site
    m = _require_even(d)
    j, g = model.j_hop, em.g
    k0 = math.pi / 2.0

    sites = tuple(range(1, d))
    # canonical sign: multiply the sinusoid by (-1)^(m+1) so eps = J/g > 0
    parity = -1.0 if m % 2 == 0 else 1.0
    phot = np.array([parity * math.sin(k0 * x) for x in sites])
    eps = j / g
    norm = math.sqrt(eps**2 + float(np.sum(phot**2)))
    return BicState(
        emitter_amps=(eps / norm,),
        photon_sites=sites,
        photon_amps=tuple(phot / norm),
        energy=em.omega0,
        geometry="single_qubit",
    )


def two_qubit_bic(model: ModelSpec) -> BicState:
    """BIC between two emitters in an infinite chain; even separation required."""
    if model.boundary is not Boundary.INFINITE or len(model.emitters) != 2:
        raise NoBicError("two-qubit BIC requires two emitters in the infinite geometry")
    e1, e2 = model.emitters
    if e1.g != e2.g:
        raise ConsistencyError("two-qubit BIC requires identical couplings")
    d = e2.site - e1.site
    m = _require_even(d)
    j, g = model.j_hop, e1.g
    k0 = math.pi / 2.0
    sign = 1 if m % 2 == 1 else -1  # sigma_+ for odd m, sigma_- for even m

    sites = tuple(range(e1.site + 1, e2.site))
    phot = np.array([math.sin(k0 * (x - e1.site)) for x in sites])
    eps1 = j / g
    eps2 = sign * eps1
    norm = math.sqrt(eps1**2 + eps2**2 + float(np.sum(phot**2)))
    return BicState(
        emitter_amps=(eps1 / norm, eps2 / norm),
        photon_sites=sites,
        photon_amps=tuple(phot / norm),
        energy=e1.omega0,
        geometry="two_qubit",
        sign=sign,
    )


def bic_for_model(model: ModelSpec) -> BicState:
    if model.boundary is Boundary.SEMI_INFINITE:
        return single_qubit_bic(model)
    return two_qubit_bic(model)


def bic_decay_rate(gamma_a: float, bic: BicState) -> float:
    """Loss-induced BIC decay rate gamma_a * |eps_b|^2."""
    if gamma_a < 0:
        raise ConsistencyError(f"gamma_a must be >= 0, got {gamma_a}")
    return gamma_a * bic.eps_sq


def eps_sq_closed_form(gamma_tau: float, geometry: str) -> float:
    """|eps_b|^2 from the delay: 1/(1 + Gamma*tau/2) or 1/(1 + Gamma*tau/4)."""
    if geometry == "single_qubit":
        return 1.0 / (1.0 + 0.5 * gamma_tau)
    if geometry == "two_qubit":
        return 1.0 / (1.0 + 0.25 * gamma_tau)
    raise ConsistencyError(f"unknown geometry {geometry!r}")
