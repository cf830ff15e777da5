"""Coupled-cavity-array model construction and continuum/lattice parameter mapping.

The waveguide is a chain of ``n_sites`` identical cavities (frequency ``omega_c``)
with nearest-neighbour hopping ``J`` and hard-wall ends, coupled to one or two
emitters.  Working units are J = 1, lattice spacing = 1, hbar = 1.  The band is
``omega_k = omega_c - 2 J cos k``; at the band centre ``k0 = pi/2`` the group
velocity is ``v = 2J``, the emitter decay rate into the chain is
``Gamma = g^2 / J``, and the mirror/emitter round-trip delay over ``d`` sites is
``tau = d / J``, so ``Gamma * tau = d g^2 / J^2`` is exact on the lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import GeometryError, ValidityError

K0 = math.pi / 2.0


class Boundary(Enum):
    SEMI_INFINITE = "semi_infinite"  # hard wall (mirror) immediately left of site 1
    INFINITE = "infinite"            # hard walls at both far ends, used as distant boundaries


class EmitterKind(Enum):
    TWO_LEVEL = "two_level"
    BOSONIC = "bosonic"


@dataclass(frozen=True)
class EmitterSpec:
    """One emitter coupled to a single cavity site.

    ``u`` is the on-site boson-boson repulsion (bosonic kind only); ``max_occ``
    of None means "cap at the sector excitation number" so no truncation error
    is possible.  ``gamma_loss > 0`` adds the non-Hermitian term
    ``-i gamma_loss/2 * n_emitter``.
    """

    site: int
    g: float
    omega0: float = 0.0
    kind: EmitterKind = EmitterKind.TWO_LEVEL
    u: float = 0.0
    max_occ: int | None = None
    gamma_loss: float = 0.0

    def __post_init__(self) -> None:
        if self.g < 0:
            raise ValidityError(f"emitter coupling g must be >= 0, got {self.g}")
        if self.gamma_loss < 0:
            raise ValidityError(f"gamma_loss must be >= 0, got {self.gamma_loss}")
        if self.kind is EmitterKind.TWO_LEVEL and self.u != 0.0:
            raise ValidityError("u is only meaningful for bosonic emitters")
        if self.max_occ is not None and self.max_occ < 1:
            raise ValidityError(f"max_occ must be >= 1, got {self.max_occ}")


@dataclass(frozen=True)
class ModelSpec:
    """Full lattice + emitter description; immutable and hashable.

    ``allow_detuned`` overrides the band-centre condition omega_c == omega0
    required for the BIC to sit mid-band (out-of-band bound states are then
    energetically forbidden); keep it False unless deliberately detuning.
    """

    n_sites: int
    emitters: tuple[EmitterSpec, ...]
    boundary: Boundary = Boundary.SEMI_INFINITE
    omega_c: float = 0.0
    j_hop: float = 1.0
    allow_detuned: bool = False

    def __post_init__(self) -> None:
        if self.n_sites < 2:
            raise GeometryError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.j_hop <= 0:
            raise ValidityError(f"hopping J must be > 0, got {self.j_hop}")
        if not self.emitters:
            raise ValidityError("at least one emitter is required")
        sites = [e.site for e in self.emitters]
        if len(set(sites)) != len(sites):
            raise GeometryError(f"emitter sites must be distinct, got {sites}")
        for e in self.emitters:
            if not 1 <= e.site <= self.n_sites:
                raise GeometryError(
                    f"emitter site {e.site} outside lattice [1, {self.n_sites}]"
                )
            if not self.allow_detuned and e.omega0 != self.omega_c:
                raise ValidityError(
                    f"band-centre condition omega_c == omega0 violated "
                    f"({self.omega_c} != {e.omega0}); pass allow_detuned=True to override"
                )
        n_em = len(self.emitters)
        if self.boundary is Boundary.SEMI_INFINITE and n_em != 1:
            raise GeometryError(f"semi-infinite geometry requires exactly one emitter, got {n_em}")
        if self.boundary is Boundary.INFINITE and n_em not in (1, 2):
            raise GeometryError(f"infinite geometry requires one or two emitters, got {n_em}")
        if n_em == 2 and self.emitters[0].site >= self.emitters[1].site:
            raise GeometryError("two-emitter models must list emitters in increasing site order")

    @property
    def hermitian(self) -> bool:
        return all(e.gamma_loss == 0.0 for e in self.emitters)

    @property
    def separation(self) -> int:
        """Mirror-emitter distance (semi-infinite) or emitter-emitter separation."""
        if self.boundary is Boundary.SEMI_INFINITE:
            return self.emitters[0].site
        if len(self.emitters) == 2:
            return self.emitters[1].site - self.emitters[0].site
        raise GeometryError("separation undefined for a single emitter in an infinite chain")

    def dispersion(self, k: float) -> float:
        """Band energy omega_c - 2 J cos k for k in (-pi, pi]."""
        if not -math.pi < k <= math.pi:
            raise ValidityError(f"wavevector {k} outside the Brillouin zone (-pi, pi]")
        return self.omega_c - 2.0 * self.j_hop * math.cos(k)


@dataclass(frozen=True)
class ParamMap:
    """Continuum-paper parameters realized by a lattice model.

    gamma = g^2/J, v = 2 J sin k0, tau = d/J, with d the relevant even
    separation and m = d/2 the resonance index (k0 * d = m * pi at k0 = pi/2).
    """

    gamma: float
    tau: float
    v: float
    k0: float
    d: int
    m: int

    @property
    def gamma_tau(self) -> float:
        return self.gamma * self.tau

    @classmethod
    def from_model(cls, model: ModelSpec) -> "ParamMap":
        g = model.emitters[0].g
        j = model.j_hop
        d = model.separation
        return cls(
            gamma=g * g / j,
            tau=d / j,
            v=2.0 * j * math.sin(K0),
            k0=K0,
            d=d,
            m=d // 2,
        )


def snap_even_separation(gamma_tau_target: float, g_sq: float) -> int:
    """Nearest even site separation realizing gamma*tau = d * g^2 (J=1)."""
    ideal = gamma_tau_target / g_sq
    d = 2 * round(ideal / 2.0)
    return max(2, int(d))


def from_paper_params(
    gamma_tau_target: float,
    gamma_over_4j: float,
    geometry: Boundary = Boundary.SEMI_INFINITE,
    n_sites: int = 600,
    kind: EmitterKind = EmitterKind.TWO_LEVEL,
    u: float = 0.0,
    gamma_loss: float = 0.0,
) -> tuple[ModelSpec, ParamMap]:
    """Build a model from the paper's (Gamma*tau, Gamma/4J) shorthand.

    The target delay is snapped to the nearest even separation d (the BIC needs
    k0*a = m*pi, i.e. even d at k0 = pi/2) and the returned ParamMap reports the
    delay actually achieved, never the target.
    """
    if gamma_over_4j <= 0:
        raise ValidityError(f"Gamma/(4J) must be > 0, got {gamma_over_4j}")
    if gamma_over_4j > 0.1:
        raise ValidityError(
            f"Gamma/(4J) = {gamma_over_4j} violates the weak-coupling bound Gamma/(4J) <= 0.1"
        )
    if gamma_tau_target <= 0:
        raise ValidityError(f"Gamma*tau target must be > 0, got {gamma_tau_target}")

    g_sq = 4.0 * gamma_over_4j  # J = 1
    d = snap_even_separation(gamma_tau_target, g_sq)
    g = math.sqrt(g_sq)

    if geometry is Boundary.SEMI_INFINITE:
        if n_sites < d + 10:
            raise GeometryError(
                f"n_sites = {n_sites} leaves no room beyond the emitter at site {d}"
            )
        emitters = (
            EmitterSpec(site=d, g=g, kind=kind, u=u, gamma_loss=gamma_loss),
        )
    else:
        x1 = (n_sites - d) // 2
        if x1 < 11 or x1 + d > n_sites - 10:
            raise GeometryError(
                f"n_sites = {n_sites} too small to centre an emitter pair separated by {d}"
            )
        emitters = (
            EmitterSpec(site=x1, g=g, kind=kind, u=u, gamma_loss=gamma_loss),
            EmitterSpec(site=x1 + d, g=g, kind=kind, u=u, gamma_loss=gamma_loss),
        )
    model = ModelSpec(n_sites=n_sites, emitters=emitters, boundary=geometry)
    return model, ParamMap.from_model(model)
