"""State vectors and initial-state factories.

Wavepackets follow the paper's conventions: an incoming packet moves toward the
emitter(s) with carrier at the band centre, and its wavefront reaches the first
emitter at t = 0.  In the semi-infinite (mirror) geometry incoming means
left-moving, phase exp(-i k0 (x - front)); in the infinite two-emitter geometry
packets are injected from the left, phase exp(+i k0 (x - front)).
"""

from __future__ import annotations

import bisect
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .basis import (
    SectorBasis,
    amplitudes_from_chi,
    enumerate_basis,
    symmetrized_amplitude_view,
)
from .errors import ConsistencyError, GeometryError, ValidityError
from .model import Boundary, ModelSpec

CLIP_TOLERANCE = 1e-6  # max packet weight lost to lattice edges


@dataclass
class StateVector:
    basis: SectorBasis
    amps: np.ndarray

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (self.basis.dim,):
            raise ConsistencyError(
                f"amplitude vector length {self.amps.shape} != basis dim {self.basis.dim}"
            )

    @property
    def n_exc(self) -> int:
        return self.basis.n_exc

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "StateVector":
        return StateVector(self.basis, self.amps.copy())

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValidityError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amps / n)

    def overlap(self, other: "StateVector") -> complex:
        if other.basis is not self.basis and other.basis != self.basis:
            raise ConsistencyError("overlap between states on different bases")
        return complex(np.vdot(self.amps, other.amps))

    def two_photon_view(self) -> np.ndarray:
        return symmetrized_amplitude_view(self.amps, self.basis)


def vacuum_state(model: ModelSpec) -> StateVector:
    basis = enumerate_basis(model, 0)
    return StateVector(basis, np.ones(1, dtype=np.complex128))


def emitter_excited_state(model: ModelSpec, which: int = 0) -> StateVector:
    """|e, 0>: emitter ``which`` excited, field in vacuum (N = 1)."""
    basis = enumerate_basis(model, 1)
    amps = np.zeros(basis.dim, dtype=np.complex128)
    occs = tuple(1 if i == which else 0 for i in range(len(model.emitters)))
    amps[basis.index_of[(occs, ())]] = 1.0
    return StateVector(basis, amps)


def emitter_superposition_state(model: ModelSpec, sign: int = +1) -> StateVector:
    """(sigma_1^dag +/- sigma_2^dag)/sqrt(2) |gg, 0> for two-emitter models."""
    if len(model.emitters) != 2:
        raise ConsistencyError("emitter superposition needs a two-emitter model")
    basis = enumerate_basis(model, 1)
    amps = np.zeros(basis.dim, dtype=np.complex128)
    amps[basis.index_of[((1, 0), ())]] = 1.0 / math.sqrt(2.0)
    amps[basis.index_of[((0, 1), ())]] = sign / math.sqrt(2.0)
    return StateVector(basis, amps)


# ---------------------------------------------------------------------------
# wavepacket shapes


@dataclass(frozen=True)
class ExponentialFront:
    """exp(-dk * s - i k * s) with s the distance behind the wavefront.

    ``carrier_shift`` detunes the carrier away from the band centre:
    k = k0 + carrier_shift, e.g. +/- delta/v for oppositely detuned photon pairs.
    """

    dk: float
    front_site: int | None = None  # default: the (first) emitter site
    carrier_shift: float = 0.0

    def __post_init__(self) -> None:
        if self.dk <= 0:
            raise ValidityError(f"exponential decay constant dk must be > 0, got {self.dk}")

    def extent(self, weight: float = CLIP_TOLERANCE) -> int:
        """Sites needed to hold all but ``weight`` of the packet."""
        return int(math.ceil(-math.log(weight) / (2.0 * self.dk))) + 1


@dataclass(frozen=True)
class GaussianPacket:
    """Normalized Gaussian of spatial width dx centred at x0."""

    dx: float
    x0: int

    def __post_init__(self) -> None:
        if self.dx < 2.0:
            raise GeometryError(
                f"Gaussian width dx = {self.dx} below the 2-site discretization floor"
            )

    def extent(self, weight: float = CLIP_TOLERANCE) -> int:
        return int(math.ceil(self.dx * math.sqrt(-2.0 * math.log(weight)))) + 1


@dataclass
class CustomMode:
    """Arbitrary single-photon amplitudes over sites 1..n_sites."""

    amplitudes: np.ndarray


WavepacketShape = ExponentialFront | GaussianPacket | CustomMode


def _incoming_orientation(model: ModelSpec) -> tuple[int, int]:
    """(front_site_default, direction): direction +1 means moving right."""
    first = model.emitters[0].site
    if model.boundary is Boundary.SEMI_INFINITE:
        return first, -1  # packet sits to the right of the emitter, moves left
    return first, +1      # injected from the left of the first emitter, moves right


def mode_amplitudes(shape: WavepacketShape, model: ModelSpec) -> np.ndarray:
    """Single-photon mode function on the lattice, unit norm, incoming carrier k0."""
    s = model.n_sites
    k0 = math.pi / 2.0
    front_default, direction = _incoming_orientation(model)
    x = np.arange(1, s + 1, dtype=float)

    if isinstance(shape, ExponentialFront):
        front = shape.front_site if shape.front_site is not None else front_default
        carrier = k0 + shape.carrier_shift
        # theta(x - a) with weight starting at the first site strictly outside the front
        dist = direction * (front - x)  # > 0 on the support side
        supported = dist > 0
        amps = np.zeros(s, dtype=np.complex128)
        amps[supported] = np.exp(
            -shape.dk * dist[supported] + 1j * direction * carrier * (x[supported] - front)
        )
        lost = math.exp(-2.0 * shape.dk * dist[supported].max()) if supported.any() else 1.0
        if lost > CLIP_TOLERANCE:
            raise GeometryError(
                f"exponential packet clipped by the lattice edge (residual weight {lost:.2e})"
            )
    elif isinstance(shape, GaussianPacket):
        if not 1 <= shape.x0 <= s:
            raise GeometryError(f"Gaussian centre x0 = {shape.x0} outside the lattice")
        amps = np.exp(
            -((x - shape.x0) ** 2) / (2.0 * shape.dx**2)
            + 1j * direction * k0 * (x - shape.x0)
        )
        w = np.abs(amps) ** 2
        edge_weight = (w[0] + w[-1]) * shape.dx  # tail mass estimate past either edge
        if edge_weight / w.sum() > CLIP_TOLERANCE:
            raise GeometryError(
                f"Gaussian packet clipped by the lattice edge (residual weight "
                f"{edge_weight / w.sum():.2e})"
            )
    elif isinstance(shape, CustomMode):
        amps = np.asarray(shape.amplitudes, dtype=np.complex128)
        if amps.shape != (s,):
            raise ConsistencyError(f"custom mode length {amps.shape} != n_sites {s}")
    else:
        raise ValidityError(f"unknown wavepacket shape {shape!r}")

    nrm = np.linalg.norm(amps)
    if nrm == 0.0:
        raise ValidityError("wavepacket has zero weight on the lattice")
    return amps / nrm


def trapped_region_weight(mode: np.ndarray, model: ModelSpec) -> float:
    """Packet weight inside the mirror-emitter (or inter-emitter) region."""
    if model.boundary is Boundary.SEMI_INFINITE:
        lo, hi = 1, model.emitters[0].site - 1
    else:
        lo, hi = model.emitters[0].site + 1, model.emitters[-1].site - 1
    if hi < lo:
        return 0.0
    return float(np.sum(np.abs(mode[lo - 1 : hi]) ** 2))


def apply_mode_creation(state: StateVector, mode: np.ndarray) -> StateVector:
    """Apply b_mode^dag = sum_x mode(x) a_x^dag, mapping sector N to N + 1."""
    model = state.basis.model
    target = enumerate_basis(model, state.n_exc + 1)
    out = np.zeros(target.dim, dtype=np.complex128)
    nonzero = [(x, mode[x - 1]) for x in range(1, model.n_sites + 1) if mode[x - 1] != 0.0]
    index_of = target.index_of
    for (occs, photons), amp in zip(state.basis.configs, state.amps):
        if amp == 0.0:
            continue
        for x, m in nonzero:
            mult = photons.count(x)
            i = bisect.bisect_left(photons, x)
            new = photons[:i] + (x,) + photons[i:]
            out[index_of[(occs, new)]] += m * amp * math.sqrt(mult + 1)
    return StateVector(target, out)


def single_photon(shape: WavepacketShape, model: ModelSpec) -> StateVector:
    """Unit-norm single-photon state (N = 1), emitter(s) in the ground state."""
    mode = mode_amplitudes(shape, model)
    if isinstance(shape, ExponentialFront):
        if trapped_region_weight(mode, model) > 1e-8:
            raise GeometryError("packet support overlaps the trapped region at t = 0")
    elif isinstance(shape, GaussianPacket):
        front, _ = _incoming_orientation(model)
        if abs(shape.x0 - front) < 3.0 * shape.dx:
            raise GeometryError(
                f"Gaussian centre must stay at least 3*dx from the emitter "
                f"(|{shape.x0} - {front}| < {3.0 * shape.dx:.1f})"
            )
    return apply_mode_creation(vacuum_state(model), mode)


def two_photon_product(
    shape1: WavepacketShape, shape2: WavepacketShape, model: ModelSpec
) -> StateVector:
    """Normalized symmetrized product of two single-photon packets (N = 2)."""
    m1 = mode_amplitudes(shape1, model)
    m2 = mode_amplitudes(shape2, model)
    state = apply_mode_creation(apply_mode_creation(vacuum_state(model), m1), m2)
    return state.normalized()


def n_photon_mode_state(mode: np.ndarray, n: int, model: ModelSpec) -> StateVector:
    """(b_mode^dag)^n / sqrt(n!) |vac>, exactly normalized for a unit-norm mode."""
    state = vacuum_state(model)
    for _ in range(n):
        state = apply_mode_creation(state, mode)
    state.amps /= math.sqrt(math.factorial(n))
    return state


@dataclass(frozen=True)
class CoherentSpec:
    alpha: complex
    n_max: int = 3

    def __post_init__(self) -> None:
        if not 0 <= self.n_max <= 3:
            raise ValidityError(f"coherent truncation n_max must be in [0, 3], got {self.n_max}")


@dataclass
class CoherentState:
    """Truncated coherent state as a direct sum of photon-number sectors.

    The Poisson weights are folded into the sector amplitudes (no
    renormalization), so each sector's squared norm is the physical weight
    exp(-|alpha|^2) |alpha|^(2n) / n! and observables summed over sectors match
    coherent-state expectation values up to the reported truncation deficit.
    """

    sectors: dict[int, StateVector]
    deficit: float

    def weights(self) -> dict[int, float]:
        return {n: s.norm() ** 2 for n, s in self.sectors.items()}


def coherent_truncated(
    spec: CoherentSpec, shape: WavepacketShape, model: ModelSpec
) -> CoherentState:
    mode = mode_amplitudes(shape, model)
    a2 = abs(spec.alpha) ** 2
    sectors: dict[int, StateVector] = {}
    total = 0.0
    for n in range(spec.n_max + 1):
        weight_amp = math.exp(-a2 / 2.0) * spec.alpha**n / math.sqrt(math.factorial(n))
        state = n_photon_mode_state(mode, n, model)
        state.amps *= weight_amp
        sectors[n] = state
        total += abs(weight_amp) ** 2
    deficit = 1.0 - total
    if deficit > 0.2:
        warnings.warn(
            f"coherent truncation at n_max={spec.n_max} drops {deficit:.1%} of the weight "
            f"(nbar={a2:.3g})",
            stacklevel=2,
        )
    return CoherentState(sectors=sectors, deficit=deficit)


def time_reverse(state: StateVector, normalize: bool = False) -> StateVector:
    """Complex conjugation in the site basis; momenta flip sign.

    Valid because the lattice Hamiltonian is real-symmetric in this basis when
    all loss rates vanish; a non-Hermitian model has no time-reversed dynamics.
    """
    if not state.basis.model.hermitian:
        raise ValidityError("time reversal is invalid for a lossy (non-Hermitian) model")
    out = StateVector(state.basis, np.conj(state.amps))
    return out.normalized() if normalize else out


def custom_two_photon_state(chi: np.ndarray, model: ModelSpec, normalize: bool = True) -> StateVector:
    """N = 2 state from a symmetrized two-photon grid chi(x, y)."""
    basis = enumerate_basis(model, 2)
    state = StateVector(basis, amplitudes_from_chi(np.asarray(chi, dtype=np.complex128), basis))
    return state.normalized() if normalize else state
