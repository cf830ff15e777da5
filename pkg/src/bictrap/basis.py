"""Fixed-excitation-number sector bases.

A basis configuration is ``(emitter_occs, photons)`` where ``emitter_occs`` is a
tuple of per-emitter occupation numbers and ``photons`` is a sorted tuple of
site indices (a multiset, so bosonic exchange symmetry lives in the basis, not
in the state).  Configurations are ordered lexicographically, which makes runs
reproducible bit for bit.
"""

from __future__ import annotations

import hashlib
import itertools
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConsistencyError, ResourceError
from .model import EmitterKind, ModelSpec

Config = tuple[tuple[int, ...], tuple[int, ...]]

MAX_EXCITATIONS = 3


@dataclass(frozen=True)
class SectorBasis:
    model: ModelSpec
    n_exc: int
    configs: tuple[Config, ...]
    index_of: dict[Config, int] = field(repr=False, compare=False)
    caps: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.configs)

    def digest(self) -> str:
        """SHA-256 of the ordered configuration list (manifest fingerprint)."""
        h = hashlib.sha256()
        h.update(f"n_exc={self.n_exc};dim={self.dim};".encode())
        for occs, photons in self.configs:
            h.update(bytes(occs) + b"|" + repr(photons).encode())
        return h.hexdigest()

    # Vectorized views, built lazily and cached on the instance.  occ_totals is
    # the per-config emitter excitation count; photon_sites is a (dim, n_exc)
    # int array padded with 0 (sites are 1-based, so 0 means "no photon").
    def _arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        cached = getattr(self, "_array_cache", None)
        if cached is None:
            n_em = len(self.model.emitters)
            occs = np.zeros((self.dim, n_em), dtype=np.int8)
            sites = np.zeros((self.dim, max(self.n_exc, 1)), dtype=np.int32)
            for i, (eo, ph) in enumerate(self.configs):
                occs[i, :] = eo
                if ph:
                    sites[i, : len(ph)] = ph
            cached = (occs, occs.sum(axis=1), sites)
            object.__setattr__(self, "_array_cache", cached)
        return cached

    @property
    def emitter_occs_array(self) -> np.ndarray:
        return self._arrays()[0]

    @property
    def occ_totals(self) -> np.ndarray:
        return self._arrays()[1]

    @property
    def photon_sites_array(self) -> np.ndarray:
        return self._arrays()[2]


def emitter_caps(model: ModelSpec, n_exc: int) -> tuple[int, ...]:
    """Per-emitter occupancy caps in the n_exc sector."""
    caps = []
    for e in model.emitters:
        if e.kind is EmitterKind.TWO_LEVEL:
            caps.append(min(1, n_exc))
        else:
            cap = n_exc if e.max_occ is None else min(e.max_occ, n_exc)
            if e.max_occ is not None and e.max_occ < n_exc:
                warnings.warn(
                    f"bosonic emitter at site {e.site} truncated at max_occ={e.max_occ} "
                    f"inside the {n_exc}-excitation sector",
                    stacklevel=3,
                )
            caps.append(cap)
    return tuple(caps)


@lru_cache(maxsize=16)
def enumerate_basis(model: ModelSpec, n_exc: int) -> SectorBasis:
    """Enumerate the n_exc sector of a model, n_exc in [0, 3]."""
    if not 0 <= n_exc <= MAX_EXCITATIONS:
        raise ResourceError(
            f"n_exc = {n_exc} unsupported; sectors up to N = {MAX_EXCITATIONS} only"
        )
    caps = emitter_caps(model, n_exc)
    sites = range(1, model.n_sites + 1)
    configs: list[Config] = []
    for occs in itertools.product(*(range(c + 1) for c in caps)):
        n_ph = n_exc - sum(occs)
        if n_ph < 0:
            continue
        for photons in itertools.combinations_with_replacement(sites, n_ph):
            configs.append((occs, photons))
    configs.sort()
    index_of = {c: i for i, c in enumerate(configs)}
    return SectorBasis(
        model=model, n_exc=n_exc, configs=tuple(configs), index_of=index_of, caps=caps
    )


def symmetrized_amplitude_view(amps: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Two-photon wavefunction chi(x, y) of a 2-excitation state.

    Multiset coefficients map to the symmetric grid as chi(x, y) = c_{xy}/sqrt(2)
    for x != y and chi(x, x) = c_{xx}, so that the sum of |chi|^2 over ordered
    pairs equals the two-photon-sector probability.
    """
    if basis.n_exc != 2:
        raise ConsistencyError(f"two-photon view needs the N=2 sector, got N={basis.n_exc}")
    s = basis.model.n_sites
    chi = np.zeros((s, s), dtype=np.complex128)
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for i, (occs, photons) in enumerate(basis.configs):
        if any(occs):
            continue
        x, y = photons
        c = amps[i]
        if x == y:
            chi[x - 1, x - 1] = c
        else:
            chi[x - 1, y - 1] = c * inv_sqrt2
            chi[y - 1, x - 1] = c * inv_sqrt2
    return chi


def amplitudes_from_chi(chi: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Inverse of symmetrized_amplitude_view; emitter-excited amplitudes zero.

    Asymmetric input grids are symmetrized first.
    """
    if basis.n_exc != 2:
        raise ConsistencyError(f"two-photon grid needs the N=2 sector, got N={basis.n_exc}")
    s = basis.model.n_sites
    if chi.shape != (s, s):
        raise ConsistencyError(f"grid shape {chi.shape} does not match n_sites={s}")
    sym = 0.5 * (chi + chi.T)
    amps = np.zeros(basis.dim, dtype=np.complex128)
    sqrt2 = np.sqrt(2.0)
    for i, (occs, photons) in enumerate(basis.configs):
        if any(occs):
            continue
        x, y = photons
        if x == y:
            amps[i] = sym[x - 1, x - 1]
        else:
            amps[i] = sqrt2 * sym[x - 1, y - 1]
    return amps
