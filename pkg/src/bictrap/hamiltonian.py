"""Sector Hamiltonians as sparse matrices.

The discretized Hamiltonian is

    H = omega_c * sum_n c_n^dag c_n  -  J * sum_n (c_n^dag c_{n-1} + h.c.)
        + sum_i [ omega0_i * n_i + (u_i/2) n_i (n_i - 1) - i (gamma_i/2) n_i ]
        + sum_i g_i (c_{s_i}^dag sigma_i + c_{s_i} sigma_i^dag)

restricted to one excitation-number sector.  Matrix elements carry the bosonic
sqrt(n) enhancement factors for multiply occupied cavity sites and for bosonic
emitters; hard-wall boundaries are simply the absence of hopping past the ends.
Hermiticity for gamma_i = 0 is exact: transposed entries are generated as the
same two square roots multiplied together.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .basis import SectorBasis, enumerate_basis
from .errors import ConsistencyError
from .model import EmitterKind, ModelSpec


@dataclass(frozen=True)
class SparseHamiltonian:
    matrix: sp.csr_matrix
    basis: SectorBasis
    hermitian: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def gershgorin_interval(self) -> tuple[float, float]:
        """Safe bounds on the real spectrum (exact spectrum inside for Hermitian H)."""
        lo, hi, _ = _gershgorin(self.matrix)
        return lo, hi

    def spectral_radius_bound(self) -> float:
        return _gershgorin(self.matrix)[2]

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def _gershgorin(m: sp.csr_matrix) -> tuple[float, float, float]:
    diag = m.diagonal()
    abs_rows = np.asarray(np.abs(m).sum(axis=1)).ravel()
    radii = abs_rows - np.abs(diag)
    lo = float(np.min(diag.real - radii))
    hi = float(np.max(diag.real + radii))
    rho = float(np.max(np.abs(diag) + radii))
    return lo, hi, rho


def _remove_site(photons: tuple[int, ...], site: int) -> tuple[int, ...]:
    i = bisect.bisect_left(photons, site)
    return photons[:i] + photons[i + 1 :]


def _add_site(photons: tuple[int, ...], site: int) -> tuple[int, ...]:
    i = bisect.bisect_left(photons, site)
    return photons[:i] + (site,) + photons[i:]


def build_sector_hamiltonian(
    model: ModelSpec, n_exc: int, basis: SectorBasis | None = None
) -> SparseHamiltonian:
    """Assemble the sparse Hamiltonian of one excitation sector.

    Cached on (model, n_exc) because parameter sweeps rebuild identical
    operators; the returned object is immutable and shareable.
    """
    if basis is not None and (basis.model != model or basis.n_exc != n_exc):
        raise ConsistencyError("basis does not enumerate the requested sector of this model")
    return _build_cached(model, n_exc)


@lru_cache(maxsize=3)
def _build_cached(model: ModelSpec, n_exc: int) -> SparseHamiltonian:
    basis = enumerate_basis(model, n_exc)
    dim = basis.dim
    index_of = basis.index_of
    configs = basis.configs
    s_max = model.n_sites
    j_hop = model.j_hop
    omega_c = model.omega_c
    emitters = model.emitters
    caps = basis.caps
    sqrt = math.sqrt

    rows: list[int] = []
    cols: list[int] = []
    vals: list[complex] = []
    diag = np.zeros(dim, dtype=np.complex128)

    any_loss = any(e.gamma_loss != 0.0 for e in emitters)

    for col, (occs, photons) in enumerate(configs):
        dval = omega_c * len(photons)
        for k, em in enumerate(emitters):
            n = occs[k]
            if n:
                dval += em.omega0 * n + 0.5 * em.u * n * (n - 1)
                if any_loss and em.gamma_loss:
                    diag[col] += -0.5j * em.gamma_loss * n
        diag[col] += dval

        # photon hopping -J, one directed move per (source config, bond direction)
        prev = 0
        for p, x in enumerate(photons):
            if x == prev:
                continue  # only the first of a repeated site; multiplicity handled below
            prev = x
            m_x = photons.count(x)
            removed = _remove_site(photons, x)
            for y in (x - 1, x + 1):
                if not 1 <= y <= s_max:
                    continue
                m_y = removed.count(y)
                target = (occs, _add_site(removed, y))
                rows.append(index_of[target])
                cols.append(col)
                vals.append(-j_hop * sqrt(m_x) * sqrt(m_y + 1))

        # emitter-field exchange g (c^dag sigma + c sigma^dag)
        for k, em in enumerate(emitters):
            n = occs[k]
            site = em.site
            if n >= 1:  # c^dag sigma : de-excite emitter, create photon at its site
                m_s = photons.count(site)
                new_occs = occs[:k] + (n - 1,) + occs[k + 1 :]
                target = (new_occs, _add_site(photons, site))
                rows.append(index_of[target])
                cols.append(col)
                vals.append(em.g * sqrt(n) * sqrt(m_s + 1))
            if n < caps[k]:  # c sigma^dag : absorb photon at the emitter site
                m_s = photons.count(site)
                if m_s:
                    new_occs = occs[:k] + (n + 1,) + occs[k + 1 :]
                    target = (new_occs, _remove_site(photons, site))
                    rows.append(index_of[target])
                    cols.append(col)
                    vals.append(em.g * sqrt(n + 1) * sqrt(m_s))

    mat = sp.coo_matrix(
        (np.asarray(vals, dtype=np.complex128), (rows, cols)), shape=(dim, dim)
    ).tocsr()
    mat += sp.diags(diag, format="csr")
    return SparseHamiltonian(matrix=mat, basis=basis, hermitian=model.hermitian)
