"""Observables: populations, trapping probabilities, field profiles, projections.

Definitions follow the continuum ones with the lattice's single local photon
mode per site (the right/left polarization sums collapse to single sums):

* P_e: total probability that at least one emitter excitation is present,
  including the doubly-excited |ee> term for two qubits.
* P_ph: probability that the emitters are de-excited and exactly one photon
  sits inside the trapped region (mirror-emitter or inter-emitter interval).
  A photon at an emitter site counts as outside (the BIC has a node there).
* P_tr = P_e + P_ph, plus the double-occupancy probability P_bb for a bosonic
  emitter.
* The BIC projection sums |<outgoing photon at x (x) BIC | psi>|^2 over sites x
  outside the trapped region, the direct estimator of the generation
  probability.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import SectorBasis
from .bic import BicState, eps_sq_closed_form
from .errors import ConsistencyError
from .model import Boundary, EmitterKind, ModelSpec
from .states import CoherentState, StateVector


@dataclass(frozen=True)
class RegionSpec:
    """Trapped-region site interval, inclusive on both ends."""

    trapped: tuple[int, int]

    @classmethod
    def from_model(cls, model: ModelSpec) -> "RegionSpec":
        if model.boundary is Boundary.SEMI_INFINITE:
            return cls(trapped=(1, model.emitters[0].site - 1))
        if len(model.emitters) == 2:
            return cls(trapped=(model.emitters[0].site + 1, model.emitters[1].site - 1))
        raise ConsistencyError("no canonical trapped region for one emitter in an infinite chain")

    def site_mask(self, n_sites: int) -> np.ndarray:
        """Boolean lookup over 0..n_sites where index 0 (padding) is False."""
        mask = np.zeros(n_sites + 1, dtype=bool)
        lo, hi = self.trapped
        if hi >= lo:
            mask[lo : hi + 1] = True
        return mask

    def outside_sites(self, n_sites: int) -> np.ndarray:
        mask = ~self.site_mask(n_sites)
        return np.nonzero(mask[1:])[0] + 1


def _region_masks(basis: SectorBasis, region: RegionSpec) -> np.ndarray:
    """Per-config count of photons inside the region (cached on the basis)."""
    cache = getattr(basis, "_region_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(basis, "_region_cache", cache)
    key = region.trapped
    if key not in cache:
        lookup = region.site_mask(basis.model.n_sites)
        cache[key] = lookup[basis.photon_sites_array].sum(axis=1).astype(np.int8)
    return cache[key]


def qubit_population(state: StateVector) -> float:
    """Probability of total emitter occupancy >= 1 (any photon configuration)."""
    w = np.abs(state.amps) ** 2
    return float(w[state.basis.occ_totals >= 1].sum())


def double_occupancy_prob(state: StateVector) -> float:
    """Probability of total emitter occupancy >= 2 (bosonic |bb> population)."""
    w = np.abs(state.amps) ** 2
    return float(w[state.basis.occ_totals >= 2].sum())


def single_excitation_prob(state: StateVector) -> float:
    w = np.abs(state.amps) ** 2
    return float(w[state.basis.occ_totals == 1].sum())


def trapped_photon_prob(state: StateVector, region: RegionSpec) -> float:
    """Probability that the emitters are de-excited and exactly one photon is trapped."""
    if state.basis.n_exc == 0:
        return 0.0
    n_in = _region_masks(state.basis, region)
    mask = (state.basis.occ_totals == 0) & (n_in == 1)
    w = np.abs(state.amps) ** 2
    return float(w[mask].sum())


def trapping_probability(state: StateVector, region: RegionSpec) -> float:
    """P_tr = P_e + P_ph (+ P_bb implicitly: occupancy >= 1 covers it)."""
    return qubit_population(state) + trapped_photon_prob(state, region)


def both_trapped_weight(state: StateVector, region: RegionSpec) -> float:
    """Two-photon weight with every photon inside the region, relative to the
    total two-photon-sector weight (zero for a true single-photon BIC)."""
    if state.basis.n_exc < 2:
        return 0.0
    n_in = _region_masks(state.basis, region)
    occ0 = state.basis.occ_totals == 0
    w = np.abs(state.amps) ** 2
    total = float(w[occ0].sum())
    if total == 0.0:
        return 0.0
    return float(w[occ0 & (n_in == state.basis.n_exc)].sum()) / total


def field_intensity(state: StateVector) -> np.ndarray:
    """Photon number per site, n(x) = <a_x^dag a_x>; sums to the mean photon number."""
    s = state.basis.model.n_sites
    acc = np.zeros(s + 1, dtype=float)
    w = np.abs(state.amps) ** 2
    for col in range(state.basis.photon_sites_array.shape[1]):
        np.add.at(acc, state.basis.photon_sites_array[:, col], w)
    return acc[1:]  # bin 0 collected the padding


def two_photon_density(state: StateVector) -> np.ndarray:
    """|chi(x, y)|^2 on the full lattice grid (symmetric, nonnegative)."""
    chi = state.two_photon_view()
    return np.abs(chi) ** 2


def emitter_photon_amplitudes(state: StateVector, which: int) -> np.ndarray:
    """psi_i(x): amplitude for emitter ``which`` excited and one photon at x (N = 2)."""
    basis = state.basis
    if basis.n_exc != 2:
        raise ConsistencyError("emitter-photon amplitudes are defined in the N=2 sector")
    occs = basis.emitter_occs_array
    mask = (occs[:, which] == 1) & (basis.occ_totals == 1)
    out = np.zeros(basis.model.n_sites, dtype=np.complex128)
    sites = basis.photon_sites_array[mask, 0]
    out[sites - 1] = state.amps[mask]
    return out


def bic_projection(state: StateVector, bic: BicState) -> float:
    """Overlap-squared with the channel {outgoing photon at x} x |BIC>, summed over x."""
    basis = state.basis
    model = basis.model
    if basis.n_exc != 2:
        raise ConsistencyError("BIC projection is defined for the N=2 sector")
    region = RegionSpec.from_model(model)
    lo, hi = region.trapped
    if bic.photon_sites != tuple(range(lo, hi + 1)):
        raise ConsistencyError("BIC does not belong to this model's trapped region")

    chi = state.two_photon_view()
    outside = region.outside_sites(model.n_sites)
    chan = np.zeros(model.n_sites, dtype=np.complex128)
    for i, eps in enumerate(bic.emitter_amps):
        chan += np.conj(eps) * emitter_photon_amplitudes(state, i)
    phot = np.asarray(bic.photon_amps, dtype=np.complex128)
    region_idx = np.asarray(bic.photon_sites, dtype=int) - 1
    chan += math.sqrt(2.0) * chi[:, region_idx] @ np.conj(phot)
    return float(np.sum(np.abs(chan[outside - 1]) ** 2))


def concurrence(state: StateVector) -> float:
    """Wootters concurrence of the reduced two-qubit state.

    N = 2:  C = max(0, 2|C12| - sqrt(|f|^2 P_ph)) with C12 = sum_x psi_1*(x) psi_2(x)
    and f the doubly-excited amplitude.  N = 1 (no two-photon part):
    C = 2 |c_1* c_2| for emitter amplitudes c_i.
    """
    model = state.basis.model
    if len(model.emitters) != 2:
        raise ConsistencyError("concurrence needs a two-emitter model")
    if any(e.kind is not EmitterKind.TWO_LEVEL for e in model.emitters):
        raise ConsistencyError("concurrence is defined for two-level emitters")
    basis = state.basis
    if basis.n_exc == 1:
        c1 = state.amps[basis.index_of[((1, 0), ())]]
        c2 = state.amps[basis.index_of[((0, 1), ())]]
        return float(2.0 * abs(np.conj(c1) * c2))
    if basis.n_exc != 2:
        raise ConsistencyError("concurrence supported for sectors N <= 2")
    psi1 = emitter_photon_amplitudes(state, 0)
    psi2 = emitter_photon_amplitudes(state, 1)
    c12 = complex(np.vdot(psi1, psi2))
    f = state.amps[basis.index_of[((1, 1), ())]]
    p_ph = trapped_photon_prob(state, RegionSpec.from_model(model))
    return float(max(0.0, 2.0 * abs(c12) - math.sqrt(abs(f) ** 2 * p_ph)))


def hopping_current(state: StateVector, site: int) -> float:
    """Rightward photon current through the bond (site, site+1), in photons*J."""
    basis = state.basis
    if not 1 <= site < basis.model.n_sites:
        raise ConsistencyError(f"bond ({site}, {site + 1}) outside the lattice")
    op = _bond_operator(basis, site)
    z = complex(np.vdot(state.amps, op @ state.amps))
    return float(-2.0 * basis.model.j_hop * z.imag)


def _bond_operator(basis: SectorBasis, site: int) -> sp.csr_matrix:
    """a_{site+1}^dag a_site in the sector basis (cached per basis and site)."""
    cache = getattr(basis, "_bond_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(basis, "_bond_cache", cache)
    if site not in cache:
        rows, cols, vals = [], [], []
        y = site + 1
        for col, (occs, photons) in enumerate(basis.configs):
            m_x = photons.count(site)
            if not m_x:
                continue
            m_y = photons.count(y)
            i = bisect.bisect_left(photons, site)
            removed = photons[:i] + photons[i + 1 :]
            k = bisect.bisect_left(removed, y)
            target = (occs, removed[:k] + (y,) + removed[k:])
            rows.append(basis.index_of[target])
            cols.append(col)
            vals.append(math.sqrt(m_x) * math.sqrt(m_y + 1))
        cache[site] = sp.coo_matrix(
            (vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=np.complex128
        ).tocsr()
    return cache[site]


@dataclass(frozen=True)
class IdentityCheck:
    residual: float
    conclusive: bool


def check_trapping_identity(
    p_tr_inf: float, p_e_inf: float, gamma_tau: float, geometry: str
) -> IdentityCheck:
    """Relative residual of P_tr = P_e / |eps_b|^2 at the given delay."""
    if p_tr_inf < 1e-6:
        return IdentityCheck(residual=0.0, conclusive=False)
    eps_sq = eps_sq_closed_form(gamma_tau, geometry)
    residual = abs(p_tr_inf - p_e_inf / eps_sq) / p_tr_inf
    return IdentityCheck(residual=float(residual), conclusive=True)


# ---------------------------------------------------------------------------
# time series


@dataclass
class ObservableSeries:
    """Time-stamped record of the measured probabilities (times in Gamma*t)."""

    t_gamma: np.ndarray
    p_e: np.ndarray
    p_ph: np.ndarray
    p_tr: np.ndarray
    norm: np.ndarray
    concurrence: np.ndarray | None = None
    p_bb: np.ndarray | None = None

    def columns(self) -> dict[str, np.ndarray]:
        cols = {
            "t_gamma": self.t_gamma,
            "P_e": self.p_e,
            "P_ph": self.p_ph,
            "P_tr": self.p_tr,
            "norm": self.norm,
        }
        if self.concurrence is not None:
            cols["C"] = self.concurrence
        if self.p_bb is not None:
            cols["P_bb"] = self.p_bb
        return cols

    @classmethod
    def from_columns(cls, cols: dict[str, np.ndarray]) -> "ObservableSeries":
        return cls(
            t_gamma=cols["t_gamma"],
            p_e=cols["P_e"],
            p_ph=cols["P_ph"],
            p_tr=cols["P_tr"],
            norm=cols["norm"],
            concurrence=cols.get("C"),
            p_bb=cols.get("P_bb"),
        )


class SeriesRecorder:
    """Observer that accumulates the standard observable series during a run."""

    def __init__(
        self,
        region: RegionSpec,
        gamma: float,
        flux_site: int | None = None,
        want_concurrence: bool = False,
        bosonic: bool = False,
    ) -> None:
        self.region = region
        self.gamma = gamma
        self.flux_site = flux_site
        self.want_concurrence = want_concurrence
        self.bosonic = bosonic
        self.rows: list[tuple] = []
        self.flux: list[float] = []

    def __call__(self, t: float, state: StateVector) -> None:
        p_ph = trapped_photon_prob(state, self.region)
        if self.bosonic:
            p_single = single_excitation_prob(state)
            p_bb = double_occupancy_prob(state)
            p_e, p_tr = p_single, p_single + p_ph + p_bb
        else:
            p_e = qubit_population(state)
            p_bb = 0.0
            p_tr = p_e + p_ph
        c = concurrence(state) if self.want_concurrence else 0.0
        self.rows.append((t * self.gamma, p_e, p_ph, p_tr, state.norm(), c, p_bb))
        if self.flux_site is not None:
            self.flux.append(abs(hopping_current(state, self.flux_site)) / self.gamma)

    def series(self) -> ObservableSeries:
        arr = np.asarray(self.rows, dtype=float)
        return ObservableSeries(
            t_gamma=arr[:, 0],
            p_e=arr[:, 1],
            p_ph=arr[:, 2],
            p_tr=arr[:, 3],
            norm=arr[:, 4],
            concurrence=arr[:, 5] if self.want_concurrence else None,
            p_bb=arr[:, 6] if self.bosonic else None,
        )

    def flux_array(self) -> np.ndarray | None:
        return np.asarray(self.flux) if self.flux_site is not None else None


def combine_series(parts: list[ObservableSeries]) -> ObservableSeries:
    """Sector-weighted sum (weights already folded into each part's amplitudes)."""
    t = parts[0].t_gamma
    for p in parts[1:]:
        if not np.allclose(p.t_gamma, t):
            raise ConsistencyError("cannot combine series with different sample times")
    return ObservableSeries(
        t_gamma=t.copy(),
        p_e=sum(p.p_e for p in parts),
        p_ph=sum(p.p_ph for p in parts),
        p_tr=sum(p.p_tr for p in parts),
        norm=np.sqrt(sum(p.norm**2 for p in parts)),
        p_bb=(sum(p.p_bb for p in parts) if all(p.p_bb is not None for p in parts) else None),
    )


@dataclass(frozen=True)
class SteadyValues:
    p_tr: float
    p_e: float
    p_ph: float
    cleared: bool            # outgoing flux below threshold at the window start
    window_shift_rel: float  # relative change of P_tr when the window starts 5/Gamma earlier
    window_start_gamma: float
    concurrence: float = 0.0


def extract_steady(
    series: ObservableSeries,
    window_gamma: float = 10.0,
    flux: np.ndarray | None = None,
    flux_threshold: float = 1e-6,
) -> SteadyValues:
    """Mean observables over the final window of the run.

    ``flux`` is the per-sample outgoing flux (photons per 1/Gamma) at the
    checkpoint site; clearance requires it below ``flux_threshold`` from the
    window start onwards.  The window-shift figure reports how sensitive the
    extracted P_tr is to starting the average 5/Gamma earlier.
    """
    t = series.t_gamma
    t_end = t[-1]
    window = t >= t_end - window_gamma
    if not window.any():
        raise ConsistencyError("steady window is empty")

    def window_mean(values: np.ndarray, mask: np.ndarray) -> float:
        return float(values[mask].mean())

    p_tr = window_mean(series.p_tr, window)
    p_e = window_mean(series.p_e, window)
    p_ph = window_mean(series.p_ph, window)
    c = window_mean(series.concurrence, window) if series.concurrence is not None else 0.0

    shifted = (t >= t_end - window_gamma - 5.0) & (t <= t_end - 5.0)
    if shifted.any() and p_tr > 0:
        shift_rel = abs(window_mean(series.p_tr, shifted) - p_tr) / max(p_tr, 1e-300)
    else:
        shift_rel = 0.0

    cleared = True
    if flux is not None:
        start = int(np.argmax(window))
        cleared = bool(np.all(flux[start:] < flux_threshold))

    return SteadyValues(
        p_tr=p_tr,
        p_e=p_e,
        p_ph=p_ph,
        cleared=cleared,
        window_shift_rel=shift_rel,
        window_start_gamma=float(t_end - window_gamma),
        concurrence=c,
    )


def coherent_observables(state: CoherentState, region: RegionSpec) -> dict[str, float]:
    """Instantaneous Poisson-weighted sums over the sectors of a coherent state."""
    p_e = sum(qubit_population(s) for s in state.sectors.values())
    p_ph = sum(trapped_photon_prob(s, region) for s in state.sectors.values())
    return {"P_e": p_e, "P_ph": p_ph, "P_tr": p_e + p_ph}
