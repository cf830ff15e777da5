"""Outer-loop studies: parameter sweeps and iterated time-reversal engineering.

The engineering loop realizes the time-reversed ideal process: prepare the
dressed BIC, scatter an incoming single-photon probe off it, harvest the
outgoing two-photon component, normalize and time-reverse it, and use the
result as the incoming wavepacket of the original scattering problem.  Later
iterations replace the probe by the (normalized, time-reversed) outgoing
single photon of the previous scoring run.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .bic import BicState, bic_for_model
from .errors import ConsistencyError, ValidityError
from .hamiltonian import build_sector_hamiltonian
from .model import Boundary, EmitterSpec, ModelSpec, ParamMap, snap_even_separation
from .observables import RegionSpec, emitter_photon_amplitudes
from .propagate import EvolutionPlan, evolve
from .scenarios import (
    EDGE_MARGIN,
    RunResult,
    ScenarioSpec,
    check_horizon,
    run_scenario,
)
from .states import (
    GaussianPacket,
    StateVector,
    apply_mode_creation,
    mode_amplitudes,
)

TRIM_WEIGHT = 1e-7  # cumulative tail mass trimmed from extracted wavepackets


# ---------------------------------------------------------------------------
# sweeps

SWEEP_VARIABLES = {
    "dk": "dk_over_gamma",
    "gamma_tau": "gamma_tau",
    "delta": "delta_over_gamma",
    "gamma_loss": "gamma_loss_over_gamma",
}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    grid: tuple[float, ...]
    objective: str = "p_tr"  # p_tr | p_e

    def __post_init__(self) -> None:
        if self.variable not in SWEEP_VARIABLES:
            raise ValidityError(
                f"unknown sweep variable {self.variable!r}; expected one of "
                f"{sorted(SWEEP_VARIABLES)}"
            )
        if len(self.grid) < 3:
            raise ValidityError("sweep grid needs at least 3 points for interpolation")
        if list(self.grid) != sorted(self.grid):
            raise ValidityError("sweep grid must be sorted ascending")
        if self.objective not in ("p_tr", "p_e"):
            raise ValidityError("objective must be 'p_tr' or 'p_e'")


def geometric_grid(lo: float, hi: float, per_decade: int = 12) -> tuple[float, ...]:
    """Log-spaced grid, ``per_decade`` points per decade, endpoints included."""
    if not 0 < lo < hi:
        raise ValidityError("grid span must satisfy 0 < lo < hi")
    n = max(3, int(round(per_decade * math.log10(hi / lo))) + 1)
    return tuple(np.geomspace(lo, hi, n))


@dataclass
class SweepResult:
    variable: str
    grid: np.ndarray
    values: np.ndarray
    optimum_x: float
    optimum_value: float
    boundary_flag: bool
    objective: str
    runs: list[RunResult] = field(default_factory=list)


def _run_point(args) -> tuple[float, float]:
    base, var_field, x, objective = args
    spec = replace(base, **{var_field: x})
    result = run_scenario(spec)
    value = result.steady.p_tr if objective == "p_tr" else result.steady.p_e
    return x, value


def sweep(
    spec: SweepSpec,
    base: ScenarioSpec,
    threads: int = 1,
    keep_runs: bool = False,
) -> SweepResult:
    """Evaluate the objective on the grid and locate the optimum.

    The optimum is refined by quadratic interpolation around the best grid
    point, in log-x for geometric grids; a maximum on the grid edge sets
    ``boundary_flag`` and skips interpolation.
    """
    var_field = SWEEP_VARIABLES[spec.variable]
    jobs = [(base, var_field, x, spec.objective) for x in spec.grid]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(_run_point, jobs))
    else:
        points = [_run_point(j) for j in jobs]

    xs = np.asarray([p[0] for p in points])
    ys = np.asarray([p[1] for p in points])
    best = int(np.argmax(ys))
    boundary = best in (0, len(xs) - 1)
    if boundary:
        opt_x, opt_y = float(xs[best]), float(ys[best])
    else:
        opt_x, opt_y = _parabolic_peak(xs[best - 1 : best + 2], ys[best - 1 : best + 2])

    runs: list[RunResult] = []
    if keep_runs:
        runs = [run_scenario(replace(base, **{var_field: float(x)})) for x in spec.grid]
    return SweepResult(
        variable=spec.variable,
        grid=xs,
        values=ys,
        optimum_x=opt_x,
        optimum_value=opt_y,
        boundary_flag=boundary,
        objective=spec.objective,
        runs=runs,
    )


def _parabolic_peak(x3: np.ndarray, y3: np.ndarray) -> tuple[float, float]:
    ratios = x3[1:] / x3[:-1]
    log_spaced = np.allclose(ratios[0], ratios[1], rtol=1e-6)
    u = np.log(x3) if log_spaced else x3
    a, b, c = np.polyfit(u, y3, 2)
    if a >= 0:  # flat or concave-up; fall back to the grid point
        return float(x3[1]), float(y3[1])
    u_star = -b / (2.0 * a)
    u_star = min(max(u_star, u[0]), u[2])
    y_star = (a * u_star + b) * u_star + c
    return float(np.exp(u_star) if log_spaced else u_star), float(y_star)


# ---------------------------------------------------------------------------
# time-reversal wavepacket engineering


@dataclass
class EngineeringIteration:
    iteration: int
    chi_incoming: np.ndarray       # engineered two-photon grid (incoming)
    p_bic: float                   # scored by a full scattering run
    p_tr_inf: float
    release_weight: float          # outgoing two-photon weight of the release run
    trimmed_mass: float
    scoring: RunResult


@dataclass
class EngineeringResult:
    iterations: list[EngineeringIteration]
    baseline_p_bic: float | None
    param_map: ParamMap

    @property
    def best_p_bic(self) -> float:
        return max(it.p_bic for it in self.iterations)


def outgoing_two_photon_grid(state: StateVector, region: RegionSpec) -> tuple[np.ndarray, float]:
    """Mask to the emitter-ground, all-photons-outside component; returns
    (normalized chi grid, masked weight)."""
    basis = state.basis
    if basis.n_exc != 2:
        raise ConsistencyError("outgoing extraction needs the N=2 sector")
    lookup = region.site_mask(basis.model.n_sites)
    amps = state.amps.copy()
    for i, (occs, photons) in enumerate(basis.configs):
        if any(occs) or any(lookup[x] for x in photons):
            amps[i] = 0.0
    weight = float(np.sum(np.abs(amps) ** 2))
    if weight < 1e-4:
        raise ValidityError(
            f"outgoing two-photon weight {weight:.2e} is negligible; engineering stalls"
        )
    masked = StateVector(basis, amps / math.sqrt(weight))
    from .basis import symmetrized_amplitude_view

    return symmetrized_amplitude_view(masked.amps, basis), weight


def outgoing_single_photon(state: StateVector, bic: BicState, region: RegionSpec) -> np.ndarray:
    """BIC-channel amplitude xi(x) of the released photon, zero inside the region."""
    from .basis import symmetrized_amplitude_view

    basis = state.basis
    model = basis.model
    chan = np.zeros(model.n_sites, dtype=np.complex128)
    chi = symmetrized_amplitude_view(state.amps, basis)
    for i, eps in enumerate(bic.emitter_amps):
        chan += np.conj(eps) * emitter_photon_amplitudes(state, i)
    phot = np.asarray(bic.photon_amps, dtype=np.complex128)
    region_idx = np.asarray(bic.photon_sites, dtype=int) - 1
    chan += math.sqrt(2.0) * chi[:, region_idx] @ np.conj(phot)
    chan[region.site_mask(model.n_sites)[1:]] = 0.0
    return chan


def trim_mode(mode: np.ndarray, weight: float = TRIM_WEIGHT) -> tuple[np.ndarray, int, float]:
    """Zero the far tail holding < ``weight`` of the mass; (mode, support_hi, trimmed)."""
    w = np.abs(mode) ** 2
    total = w.sum()
    c = np.cumsum(w) / total
    hi = int(np.searchsorted(c, 1.0 - weight)) + 1
    out = mode.copy()
    out[hi:] = 0.0
    trimmed = float(w[hi:].sum() / total)
    return out, hi, trimmed


def trim_chi(chi: np.ndarray, weight: float = TRIM_WEIGHT) -> tuple[np.ndarray, int, float]:
    """Restrict a two-photon grid to the box [0, hi]^2 losing < ``weight`` mass."""
    w = np.abs(chi) ** 2
    per_site = w.sum(axis=0) + w.sum(axis=1)
    total = per_site.sum()
    c = np.cumsum(per_site) / total
    hi = int(np.searchsorted(c, 1.0 - weight)) + 1
    out = chi.copy()
    out[hi:, :] = 0.0
    out[:, hi:] = 0.0
    trimmed = 1.0 - float(np.sum(np.abs(out) ** 2) / np.sum(w))
    return out, hi, trimmed


def _release_run(
    model: ModelSpec,
    pm: ParamMap,
    bic: BicState,
    probe_mode: np.ndarray,
    tolerance: float,
    sample_dt_gamma: float,
    settle_gamma: float = 25.0,
) -> StateVector:
    """Scatter the probe photon off the BIC; returns the final N=2 state."""
    psi0 = apply_mode_creation(bic.to_state(model), probe_mode).normalized()
    w = np.abs(probe_mode) ** 2
    c = np.cumsum(w) / w.sum()
    support_hi = int(np.searchsorted(c, 1.0 - SUPPORT_WEIGHT_LOCAL)) + 1
    t_max = (support_hi - model.emitters[-1].site) / (2.0 * model.j_hop) + settle_gamma / pm.gamma
    h = build_sector_hamiltonian(model, 2)
    check_horizon(model, psi0, t_max, "strict")
    plan = EvolutionPlan(t_max=t_max, sample_dt=sample_dt_gamma / pm.gamma, tolerance=tolerance)
    return evolve(h, psi0, plan)


SUPPORT_WEIGHT_LOCAL = 1e-6


def _sized_model(gamma: float, d: int, support_hi: int, t_max: float) -> ModelSpec:
    n = int(math.ceil(max(support_hi, d) + 2.0 * t_max + EDGE_MARGIN + 2))
    return ModelSpec(
        n_sites=n,
        emitters=(EmitterSpec(site=d, g=math.sqrt(gamma)),),
        boundary=Boundary.SEMI_INFINITE,
    )


def engineer_wavepacket(
    gamma_tau_target: float = 4.8,
    gamma_over_4j: float = 0.1,
    iterations: int = 2,
    dx0_over_gamma: float | None = None,
    tolerance: float = 1e-9,
    sample_dt_gamma: float = 0.5,
    settle_gamma: float = 25.0,
    run_baseline: bool = True,
) -> EngineeringResult:
    """Iterated time-reversal construction of a high-P_BIC two-photon wavepacket.

    dx0_over_gamma is the Gaussian probe width in units of v/Gamma (default 2,
    the residual-minimizing width).
    """
    if iterations < 1:
        raise ValidityError("need at least one engineering iteration")
    g_sq = 4.0 * gamma_over_4j
    gamma = g_sq
    d = snap_even_separation(gamma_tau_target, g_sq)
    v = 2.0
    dx = (2.0 if dx0_over_gamma is None else dx0_over_gamma) * v / gamma

    results: list[EngineeringIteration] = []
    probe_mode: np.ndarray | None = None  # None -> Gaussian seed
    probe_support = 0

    for it in range(1, iterations + 1):
        # --- release: BIC + incoming probe -------------------------------
        if probe_mode is None:
            x0 = d + int(math.ceil(3.5 * dx))
            seed = GaussianPacket(dx=dx, x0=x0)
            support_hi = x0 + seed.extent(SUPPORT_WEIGHT_LOCAL)
        else:
            support_hi = probe_support
        t_rel = (support_hi - d) / v + settle_gamma / gamma
        model = _sized_model(gamma, d, support_hi, t_rel)
        pm = ParamMap.from_model(model)
        bic = bic_for_model(model)
        if probe_mode is None:
            mode = mode_amplitudes(GaussianPacket(dx=dx, x0=x0), model)
        else:
            mode = np.zeros(model.n_sites, dtype=np.complex128)
            mode[: len(probe_mode)] = probe_mode
        final = _release_run(model, pm, bic, mode, tolerance, sample_dt_gamma, settle_gamma)
        region = RegionSpec.from_model(model)
        chi_out, release_weight = outgoing_two_photon_grid(final, region)

        # --- normalize, time-reverse, trim -------------------------------
        chi_rev = np.conj(chi_out)
        chi_rev, grid_hi, trimmed = trim_chi(chi_rev)
        chi_rev /= math.sqrt(float(np.sum(np.abs(chi_rev) ** 2)))

        # --- score by the original scattering problem --------------------
        t_score_gamma = ((grid_hi - d) / v + settle_gamma / gamma) * gamma
        score_sites = int(math.ceil(grid_hi + 2.0 * t_score_gamma / gamma + EDGE_MARGIN + 2))
        chi_embedded = np.zeros((score_sites, score_sites), dtype=np.complex128)
        chi_embedded[:grid_hi, :grid_hi] = chi_rev[:grid_hi, :grid_hi]
        spec = ScenarioSpec(
            kind="two_photon",
            gamma_tau=gamma_tau_target,
            gamma_over_4j=gamma_over_4j,
            t_max_gamma=t_score_gamma,
            sample_dt_gamma=sample_dt_gamma,
            tolerance=tolerance,
            custom_chi=chi_embedded,
        )
        scoring = run_scenario(spec)
        results.append(
            EngineeringIteration(
                iteration=it,
                chi_incoming=chi_rev[:grid_hi, :grid_hi],
                p_bic=float(scoring.p_bic),
                p_tr_inf=float(scoring.steady.p_tr),
                release_weight=release_weight,
                trimmed_mass=trimmed,
                scoring=scoring,
            )
        )

        # --- next probe: outgoing single photon of the scoring run -------
        if it < iterations:
            score_region = RegionSpec.from_model(scoring.model)
            score_bic = bic_for_model(scoring.model)
            xi = outgoing_single_photon(scoring.final_state, score_bic, score_region)
            xi_norm = float(np.linalg.norm(xi))
            if xi_norm**2 < 1e-4:
                raise ValidityError("outgoing single-photon weight negligible; procedure stalls")
            xi = np.conj(xi) / xi_norm
            xi, probe_support, _ = trim_mode(xi)
            xi = xi[:probe_support]
            probe_mode = xi / np.linalg.norm(xi)

    baseline = None
    if run_baseline:
        base_spec = ScenarioSpec(
            kind="two_photon",
            gamma_tau=gamma_tau_target,
            gamma_over_4j=gamma_over_4j,
            dk_over_gamma=0.5,
            t_max_gamma=50.0,
            sample_dt_gamma=sample_dt_gamma,
            tolerance=tolerance,
        )
        baseline = float(run_scenario(base_spec).p_bic)

    pm_final = results[-1].scoring.param_map
    return EngineeringResult(iterations=results, baseline_p_bic=baseline, param_map=pm_final)
