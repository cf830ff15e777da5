"""End-to-end scenario drivers: one per figure family.

Each driver resolves the lattice (auto-sizing it from the horizon rule when
n_sites is not given), builds the input state, checks the horizon, evolves
while streaming observables, and extracts steady values.  Drivers are pure
functions of their spec; all randomness-free, so runs are reproducible
bit for bit.

Horizon rules (group velocity v = 2J bounds every front):

* strict   — no significant amplitude ever comes within 10 sites of a far
             boundary: support_edge + v * t_max <= n_sites - 10.
* return   — reflected amplitude may touch the far wall but must not re-enter
             the trapped region within t_max (used only by the reduced-lattice
             coherent three-photon budget).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import enumerate_basis
from .bic import BicState, bic_for_model, eps_sq_closed_form
from .errors import ConsistencyError, GeometryError, ResourceError, ValidityError
from .hamiltonian import build_sector_hamiltonian
from .model import (
    Boundary,
    EmitterKind,
    EmitterSpec,
    ModelSpec,
    ParamMap,
    from_paper_params,
    snap_even_separation,
)
from .observables import (
    IdentityCheck,
    ObservableSeries,
    RegionSpec,
    SeriesRecorder,
    SteadyValues,
    bic_projection,
    both_trapped_weight,
    check_trapping_identity,
    combine_series,
    extract_steady,
    field_intensity,
    qubit_population,
    two_photon_density,
)
from .propagate import EvolutionPlan, evolve
from .states import (
    CoherentSpec,
    ExponentialFront,
    GaussianPacket,
    StateVector,
    coherent_truncated,
    custom_two_photon_state,
    emitter_excited_state,
    emitter_superposition_state,
    single_photon,
    two_photon_product,
)

SUPPORT_WEIGHT = 1e-6  # cumulative tail weight defining the packet support edge
EDGE_MARGIN = 10

KINDS = ("vacuum_decay", "two_photon", "two_qubit", "coherent", "loss_study", "bosonic_u")


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters for one driver run (paper shorthand units).

    Times are in 1/Gamma; bandwidths in Gamma/v; detunings and loss rates in
    Gamma.  ``n_sites=None`` auto-sizes the lattice from the horizon rule.
    ``d_override`` forces an explicit (possibly odd) separation instead of the
    even-snapped one.
    """

    kind: str
    gamma_tau: float = 3.0
    gamma_over_4j: float = 0.075
    n_sites: int | None = None
    d_override: int | None = None
    t_max_gamma: float = 80.0
    sample_dt_gamma: float = 0.5
    tolerance: float = 1e-9
    dk_over_gamma: float = 0.5
    delta_over_gamma: float = 0.0
    carrier_shift_over_gamma: float = 0.0
    n_photons: int = 2
    custom_chi: np.ndarray | None = field(default=None, compare=False)
    initial: str = "two_photon"  # two-qubit driver: two_photon | sigma_plus | sigma_minus
    nbar: float = 1.5
    n_max: int = 3
    gamma_loss_over_gamma: float = 0.0
    u_over_gamma: tuple[float, ...] = (0.0, 1.0, 50.0)
    horizon_mode: str = "strict"  # strict | return
    flux_threshold: float = 1e-6
    window_gamma: float = 10.0
    identity_bound: float | None = None  # default by kind

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidityError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.n_photons not in (1, 2):
            raise ValidityError("n_photons must be 1 or 2")
        if self.horizon_mode not in ("strict", "return"):
            raise ValidityError("horizon_mode must be 'strict' or 'return'")

    @property
    def geometry(self) -> Boundary:
        return Boundary.INFINITE if self.kind == "two_qubit" else Boundary.SEMI_INFINITE

    def default_identity_bound(self) -> float:
        return 0.03 if self.kind == "two_qubit" else 0.02


# ---------------------------------------------------------------------------
# geometry helpers


def packet_support_sites(shape) -> int:
    """Sites needed behind the wavefront to hold all but SUPPORT_WEIGHT."""
    return shape.extent(SUPPORT_WEIGHT)


def state_support(state: StateVector) -> tuple[int, int]:
    """(lo, hi) sites bracketing all but SUPPORT_WEIGHT of the photon weight per side."""
    n = field_intensity(state)
    total = n.sum()
    if total <= 0:
        site = state.basis.model.emitters[0].site
        return site, site
    c = np.cumsum(n) / total
    lo = int(np.searchsorted(c, SUPPORT_WEIGHT)) + 1
    hi = int(np.searchsorted(c, 1.0 - SUPPORT_WEIGHT)) + 1
    return lo, min(hi, state.basis.model.n_sites)


def check_horizon(model: ModelSpec, psi0: StateVector, t_max: float, mode: str) -> float:
    """Validate the boundary-safety rule; returns the max safe time for ``mode``."""
    v = 2.0 * model.j_hop
    n = model.n_sites
    lo, hi = state_support(psi0)
    region_hi = model.emitters[-1].site
    front_hi = max(hi, region_hi)

    if mode == "strict":
        t_safe = (n - EDGE_MARGIN - front_hi) / v
        if model.boundary is Boundary.INFINITE:
            front_lo = min(lo, model.emitters[0].site)
            t_safe = min(t_safe, (front_lo - 1 - EDGE_MARGIN) / v)
    else:  # return: wall bounce allowed, re-entry into the trapped region is not
        t_safe = (2.0 * (n - EDGE_MARGIN) - hi - region_hi) / v
        if model.boundary is Boundary.INFINITE:
            x1 = model.emitters[0].site
            t_safe = min(t_safe, 2.0 * (x1 - 1) / v)
    if t_max > t_safe:
        raise GeometryError(
            f"horizon violated: t_max = {t_max:.1f}/J exceeds the safe horizon "
            f"{t_safe:.1f}/J for n_sites = {n} ({mode} mode); enlarge the lattice "
            f"to ~{suggest_sites(model, psi0, t_max, mode)} sites or shorten the run"
        )
    return t_safe


def suggest_sites(model: ModelSpec, psi0: StateVector, t_max: float, mode: str) -> int:
    v = 2.0 * model.j_hop
    _, hi = state_support(psi0)
    need = max(hi, model.emitters[-1].site) + v * t_max + EDGE_MARGIN
    if mode == "return":
        need = (hi + model.emitters[-1].site) / 2.0 + v * t_max / 2.0 + EDGE_MARGIN
    return int(math.ceil(need))


def _auto_sites_semi(d: int, tail: int, t_max: float, v: float = 2.0) -> int:
    return int(math.ceil(d + tail + v * t_max + EDGE_MARGIN + 2))


def _resolve_semi_model(spec: ScenarioSpec, tail: int, **emitter_kw) -> tuple[ModelSpec, ParamMap]:
    g_sq = 4.0 * spec.gamma_over_4j
    gamma = g_sq  # J = 1
    t_max = spec.t_max_gamma / gamma
    d = spec.d_override if spec.d_override is not None else snap_even_separation(
        spec.gamma_tau, g_sq
    )
    n_sites = spec.n_sites or _auto_sites_semi(d, tail, t_max)
    emitters = (EmitterSpec(site=d, g=math.sqrt(g_sq), **emitter_kw),)
    model = ModelSpec(n_sites=n_sites, emitters=emitters, boundary=Boundary.SEMI_INFINITE)
    return model, ParamMap.from_model(model)


def _resolve_two_qubit_model(spec: ScenarioSpec, tail: int) -> tuple[ModelSpec, ParamMap]:
    g_sq = 4.0 * spec.gamma_over_4j
    gamma = g_sq
    t_max = spec.t_max_gamma / gamma
    d = spec.d_override if spec.d_override is not None else snap_even_separation(
        spec.gamma_tau, g_sq
    )
    v = 2.0
    if spec.n_sites is not None:
        n_sites = spec.n_sites
        x1 = (n_sites - d) // 2
    else:
        x1 = int(math.ceil(max(tail + 1, v * t_max + EDGE_MARGIN + 1)))
        n_sites = int(math.ceil(x1 + d + v * t_max + EDGE_MARGIN + 2))
    g = math.sqrt(g_sq)
    emitters = (EmitterSpec(site=x1, g=g), EmitterSpec(site=x1 + d, g=g))
    model = ModelSpec(n_sites=n_sites, emitters=emitters, boundary=Boundary.INFINITE)
    return model, ParamMap.from_model(model)


def _plan(spec: ScenarioSpec, gamma: float) -> EvolutionPlan:
    return EvolutionPlan.from_gamma(
        spec.t_max_gamma, gamma, spec.sample_dt_gamma, tolerance=spec.tolerance
    )


def _checkpoint_site(model: ModelSpec) -> int:
    """Flux checkpoint halfway between the last emitter and the far wall."""
    return (model.emitters[-1].site + model.n_sites) // 2


# ---------------------------------------------------------------------------
# results


@dataclass
class RunResult:
    kind: str
    model: ModelSpec
    param_map: ParamMap
    series: ObservableSeries
    steady: SteadyValues | None = None
    identity: IdentityCheck | None = None
    identity_bound: float | None = None
    p_bic: float | None = None
    bic_overlap: float | None = None
    field_profile: np.ndarray | None = None
    density: np.ndarray | None = None
    sin2_fit_r2: float | None = None
    both_trapped: float | None = None
    final_state: StateVector | None = None
    horizon_mode: str = "strict"
    extras: dict = field(default_factory=dict)

    @property
    def identity_ok(self) -> bool:
        if self.identity is None or self.identity_bound is None:
            return True
        if not self.identity.conclusive:
            return True
        return self.identity.residual <= self.identity_bound


def sin2_fit(profile: np.ndarray, region: RegionSpec, x_ref: int = 0) -> tuple[float, float]:
    """Least-squares A*sin^2(k0 (x - x_ref)) fit on the trapped region: (A, R^2)."""
    lo, hi = region.trapped
    xs = np.arange(lo, hi + 1)
    y = profile[lo - 1 : hi]
    s = np.sin(0.5 * math.pi * (xs - x_ref)) ** 2
    denom = float(np.dot(s, s))
    if denom == 0.0:
        return 0.0, 0.0
    a = float(np.dot(y, s)) / denom
    ss_res = float(np.sum((y - a * s) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return a, r2


# ---------------------------------------------------------------------------
# drivers


def run_vacuum_decay(spec: ScenarioSpec) -> RunResult:
    """Emitter starts excited, field in vacuum; the BIC survives the decay."""
    model, pm = _resolve_semi_model(spec, tail=0)
    h = build_sector_hamiltonian(model, 1)
    psi0 = emitter_excited_state(model)
    plan = _plan(spec, pm.gamma)
    check_horizon(model, psi0, plan.t_max, spec.horizon_mode)

    region = RegionSpec.from_model(model)
    rec = SeriesRecorder(region, pm.gamma, flux_site=_checkpoint_site(model))
    final = evolve(h, psi0, plan, rec)
    series = rec.series()
    steady = extract_steady(series, spec.window_gamma, rec.flux_array(), spec.flux_threshold)

    overlap = None
    if pm.d % 2 == 0:
        bic = bic_for_model(model)
        overlap = float(abs(bic.to_state(model).overlap(final)) ** 2)
    return RunResult(
        kind=spec.kind,
        model=model,
        param_map=pm,
        series=series,
        steady=steady,
        bic_overlap=overlap,
        final_state=final,
        horizon_mode=spec.horizon_mode,
        extras={"p_e_final": qubit_population(final)},
    )


def _incoming_shapes(spec: ScenarioSpec, gamma: float, v: float = 2.0):
    dk = spec.dk_over_gamma * gamma / v
    delta = spec.delta_over_gamma * gamma
    base_shift = spec.carrier_shift_over_gamma * gamma / v
    s1 = ExponentialFront(dk=dk, carrier_shift=base_shift + delta / v)
    s2 = ExponentialFront(dk=dk, carrier_shift=base_shift - delta / v)
    return s1, s2


def run_two_photon_scattering(spec: ScenarioSpec) -> RunResult:
    """Fig.-2 family: two-photon (or control single-photon) pulse on the mirror setup."""
    gamma = 4.0 * spec.gamma_over_4j
    s1, s2 = _incoming_shapes(spec, gamma)
    if spec.custom_chi is not None:
        # the grid fixes the lattice size
        s_grid = spec.custom_chi.shape[0]
        if spec.n_sites is not None and spec.n_sites != s_grid:
            raise ConsistencyError(
                f"custom grid is {s_grid} sites but n_sites = {spec.n_sites} was requested"
            )
        spec = replace(spec, n_sites=s_grid)
        tail = 0
    else:
        tail = packet_support_sites(s1)
    model, pm = _resolve_semi_model(spec, tail=tail)

    if spec.custom_chi is not None:
        psi0 = custom_two_photon_state(spec.custom_chi, model)
        n_exc = 2
    elif spec.n_photons == 1:
        psi0 = single_photon(s1, model)
        n_exc = 1
    else:
        psi0 = two_photon_product(s1, s2, model)
        n_exc = 2

    h = build_sector_hamiltonian(model, n_exc)
    plan = _plan(spec, pm.gamma)
    check_horizon(model, psi0, plan.t_max, spec.horizon_mode)

    region = RegionSpec.from_model(model)
    rec = SeriesRecorder(region, pm.gamma, flux_site=_checkpoint_site(model))
    final = evolve(h, psi0, plan, rec)
    series = rec.series()
    steady = extract_steady(series, spec.window_gamma, rec.flux_array(), spec.flux_threshold)

    profile = field_intensity(final)
    _, r2 = sin2_fit(profile, region)
    identity = None
    p_bic = None
    density = None
    both = None
    if n_exc == 2:
        identity = check_trapping_identity(steady.p_tr, steady.p_e, pm.gamma_tau, "single_qubit")
        density = two_photon_density(final)
        both = both_trapped_weight(final, region)
        if pm.d % 2 == 0:
            p_bic = bic_projection(final, bic_for_model(model))
    bound = spec.identity_bound if spec.identity_bound is not None else spec.default_identity_bound()
    return RunResult(
        kind=spec.kind,
        model=model,
        param_map=pm,
        series=series,
        steady=steady,
        identity=identity,
        identity_bound=bound,
        p_bic=p_bic,
        field_profile=profile,
        density=density,
        sin2_fit_r2=r2,
        both_trapped=both,
        final_state=final,
        horizon_mode=spec.horizon_mode,
    )


def run_two_qubit(spec: ScenarioSpec) -> RunResult:
    """Fig.-4 family: two distant qubits in an infinite chain, concurrence tracked."""
    gamma = 4.0 * spec.gamma_over_4j
    s1, s2 = _incoming_shapes(spec, gamma)
    tail = packet_support_sites(s1) if spec.initial == "two_photon" else 0
    model, pm = _resolve_two_qubit_model(spec, tail=tail)

    if spec.initial == "two_photon":
        psi0 = two_photon_product(s1, s2, model)
        n_exc = 2
    elif spec.initial in ("sigma_plus", "sigma_minus"):
        psi0 = emitter_superposition_state(model, +1 if spec.initial == "sigma_plus" else -1)
        n_exc = 1
    else:
        raise ValidityError(f"unknown two-qubit initial state {spec.initial!r}")

    h = build_sector_hamiltonian(model, n_exc)
    plan = _plan(spec, pm.gamma)
    check_horizon(model, psi0, plan.t_max, spec.horizon_mode)

    region = RegionSpec.from_model(model)
    rec = SeriesRecorder(
        region, pm.gamma, flux_site=_checkpoint_site(model), want_concurrence=True
    )
    final = evolve(h, psi0, plan, rec)
    series = rec.series()
    steady = extract_steady(series, spec.window_gamma, rec.flux_array(), spec.flux_threshold)

    identity = None
    p_bic = None
    overlap = None
    if n_exc == 2:
        identity = check_trapping_identity(steady.p_tr, steady.p_e, pm.gamma_tau, "two_qubit")
        if pm.d % 2 == 0:
            p_bic = bic_projection(final, bic_for_model(model))
    elif pm.d % 2 == 0:
        overlap = float(abs(bic_for_model(model).to_state(model).overlap(final)) ** 2)
    bound = spec.identity_bound if spec.identity_bound is not None else spec.default_identity_bound()
    return RunResult(
        kind=spec.kind,
        model=model,
        param_map=pm,
        series=series,
        steady=steady,
        identity=identity,
        identity_bound=bound,
        p_bic=p_bic,
        bic_overlap=overlap,
        field_profile=field_intensity(final),
        final_state=final,
        horizon_mode=spec.horizon_mode,
    )


def run_loss_study(spec: ScenarioSpec) -> RunResult:
    """Lossy-qubit two-photon run plus exponential fit of the P_tr tail."""
    gamma = 4.0 * spec.gamma_over_4j
    if not 0.0 <= spec.gamma_loss_over_gamma <= 0.1 + 1e-12:
        raise ValidityError("gamma_a must lie in [0, 0.1]*Gamma")
    gamma_a = spec.gamma_loss_over_gamma * gamma
    s1, s2 = _incoming_shapes(spec, gamma)
    tail = packet_support_sites(s1)
    model, pm = _resolve_semi_model(spec, tail=tail, gamma_loss=gamma_a)

    psi0 = two_photon_product(s1, s2, model)
    h = build_sector_hamiltonian(model, 2)
    plan = _plan(spec, pm.gamma)
    check_horizon(model, psi0, plan.t_max, spec.horizon_mode)

    region = RegionSpec.from_model(model)
    rec = SeriesRecorder(region, pm.gamma, flux_site=_checkpoint_site(model))
    final = evolve(h, psi0, plan, rec)
    series = rec.series()

    # least-squares slope of log P_tr over the final half of the run
    t = series.t_gamma
    mask = t >= 0.5 * t[-1]
    fit_ok = mask.sum() >= 4 and np.all(series.p_tr[mask] > 0)
    if fit_ok:
        slope, _ = np.polyfit(t[mask], np.log(series.p_tr[mask]), 1)
        fitted_rate_over_gamma = float(-slope)
    else:
        fitted_rate_over_gamma = math.nan
        warnings.warn("loss fit window too short or P_tr vanished; fit inconclusive")
    eps_sq = eps_sq_closed_form(pm.gamma_tau, "single_qubit")
    predicted = spec.gamma_loss_over_gamma * eps_sq
    return RunResult(
        kind=spec.kind,
        model=model,
        param_map=pm,
        series=series,
        steady=extract_steady(series, spec.window_gamma, rec.flux_array(), spec.flux_threshold),
        final_state=final,
        horizon_mode=spec.horizon_mode,
        extras={
            "gamma_a_over_gamma": spec.gamma_loss_over_gamma,
            "fitted_rate_over_gamma": fitted_rate_over_gamma,
            "predicted_rate_over_gamma": predicted,
            "fit_conclusive": bool(fit_ok),
        },
    )


def run_bosonic_u_study(spec: ScenarioSpec) -> RunResult:
    """P_tr(infinity) versus the on-site nonlinearity U, with a two-level reference."""
    gamma = 4.0 * spec.gamma_over_4j
    s1, s2 = _incoming_shapes(spec, gamma)
    tail = packet_support_sites(s1)

    curve: list[tuple[float, float]] = []
    last = None
    for u_over_gamma in spec.u_over_gamma:
        model, pm = _resolve_semi_model(
            spec, tail=tail, kind=EmitterKind.BOSONIC, u=u_over_gamma * gamma
        )
        if (model.emitters[0].max_occ or 2) < 2:
            raise ResourceError("bosonic emitter needs max_occ >= 2 in the N=2 sector")
        psi0 = two_photon_product(s1, s2, model)
        h = build_sector_hamiltonian(model, 2)
        plan = _plan(spec, pm.gamma)
        check_horizon(model, psi0, plan.t_max, spec.horizon_mode)
        region = RegionSpec.from_model(model)
        rec = SeriesRecorder(region, pm.gamma, flux_site=_checkpoint_site(model), bosonic=True)
        evolve(h, psi0, plan, rec)
        series = rec.series()
        steady = extract_steady(series, spec.window_gamma, rec.flux_array(), spec.flux_threshold)
        curve.append((u_over_gamma, steady.p_tr))
        last = (model, pm, series, steady)

    ref = run_two_photon_scattering(replace(spec, kind="two_photon"))
    model, pm, series, steady = last
    return RunResult(
        kind=spec.kind,
        model=model,
        param_map=pm,
        series=series,
        steady=steady,
        horizon_mode=spec.horizon_mode,
        extras={
            "u_curve": curve,
            "two_level_p_tr": ref.steady.p_tr,
        },
    )


def run_coherent_scattering(spec: ScenarioSpec) -> RunResult:
    """Fig.-3c: truncated coherent pulse, sectors evolved independently.

    The three-excitation sector forces a reduced lattice; the run length is
    capped by the reflection-return horizon on that lattice so that every
    sector shares one sampling grid.
    """
    if spec.n_max > 3:
        raise ResourceError("coherent truncation supports n_max <= 3")
    gamma = 4.0 * spec.gamma_over_4j
    s1, _ = _incoming_shapes(spec, gamma)
    spec_sites = spec.n_sites or 140
    d = spec.d_override if spec.d_override is not None else snap_even_separation(
        spec.gamma_tau, gamma
    )
    dim3 = _three_sector_dim(spec_sites)
    if dim3 > 600_000:
        raise ResourceError(
            f"three-excitation dimension {dim3} over budget at n_sites={spec_sites}; "
            f"try n_sites <= {_sites_for_budget()}"
        )
    model = ModelSpec(
        n_sites=spec_sites,
        emitters=(EmitterSpec(site=d, g=math.sqrt(gamma)),),
        boundary=Boundary.SEMI_INFINITE,
    )
    pm = ParamMap.from_model(model)

    coh = coherent_truncated(CoherentSpec(alpha=math.sqrt(spec.nbar), n_max=spec.n_max), s1, model)
    region = RegionSpec.from_model(model)

    # cap the run at the return horizon of the shared lattice
    probe = coh.sectors.get(1)
    t_req = spec.t_max_gamma / pm.gamma
    mode = spec.horizon_mode
    if probe is not None and probe.norm() > 0:
        t_safe = _return_horizon_time(model, probe)
        if t_req > t_safe:
            if mode == "strict":
                warnings.warn(
                    f"coherent run capped at the return horizon "
                    f"({t_safe * pm.gamma:.1f}/Gamma < requested {spec.t_max_gamma}/Gamma) "
                    f"on the reduced lattice",
                    stacklevel=2,
                )
            t_req = t_safe
            mode = "return"
    plan = EvolutionPlan(
        t_max=t_req, sample_dt=spec.sample_dt_gamma / pm.gamma, tolerance=spec.tolerance
    )

    parts = []
    sector_steady = {}
    for n, state in sorted(coh.sectors.items()):
        rec = SeriesRecorder(region, pm.gamma, flux_site=_checkpoint_site(model))
        if n == 0 or state.norm() == 0.0:
            for t in np.concatenate(([0.0], plan.sample_times())):
                rec(t, state)
            series_n = rec.series()
        else:
            h = build_sector_hamiltonian(model, n)
            check_horizon(model, state, plan.t_max, mode)
            evolve(h, state, plan, rec)
            series_n = rec.series()
        parts.append(series_n)
        sector_steady[n] = extract_steady(
            series_n, min(spec.window_gamma, 5.0), rec.flux_array(), spec.flux_threshold
        )

    series = combine_series(parts)
    steady = extract_steady(series, min(spec.window_gamma, 5.0), None, spec.flux_threshold)
    return RunResult(
        kind=spec.kind,
        model=model,
        param_map=pm,
        series=series,
        steady=steady,
        horizon_mode=mode,
        extras={
            "deficit": coh.deficit,
            "weights": coh.weights(),
            "sector_p_tr": {n: s.p_tr for n, s in sector_steady.items()},
            "t_max_gamma_effective": t_req * pm.gamma,
        },
    )


def _three_sector_dim(s: int) -> int:
    return s * (s + 1) * (s + 2) // 6 + s * (s + 1) // 2


def _sites_for_budget(budget: int = 600_000) -> int:
    s = 100
    while _three_sector_dim(s + 10) <= budget:
        s += 10
    return s


def _return_horizon_time(model: ModelSpec, probe: StateVector) -> float:
    _, hi = state_support(probe)
    v = 2.0 * model.j_hop
    return (2.0 * (model.n_sites - EDGE_MARGIN) - hi - model.emitters[-1].site) / v


def run_scenario(spec: ScenarioSpec) -> RunResult:
    driver = {
        "vacuum_decay": run_vacuum_decay,
        "two_photon": run_two_photon_scattering,
        "two_qubit": run_two_qubit,
        "coherent": run_coherent_scattering,
        "loss_study": run_loss_study,
        "bosonic_u": run_bosonic_u_study,
    }[spec.kind]
    return driver(spec)
