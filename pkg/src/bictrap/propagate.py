"""Time evolution under sector Hamiltonians.

Two integrators cover the Schroedinger equation i d/dt psi = H psi:

* A Chebyshev polynomial propagator for Hermitian H.  The spectrum is boxed by
  Gershgorin discs into [lo, hi]; with a = (hi - lo)/2, b = (hi + lo)/2 and
  x = a * dt the step is

      exp(-i H dt) = exp(-i b dt) * sum_k (2 - delta_k0) (-i)^k J_k(x) T_k(Hn)

  with Hn = (H - b)/a and the series truncated once the Bessel coefficients
  fall below the requested tolerance (they decay superexponentially for
  k > x, so the truncation error is controlled).

* A classic fixed-step RK4 for non-Hermitian H (loss terms make the Chebyshev
  spectral boxing invalid).  The step obeys both the hard cap 0.05/(2J) and the
  per-step tolerance via the leading local-error model (rho*dt)^5/120 with rho
  a Gershgorin bound on the spectral radius.

Observers stream (t, psi) at every sample time; trajectories are never stored
here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.special import jv

from .errors import ConsistencyError, ResourceError, ValidityError
from .hamiltonian import SparseHamiltonian
from .states import StateVector

Observer = Callable[[float, StateVector], None]

DENSE_ORACLE_MAX_DIM = 5000
RK4_STEP_CAP_2J = 0.05  # step <= 0.05/(2J)


@dataclass(frozen=True)
class EvolutionPlan:
    """Sampling plan; times are in units of 1/J (use .from_gamma for 1/Gamma)."""

    t_max: float
    sample_dt: float
    method: str = "auto"  # auto | chebyshev | rk4
    tolerance: float = 1e-9

    def __post_init__(self) -> None:
        if self.t_max <= 0 or self.sample_dt <= 0:
            raise ValidityError("t_max and sample_dt must be > 0")
        if self.tolerance <= 0:
            raise ValidityError("tolerance must be > 0")
        if self.method not in ("auto", "chebyshev", "rk4"):
            raise ValidityError(f"unknown method {self.method!r}")

    @classmethod
    def from_gamma(
        cls,
        t_max_gamma: float,
        gamma: float,
        sample_dt_gamma: float = 0.5,
        method: str = "auto",
        tolerance: float = 1e-9,
    ) -> "EvolutionPlan":
        return cls(
            t_max=t_max_gamma / gamma,
            sample_dt=sample_dt_gamma / gamma,
            method=method,
            tolerance=tolerance,
        )

    def sample_times(self) -> np.ndarray:
        n = int(math.ceil(self.t_max / self.sample_dt - 1e-12))
        times = self.sample_dt * np.arange(1, n + 1)
        times[-1] = min(times[-1], self.t_max)
        return times


def _chebyshev_coefficients(x: float, tol: float) -> np.ndarray:
    """(2 - delta_k0) (-i)^k J_k(x) truncated below tol."""
    k_max = int(x + 30 + 12.0 * x ** (1.0 / 3.0))
    while True:
        ks = np.arange(k_max + 1)
        bessel = jv(ks, x)
        below = np.abs(bessel) < tol * 1e-2
        if below[-3:].all():
            break
        k_max *= 2
        if k_max > 10_000_000:
            raise ResourceError("Chebyshev series failed to converge")
    significant = np.nonzero(np.abs(bessel) >= tol * 1e-2)[0]
    cutoff = min(len(bessel), int(significant[-1]) + 3) if significant.size else 2
    coeff = bessel[:cutoff].astype(np.complex128)
    coeff *= (-1j) ** np.arange(cutoff)
    coeff[1:] *= 2.0
    return coeff


def _chebyshev_step(
    mat, psi: np.ndarray, coeff: np.ndarray, a: float, b: float, dt: float
) -> np.ndarray:
    """One step exp(-i H dt) psi via the T_k recurrence on Hn = (H - b)/a."""
    t_prev = psi
    t_curr = (mat @ psi - b * psi) / a
    acc = coeff[0] * t_prev + coeff[1] * t_curr
    for c in coeff[2:]:
        t_next = 2.0 * (mat @ t_curr - b * t_curr) / a - t_prev
        acc += c * t_next
        t_prev, t_curr = t_curr, t_next
    return acc * np.exp(-1j * b * dt)


def _rk4_substep(mat, psi: np.ndarray, dt: float) -> np.ndarray:
    k1 = -1j * (mat @ psi)
    k2 = -1j * (mat @ (psi + 0.5 * dt * k1))
    k3 = -1j * (mat @ (psi + 0.5 * dt * k2))
    k4 = -1j * (mat @ (psi + dt * k3))
    return psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve(
    h: SparseHamiltonian,
    psi0: StateVector,
    plan: EvolutionPlan,
    observer: Observer | None = None,
) -> StateVector:
    """Evolve psi0 under h, streaming samples to the observer; returns psi(t_max)."""
    if psi0.basis.dim != h.dim:
        raise ConsistencyError(f"state dim {psi0.basis.dim} != Hamiltonian dim {h.dim}")
    method = plan.method
    if method == "auto":
        method = "chebyshev" if h.hermitian else "rk4"
    if method == "chebyshev" and not h.hermitian:
        raise ValidityError("the Chebyshev propagator requires a Hermitian Hamiltonian")

    mat = h.matrix
    psi = psi0.amps.copy()
    times = plan.sample_times()

    if observer is not None:
        observer(0.0, StateVector(psi0.basis, psi))

    if method == "chebyshev":
        lo, hi = h.gershgorin_interval()
        half = 0.5 * (hi - lo)
        a = half * (1.0 + 1e-9) + 1e-12
        b = 0.5 * (hi + lo)
        coeff_cache: dict[float, np.ndarray] = {}
        t_now = 0.0
        for t in times:
            dt = t - t_now
            key = round(dt, 15)
            if key not in coeff_cache:
                coeff_cache[key] = _chebyshev_coefficients(a * dt, plan.tolerance)
            psi = _chebyshev_step(mat, psi, coeff_cache[key], a, b, dt)
            t_now = t
            _check_finite(psi, t)
            if observer is not None:
                observer(t, StateVector(psi0.basis, psi))
    else:
        rho = h.spectral_radius_bound()
        cap = RK4_STEP_CAP_2J / (2.0 * h.basis.model.j_hop)
        tol_step = 0.8 * (120.0 * plan.tolerance) ** 0.2 / max(rho, 1e-30)
        dt_target = min(cap, tol_step)
        t_now = 0.0
        for t in times:
            span = t - t_now
            n_sub = max(1, int(math.ceil(span / dt_target - 1e-12)))
            dt = span / n_sub
            for _ in range(n_sub):
                psi = _rk4_substep(mat, psi, dt)
            t_now = t
            _check_finite(psi, t)
            if observer is not None:
                observer(t, StateVector(psi0.basis, psi))

    return StateVector(psi0.basis, psi)


def _check_finite(psi: np.ndarray, t: float) -> None:
    if not np.all(np.isfinite(psi.view(np.float64))):
        raise ValidityError(f"evolution produced non-finite amplitudes at t = {t:g}")


def expm_dense_oracle(h: SparseHamiltonian, t: float, psi0: StateVector) -> StateVector:
    """Dense matrix-exponential reference (scaling-and-squaring), dim <= 5000."""
    if h.dim > DENSE_ORACLE_MAX_DIM:
        raise ResourceError(
            f"dense oracle limited to dim <= {DENSE_ORACLE_MAX_DIM}, got {h.dim}"
        )
    if psi0.basis.dim != h.dim:
        raise ConsistencyError("state dimension does not match the Hamiltonian")
    u = scipy.linalg.expm(-1j * t * h.to_dense())
    return StateVector(psi0.basis, u @ psi0.amps)
