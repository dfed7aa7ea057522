"""Detector response amplitude chi_k(tau) and derived quantities.

The response of cavity mode k to a detector with coupling lam moving
along x(tau) is the complex amplitude

    chi_k(tau) = -i * lam * Integral_0^tau F_k(x(t)) * exp(i*omega_k*t) dt,

with F_k the mode profile. Closed forms exist for a static detector and
for inertial motion; uniformly accelerated motion is handled by an
oscillation-aware adaptive quadrature. Once the detector reaches the
right wall the integrand vanishes (F_k(L) = 0), so every chi_k freezes
at its wall-arrival value; the integration explicitly stops there.

The inertial closed form has a removable singularity where the
mode-crossing frequency omega_L = k*pi*v/(L*sqrt(1-v^2)) matches
omega_k. Inside a narrow band around that resonance the evaluation
switches to an equivalent cancellation-free form whose envelope grows
linearly in tau (branch INERTIAL_RESONANCE_LIMIT).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from . import kernels
from .errors import InvalidParameterError, NumericalFailure
from .field import CavityConfig, ModeSpec
from .trajectory import TrajectoryKind, TrajectorySpec, wall_time

#: Half-width of the resonance band, relative to omega_k. Outside the band
#: the literal closed form loses at most ~1e-8 relative accuracy to
#: cancellation at double precision; inside it the limit branch takes over.
DELTA_RES = 1e-6

#: Default absolute tolerance of the adaptive quadrature (on chi itself).
DEFAULT_TOL = 1e-10

_MAX_PANELS = 400_000
_MAX_ROUNDS = 48


class ChiBranch(Enum):
    STATIC_CLOSED_FORM = "static-closed-form"
    INERTIAL_CLOSED_FORM = "inertial-closed-form"
    INERTIAL_RESONANCE_LIMIT = "inertial-resonance-limit"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class ChiValue:
    """Complex response amplitude with evaluation metadata."""

    value: complex
    branch: ChiBranch
    err_estimate: float = 0.0


@dataclass(frozen=True)
class CouplingSpec:
    """Detector-field coupling strength (dimensionless in natural units)."""

    lam: float

    def __post_init__(self):
        if self.lam < 0:
            raise InvalidParameterError(f"coupling lam={self.lam} must be non-negative")


def _cis_m1(theta):
    """exp(i*theta) - 1 evaluated without cancellation near theta = 0 mod 2*pi."""
    return -2.0 * np.sin(0.5 * theta) ** 2 + 1j * np.sin(theta)


def _seg(mu: float, tau):
    """Integral of exp(i*mu*t) over [0, tau], stable for small |mu*tau|.

    ``tau`` may be a scalar or an array.
    """
    tau = np.asarray(tau, dtype=float)
    if mu == 0.0:
        return tau.astype(complex)
    return _cis_m1(mu * tau) / (1j * mu)


def _seg_array(mu, tau):
    mu = np.asarray(mu, dtype=float)
    out = np.empty(mu.shape, dtype=complex)
    nz = mu != 0.0
    out[nz] = _cis_m1(mu[nz] * tau) / (1j * mu[nz])
    out[~nz] = tau
    return out


def chi_static_amplitude(lam_f, omega, tau):
    """Static response -lam_f*(exp(i*omega*tau) - 1)/omega for drive amplitude lam_f.

    ``tau`` may be a scalar or an array.
    """
    return -lam_f * _cis_m1(omega * np.asarray(tau, dtype=float)) / omega


def chi_static(mode: ModeSpec, coupling: CouplingSpec, x0: float, tau: float) -> ChiValue:
    """Closed-form response of a detector at rest at x0.

    |chi|^2 = 4*(lam*F/omega)^2 * sin^2(omega*tau/2), periodic in tau
    with period 2*pi/omega.
    """
    if tau < 0:
        raise InvalidParameterError(f"proper time tau={tau} must be non-negative")
    val = chi_static_amplitude(coupling.lam * mode.profile(x0), mode.omega, float(tau))
    return ChiValue(complex(val), ChiBranch.STATIC_CLOSED_FORM, 0.0)


def _inertial_params(mode: ModeSpec, traj: TrajectorySpec):
    gamma = 1.0 / math.sqrt(1.0 - traj.v**2)
    omega_l = mode.k * math.pi * traj.v * gamma / mode.L
    phi = mode.k * math.pi * traj.x0 / mode.L
    return omega_l, phi


def _chi_inertial_closed(lam, k, omega, omega_l, phi, tau):
    """Literal closed form; cancels catastrophically when omega_l -> omega."""
    psi = omega_l * tau + phi
    num = (
        np.exp(1j * omega * tau) * (omega * np.sin(psi) + 1j * omega_l * np.cos(psi))
        - omega * math.sin(phi)
        - 1j * omega_l * math.cos(phi)
    )
    return lam * num / (math.sqrt(k * math.pi) * (omega_l**2 - omega**2))


def _chi_inertial_stable(lam, k, omega, omega_l, phi, tau):
    """Cancellation-free equivalent, exact through the resonance omega_l = omega.

    At resonance the slow term of the integrand stops oscillating and the
    envelope of |chi| grows linearly in tau.
    """
    seg_fast = _seg(omega + omega_l, tau)
    seg_slow = _seg(omega - omega_l, tau)
    integral = (np.exp(1j * phi) * seg_fast - np.exp(-1j * phi) * seg_slow) / 2j
    return -1j * lam / math.sqrt(k * math.pi) * integral


def chi_inertial_analytic(
    mode: ModeSpec, coupling: CouplingSpec, traj: TrajectorySpec, tau: float
) -> ChiValue:
    """Closed-form response for inertial motion, valid up to wall arrival.

    Selects INERTIAL_RESONANCE_LIMIT when |omega_L - omega_k| < DELTA_RES*omega_k.
    """
    if traj.kind is not TrajectoryKind.INERTIAL:
        raise InvalidParameterError(f"trajectory kind {traj.kind} is not inertial")
    if tau < 0:
        raise InvalidParameterError(f"proper time tau={tau} must be non-negative")
    t_wall = wall_time(traj)
    if tau > t_wall * (1.0 + 1e-12):
        raise InvalidParameterError(
            f"tau={tau} exceeds the wall-arrival time {t_wall}; "
            "the closed form only covers the moving segment"
        )
    omega_l, phi = _inertial_params(mode, traj)
    if abs(omega_l - mode.omega) >= DELTA_RES * mode.omega:
        val = _chi_inertial_closed(coupling.lam, mode.k, mode.omega, omega_l, phi, tau)
        branch = ChiBranch.INERTIAL_CLOSED_FORM
    else:
        val = _chi_inertial_stable(coupling.lam, mode.k, mode.omega, omega_l, phi, tau)
        branch = ChiBranch.INERTIAL_RESONANCE_LIMIT
    if not np.isfinite(val):
        raise NumericalFailure(
            f"non-finite inertial response at tau={tau} (omega_L={omega_l})"
        )
    return ChiValue(complex(val), branch, 0.0)


def critical_velocity(mode: ModeSpec) -> float:
    """Velocity at which the mode-crossing frequency matches omega_k.

    sqrt((1 + r^2)/(1 + 2*r^2)) with r = k*pi/(m*L); the massless limit
    is 1/sqrt(2).
    """
    if mode.m == 0.0:
        return 1.0 / math.sqrt(2.0)
    r = mode.k * math.pi / (mode.m * mode.L)
    return math.sqrt((1.0 + r * r) / (1.0 + 2.0 * r * r))


# ---------------------------------------------------------------------------
# adaptive quadrature
# ---------------------------------------------------------------------------


def _kernel_params(mode: ModeSpec, traj: TrajectorySpec):
    phi0 = mode.k * math.pi * traj.x0 / mode.L
    if traj.kind is TrajectoryKind.STATIC:
        return kernels.KIND_STATIC, phi0, 0.0, 0.0
    if traj.kind is TrajectoryKind.INERTIAL:
        omega_l, _ = _inertial_params(mode, traj)
        return kernels.KIND_INERTIAL, phi0, omega_l, 0.0
    cc = mode.k * math.pi / (mode.L * traj.a)
    return kernels.KIND_ACCELERATED, phi0, traj.a, cc


def _oscillation_breakpoints(mode: ModeSpec, traj: TrajectorySpec, t_end: float):
    """Panel edges resolving both the field phase and the mode-crossing phase.

    Panels never span more than 1/8 of a cycle of exp(i*omega_k*t) nor of
    the instantaneous mode-function oscillation along the worldline.
    """
    caps = [2.0 * math.pi / (8.0 * mode.omega)]
    if traj.kind is TrajectoryKind.INERTIAL:
        omega_l, _ = _inertial_params(mode, traj)
        if omega_l > 0:
            caps.append(2.0 * math.pi / (8.0 * omega_l))
    h = min(caps)
    n_uniform = max(1, math.ceil(t_end / h))
    pts = np.linspace(0.0, t_end, n_uniform + 1)
    if traj.kind is TrajectoryKind.ACCELERATED:
        cc = mode.k * math.pi / (mode.L * traj.a)
        sweep = cc * (math.cosh(traj.a * t_end) - 1.0)
        n_phase = math.ceil(sweep / (math.pi / 4.0))
        if n_phase > 1:
            theta = np.arange(1, n_phase) * (sweep / n_phase)
            t_phase = np.arccosh(1.0 + theta / cc) / traj.a
            pts = np.union1d(pts, t_phase)
    return pts


def _adaptive_panels(kind, phi0, rate, cc, omega, breakpoints, tol_i):
    lo = breakpoints[:-1]
    hi = breakpoints[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    vals, errs = kernels.panel_integrals(kind, phi0, rate, cc, omega, lo, hi)
    rounds = 0
    while errs.sum() > tol_i:
        if rounds >= _MAX_ROUNDS or lo.size >= _MAX_PANELS:
            return lo, hi, vals, errs, False
        thresh = tol_i / (2.0 * lo.size)
        mask = errs > thresh
        if not mask.any():
            break
        mid = 0.5 * (lo[mask] + hi[mask])
        new_lo = np.concatenate([lo[mask], mid])
        new_hi = np.concatenate([mid, hi[mask]])
        new_vals, new_errs = kernels.panel_integrals(kind, phi0, rate, cc, omega, new_lo, new_hi)
        lo = np.concatenate([lo[~mask], new_lo])
        hi = np.concatenate([hi[~mask], new_hi])
        vals = np.concatenate([vals[~mask], new_vals])
        errs = np.concatenate([errs[~mask], new_errs])
        order = np.argsort(lo, kind="stable")
        lo, hi, vals, errs = lo[order], hi[order], vals[order], errs[order]
        rounds += 1
    return lo, hi, vals, errs, True


def _quadrature_prefix(mode, coupling, traj, taus, tol):
    """chi at every grid time in one adaptive pass (cumulative panel sums).

    Grid times are inserted as panel edges, so each chi(tau) is an exact
    prefix of the panel decomposition; times past the wall-arrival time
    reuse the frozen full integral. Raises NumericalFailure with the best
    per-sample estimates attached when refinement stalls.
    """
    taus = np.asarray(taus, dtype=float)
    pref = coupling.lam / math.sqrt(mode.k * math.pi)
    if coupling.lam == 0.0 or taus.size == 0:
        return np.zeros(taus.shape, dtype=complex), np.zeros(taus.shape)
    t_wall = wall_time(traj)
    t_end = float(np.max(taus))
    if t_wall is not None:
        t_end = min(t_end, t_wall)
    if t_end <= 0.0:
        return np.zeros(taus.shape, dtype=complex), np.zeros(taus.shape)
    t_clip = np.minimum(taus, t_end)
    bps = _oscillation_breakpoints(mode, traj, t_end)
    bps = np.union1d(bps, t_clip[t_clip > 0.0])
    kind, phi0, rate, cc = _kernel_params(mode, traj)
    tol_i = tol / max(pref, 1e-300)
    lo, hi, vals, errs, converged = _adaptive_panels(
        kind, phi0, rate, cc, mode.omega, bps, tol_i
    )
    cum_vals = np.concatenate([[0.0 + 0.0j], np.cumsum(vals)])
    cum_errs = np.concatenate([[0.0], np.cumsum(errs)])
    idx = np.searchsorted(hi, t_clip, side="right")
    chi_vals = -1j * pref * cum_vals[idx]
    chi_errs = pref * cum_errs[idx]
    if not converged:
        raise NumericalFailure(
            f"quadrature did not reach tol={tol} after {lo.size} panels "
            f"(error estimate {pref * errs.sum():.3e})",
            best=(chi_vals, chi_errs),
            err_estimate=pref * errs.sum(),
        )
    return chi_vals, chi_errs


def chi_quadrature(
    mode: ModeSpec,
    coupling: CouplingSpec,
    traj: TrajectorySpec,
    tau: float,
    tol: float = DEFAULT_TOL,
) -> ChiValue:
    """Response by adaptive oscillation-aware quadrature, any trajectory."""
    if tau < 0:
        raise InvalidParameterError(f"proper time tau={tau} must be non-negative")
    if not tol > 0:
        raise InvalidParameterError(f"tolerance tol={tol} must be positive")
    try:
        vals, errs = _quadrature_prefix(mode, coupling, traj, np.array([tau]), tol)
    except NumericalFailure as exc:
        best_vals, best_errs = exc.best
        raise NumericalFailure(
            str(exc),
            best=ChiValue(complex(best_vals[0]), ChiBranch.QUADRATURE, float(best_errs[0])),
            err_estimate=exc.err_estimate,
        ) from None
    return ChiValue(complex(vals[0]), ChiBranch.QUADRATURE, float(errs[0]))


def chi(
    mode: ModeSpec,
    coupling: CouplingSpec,
    traj: TrajectorySpec,
    tau: float,
    tol: float = DEFAULT_TOL,
    force_quadrature: bool = False,
) -> ChiValue:
    """Response amplitude with branch dispatch.

    Static and inertial trajectories use their closed forms (clamped at the
    wall-arrival time, past which chi is frozen); accelerated motion goes
    through quadrature. ``force_quadrature`` routes everything through
    quadrature, for validation runs.
    """
    if force_quadrature or traj.kind is TrajectoryKind.ACCELERATED:
        return chi_quadrature(mode, coupling, traj, tau, tol)
    if traj.kind is TrajectoryKind.STATIC:
        return chi_static(mode, coupling, traj.x0, tau)
    t_eff = min(tau, wall_time(traj))
    return chi_inertial_analytic(mode, coupling, traj, t_eff)


def chi_series(
    mode: ModeSpec,
    coupling: CouplingSpec,
    traj: TrajectorySpec,
    taus,
    tol: float = DEFAULT_TOL,
    force_quadrature: bool = False,
):
    """Vectorized chi over a time grid.

    Returns (values, err_estimates, branch). Closed-form branches carry
    zero error; the quadrature branch returns its best estimates even when
    refinement stalls (callers decide per-sample validity from the errors).
    """
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0):
        raise InvalidParameterError("grid times must be non-negative")
    if force_quadrature or traj.kind is TrajectoryKind.ACCELERATED:
        try:
            vals, errs = _quadrature_prefix(mode, coupling, traj, taus, tol)
        except NumericalFailure as exc:
            vals, errs = exc.best
        return vals, errs, ChiBranch.QUADRATURE
    if traj.kind is TrajectoryKind.STATIC:
        vals = chi_static_amplitude(coupling.lam * mode.profile(traj.x0), mode.omega, taus)
        return np.asarray(vals, dtype=complex), np.zeros(taus.shape), ChiBranch.STATIC_CLOSED_FORM
    t_eff = np.minimum(taus, wall_time(traj))
    omega_l, phi = _inertial_params(mode, traj)
    if abs(omega_l - mode.omega) >= DELTA_RES * mode.omega:
        vals = _chi_inertial_closed(coupling.lam, mode.k, mode.omega, omega_l, phi, t_eff)
        branch = ChiBranch.INERTIAL_CLOSED_FORM
    else:
        vals = _chi_inertial_stable(coupling.lam, mode.k, mode.omega, omega_l, phi, t_eff)
        branch = ChiBranch.INERTIAL_RESONANCE_LIMIT
    return np.asarray(vals, dtype=complex), np.zeros(taus.shape), branch


def chi_mode_sum(
    cavity: CavityConfig,
    coupling: CouplingSpec,
    traj: TrajectorySpec,
    tau: float,
    rel_tail_tol: float = 1e-9,
    k_max: int | None = None,
    hard_cap: int = 262_144,
    tol: float = DEFAULT_TOL,
) -> float:
    """Sum_k |chi_k(tau)|^2 over cavity modes.

    With ``k_max`` set, sums exactly modes 1..k_max (matched-truncation use,
    e.g. against a mode-by-mode simulation). Otherwise adds blocks of 16
    modes until a whole block contributes less than ``rel_tail_tol`` of the
    running sum; exceeding ``hard_cap`` raises NumericalFailure carrying
    the partial sum.
    """
    if not rel_tail_tol > 0:
        raise InvalidParameterError(f"rel_tail_tol={rel_tail_tol} must be positive")
    if tau < 0:
        raise InvalidParameterError(f"proper time tau={tau} must be non-negative")
    if coupling.lam == 0.0 or tau == 0.0:
        return 0.0
    if k_max is not None:
        if k_max < 1:
            raise InvalidParameterError(f"k_max={k_max} must be >= 1")
        return float(np.sum(_abs2_block(np.arange(1, k_max + 1), cavity, coupling, traj, tau, tol)))
    total = 0.0
    k_lo = 1
    while True:
        ks = np.arange(k_lo, k_lo + 16)
        block = float(np.sum(_abs2_block(ks, cavity, coupling, traj, tau, tol)))
        total += block
        if total > 0.0 and block < rel_tail_tol * total:
            return total
        k_lo += 16
        if k_lo > hard_cap:
            raise NumericalFailure(
                f"mode sum not converged after {hard_cap} modes (partial sum {total})",
                best=total,
            )


def _abs2_block(ks, cavity, coupling, traj, tau, tol):
    """|chi_k(tau)|^2 for an array of mode indices."""
    lam = coupling.lam
    L, m, x0 = cavity.L, cavity.m, traj.x0
    ks = np.asarray(ks)
    q = ks * math.pi / L
    omega = np.hypot(q, m)
    phi = q * x0
    t_wall = wall_time(traj)
    if traj.kind is TrajectoryKind.STATIC:
        f = np.sin(phi) / np.sqrt(ks * math.pi)
        return 4.0 * (lam * f / omega) ** 2 * np.sin(0.5 * omega * tau) ** 2
    if traj.kind is TrajectoryKind.INERTIAL:
        t_eff = min(tau, t_wall)
        gamma = 1.0 / math.sqrt(1.0 - traj.v**2)
        omega_l = q * traj.v * gamma
        integral = (
            np.exp(1j * phi) * _seg_array(omega + omega_l, t_eff)
            - np.exp(-1j * phi) * _seg_array(omega - omega_l, t_eff)
        ) / 2j
        return (lam**2 / (ks * math.pi)) * np.abs(integral) ** 2
    out = np.empty(ks.shape)
    for i, k in enumerate(ks):
        mode = ModeSpec(int(k), L, m)
        out[i] = abs(chi_quadrature(mode, coupling, traj, tau, tol).value) ** 2
    return out


def phase_beta(f, omega: float, tau0: float, tau: float, tol: float = 1e-9) -> float:
    """Accumulated phase of the forced-oscillator evolution.

    Evaluates the triangular double integral

        Integral_tau0^tau dt' Integral_tau0^t' dt'' f(t') f(t'') sin(omega*(t'-t''))

    by nested quadrature: the sine addition identity turns the inner
    integral into cumulative integrals of f*cos(omega*t) and f*sin(omega*t),
    evaluated on a uniform Simpson grid that is doubled until the result is
    stable to ``tol``. ``f`` is a callable drive amplitude.

    This phase is proportional to the squared drive, so it is common to the
    two detector-conditioned evolutions and cancels in the coherence ratio;
    it only matters for cross-checking the factorized evolution operator.
    """
    if tau < tau0:
        raise InvalidParameterError(f"tau={tau} must be >= tau0={tau0}")
    if tau == tau0:
        return 0.0
    prev = None
    for n in (512, 1024, 2048, 4096, 8192, 16384):
        t = np.linspace(tau0, tau, n + 1)
        ft = np.asarray(f(t), dtype=float) * np.ones(n + 1)
        c = cumulative_simpson(ft * np.cos(omega * t), x=t, initial=0.0)
        s = cumulative_simpson(ft * np.sin(omega * t), x=t, initial=0.0)
        inner = np.sin(omega * t) * c - np.cos(omega * t) * s
        val = float(simpson(ft * inner, x=t))
        if prev is not None and abs(val - prev) <= max(tol, tol * abs(val)):
            return val
        prev = val
    raise NumericalFailure(
        f"phase integral not converged to tol={tol}", best=prev
    )
