"""Nonlinear VPFP time integrator in double-Fourier variables.

Strang splitting: a half step of the exact linear transport/Fokker-Planck
flow, a full explicit Heun substep of the electric terms (density re-read
at each internal stage), and another half linear step.  The electric terms
at mode k are

    -rho(k) (eta/k) mu_hat(eta)                 (linear coupling)
    -sum_{l != 0} rho(l) (eta/l) h_hat(k-l, eta)  (quadratic coupling)

with the mode convolution truncated at |k|, |k-l| <= Kmax.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _core
from .errors import BlowUpError, ConfigurationError, PositivityError, TruncationWarning
from .linflow import char_eta, linear_step
from .spectral import (
    GevreyWeight,
    Grid,
    SpectralState,
    StabilityConstants,
    boundary_residual,
    gevrey_radius,
    inverse_transform,
    mass_residual,
    maxwellian,
    maxwellian_hat,
    multiplier_values,
    reality_residual,
    saturating_clock,
    zero_state,
)

INVARIANT_TOL = 1e-12


@dataclass
class SimConfig:
    """Run configuration: grid, physics, initial data, toggles, recording."""

    grid: Grid
    nu: float = 0.0
    dt: float = 0.05
    T_end: float = 10.0
    eps: float = 1e-3
    # per-mode Gaussian bumps: k -> (amplitude, eta-center, eta-width)
    modes: dict = field(default_factory=lambda: {1: (1.0, 0.0, 1.0)})
    linear_on: bool = True
    nonlinear_on: bool = True
    stride: int = 10
    check_invariants: bool = True
    compute_entropy: bool = False
    compute_bootstrap: bool = False
    weight: GevreyWeight = field(default_factory=GevreyWeight)
    stability: StabilityConstants = field(default_factory=StabilityConstants)

    def __post_init__(self):
        if self.dt <= 0 or self.eps < 0 or self.nu < 0:
            raise ConfigurationError("need dt > 0, eps >= 0, nu >= 0")
        if self.dt > self.dt_max() * (1 + 1e-12):
            raise ConfigurationError(
                f"dt = {self.dt} exceeds dt_max = {self.dt_max():.4g} for this grid"
            )

    def dt_max(self):
        """Cap keeping per-step back-maps within one window pad."""
        return 0.1 / max(1.0, self.nu * self.grid.eta_max * self.grid.Kmax)


@dataclass
class DensityTrace:
    """Per-step density and field samples, rows indexed like grid.modes."""

    times: np.ndarray
    rho_hat: np.ndarray  # (nt, 2K+1) complex
    efield_hat: np.ndarray  # (nt, 2K+1) complex

    def mode(self, k, Kmax=None):
        K = (self.rho_hat.shape[1] - 1) // 2 if Kmax is None else Kmax
        return self.rho_hat[:, k + K]

    def field_invariant_residual(self, modes):
        """max |E_hat(k) + i rho_hat(k)/k| over k != 0 plus |E_hat(0)|."""
        res = np.abs(self.efield_hat[:, modes == 0]).max() if (modes == 0).any() else 0.0
        for i, k in enumerate(modes):
            if k == 0:
                continue
            res = max(res, float(np.abs(self.efield_hat[:, i] + 1j * self.rho_hat[:, i] / k).max()))
        return res


@dataclass
class RunResult:
    config: SimConfig
    trace: DensityTrace
    snapshot_times: np.ndarray
    snapshots: list
    mode_norms: np.ndarray  # (nt, 2K+1) real, L2(d eta) per mode
    diagnostics: dict
    final_state: SpectralState


def initial_state(config):
    """Per-mode Gaussian bumps, mirrored to -k so the field is real."""
    grid = config.grid
    st = zero_state(grid, nu=config.nu)
    eta = grid.eta
    for k, (amp, eta0, sigma) in config.modes.items():
        if abs(k) > grid.Kmax:
            raise ConfigurationError(f"initial mode {k} outside cutoff")
        if sigma <= 0:
            raise ConfigurationError("mode width must be positive")
        prof = config.eps * amp * np.exp(-((eta - eta0) ** 2) / (2.0 * sigma**2))
        st.values[grid.k_row(k)] += prof
        if k != 0 and -k not in config.modes:
            st.values[grid.k_row(-k)] += config.eps * amp * np.exp(
                -((eta + eta0) ** 2) / (2.0 * sigma**2)
            )
    st.values[grid.k_row(0), grid.izero] = 0.0  # mean-zero perturbation
    return st


def density(state):
    """rho_hat(t, k) = h_hat(t, k, 0): the eta = 0 column."""
    return state.values[:, state.grid.izero].copy()


def efield(rho, modes):
    """E_hat(k) = -i rho_hat(k)/k for k != 0; E_hat(0) = 0."""
    out = np.zeros_like(rho)
    nz = modes != 0
    out[nz] = -1j * rho[nz] / modes[nz]
    return out


def electric_rhs(state, linear_on=True, nonlinear_on=True):
    """Increment of h_hat from the electric-field couplings (no transport)."""
    grid = state.grid
    rho = density(state)
    out = np.zeros_like(state.values)
    if linear_on:
        muh = maxwellian_hat(grid.eta)
        for i, k in enumerate(grid.modes):
            if k != 0:
                out[i] -= rho[i] * (grid.eta / k) * muh
    if nonlinear_on:
        out += _core.mode_convolve(state.values, rho, grid.eta)
    return out


def step(state, dt, config):
    """One Strang step; raises BlowUpError on NaN/Inf."""
    st = linear_step(state, dt / 2.0)
    k1 = electric_rhs(st, config.linear_on, config.nonlinear_on)
    mid = SpectralState(st.grid, st.time, st.values + dt * k1, st.nu)
    k2 = electric_rhs(mid, config.linear_on, config.nonlinear_on)
    st = SpectralState(st.grid, st.time, st.values + 0.5 * dt * (k1 + k2), st.nu)
    st = linear_step(st, dt / 2.0)
    st.time = state.time + dt  # avoid drift from summed halves
    if not np.all(np.isfinite(st.values)):
        raise BlowUpError(st.time)
    return st


def run(config):
    """March to T_end recording density, field, per-mode norms, diagnostics."""
    grid = config.grid
    state = initial_state(config)
    nt = int(round(config.T_end / config.dt))
    times = np.zeros(nt + 1)
    rho = np.zeros((nt + 1, 2 * grid.Kmax + 1), dtype=complex)
    norms = np.zeros((nt + 1, 2 * grid.Kmax + 1))
    snapshots = [state.copy()]
    snapshot_times = [0.0]
    diagnostics = {"boundary": [], "entropy": [], "bootstrap": [], "diag_times": []}
    rho[0] = density(state)
    norms[0] = np.sqrt(grid.deta * np.sum(np.abs(state.values) ** 2, axis=1))

    def record_diag(st, upto):
        diagnostics["diag_times"].append(st.time)
        diagnostics["boundary"].append(boundary_residual(st))
        if config.compute_entropy:
            try:
                diagnostics["entropy"].append(entropy_energy(st))
            except PositivityError:
                diagnostics["entropy"].append(np.nan)
        if config.compute_bootstrap:
            diagnostics["bootstrap"].append(
                bootstrap_functionals(
                    st,
                    times[: upto + 1],
                    rho[: upto + 1],
                    config.weight,
                    config.stability,
                )
            )

    record_diag(state, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("once", TruncationWarning)
        for n in range(1, nt + 1):
            try:
                state = step(state, config.dt, config)
            except BlowUpError as exc:
                trace = DensityTrace(times[:n], rho[:n], efield_at(rho[:n], grid.modes))
                raise BlowUpError(exc.time, trace) from None
            times[n] = state.time
            rho[n] = density(state)
            norms[n] = np.sqrt(grid.deta * np.sum(np.abs(state.values) ** 2, axis=1))
            if config.check_invariants:
                scale = max(1.0, float(np.abs(state.values).max()))
                if mass_residual(state) > INVARIANT_TOL:
                    raise BlowUpError(state.time)
                if reality_residual(state) > INVARIANT_TOL * scale:
                    raise BlowUpError(state.time)
            if n % config.stride == 0 or n == nt:
                snapshots.append(state.copy())
                snapshot_times.append(state.time)
                record_diag(state, n)

    trace = DensityTrace(times, rho, efield_at(rho, grid.modes))
    return RunResult(
        config,
        trace,
        np.asarray(snapshot_times),
        snapshots,
        norms,
        diagnostics,
        state,
    )


def efield_at(rho, modes):
    out = np.zeros_like(rho)
    nz = modes != 0
    out[:, nz] = -1j * rho[:, nz] / modes[nz]
    return out


# ---------------------------------------------------------------------------
# diagnostics


def entropy_energy(state):
    """Energy-entropy: integral F log(F/mu) dv dx + (1/2) integral E^2 dx.

    F = mu + h on the physical grid; requires F > 0 pointwise (small
    perturbations).  The relative entropy is evaluated as
    (mu+h) log1p(h/mu) - h, which integrates to the same value (h is
    mean-zero) without cancellation; the field part is summed spectrally.
    """
    grid = state.grid
    h = inverse_transform(state)
    mu = maxwellian(grid.v)[None, :]
    F = mu + h
    if np.any(F <= 0):
        raise PositivityError("F = mu + h not positive on the physical grid")
    dx = 2.0 * np.pi / grid.Nx
    rel = F * np.log1p(h / mu) - h
    entropy = float(np.sum(rel) * dx * grid.dv)
    rho = density(state)
    e = efield(rho, state.grid.modes)
    field = float(np.pi * np.sum(np.abs(e) ** 2))  # (1/2) * 2 pi sum |E_k|^2
    return entropy + field


def _shifted_profile(state):
    """f_hat(t, k, eta) = h_hat(t, k, char_eta(t, k, eta)) on the eta grid."""
    grid = state.grid
    t, nu = state.time, state.nu
    if nu == 0.0:
        a, gexp = 1.0, t
    else:
        a = float(np.exp(nu * t))
        gexp = float(np.expm1(nu * t) / nu)
    shifts = -grid.modes.astype(float) * gexp
    return _core.affine_gather(state.values, a, shifts, grid.eta[0], grid.deta)


def bootstrap_functionals(state, times, rho_history, w, sc, b_small=0.01):
    """The four monitored quantities along a run.

    hrho: time-integrated weighted density norm up to the current time;
    top_energy: the top-order moment energy; ed_energy: the hypocoercivity
    energy with its nu^{2/3} cross term; h0_thermal: the weighted norm of
    the spatially homogeneous part.  K_j = 100^j and the cross-term weight
    b_small are conventional choices.
    """
    grid = state.grid
    t, nu = state.time, state.nu
    clock = saturating_clock(t, nu)

    # (1) time-integrated density norm
    kk = grid.modes.astype(float)
    integrand = np.zeros(len(times))
    for i, ti in enumerate(times):
        cl = saturating_clock(ti, nu)
        freq = kk * cl
        amp = multiplier_values(ti, kk, freq, 0.5, w, nu) * np.abs(rho_history[i])
        integrand[i] = float(
            np.sum(np.abs(kk) * amp**2)
            * np.exp(2.0 * sc.delta * nu ** (1.0 / 3) * ti)
            * (1.0 + cl * cl) ** 4
        )
    hrho = float(np.sqrt(np.trapezoid(integrand, times))) if len(times) > 1 else 0.0

    # moment-weighted energies of the shifted profile
    fhat = _shifted_profile(state)
    eta = grid.eta
    phase_fwd = np.exp(-1j * np.outer(eta, grid.v))
    phase_inv = np.exp(1j * np.outer(eta, grid.v))
    a0 = multiplier_values(t, kk[:, None], eta[None, :], 0.0, w, nu)
    a2 = multiplier_values(t, kk[:, None], eta[None, :], 2.0, w, nu)
    chi = char_eta(t, kk[:, None], eta[None, :], nu)
    top = 0.0
    ed = 0.0
    cv = (grid.deta / (2.0 * np.pi)) * fhat @ phase_inv  # mixed (k, v) representation
    for alpha in range(w.m + 1):
        if alpha == 0:
            galpha = fhat
        else:
            # v^alpha applied in physical velocity, then back to frequency
            galpha = grid.dv * (cv * (grid.v**alpha)[None, :]) @ phase_fwd
        kfac = 100.0**alpha
        damp = np.exp(-2.0 * (alpha + 1) * nu * t)
        top += damp / kfac * grid.deta * float(np.sum(np.abs(a2 * galpha) ** 2))
        grad2 = (kk**2)[:, None] * a0 * galpha
        cross = np.abs(chi) * np.abs(kk)[:, None] * a0 * np.abs(galpha)
        ed += (
            damp
            / kfac
            * grid.deta
            * float(np.sum(np.abs(grad2) ** 2) + b_small * nu ** (2.0 / 3) * np.sum(cross**2))
        )

    # spatially homogeneous part with the contracted-frequency weight
    h0 = state.values[grid.k_row(0)]
    decay = float(np.exp(-nu * t))
    wts = np.exp(gevrey_radius(clock, decay * np.abs(eta), w))
    from .spectral import velocity_norm

    h0_thermal = velocity_norm(wts * h0, grid, w.beta + 1.0, w.m)

    return {
        "hrho": hrho,
        "top_energy": float(top),
        "ed_energy": float(ed),
        "h0_thermal": float(h0_thermal),
    }
