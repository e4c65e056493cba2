"""Exact propagators for the linear transport + Fokker-Planck dynamics.

The frequency-space characteristic of transport with friction is

    char_eta(t, k, eta) = e^{nu t} eta - k (e^{nu t} - 1)/nu    (eta - k t at nu = 0),

and the linear flow damps along it by S = exp(-nu * integral char_eta^2).
The exponent has the closed form

    J(T; k, eta0) = eta0^2/2 * E(2x) - k eta0 nu T^2 C1(x) + k^2 nu T^3 C2(x),

with x = nu T, E = expm1, and the entire functions

    C1(x) = [E(2x) - 2 E(x)]/x^2 = sum_n (2^{n+2}-2) x^n / (n+2)!,
    C2(x) = [E(2x)/2 - 2 E(x) + x]/x^3 = sum_n (2^{n+2}-2) x^n / (n+3)!.

Series evaluation below |x| = 0.5 removes the catastrophic cancellation the
naive expm1 combination has for small nu*t; above the switch the direct
combination loses at most about one digit.
"""

from math import factorial

import numpy as np

from . import _core
from .constants import EXP_MAX, SERIES_SWITCH
from .errors import ConfigurationError
from .spectral import SpectralState, saturating_clock

_N_SERIES = 22
_C1_COEF = np.array([(2.0 ** (n + 2) - 2.0) / factorial(n + 2) for n in range(_N_SERIES)])
_C2_COEF = np.array([(2.0 ** (n + 2) - 2.0) / factorial(n + 3) for n in range(_N_SERIES)])


def _poly(coefs, x):
    out = np.zeros_like(x)
    for c in coefs[::-1]:
        out = out * x + c
    return out


def _c1(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_SWITCH
    out = np.empty_like(x)
    out[small] = _poly(_C1_COEF, x[small])
    xl = x[~small]
    out[~small] = (np.expm1(2.0 * xl) - 2.0 * np.expm1(xl)) / xl**2
    return out


def _c2(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_SWITCH
    out = np.empty_like(x)
    out[small] = _poly(_C2_COEF, x[small])
    xl = x[~small]
    out[~small] = (0.5 * np.expm1(2.0 * xl) - 2.0 * np.expm1(xl) + xl) / xl**3
    return out


def char_eta(t, k, eta, nu):
    """Frequency-space characteristic e^{nu t} eta - k (e^{nu t}-1)/nu.

    Total for nu*t <= 700 (beyond that e^{nu t} overflows and the admissible
    horizon is reported); exact nu = 0 branch eta - k*t.
    """
    t = np.asarray(t, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if nu == 0.0:
        out = eta - k * t
        return out if out.ndim else float(out)
    if np.any(nu * t > EXP_MAX):
        raise ConfigurationError(
            f"nu*t exceeds {EXP_MAX:.0f}; admissible horizon t <= {EXP_MAX / nu:.3g}"
        )
    x = nu * t
    out = np.exp(x) * eta - k * np.expm1(x) / nu
    return out if out.ndim else float(out)


def damping_exponent(span, k, eta0, nu):
    """nu * integral_0^span char_eta(w, k, eta0)^2 dw in closed form."""
    eta0 = np.asarray(eta0, dtype=float)
    if nu == 0.0:
        out = np.zeros_like(eta0)
        return out if out.ndim else 0.0
    x = nu * span
    if x > EXP_MAX / 2:
        raise ConfigurationError(f"nu*span exceeds {EXP_MAX / 2:.0f}")
    e2 = np.expm1(2.0 * x)
    out = (
        0.5 * eta0**2 * e2
        - k * eta0 * nu * span**2 * _c1(np.asarray(x))
        + k * k * nu * span**3 * _c2(np.asarray(x))
    )
    return out if out.ndim else float(out)


def damping_exponent_quadrature(span, k, eta0, nu, nodes=96):
    """Gauss-Legendre fallback for the damping exponent (oracle path)."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    w = 0.5 * span * (xg + 1.0)
    vals = char_eta(w, k, eta0, nu) ** 2
    return float(nu * 0.5 * span * np.dot(wg, vals))


def damping_factor(t, tau, k, eta, nu):
    """S(t, tau, k, eta) = exp(-nu * integral_tau^t char_eta(w, k, eta)^2 dw).

    Reduced to the span form through the flow property: the characteristic
    restarted at tau from char_eta(tau, k, eta) retraces the original one.
    """
    if tau > t:
        raise ConfigurationError("need tau <= t")
    eta_mid = char_eta(tau, k, eta, nu)
    j = damping_exponent(t - tau, k, eta_mid, nu)
    return np.exp(-np.minimum(j, EXP_MAX)) if np.ndim(j) else float(np.exp(-min(j, EXP_MAX)))


def damping_factor_k(span, k, nu):
    """Shorthand S(span, k): damping along the density-extraction frequency.

    Equals exp(-k^2 nu span^3 C2(-nu*span)); at nu*span << 1 this is the
    enhanced-dissipation exponent exp(-nu k^2 span^3 / 3).
    """
    span = np.asarray(span, dtype=float)
    if nu == 0.0:
        out = np.ones_like(span)
        return out if out.ndim else 1.0
    j = k * k * nu * span**3 * _c2(-nu * span)
    out = np.exp(-np.minimum(j, EXP_MAX))
    return out if out.ndim else float(out)


def linear_step(state, dt):
    """Advance the free transport + Fokker-Planck flow exactly over dt.

    Per mode k the new value at frequency zeta is the old value at the
    back-mapped frequency  a*zeta + k*(1-a)/nu  (a = e^{-nu dt}), gathered by
    local cubic interpolation, times exp(-J(dt; k, back-mapped point)).
    Values back-mapped from outside the window read as zero; a
    TruncationWarning fires if non-negligible content sits in the strip
    that feeds from outside.
    """
    if dt < 0:
        raise ConfigurationError("dt must be nonnegative")
    grid = state.grid
    if dt == 0.0:
        return state.copy()
    nu = state.nu
    a = float(np.exp(-nu * dt)) if nu > 0 else 1.0
    gdt = saturating_clock(dt, nu)
    shifts = grid.modes.astype(float) * gdt

    # strip of cells that read from outside the window
    pad = int(np.ceil((np.abs(shifts).max() + (1.0 - a) * grid.eta_max) / grid.deta)) + 2
    peak = np.abs(state.values).max()
    if peak > 0:
        strip = max(np.abs(state.values[:, :pad]).max(), np.abs(state.values[:, -pad:]).max())
        if strip > 1e-10 * peak:
            import warnings

            from .errors import TruncationWarning

            # constant text so a "once" filter can deduplicate across steps
            warnings.warn(
                "non-negligible content in the eta-boundary back-map strip",
                TruncationWarning,
            )

    gathered = _core.affine_gather(state.values, a, shifts, grid.eta[0], grid.deta)
    if nu == 0.0:
        return SpectralState(grid, state.time + dt, gathered, nu)
    eta0 = a * grid.eta[None, :] + shifts[:, None]  # back-mapped frequencies
    j = np.empty_like(eta0)
    for i, k in enumerate(grid.modes):
        j[i] = damping_exponent(dt, float(k), eta0[i], nu)
    vals = gathered * np.exp(-np.minimum(j, EXP_MAX))
    return SpectralState(grid, state.time + dt, vals, nu)


def fp_semigroup(g_hat, t, nu, grid):
    """Exact homogeneous Fokker-Planck (OU) semigroup in Fourier variables.

    g_hat(t, eta) = g_hat(0, e^{-nu t} eta) * exp(-eta^2 (1 - e^{-2 nu t})/2).
    The contracted argument always lies inside the window, so the gather
    never extrapolates.  Preserves g_hat at eta = 0 exactly.
    """
    if t < 0:
        raise ConfigurationError("t must be nonnegative")
    g_hat = np.ascontiguousarray(g_hat, dtype=complex)
    if nu == 0.0 or t == 0.0:
        return g_hat.copy()
    a = float(np.exp(-nu * t))
    q = a * grid.eta
    contracted = _core.gather_points(g_hat, q, grid.eta[0], grid.deta)
    spread = -np.expm1(-2.0 * nu * t)  # 1 - e^{-2 nu t}
    return contracted * np.exp(-grid.eta**2 * spread / 2.0)


def decay_window_ratio(nu, t_grid, nu_max=0.1):
    """sup over the grid of <t> / (<nu t> <clock(t)>); bounded by 2 for nu < 0.1.

    The two-regime argument (nu t <= 1 uses clock >= (1-1/e) t, nu t >= 1
    uses clock >= (1-1/e)/nu) gives the constant 1/(1-1/e) ~ 1.582.
    """
    if nu >= nu_max:
        raise ConfigurationError(f"nu must be below {nu_max}")
    t = np.asarray(t_grid, dtype=float)
    clock = saturating_clock(t, nu)
    ratio = np.hypot(1.0, t) / (np.hypot(1.0, nu * t) * np.hypot(1.0, clock))
    i = int(np.argmax(ratio))
    return {"sup": float(ratio[i]), "argmax_t": float(t[i]), "bound": 2.0}
