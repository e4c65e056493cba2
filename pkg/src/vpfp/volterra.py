"""Volterra density equation: memory kernel, Laplace transform, Penrose
margin, dispersion roots, resolvent, and direct/resolvent solvers.

The density of each spatial mode obeys

    rho(t) = H(t) - integral_0^t rho(tau) K(t - tau) d tau,

with the memory kernel K(t, k) = clock(t) mu_hat(k clock(t)) S(t, k), where
clock(t) = (1 - e^{-nu t})/nu.  The resolvent R solves R = K - R*K and gives
rho = H - H*R.  Stability is quantified by the contour margin
kappa = inf |1 + K_laplace| on Re z = -lambda_bar |k|.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import (
    ConfigurationError,
    QuadratureError,
    RefinementError,
    StabilityViolationError,
)
from .linflow import char_eta, damping_factor_k
from .spectral import maxwellian_hat, saturating_clock

# ---------------------------------------------------------------------------
# kernel


def memory_kernel(t, k, nu):
    """K(t, k) = clock(t) * mu_hat(k clock(t)) * S(t, k); vanishes at t = 0."""
    if k == 0:
        raise ConfigurationError("no zero-mode field: k must be nonzero")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ConfigurationError("t must be nonnegative")
    g = saturating_clock(t, nu)
    out = g * maxwellian_hat(k * g) * damping_factor_k(t, k, nu)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Filon-Simpson oscillatory quadrature (uniform grid, odd point count)


def _filon_coeffs(theta):
    """Classic Filon-Simpson alpha, beta, gamma; series below theta = 0.1."""
    th = np.asarray(theta, dtype=float)
    a = np.empty_like(th)
    b = np.empty_like(th)
    g = np.empty_like(th)
    small = th < 0.1
    ts = th[small]
    a[small] = 2 * ts**3 / 45 - 2 * ts**5 / 315 + 2 * ts**7 / 4725
    b[small] = 2.0 / 3 + 2 * ts**2 / 15 - 4 * ts**4 / 105 + 2 * ts**6 / 567
    g[small] = 4.0 / 3 - 2 * ts**2 / 15 + ts**4 / 210 - ts**6 / 11340
    tl = th[~small]
    s, c = np.sin(tl), np.cos(tl)
    a[~small] = (tl**2 + tl * s * c - 2 * s * s) / tl**3
    b[~small] = 2 * (tl * (1 + c * c) - 2 * s * c) / tl**3
    g[~small] = 4 * (s - tl * c) / tl**3
    return a, b, g


def _filon_real(f, t, omegas, chunk=256):
    """integral f(t) e^{-i omega t} dt for real f on a uniform odd-length grid.

    Error is O(h^4) uniformly in omega (the oscillation is integrated
    exactly against the panel quadratics).
    """
    n = len(t)
    if n % 2 != 1:
        raise ConfigurationError("Filon grid needs an odd number of points")
    h = t[1] - t[0]
    om = np.asarray(omegas, dtype=float)
    out = np.empty(len(om), dtype=complex)
    te, fe = t[::2], f[::2]
    to, fo = t[1::2], f[1::2]
    for i0 in range(0, len(om), chunk):
        sl = slice(i0, min(i0 + chunk, len(om)))
        w = om[sl]
        wa = np.abs(w)
        sgn = np.where(w >= 0, 1.0, -1.0)
        a, b, g = _filon_coeffs(wa * h)
        ce = fe[None, :] * np.cos(wa[:, None] * te[None, :])
        se = fe[None, :] * np.sin(wa[:, None] * te[None, :])
        Ce = ce.sum(axis=1) - 0.5 * (fe[0] * np.cos(wa * te[0]) + fe[-1] * np.cos(wa * te[-1]))
        Se = se.sum(axis=1) - 0.5 * (fe[0] * np.sin(wa * te[0]) + fe[-1] * np.sin(wa * te[-1]))
        Co = (fo[None, :] * np.cos(wa[:, None] * to[None, :])).sum(axis=1)
        So = (fo[None, :] * np.sin(wa[:, None] * to[None, :])).sum(axis=1)
        ic = h * (a * (f[-1] * np.sin(wa * t[-1]) - f[0] * np.sin(wa * t[0])) + b * Ce + g * Co)
        is_ = h * (a * (f[0] * np.cos(wa * t[0]) - f[-1] * np.cos(wa * t[-1])) + b * Se + g * So)
        out[sl] = ic - 1j * sgn * is_
    return out


def filon_exp(f, t, omegas):
    """integral f(t) e^{-i omega t} dt for complex f (two real passes)."""
    f = np.asarray(f)
    if np.iscomplexobj(f):
        return _filon_real(f.real, t, omegas) + 1j * _filon_real(f.imag, t, omegas)
    return _filon_real(f, t, omegas)


# ---------------------------------------------------------------------------
# Laplace transform of the kernel


def _envelope_truncation(k, nu, growth, tiny=1e-19, t_cap=2000.0):
    """Smallest T with K(t,k) e^{growth t} below tiny for all t >= T."""
    t = np.geomspace(1e-3, t_cap, 600)
    vals = memory_kernel(t, k, nu) * np.exp(np.minimum(growth * t, 700.0))
    peak = vals.max()
    if vals[-1] > tiny * peak:
        raise QuadratureError(
            f"Laplace integrand not decayed by t = {t_cap}; "
            f"abscissa too negative (growth {growth:.3g})"
        )
    below = np.nonzero(vals > tiny * peak)[0]
    T = t[min(below[-1] + 1, len(t) - 1)] if len(below) else t[0]
    return max(float(T), 2.0)


def laplace_kernel(z, k, nu, rtol=1e-8):
    """K_laplace(z, k) = integral_0^infty K(t, k) e^{-z t} dt, adaptive.

    Oscillation is handled by scipy's weighted (QAWO-style) rules; the
    integrand is truncated where it falls below 1e-16 of its peak.  A
    too-negative Re z (integral divergent) raises QuadratureError with the
    admissible abscissa.
    """
    z = complex(z)
    if nu > 0 and z.real <= -0.99 * k * k / nu:
        raise QuadratureError(f"Re z must exceed -k^2/nu = {-k * k / nu:.3g}")
    T = _envelope_truncation(k, nu, -z.real, tiny=1e-16 * rtol)
    a, b = z.real, z.imag
    f = lambda t: memory_kernel(t, k, nu) * np.exp(-a * t)
    kw = dict(epsabs=1e-13, epsrel=rtol, limit=600)
    if b == 0.0:
        re = quad(f, 0.0, T, **kw)[0]
        return complex(re, 0.0)
    re = quad(f, 0.0, T, weight="cos", wvar=b, **kw)[0]
    im = quad(f, 0.0, T, weight="sin", wvar=b, **kw)[0]
    return complex(re, -im)


def laplace_kernel_line(k, nu, lam, omegas, h=0.005):
    """K_laplace(-lam + i omega, k) for an array of omegas (Filon path)."""
    T = _envelope_truncation(k, nu, lam)
    n = int(np.ceil(T / h))
    if n % 2 == 1:
        n += 1
    t = np.linspace(0.0, T, n + 1)
    f = memory_kernel(t, k, nu) * np.exp(lam * t)
    return filon_exp(f, t, omegas)


def laplace_kernel_grid(k, nu, zs, h=0.004):
    """K_laplace at arbitrary complex points (Simpson product rule).

    Used by the winding-number machinery where points sit on rectangle
    edges; h is chosen against the largest |Im z| so the oscillation stays
    resolved.
    """
    zs = np.asarray(zs, dtype=complex)
    re_min = float(zs.real.min())
    T = _envelope_truncation(k, nu, -re_min)
    h_eff = min(h, 0.25 / max(1.0, float(np.abs(zs.imag).max())))
    n = int(np.ceil(T / h_eff))
    if n % 2 == 1:
        n += 1
    t = np.linspace(0.0, T, n + 1)
    f = memory_kernel(t, k, nu)
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= (t[1] - t[0]) / 3.0
    wf = w * f
    out = np.empty(zs.shape, dtype=complex)
    flat = zs.ravel()
    res = np.empty(len(flat), dtype=complex)
    for i0 in range(0, len(flat), 64):
        sl = slice(i0, min(i0 + 64, len(flat)))
        res[sl] = np.exp(-np.outer(flat[sl], t)) @ wf
    out.ravel()[:] = res
    return out


# ---------------------------------------------------------------------------
# Penrose margin


@dataclass(frozen=True)
class PenroseScan:
    """Scan resolution for the stability margin."""

    k_max: int = 16
    omega_max: float = 400.0
    n_omega: int = 1200

    def __post_init__(self):
        if self.k_max < 1:
            raise ConfigurationError("scan needs a nonempty mode range")
        if self.omega_max <= 0 or self.n_omega < 16:
            raise ConfigurationError("degenerate omega scan")


@dataclass
class PenroseReport:
    nu: float
    lambda_bar: float
    kappa_estimate: float
    argmin_k: int
    argmin_z: complex
    scan: PenroseScan
    kappa_refined: float

    def to_dict(self):
        return {
            "nu": self.nu,
            "lambda_bar": self.lambda_bar,
            "kappa": self.kappa_estimate,
            "kappa_refined": self.kappa_refined,
            "argmin_k": self.argmin_k,
            "argmin_z_re": self.argmin_z.real,
            "argmin_z_im": self.argmin_z.imag,
            "k_max": self.scan.k_max,
            "omega_max": self.scan.omega_max,
            "n_omega": self.scan.n_omega,
        }


def _omega_grid(omega_max, n):
    """Log-dense symmetric-by-conjugacy grid on [0, omega_max]."""
    return np.concatenate([[0.0], np.geomspace(1e-3, omega_max, n - 1)])


def _margin_once(nu, lambda_bar, scan):
    best = (np.inf, 0, 0j)
    oms = _omega_grid(scan.omega_max, scan.n_omega)
    for k in range(1, scan.k_max + 1):
        kt = laplace_kernel_line(k, nu, lambda_bar * k, oms)
        d = np.abs(1.0 + kt)
        i = int(np.argmin(d))
        if d[i] < best[0]:
            best = (float(d[i]), k, complex(-lambda_bar * k, oms[i]))
    return best


def penrose_margin(nu, lambda_bar, scan=None, refine_tol=0.10):
    """Minimum of |1 + K_laplace| over modes and the contour Re z = -lambda_bar |k|.

    The kernel is even in k, so only k >= 1 is scanned and omega >= 0
    covers the conjugate half of the contour.  Modes beyond k_max are
    dismissed by the |K_laplace| <= C/k^2 bound (C fitted on the scanned
    modes).  An internal refinement doubles the omega resolution; a shift
    beyond refine_tol raises RefinementError.
    """
    scan = scan or PenroseScan()
    kappa, k_arg, z_arg = _margin_once(nu, lambda_bar, scan)
    fine = PenroseScan(scan.k_max, scan.omega_max * 1.5, scan.n_omega * 2)
    kappa2, k2, z2 = _margin_once(nu, lambda_bar, fine)
    if kappa > 0 and abs(kappa2 - kappa) > refine_tol * kappa:
        raise RefinementError(
            f"margin moved {kappa:.4g} -> {kappa2:.4g} under refinement; scan too coarse"
        )
    return PenroseReport(nu, lambda_bar, min(kappa, kappa2), k_arg, z_arg, scan, kappa2)


# ---------------------------------------------------------------------------
# dispersion roots


def _winding(vals):
    ph = np.unwrap(np.angle(vals))
    return (ph[-1] - ph[0]) / (2.0 * np.pi)


def _box_winding(k, nu, re0, re1, im0, im1, n=240, depth=0):
    """Winding number of 1 + K_laplace around the rectangle boundary."""
    edges = [
        np.linspace(re0, re1, n) + 1j * im0,
        re1 + 1j * np.linspace(im0, im1, n),
        np.linspace(re1, re0, n) + 1j * im1,
        re0 + 1j * np.linspace(im1, im0, n),
    ]
    zs = np.concatenate(edges)
    vals = 1.0 + laplace_kernel_grid(k, nu, zs)
    steps = np.abs(np.diff(np.unwrap(np.angle(vals))))
    if steps.max() > 1.2 and depth < 4:
        return _box_winding(k, nu, re0, re1, im0, im1, n=2 * n, depth=depth + 1)
    w = _winding(vals)
    if abs(w - round(w)) > 0.2:
        raise RefinementError("winding number did not settle; contour too close to a root")
    return int(round(w))


def _subdivide(k, nu, re0, re1, im0, im1, count, found, min_size=1e-3):
    if count == 0:
        return
    if count == 1 and max(re1 - re0, im1 - im0) < 0.5:
        found.append(complex(0.5 * (re0 + re1), 0.5 * (im0 + im1)))
        return
    if max(re1 - re0, im1 - im0) < min_size:
        found.append(complex(0.5 * (re0 + re1), 0.5 * (im0 + im1)))
        return
    if re1 - re0 >= im1 - im0:
        mid = 0.5 * (re0 + re1)
        c1 = abs(_box_winding(k, nu, re0, mid, im0, im1))
        _subdivide(k, nu, re0, mid, im0, im1, c1, found)
        _subdivide(k, nu, mid, re1, im0, im1, count - c1, found)
    else:
        mid = 0.5 * (im0 + im1)
        c1 = abs(_box_winding(k, nu, re0, re1, im0, mid))
        _subdivide(k, nu, re0, re1, im0, mid, c1, found)
        _subdivide(k, nu, re0, re1, mid, im1, count - c1, found)


def _newton_polish(z0, k, nu, tol=1e-10):
    f = lambda z: 1.0 + laplace_kernel(z, k, nu, rtol=1e-11)
    fp = lambda z: -_kernel_moment_laplace(z, k, nu)
    z = z0
    for _ in range(60):
        fz = f(z)
        if abs(fz) < tol:
            return z, abs(fz)
        z = z - fz / fp(z)
    return z, abs(f(z))


def _kernel_moment_laplace(z, k, nu):
    """d/dz K_laplace = -integral t K(t) e^{-zt} dt."""
    z = complex(z)
    T = _envelope_truncation(k, nu, -z.real, tiny=1e-18)
    f = lambda t: t * memory_kernel(t, k, nu) * np.exp(-z.real * t)
    kw = dict(epsabs=1e-13, epsrel=1e-10, limit=600)
    b = z.imag
    if b == 0.0:
        return complex(quad(f, 0, T, **kw)[0], 0.0)
    re = quad(f, 0, T, weight="cos", wvar=b, **kw)[0]
    im = quad(f, 0, T, weight="sin", wvar=b, **kw)[0]
    return complex(re, -im)


def dispersion_roots(k, nu, z_cut=None, resid_tol=1e-10):
    """All roots of 1 + K_laplace(z, k) = 0 with Re z > -z_cut.

    Argument-principle counting on rectangles with bisection until each box
    isolates one root, then Newton polishing to |1 + K_laplace| < resid_tol.
    The box is widened automatically until at least one root is captured.
    Roots come in conjugate pairs; both members are returned, sorted by
    descending real part.  A count that shifts when the rectangle is
    perturbed raises RefinementError.
    """
    if k == 0:
        raise ConfigurationError("k must be nonzero")
    k = abs(k)
    widen = z_cut is None
    z_cut = z_cut if z_cut is not None else 2.5 * k
    for _ in range(4):
        im_hi = 1.4 * z_cut + 2.0
        count = abs(_box_winding(k, nu, -z_cut, 0.5, 1e-7, im_hi))
        if count > 0 or not widen:
            break
        z_cut *= 1.8
    if count == 0:
        return []
    count_b = abs(_box_winding(k, nu, -z_cut * 1.03, 0.55, 1e-7, im_hi * 1.03))
    if count_b != count:
        raise RefinementError(
            f"root count changed under rectangle perturbation ({count} vs {count_b})"
        )
    centers = []
    _subdivide(k, nu, -z_cut, 0.5, 1e-7, im_hi, count, centers)
    roots = []
    for z0 in centers:
        z, resid = _newton_polish(z0, k, nu, tol=resid_tol)
        if resid < resid_tol and not any(abs(z - r) < 1e-8 for r in roots):
            roots.append(z)
    out = []
    for r in roots:
        out.append(r)
        if r.imag > 1e-9:
            out.append(np.conj(r))
    return sorted(out, key=lambda z: (-z.real, -abs(z.imag)))


# ---------------------------------------------------------------------------
# resolvent and the Volterra solver


@dataclass
class KernelTable:
    """Sampled memory kernel (and optionally resolvent) on a uniform grid."""

    k: int
    nu: float
    t_grid: np.ndarray
    K_values: np.ndarray
    R_values: np.ndarray | None = None

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        dt = np.diff(self.t_grid)
        if len(dt) == 0 or not np.allclose(dt, dt[0], rtol=1e-12, atol=1e-12):
            raise ConfigurationError("t_grid must be uniform")
        if abs(self.K_values[0]) > 1e-300:
            raise ConfigurationError("kernel must vanish at t = 0")
        if not np.all(np.isfinite(self.K_values)):
            raise ConfigurationError("kernel values must be finite")

    @property
    def dt(self):
        return float(self.t_grid[1] - self.t_grid[0])

    def write_csv(self, path):
        from .output import write_csv

        rvals = self.R_values if self.R_values is not None else np.full(len(self.t_grid), np.nan)
        write_csv(path, ["t", "K", "R"], zip(self.t_grid, self.K_values, rvals))


def kernel_table(k, nu, t_grid):
    t_grid = np.asarray(t_grid, dtype=float)
    return KernelTable(k, nu, t_grid, memory_kernel(t_grid, k, nu))


def convolve_causal(a, b, dt):
    """Trapezoid product-integration convolution (a*b)(t_n) on a uniform grid."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    full = np.convolve(a, b)[:n]
    corr = full - 0.5 * a[0] * b - 0.5 * a * b[0]
    return dt * corr


def resolvent(k, nu, t_grid, lambda_bar, kappa=None, tol=1e-9):
    """Resolvent R(t, k) of the memory kernel by contour inversion.

    Splits R_laplace = K_laplace - K_laplace^2 + K_laplace^3/(1+K_laplace):
    the first two terms invert exactly to K - K*K on the grid, and only the
    cubic remainder goes through the oscillatory contour integral on
    Re z = -lambda_bar k, whose tail is truncated using the
    |K_laplace| <= C/(k^2 + omega^2) bound (C fitted on the computed line).
    Requires a positive Penrose margin.
    """
    if k == 0:
        raise ConfigurationError("k must be nonzero")
    k = abs(k)
    t_grid = np.asarray(t_grid, dtype=float)
    tab = kernel_table(k, nu, t_grid)
    dt = tab.dt

    if kappa is None:
        rep = penrose_margin(nu, lambda_bar, PenroseScan(k_max=max(8, k), omega_max=200.0, n_omega=600))
        kappa = rep.kappa_estimate
    if kappa <= 0:
        raise StabilityViolationError(f"Penrose margin {kappa:.3g} is not positive")

    # contour line: fit the Im-bound constant, then the tail cutoff
    oms_probe = _omega_grid(300.0, 400)
    kt_probe = laplace_kernel_line(k, nu, lambda_bar * k, oms_probe)
    c_im = float(np.max(np.abs(kt_probe) * (k * k + oms_probe**2)))
    omega_cut = (c_im**3 / (5.0 * np.pi * kappa * tol)) ** 0.2
    if omega_cut > 1e4:
        raise QuadratureError(f"contour tail cutoff {omega_cut:.3g} too large for tol {tol:g}")

    n_om = int(np.ceil(omega_cut / 0.02))
    if n_om % 2 == 1:
        n_om += 1
    oms = np.linspace(0.0, omega_cut, n_om + 1)
    kt = laplace_kernel_line(k, nu, lambda_bar * k, oms)
    g = kt**3 / (1.0 + kt)
    # R3(t) = e^{-lam k t} / pi * Re integral_0^cut g(omega) e^{i omega t} d omega
    line = np.conj(filon_exp(np.conj(g), oms, t_grid))
    r3 = np.exp(-lambda_bar * k * t_grid) / np.pi * line.real

    kk = convolve_causal(tab.K_values, tab.K_values, dt)
    r = tab.K_values - kk + r3
    return KernelTable(k, nu, t_grid, tab.K_values, r)


def resolvent_identity_residual(table):
    """max_t |R - K + R*K| on the grid (the defining Volterra identity)."""
    if table.R_values is None:
        raise ConfigurationError("table has no resolvent values")
    rk = convolve_causal(table.R_values, table.K_values, table.dt)
    return float(np.abs(table.R_values - table.K_values + rk).max())


def solve_volterra(H, table):
    """March rho = H - K*rho by second-order product integration (trapezoid).

    H must be sampled on the table's grid.  Since K(0) = 0 the update is
    explicit; global error is O(dt^2).
    """
    H = np.asarray(H)
    if H.shape != table.t_grid.shape:
        raise ConfigurationError("H and kernel table grids differ")
    K = table.K_values
    dt = table.dt
    n = len(H)
    rho = np.zeros(n, dtype=np.result_type(H.dtype, np.float64))
    rho[0] = H[0]
    for i in range(1, n):
        acc = 0.5 * K[i] * rho[0]
        if i > 1:
            acc += np.dot(K[1:i], rho[i - 1:0:-1])
        rho[i] = H[i] - dt * acc  # K[0] = 0 keeps the step explicit
    return rho


def resolvent_apply(H, table):
    """rho = H - H*R: the resolvent form of the solution."""
    if table.R_values is None:
        raise ConfigurationError("table has no resolvent values")
    return np.asarray(H) - convolve_causal(np.asarray(H), table.R_values, table.dt)


# ---------------------------------------------------------------------------
# forcing assembled from a simulation history


def forcing_from_history(snapshots, times, rho_hat, k, nu):
    """Assemble the Volterra forcing H(t, k) from stored simulation history.

    snapshots: SpectralState list on the uniform grid `times` (first one at
    t = 0 supplies the initial data); rho_hat: array (len(times), modes) of
    density samples on the same grid.  Returns H at the snapshot times:

        H = I + N0 + Nneq,
        I(t)    = h_in(k, k clock(t)) S(t, k),
        N0(t)   = -int rho(tau, k) clock(t-tau) h0(tau, k clock(t-tau)) S(t-tau, k) dtau,
        Nneq(t) = -sum_{l != 0,k} (k/l) int rho(tau, l) clock(t-tau)
                   h(tau, k-l, k clock(t-tau)) S(t-tau, k) dtau.

    The off-grid frequency k*clock(t-tau) is read by cubic interpolation.
    """
    from . import _core

    times = np.asarray(times, dtype=float)
    if len(snapshots) != len(times):
        raise ConfigurationError("snapshot and time arrays differ in length")
    dts = np.diff(times)
    if len(dts) == 0 or not np.allclose(dts, dts[0], rtol=1e-10, atol=1e-12):
        raise ConfigurationError("history must be sampled on a uniform grid")
    grid = snapshots[0].grid
    if abs(k) > grid.Kmax or k == 0:
        raise ConfigurationError("k outside the simulated mode range")
    dt = float(dts[0])
    n = len(times)
    x0, dx = grid.eta[0], grid.deta
    row_k = grid.k_row(k)

    h_in = snapshots[0].values
    H = np.zeros(n, dtype=complex)
    H[0] = h_in[row_k, grid.izero]

    for i in range(1, n):
        t = times[i]
        span = t - times[: i + 1]
        freqs = k * saturating_clock(span, nu)
        Sfac = damping_factor_k(span, k, nu)
        gl = saturating_clock(span, nu)
        # free-streamed initial data
        H[i] = _core.gather_points(h_in[row_k], freqs[:1], x0, dx)[0] * Sfac[0]
        acc = np.zeros(i + 1, dtype=complex)
        for j in range(i + 1):
            snap = snapshots[j].values
            at = freqs[j:j + 1]
            # l = k picks the spatially homogeneous part
            h0val = _core.gather_points(snap[grid.k_row(0)], at, x0, dx)[0]
            term = rho_hat[j, row_k] * h0val
            for l in grid.modes:
                if l == 0 or l == k or abs(k - l) > grid.Kmax:
                    continue
                hval = _core.gather_points(snap[grid.k_row(k - l)], at, x0, dx)[0]
                term += rho_hat[j, grid.k_row(l)] * (k / l) * hval
            acc[j] = term * gl[j] * Sfac[j]
        w = np.full(i + 1, dt)
        w[0] = w[-1] = 0.5 * dt
        H[i] -= np.sum(w * acc)
    return H


def volterra_residual(times, rho_k, H, k, nu):
    """max_t |rho + K*rho - H| on the grid: the consistency metric."""
    times = np.asarray(times, dtype=float)
    tab = kernel_table(k, nu, times)
    conv = convolve_causal(np.asarray(rho_k), tab.K_values, tab.dt)
    return float(np.abs(rho_k + conv - H).max())
