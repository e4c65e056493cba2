"""Grids, spectral states, transforms, Gevrey multipliers and weighted norms.

Conventions (d = 1): x lives on a torus of length 2*pi, v on the real line.
The double Fourier transform is

    h_hat(k, eta) = (2*pi)^-1 * integral h(x, v) exp(-i k x - i eta v) dx dv,

with k integer and eta real, sampled on a uniform symmetric window.  The
inverse is  h(x, v) = sum_k exp(i k x) (2*pi)^-1 * integral h_hat exp(i eta v) d eta.
Under this convention the unit-mass Maxwellian mu(v) = (2*pi)^{-3/2} e^{-v^2/2}
has mu_hat(eta) = (2*pi)^-1 e^{-eta^2/2} and Parseval reads
||h||_L2(dx dv)^2 = sum_k integral |h_hat(k, eta)|^2 d eta.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .constants import EXP_MAX
from .errors import CapabilityError, ConfigurationError, MultiplierOverflowError

BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Truncated (k, eta) index space plus the physical grids for oracles.

    Modes run over k in {-Kmax, ..., Kmax}; eta is uniform on the closed
    window [-eta_max, eta_max] with spacing 2*eta_max/Neta (Neta + 1 nodes,
    Neta even), so eta = 0 is the node Neta//2 and the window is mirror
    symmetric: -eta[j] = eta[Neta - j] for every node.  Nx, Nv, v_max
    define the (x, v) quadrature grid used by transforms and diagnostics.
    """

    Kmax: int
    Neta: int
    eta_max: float
    d: int = 1
    Nx: int = 64
    Nv: int = 256
    v_max: float = 10.0

    def __post_init__(self):
        if self.d != 1:
            # types stay generic; only d = 1 is exercised
            raise ConfigurationError("only d = 1 grids are supported")
        if self.Kmax < 2:
            raise ConfigurationError("Kmax must be >= 2")
        if self.Neta % 2 != 0 or self.Neta <= 0:
            raise ConfigurationError("Neta must be positive and even")
        if self.eta_max <= 0:
            raise ConfigurationError("eta_max must be positive")
        if self.Nx < 2 * self.Kmax + 2:
            raise ConfigurationError("Nx too small for the mode cutoff")

    @property
    def deta(self):
        return 2.0 * self.eta_max / self.Neta

    @property
    def n_eta(self):
        """Node count of the closed eta window."""
        return self.Neta + 1

    @property
    def eta(self):
        return -self.eta_max + self.deta * np.arange(self.Neta + 1)

    @property
    def modes(self):
        return np.arange(-self.Kmax, self.Kmax + 1)

    @property
    def izero(self):
        return self.Neta // 2

    @property
    def x(self):
        return 2.0 * np.pi / self.Nx * np.arange(self.Nx)

    @property
    def v(self):
        return -self.v_max + 2.0 * self.v_max / self.Nv * np.arange(self.Nv)

    @property
    def dv(self):
        return 2.0 * self.v_max / self.Nv

    def k_row(self, k):
        """Row index of mode k in a state array."""
        if abs(k) > self.Kmax:
            raise ConfigurationError(f"mode {k} outside cutoff {self.Kmax}")
        return k + self.Kmax


@dataclass(frozen=True)
class GevreyWeight:
    """Parameters of the time-dependent Gevrey radius and multipliers.

    b is tied to s (b = s/8); beta defaults to max(d/2 + m + 3, 5).
    """

    lambda1: float = 1.0
    lambda_inf: float = 0.5
    s: float = 0.5
    m: int = 3
    beta: float | None = None

    def __post_init__(self):
        if not (0.0 < self.s <= 1.0):
            raise ConfigurationError("Gevrey index s must lie in (0, 1]")
        if not (self.lambda1 > self.lambda_inf > 0.0):
            raise ConfigurationError("need lambda1 > lambda_inf > 0")
        if self.m < 3:  # d/2 + 2 = 2.5 for d = 1
            raise ConfigurationError("moment order m must be >= 3")
        if self.beta is None:
            object.__setattr__(self, "beta", max(0.5 + self.m + 3.0, 5.0))
        elif self.beta < max(0.5 + self.m + 3.0, 5.0):
            raise ConfigurationError("beta below admissible minimum")

    @property
    def b(self):
        return self.s / 8.0


@dataclass(frozen=True)
class StabilityConstants:
    """Decay rates and margins used by monitors and the resolvent machinery.

    delta_prime is the damping-bound rate; the chain
    delta > delta1 > delta2 > 0 follows the conventional defaults
    delta = delta_prime/4, delta1 = delta/2, delta2 = delta1/2.
    """

    delta_prime: float = 1.0 / 12.0
    lambda_bar: float = 1.0 / 24.0
    delta: float = 1.0 / 48.0
    delta1: float = 1.0 / 96.0
    delta2: float = 1.0 / 192.0
    kappa: float = 0.5

    def __post_init__(self):
        if not (self.delta > self.delta1 > self.delta2 > 0.0):
            raise ConfigurationError("need delta > delta1 > delta2 > 0")
        if self.lambda_bar <= 0 or self.lambda_bar >= self.delta_prime:
            raise ConfigurationError("need 0 < lambda_bar < delta_prime")
        if self.kappa <= 0:
            raise ConfigurationError("kappa must be positive")


@dataclass
class SpectralState:
    """h_hat(t, k, eta) on a Grid; rows are modes -Kmax..Kmax."""

    grid: Grid
    time: float
    values: np.ndarray
    nu: float = 0.0

    def __post_init__(self):
        expected = (2 * self.grid.Kmax + 1, self.grid.n_eta)
        if self.values.shape != expected:
            raise ConfigurationError(
                f"state shape {self.values.shape} != grid shape {expected}"
            )
        if self.nu < 0:
            raise ConfigurationError("nu must be nonnegative")
        self.values = np.ascontiguousarray(self.values, dtype=np.complex128)

    def copy(self):
        return SpectralState(self.grid, self.time, self.values.copy(), self.nu)

    def mode(self, k):
        return self.values[self.grid.k_row(k)]


def zero_state(grid, nu=0.0, time=0.0):
    return SpectralState(grid, time, np.zeros((2 * grid.Kmax + 1, grid.n_eta), dtype=complex), nu)


def saturating_clock(t, nu):
    """(1 - e^{-nu t})/nu, the collisional clock; equals t in the nu -> 0 limit."""
    t = np.asarray(t, dtype=float)
    if nu == 0.0:
        return t.copy() if t.ndim else float(t)
    x = nu * t
    out = np.where(np.abs(x) < 1e-8, t * (1.0 - x / 2.0 + x * x / 6.0), -np.expm1(-x) / nu)
    return out if out.ndim else float(out)


def maxwellian_hat(eta):
    """Fourier transform of the unit-mass Maxwellian (d = 1)."""
    eta = np.asarray(eta, dtype=float)
    return np.exp(-eta * eta / 2.0) / (2.0 * np.pi)


def maxwellian(v):
    v = np.asarray(v, dtype=float)
    return np.exp(-v * v / 2.0) / (2.0 * np.pi) ** 1.5


# ---------------------------------------------------------------------------
# transforms


def boundary_residual(state):
    """Largest |h_hat| in the outermost eta cells, relative to the peak."""
    v = state.values
    peak = np.abs(v).max()
    if peak == 0.0:
        return 0.0
    edge = max(np.abs(v[:, :2]).max(), np.abs(v[:, -2:]).max())
    return edge / peak


def forward_transform(h_phys, grid, nu=0.0, time=0.0):
    """Sample the double Fourier transform of h(x, v) on the (k, eta) grid.

    h_phys must be real, shaped (Nx, Nv) on the grid's physical nodes.
    The x direction uses an exact FFT; the v direction a trapezoid rule,
    which is spectrally accurate for fields that decay below BOUNDARY_TOL
    at |v| = v_max (checked; a TruncationWarning reports violations).
    """
    h_phys = np.asarray(h_phys, dtype=float)
    if h_phys.shape != (grid.Nx, grid.Nv):
        raise ConfigurationError(
            f"physical field shape {h_phys.shape} != (Nx, Nv) = {(grid.Nx, grid.Nv)}"
        )
    peak = np.abs(h_phys).max()
    if peak > 0:
        edge = max(np.abs(h_phys[:, 0]).max(), np.abs(h_phys[:, -1]).max())
        if edge > BOUNDARY_TOL * peak:
            import warnings

            from .errors import TruncationWarning

            warnings.warn(
                f"boundary mass {edge / peak:.2e} exceeds {BOUNDARY_TOL:.0e}",
                TruncationWarning,
            )

    ck = np.fft.fft(h_phys, axis=0) / grid.Nx  # c_k(v), k in FFT order
    idx = [k % grid.Nx for k in range(-grid.Kmax, grid.Kmax + 1)]
    sel = ck[idx]
    phase = np.exp(-1j * np.outer(grid.eta, grid.v))  # (Neta, Nv)
    vals = grid.dv * sel @ phase.T
    return SpectralState(grid, time, vals, nu)


def inverse_transform(state):
    """Reconstruct h(x, v) on the physical grid from its spectral samples."""
    grid = state.grid
    phase_v = np.exp(1j * np.outer(grid.eta, grid.v))  # (Neta, Nv)
    ckv = (grid.deta / (2.0 * np.pi)) * state.values @ phase_v  # (modes, Nv)
    phase_x = np.exp(1j * np.outer(grid.x, grid.modes))  # (Nx, modes)
    h = phase_x @ ckv
    return np.real(h)


# ---------------------------------------------------------------------------
# Gevrey radius and multipliers


def gevrey_radius(t, r, w):
    """Time-dependent Gevrey radius lambda(t, r).

    lambda = lambda_inf + c0 (1+t)^-b <r>^s + c0 (1 + t <r>^{s-1})^-b <r>^s
    with c0 = (lambda1 - lambda_inf)/8 and b = s/8.  Nonincreasing in t,
    bounded between lambda_inf and lambda_inf + 2 c0 <r>^s.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    c0 = (w.lambda1 - w.lambda_inf) / 8.0
    rb = np.hypot(1.0, r)  # <r>
    rs = rb**w.s
    out = (
        w.lambda_inf
        + c0 * (1.0 + t) ** (-w.b) * rs
        + c0 * (1.0 + t * rb ** (w.s - 1.0)) ** (-w.b) * rs
    )
    return out if out.ndim else float(out)


def multiplier_values(t, k, eta, c, w, nu):
    """A^nu_c(t, k, eta) = <k, eta>^(beta+c) exp(lambda(clock(t), |k, eta|)).

    k and eta broadcast; the collisional clock (1-e^{-nu t})/nu replaces t
    (explicit nu -> 0 branch inside saturating_clock).  Raises
    MultiplierOverflowError identifying the first offending (k, eta) if the
    exponent exceeds the representable range.
    """
    if c < -w.beta:
        raise ConfigurationError("order c must satisfy c >= -beta")
    k = np.asarray(k, dtype=float)
    eta = np.asarray(eta, dtype=float)
    clock = saturating_clock(t, nu)
    r = np.hypot(k, eta)
    rb = np.hypot(1.0, r)
    log_a = (w.beta + c) * np.log(rb) + gevrey_radius(clock, r, w)
    if np.any(log_a > EXP_MAX):
        idx = np.unravel_index(int(np.argmax(log_a)), np.shape(log_a))
        kk = k[idx] if k.ndim else float(k)
        ee = eta[idx] if eta.ndim else float(eta)
        raise MultiplierOverflowError(kk, ee, float(np.max(log_a)))
    out = np.exp(log_a)
    return out if out.ndim else float(out)


def apply_multiplier(state, c, w, t=None):
    """Multiply h_hat pointwise by A^nu_c at time t (default: state time)."""
    if t is None:
        t = state.time
    grid = state.grid
    kk = grid.modes[:, None].astype(float)
    ee = grid.eta[None, :]
    a = multiplier_values(t, kk, ee, c, w, state.nu)
    return SpectralState(grid, state.time, state.values * a, state.nu)


# ---------------------------------------------------------------------------
# norms


def weighted_norm(state, sigma, q, m=3):
    """H^sigma_q norm: velocity weight <v>^q in physical v, <grad>^sigma spectral.

    For q = 0 this is a pure Parseval sum; otherwise each mode is carried to
    the mixed (k, v) representation first.  q above 2m is refused: the
    configured moment order cannot resolve it.
    """
    if q > 2 * m:
        raise CapabilityError(f"q = {q} exceeds 2m = {2 * m}")
    if q < 0 or sigma < 0:
        raise ConfigurationError("sigma and q must be nonnegative")
    grid = state.grid
    kk = grid.modes[:, None].astype(float)
    ee = grid.eta[None, :]
    wts = (1.0 + kk**2 + ee**2) ** (sigma / 2.0)
    g = wts * state.values
    if q == 0:
        return float(np.sqrt(grid.deta * np.sum(np.abs(g) ** 2)))
    phase_v = np.exp(1j * np.outer(grid.eta, grid.v))
    ckv = (grid.deta / (2.0 * np.pi)) * g @ phase_v
    vq = (1.0 + grid.v**2) ** (q / 2.0)
    return float(np.sqrt(2.0 * np.pi * grid.dv * np.sum(vq[None, :] * np.abs(ckv) ** 2)))


def velocity_norm(ghat, grid, sigma, q):
    """H^sigma_q norm of a velocity-only function given by ghat(eta) on the grid.

    Convention: ghat(eta) = integral g(v) e^{-i eta v} dv, so Plancherel is
    ||g||^2 = (2*pi)^-1 integral |ghat|^2 d eta.
    """
    ghat = np.asarray(ghat, dtype=complex)
    wts = (1.0 + grid.eta**2) ** (sigma / 2.0)
    g = wts * ghat
    if q == 0:
        return float(np.sqrt(grid.deta / (2.0 * np.pi) * np.sum(np.abs(g) ** 2)))
    phase_v = np.exp(1j * np.outer(grid.eta, grid.v))
    gv = (grid.deta / (2.0 * np.pi)) * g @ phase_v
    vq = (1.0 + grid.v**2) ** (q / 2.0)
    return float(np.sqrt(grid.dv * np.sum(vq * np.abs(gv) ** 2)))


def mode_norm(state, k):
    """L2(d eta) norm of a single spatial mode."""
    col = state.mode(k)
    return float(np.sqrt(state.grid.deta * np.sum(np.abs(col) ** 2)))


# ---------------------------------------------------------------------------
# invariants


def reality_residual(state):
    """Max deviation from h_hat(-k, -eta) = conj(h_hat(k, eta)).

    The closed eta window is mirror symmetric, so every node pairs with its
    negative and the check covers the whole state.
    """
    v = state.values
    return float(np.abs(v - np.conj(v[::-1, ::-1])).max())


def mass_residual(state):
    """|h_hat(t, 0, 0)|: the mean-zero constraint."""
    return float(np.abs(state.values[state.grid.k_row(0), state.grid.izero]))


def symmetrize(state):
    """Project onto the reality-symmetric subspace (in place); returns state."""
    v = state.values
    v[:] = 0.5 * (v + np.conj(v[::-1, ::-1]))
    return state
