"""Quantitative plasma-echo machinery: chain gains, regime classification,
growth envelopes, threshold exponents, and the scaling of the paired
frequency-resonance kernel sums.

An echo chain transfers mode k+1 content at time k t/(k+1) onto mode k at
time t; the per-step gain at unmixed frequency eta and perturbation size
nu^a is

    gain(k) = nu^a eta / k^3 * exp(-nu^{1/3} eta / k),

maximal near k* = nu^{1/3} eta / 3 with gain(k*) = 27 e^-3 nu^{a-1} eta^-2.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, RefinementError, VpfpError
from .linflow import damping_factor_k
from .spectral import gevrey_radius, saturating_clock

# ---------------------------------------------------------------------------
# chain gains and regimes


def chain_gain(k, nu, a, eta):
    """Per-step echo-chain gain at integer wavenumber k >= 1."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 1):
        raise ConfigurationError("chain wavenumbers start at k = 1")
    if eta <= 0:
        raise ConfigurationError("eta must be positive")
    out = nu**a * eta / k**3 * np.exp(-(nu ** (1.0 / 3)) * eta / k)
    return out if out.ndim else float(out)


def gain_maximizer(nu, eta):
    """Continuous maximizer k* = nu^{1/3} eta / 3 of the chain gain."""
    return nu ** (1.0 / 3) * eta / 3.0


def classify_regime(nu, a, eta):
    """Exact partition of (nu, a, eta) into the three chain regimes.

    (i)  eta <= 3 nu^{-1/3}: every gain sits on the flat side of the
         exponential; (ii) intermediate window where the maximizer is
         interior but the peak gain exceeds one; (iii) peak gain <= 1.
    """
    if eta <= 0:
        raise ConfigurationError("eta must be positive")
    if eta <= 3.0 * nu ** (-1.0 / 3):
        return "i"
    if eta <= (3.0 / np.e) ** 1.5 * nu ** (-(1.0 - a) / 2.0):
        return "ii"
    return "iii"


@dataclass
class EchoRegimeReport:
    nu: float
    a: float
    eta: float
    regime: str
    k1: int
    k2: int
    log_sup: float
    envelope1: float
    envelope2: float

    @property
    def sup_product(self):
        return float(np.exp(self.log_sup))

    def to_dict(self):
        return {
            "nu": self.nu,
            "a": self.a,
            "eta": self.eta,
            "regime": self.regime,
            "k1": self.k1,
            "k2": self.k2,
            "log_sup": self.log_sup,
            "envelope1": self.envelope1,
            "envelope2": self.envelope2,
        }


def max_chain_product(nu, a, eta, k_cap=None):
    """Exhaustive supremum of contiguous chain products prod gain(k).

    Computed as the maximum nonempty-subarray sum of log gains (one linear
    pass), so the discrete supremum is exact for the given cap.  The cap
    must cover both critical scales; a maximizing interval touching the cap
    raises RefinementError.
    """
    needed = int(np.ceil((nu**a * eta) ** (1.0 / 3))) + int(np.ceil(nu ** (1.0 / 3) * eta))
    if k_cap is None:
        k_cap = max(needed + 8, 16)
    if k_cap < needed:
        raise ConfigurationError(f"k_cap {k_cap} below required {needed}")
    ks = np.arange(1, k_cap + 1)
    logs = np.log(chain_gain(ks, nu, a, eta))
    best = -np.inf
    best_range = (1, 1)
    cur = 0.0
    cur_start = 0
    for i, v in enumerate(logs):
        if cur <= 0.0:
            cur = v
            cur_start = i
        else:
            cur += v
        if cur > best:
            best = cur
            best_range = (cur_start + 1, i + 1)
    if best_range[1] == k_cap:
        raise RefinementError(f"maximizing chain touches the cap k_cap = {k_cap}")
    e1, e2 = growth_envelope(nu, a, eta)
    return EchoRegimeReport(
        nu, a, eta, classify_regime(nu, a, eta), best_range[0], best_range[1], float(best), e1, e2
    )


def growth_envelope(nu, a, eta):
    """Exponents of the chain growth envelope and its eta-only majorant.

    e1 = 3 (nu^a eta)^{1/3} - 2 nu^{1/3} eta  <=  e2 = 3 eta^{(1-3a)/(3-3a)}.
    """
    if not a < 1.0 / 3:
        raise ConfigurationError("envelope requires a < 1/3")
    e1 = 3.0 * (nu**a * eta) ** (1.0 / 3) - 2.0 * nu ** (1.0 / 3) * eta
    e2 = 3.0 * eta ** ((1.0 - 3.0 * a) / (3.0 - 3.0 * a))
    if e1 > e2 + 1e-12:
        raise VpfpError(f"envelope inequality violated at nu={nu}, a={a}, eta={eta}")
    return float(e1), float(e2)


def threshold_exponent(s):
    """Power of nu sizing admissible Gevrey-1/s data: (1-3s)/(3-3s), 0 past 1/3."""
    if not (0.0 < s <= 1.0):
        raise ConfigurationError("s must lie in (0, 1]")
    if s >= 1.0 / 3:
        return 0.0
    return (1.0 - 3.0 * s) / (3.0 - 3.0 * s)


# ---------------------------------------------------------------------------
# paired-mode kernel and its sup-integral scaling


def pair_kernel(t, tau, k, l, nu, w, sc):
    """Frequency-resonance kernel between density mode l and mode k.

    K_{k,l}(t, tau) = |l|^-1 <clock(tau)> <(k-l, k clock(t) - l clock(tau))>^{-beta+3/2}
                      S^{1/2}(t-tau, k) exp(1/2 [lam(clock(t), R) - lam(clock(tau), R)])
                      exp(-delta1 nu^{1/3} t / 2) exp(-nu t),

    with R = |(k, k clock(t))|.  The radius difference is nonpositive, so
    the Gevrey factor is a damping.  tau may be an array.
    """
    if k == 0 or l == 0 or l == k:
        raise ConfigurationError("need k != 0, l != 0, l != k")
    tau = np.asarray(tau, dtype=float)
    if np.any(tau > t) or np.any(tau < 0):
        raise ConfigurationError("need 0 <= tau <= t")
    gt = saturating_clock(t, nu)
    gtau = saturating_clock(tau, nu)
    radius = np.hypot(k, k * gt)
    pref = np.hypot(1.0, gtau) / abs(l)
    res = (1.0 + (k - l) ** 2 + (k * gt - l * gtau) ** 2) ** ((-w.beta + 1.5) / 2.0)
    shalf = np.sqrt(damping_factor_k(t - tau, k, nu))
    lam_diff = 0.5 * (gevrey_radius(gt, radius, w) - gevrey_radius(gtau, radius, w))
    out = (
        pref
        * res
        * shalf
        * np.exp(lam_diff)
        * np.exp(-0.5 * sc.delta1 * nu ** (1.0 / 3) * t)
        * np.exp(-nu * t)
    )
    return out if out.ndim else float(out)


def _clock_inverse(g, nu):
    if nu == 0.0:
        return g
    z = nu * g
    if z >= 1.0:
        return np.inf
    return -np.log1p(-z) / nu


def _resonant_tau_grid(t, k, l, nu, base_n=241, local_n=121):
    """tau grid refined around the resonance l*clock(tau) = k*clock(t)."""
    pieces = [np.linspace(0.0, t, base_n)]
    if l > 0:
        gt = saturating_clock(t, nu)
        ts = _clock_inverse(k * gt / l, nu)
        if np.isfinite(ts) and 0.0 < ts < t:
            w = 40.0 / abs(l)
            loc = ts + np.linspace(-w, w, local_n)
            pieces.append(loc[(loc > 0.0) & (loc < t)])
    return np.unique(np.concatenate(pieces))


def pair_kernel_time_integral(t, k, nu, w, sc, k_cap):
    """integral_0^t sum_{l != 0,k, |l| <= k_cap} K_{k,l}(t, tau) d tau."""
    total = 0.0
    for l in range(-k_cap, k_cap + 1):
        if l == 0 or l == k:
            continue
        tau = _resonant_tau_grid(t, k, l, nu)
        total += float(np.trapezoid(pair_kernel(t, tau, k, l, nu, w, sc), tau))
    return total


def _sup_scan(nu, s, w, sc, k_cap, t_cap, n_t):
    wgt = replace(w, s=s)
    ts = np.unique(np.concatenate([np.linspace(0.5, t_cap, n_t), np.geomspace(0.5, t_cap, n_t)]))
    best = (0.0, 1, ts[0])
    for k in range(1, k_cap + 1):
        for t in ts:
            v = pair_kernel_time_integral(t, k, nu, wgt, sc, k_cap)
            if v > best[0]:
                best = (v, k, float(t))
    return best


def kernel_sum_scaling(s, nu_list, w, sc, k_cap=12, t_factor=5.0, n_t=50,
                       cap_check=True, cap_tol=0.10, margin=1.5):
    """Scaling of M(nu) = sup_{k, t <= T_cap} integral sum_l K_{k,l} d tau.

    Returns the per-nu suprema, the fitted slope of log M against log(1/nu),
    and the one-sided bound M(nu) <= C nu^{-threshold_exponent(s)} with C
    calibrated at the largest nu times `margin`.  Cap sensitivity is probed
    by doubling T_cap and k_cap at the extreme nu values; movement beyond
    cap_tol raises RefinementError.
    """
    nu_list = sorted(nu_list, reverse=True)
    out = {"s": s, "nu": list(nu_list), "M": [], "argmax_k": [], "argmax_t": []}
    for nu in nu_list:
        t_cap = t_factor * nu ** (-1.0 / 3)
        m, kb, tb = _sup_scan(nu, s, w, sc, k_cap, t_cap, n_t)
        out["M"].append(m)
        out["argmax_k"].append(kb)
        out["argmax_t"].append(tb)
    if cap_check:
        for nu, m_ref in ((nu_list[0], out["M"][0]), (nu_list[-1], out["M"][-1])):
            t_cap = 2.0 * t_factor * nu ** (-1.0 / 3)
            m2, _, _ = _sup_scan(nu, s, w, sc, 2 * k_cap, t_cap, n_t)
            if abs(m2 - m_ref) > cap_tol * max(m_ref, 1e-300):
                raise RefinementError(
                    f"cap sensitivity at nu={nu:g}: M moved {m_ref:.4g} -> {m2:.4g}"
                )
    exponent = threshold_exponent(s)
    logs = np.log(out["M"])
    out["slope"] = float(np.polyfit(np.log(1.0 / np.asarray(nu_list)), logs, 1)[0])
    out["exponent"] = exponent
    c = margin * out["M"][0] / nu_list[0] ** (-exponent)
    out["bound_C"] = float(c)
    out["bound_ok"] = bool(
        all(m <= c * nu ** (-exponent) for m, nu in zip(out["M"], nu_list))
    )
    out["ratio_max_min"] = float(max(out["M"]) / min(out["M"]))
    return out


# ---------------------------------------------------------------------------
# the echo experiment


@dataclass
class EchoPeakReport:
    eta0: float
    probe_k: int
    t_peak: float
    amplitude: float
    noise_floor: float
    detected: bool
    predicted_t: float
    window: tuple

    def to_dict(self):
        return {
            "eta0": self.eta0,
            "probe_k": self.probe_k,
            "t_peak": self.t_peak,
            "amplitude": self.amplitude,
            "noise_floor": self.noise_floor,
            "detected": self.detected,
            "predicted_t": self.predicted_t,
            "window_lo": self.window[0],
            "window_hi": self.window[1],
        }


def echo_experiment(config, probe_k=1, window=(0.8, 1.2)):
    """Drive the simulator with a two-mode state and locate the echo peak.

    The initial data must hold a bump at some mode k >= 2 centered at
    eta0 > 0 (within the window with 20% margin) plus a seed at probe_k.
    The nonlinear run is compared against a linear twin: the echo is the
    secondary maximum of |rho_hat(t, probe_k)| inside [window]*eta0, and
    the twin's content there (pure numerics, no quadratic coupling) sets
    the noise floor.  Large nu suppresses the echo; that returns a
    no-echo report, not an error.
    """
    from .sim import run

    bump = max(
        ((k, v) for k, v in config.modes.items() if abs(k) >= 2),
        key=lambda kv: abs(kv[1][1]),
        default=None,
    )
    if bump is None:
        raise ConfigurationError("echo experiment needs a bump mode with |k| >= 2")
    eta0 = abs(bump[1][1])
    if eta0 > 0.8 * config.grid.eta_max:
        raise ConfigurationError("bump center needs a 20% margin inside the eta window")
    if config.T_end < window[1] * eta0 / abs(probe_k):
        raise ConfigurationError("T_end too short to contain the echo window")

    result = run(config)
    twin_cfg = replace(config, nonlinear_on=False)
    twin = run(twin_cfg)

    t = result.trace.times
    series = np.abs(result.trace.mode(probe_k))
    twin_series = np.abs(twin.trace.mode(probe_k))
    t_pred = eta0 / abs(probe_k)
    lo, hi = window[0] * t_pred, window[1] * t_pred
    sel = (t >= lo) & (t <= hi)
    i = int(np.argmax(series[sel]))
    amp = float(series[sel][i])
    t_peak = float(t[sel][i])
    floor = float(max(twin_series[sel].max(), 1e-14 * series.max()))
    detected = amp >= 3.0 * floor
    report = EchoPeakReport(eta0, probe_k, t_peak, amp, floor, detected, t_pred, (lo, hi))
    return report, result, twin
