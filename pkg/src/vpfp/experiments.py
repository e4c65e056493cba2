"""Named experiments behind the CLI: each takes typed parameters, writes its
artifacts (CSV/JSON/SVG) under the spec's output directory, and returns a
summary plus a list of failed embedded assertions (empty = pass).

Sweep points run in parallel when threads > 1; results are assembled in
index order so output is identical for any thread count.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import apply_overrides
from .echo import echo_experiment, kernel_sum_scaling, threshold_exponent
from .errors import BlowUpError, ConfigurationError
from .fitting import envelope_peaks, fit_rate
from .output import svg_plot, write_csv, write_json, write_snapshot
from .sim import DensityTrace, SimConfig, run
from .spectral import GevreyWeight, Grid, StabilityConstants
from .volterra import (
    PenroseScan,
    dispersion_roots,
    kernel_table,
    penrose_margin,
    resolvent,
    resolvent_apply,
    resolvent_identity_residual,
    solve_volterra,
)

_GRID_SCHEMA = {
    "grid.Kmax": (int, 2),
    "grid.Neta": (int, 640),
    "grid.eta_max": (float, 16.0),
    "grid.Nx": (int, 32),
    "grid.Nv": (int, 192),
    "grid.v_max": (float, 9.0),
}


def _grid_from(params):
    return Grid(
        Kmax=params["grid.Kmax"],
        Neta=params["grid.Neta"],
        eta_max=params["grid.eta_max"],
        Nx=params["grid.Nx"],
        Nv=params["grid.Nv"],
        v_max=params["grid.v_max"],
    )


def _parallel_map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _write_trace(path, trace, modes):
    rows = []
    for i, t in enumerate(trace.times):
        for j, k in enumerate(modes):
            rows.append(
                (
                    t,
                    int(k),
                    trace.rho_hat[i, j].real,
                    trace.rho_hat[i, j].imag,
                    abs(trace.efield_hat[i, j]),
                )
            )
    write_csv(path, ["t", "k", "re_rho", "im_rho", "abs_E"], rows)


# ---------------------------------------------------------------------------


def exp_penrose(params, spec):
    nu_list = params["nu_list"]
    lam = params["lambda_bar"]
    scan = PenroseScan(params["scan.k_max"], params["scan.omega_max"], params["scan.n_omega"])
    reports = _parallel_map(
        lambda nu: penrose_margin(nu, lam, scan), nu_list, spec.threads
    )
    failures = []
    base = reports[0]
    if not base.kappa_estimate > 0:
        failures.append(f"kappa({nu_list[0]:g}) = {base.kappa_estimate:.4g} not positive")
    for nu, rep in zip(nu_list[1:], reports[1:]):
        if rep.kappa_estimate < 0.9 * base.kappa_estimate:
            failures.append(
                f"kappa({nu:g}) = {rep.kappa_estimate:.4g} below 0.9*kappa({nu_list[0]:g})"
            )
    for nu, rep in zip(nu_list, reports):
        drift = abs(rep.kappa_refined - rep.kappa_estimate) / rep.kappa_estimate
        if drift > 0.05:
            failures.append(f"kappa({nu:g}) moved {drift:.2%} under refinement")
    summary = {"reports": [r.to_dict() for r in reports], "lambda_bar": lam}
    write_json(spec.out_path("penrose.json"), summary)
    return summary, failures


def exp_dispersion(params, spec):
    nu = params["nu"]
    ks = [int(k) for k in params["k_list"]]
    z_cut = params["z_cut"] if params["z_cut"] > 0 else None
    roots = {k: dispersion_roots(k, nu, z_cut=z_cut) for k in ks}
    failures = []
    leading = {}
    for k, rs in roots.items():
        if not rs:
            failures.append(f"no roots found for k={k}")
            continue
        leading[k] = rs[0]
        for z in rs:
            if z.imag > 1e-9 and not any(abs(np.conj(z) - w) < 1e-6 for w in rs):
                failures.append(f"root {z:.6f} (k={k}) lacks its conjugate")
    ks_found = sorted(leading)
    for a, b in zip(ks_found, ks_found[1:]):
        if not leading[b].real < leading[a].real:
            failures.append(f"Re(leading root) not decreasing from k={a} to k={b}")
    summary = {
        "nu": nu,
        "roots": {
            str(k): [{"re": z.real, "im": z.imag} for z in rs] for k, rs in roots.items()
        },
    }
    write_json(spec.out_path("dispersion.json"), summary)
    return summary, failures


def exp_linear_run(params, spec):
    grid = _grid_from(params)
    cfg = SimConfig(
        grid=grid,
        nu=params["nu"],
        dt=params["dt"],
        T_end=params["T_end"],
        eps=params["eps"],
        modes={1: (1.0, 0.0, 1.0)},
        nonlinear_on=False,
        stride=max(1, int(round(params["T_end"] / params["dt"])) // 10),
    )
    result = run(cfg)
    t = result.trace.times
    amp = np.abs(result.trace.mode(1))
    pk = envelope_peaks(t, amp)
    lo, hi = params["fit_lo"], params["fit_hi"]
    sel = pk[(t[pk] >= lo) & (t[pk] <= hi) & (amp[pk] > 0)]
    fit = fit_rate(t[sel], amp[sel], model="exponential")
    roots = dispersion_roots(1, params["nu"])
    gamma_root = -roots[0].real
    rel = abs(fit.rate - gamma_root) / gamma_root
    failures = []
    if rel > 0.05:
        failures.append(
            f"fitted rate {fit.rate:.4f} vs root {gamma_root:.4f}: {rel:.2%} > 5%"
        )
    summary = {
        "gamma_fit": fit.rate,
        "gamma_stderr": fit.stderr["gamma"],
        "leading_root": {"re": roots[0].real, "im": roots[0].imag},
        "relative_error": rel,
        "fit_window": [lo, hi],
    }
    _write_trace(spec.out_path("linear_run_trace.csv"), result.trace, grid.modes)
    write_json(spec.out_path("linear_run.json"), summary)
    svg_plot(
        spec.out_path("linear_run.svg"),
        [
            (t[1:], amp[1:], "|rho_1|"),
            (
                t[sel],
                fit.params["amplitude"] * np.exp(-fit.rate * t[sel]),
                "fit",
            ),
        ],
        xlabel="t",
        ylabel="|rho_hat(t,1)|",
        title="linear density decay",
        ylog=True,
    )
    return summary, failures


def _parse_modes(text):
    out = {}
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        bits = part.split(":")
        if len(bits) != 4:
            raise ConfigurationError(f"mode descriptor {part!r} is not k:amp:eta0:sigma")
        out[int(bits[0])] = (float(bits[1]), float(bits[2]), float(bits[3]))
    return out


def exp_sim(params, spec):
    grid = _grid_from(params)
    cfg = SimConfig(
        grid=grid,
        nu=params["nu"],
        dt=params["dt"],
        T_end=params["T_end"],
        eps=params["eps"],
        modes=_parse_modes(params["modes"]),
        linear_on=params["linear_on"],
        nonlinear_on=params["nonlinear_on"],
        stride=params["stride"],
        compute_entropy=params["entropy"],
        compute_bootstrap=params["bootstrap"],
    )
    result = run(cfg)
    _write_trace(spec.out_path("sim_trace.csv"), result.trace, grid.modes)
    write_snapshot(spec.out_path("sim_final_snapshot.txt"), result.final_state)
    diag = {
        "diag_times": result.diagnostics["diag_times"],
        "boundary": result.diagnostics["boundary"],
        "entropy": result.diagnostics["entropy"],
        "bootstrap": result.diagnostics["bootstrap"],
    }
    write_json(spec.out_path("sim_diagnostics.json"), diag)
    curves = [
        (result.trace.times[1:], np.abs(result.trace.mode(k))[1:], f"|rho_{k}|")
        for k in range(1, min(3, grid.Kmax) + 1)
    ]
    svg_plot(
        spec.out_path("sim_density.svg"),
        curves,
        xlabel="t",
        ylabel="|rho_hat|",
        title="density modes",
        ylog=True,
    )
    failures = []
    if params["entropy"]:
        ent = [e for e in result.diagnostics["entropy"] if np.isfinite(e)]
        tol = 1e-8 * max(ent[0], 1e-300) if ent else 0.0
        if any(b > a + tol for a, b in zip(ent, ent[1:])):
            failures.append("energy-entropy increased beyond tolerance")
    return {"final_time": result.final_state.time, "diag": diag}, failures


def exp_echo(params, spec):
    grid = _grid_from(params)
    eta0 = params["eta0"]
    cfg = SimConfig(
        grid=grid,
        nu=params["nu"],
        dt=params["dt"],
        T_end=params["T_end"],
        eps=params["eps"],
        modes={2: (1.0, eta0, 1.0), 1: (params["seed_amp"], 0.0, 1.0)},
        stride=20,
    )
    report, result, twin = echo_experiment(cfg, probe_k=1)
    summary = report.to_dict()
    summary["suppression_parameter"] = params["nu"] ** (1.0 / 3) * eta0
    failures = []
    if summary["suppression_parameter"] < 5.0:
        if not report.detected:
            failures.append("expected an echo peak; none above 3x noise floor")
        elif abs(report.t_peak - report.predicted_t) > 0.1 * report.predicted_t:
            failures.append(
                f"echo at t={report.t_peak:.2f}, predicted {report.predicted_t:.2f} (+-10%)"
            )
    else:
        if report.detected:
            failures.append("echo should be suppressed at this nu")
    _write_trace(spec.out_path("echo_trace.csv"), result.trace, grid.modes)
    write_json(spec.out_path("echo.json"), summary)
    t = result.trace.times
    svg_plot(
        spec.out_path("echo.svg"),
        [
            (t[1:], np.abs(result.trace.mode(1))[1:], "|rho_1| nonlinear"),
            (t[1:], np.abs(twin.trace.mode(1))[1:], "|rho_1| linear twin"),
        ],
        xlabel="t",
        ylabel="|rho_hat(t,1)|",
        title=f"plasma echo, eta0={eta0:g}",
        ylog=True,
    )
    return summary, failures


def _ed_fold_time(nu, dt, fold):
    tstar = (3.0 * fold / nu) ** (1.0 / 3)
    eta_max = 1.35 * tstar + 10.0
    neta = int(np.ceil(2.0 * eta_max / 0.1 / 2.0)) * 2
    grid = Grid(Kmax=2, Neta=neta, eta_max=eta_max)
    cfg = SimConfig(
        grid=grid,
        nu=nu,
        dt=min(dt, 0.1 / max(1.0, nu * eta_max * 2)),
        T_end=1.6 * tstar,
        eps=1.0,
        modes={1: (1.0, 0.0, 1.0)},
        nonlinear_on=False,
        stride=10**9,
        check_invariants=False,
    )
    result = run(cfg)
    norms = result.mode_norms[:, grid.k_row(1)]
    target = norms[0] * np.exp(-fold)
    below = np.nonzero(norms <= target)[0]
    if len(below) == 0:
        raise ConfigurationError(f"norm did not fold by e^{fold:g} within T_end (nu={nu:g})")
    i = below[0]
    t = result.trace.times
    # log-linear interpolation between the bracketing samples
    frac = (np.log(target) - np.log(norms[i - 1])) / (np.log(norms[i]) - np.log(norms[i - 1]))
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))


def exp_ed_scaling(params, spec):
    nu_list = params["nu_list"]
    fold = params["fold"]
    times = _parallel_map(
        lambda nu: _ed_fold_time(nu, params["dt"], fold), nu_list, spec.threads
    )
    slope = float(np.polyfit(np.log(nu_list), np.log(times), 1)[0])
    failures = []
    if abs(slope + 1.0 / 3) > 0.05:
        failures.append(f"fold-time slope {slope:.4f} outside -1/3 +- 0.05")
    summary = {"nu": list(nu_list), "fold_time": times, "slope": slope, "fold": fold}
    write_json(spec.out_path("ed_scaling.json"), summary)
    write_csv(spec.out_path("ed_scaling.csv"), ["nu", "fold_time"], zip(nu_list, times))
    svg_plot(
        spec.out_path("ed_scaling.svg"),
        [(np.asarray(nu_list), np.asarray(times), f"slope {slope:.3f}")],
        xlabel="nu",
        ylabel="e^3-fold time",
        title="enhanced dissipation scaling",
        xlog=True,
        ylog=True,
    )
    return summary, failures


def _threshold_point(args):
    nu, eps, s, grid_eta_fac = args
    t_end = 10.0 * nu ** (-1.0 / 3)
    eta_max = grid_eta_fac * t_end + 20.0
    neta = int(np.ceil(2.0 * eta_max / 0.2 / 2.0)) * 2
    grid = Grid(Kmax=2, Neta=neta, eta_max=eta_max)
    w = GevreyWeight(s=s)
    amp1 = float(np.exp(-w.lambda1 * (1.0 + 1.0 + 36.0) ** (s / 2)))
    amp2 = float(np.exp(-w.lambda1 * (4.0 + 4.0 + 144.0) ** (s / 2)))
    cfg = SimConfig(
        grid=grid,
        nu=nu,
        dt=min(0.1, 0.1 / max(1.0, nu * eta_max * 2)),
        T_end=t_end,
        eps=eps,
        modes={1: (amp1, 6.0, 1.0), 2: (amp2, 12.0, 1.0)},
        stride=max(1, int(t_end / 0.1 / 20)),
        compute_bootstrap=True,
        weight=w,
    )
    if eps == 0.0:
        return {"nu": nu, "eps": eps, "label": "stable", "why": "zero data"}
    try:
        result = run(cfg)
    except BlowUpError as exc:
        return {"nu": nu, "eps": eps, "label": "breached", "why": f"blow-up at t={exc.time:.3g}"}
    boots = result.diagnostics["bootstrap"]
    breach = False
    for key in ("hrho", "top_energy", "ed_energy", "h0_thermal"):
        vals = [b[key] for b in boots]
        ref = max(vals[0], 1e-300)
        if any(v > 10.0 * ref for v in vals[1:]):
            breach = True
    peak = np.abs(result.trace.mode(1)).max()
    tail = np.abs(result.trace.mode(1))[-max(2, len(result.trace.times) // 20):].max()
    decayed = tail <= 0.1 * peak
    if breach:
        label = "breached"
    elif decayed:
        label = "stable"
    else:
        label = "inconclusive"
    return {"nu": nu, "eps": eps, "label": label, "why": f"tail/peak={tail / peak:.3g}"}


def exp_threshold_sweep(params, spec):
    s = params["s"]
    if not s < 1.0 / 3:
        raise ConfigurationError("threshold sweep targets s < 1/3")
    nu_list = params["nu_list"]
    eps_grid = params["eps_grid"]
    c = params["c"]
    points = [(nu, eps, s, 1.1) for nu in nu_list for eps in eps_grid]
    rows = _parallel_map(_threshold_point, points, spec.threads)
    exponent = threshold_exponent(s)
    failures = []
    boundary = {}
    for nu in nu_list:
        mine = [r for r in rows if r["nu"] == nu]
        stable_eps = [r["eps"] for r in mine if r["label"] == "stable"]
        boundary[nu] = max(stable_eps) if stable_eps else 0.0
        thresh = c * nu**exponent
        for r in mine:
            if r["eps"] <= thresh and r["label"] != "stable":
                failures.append(
                    f"run nu={nu:g} eps={r['eps']:g} <= {thresh:.3g} labeled {r['label']}"
                )
    summary = {
        "s": s,
        "exponent": exponent,
        "c": c,
        "rows": rows,
        "boundary": {f"{k:g}": v for k, v in boundary.items()},
    }
    write_json(spec.out_path("threshold_sweep.json"), summary)
    write_csv(
        spec.out_path("threshold_sweep.csv"),
        ["nu", "eps", "label"],
        [(r["nu"], r["eps"], r["label"]) for r in rows],
    )
    return summary, failures


def exp_kernel_scaling(params, spec):
    w = GevreyWeight()
    sc = StabilityConstants()
    out = {}
    failures = []
    for s in params["s_list"]:
        rep = kernel_sum_scaling(
            s,
            params["nu_list"],
            w,
            sc,
            k_cap=params["k_cap"],
            t_factor=params["t_factor"],
            n_t=params["n_t"],
            cap_check=params["cap_check"],
        )
        out[f"s={s:g}"] = rep
        if s >= 1.0 / 3:
            if rep["ratio_max_min"] >= 3.0:
                failures.append(
                    f"s={s:g}: M varies {rep['ratio_max_min']:.2f}x across the nu range (>= 3x)"
                )
        else:
            allowed = threshold_exponent(s) + 0.05
            if rep["slope"] > allowed:
                failures.append(f"s={s:g}: slope {rep['slope']:.3f} exceeds {allowed:.3f}")
            if not rep["bound_ok"]:
                failures.append(f"s={s:g}: calibrated bound violated")
    write_json(spec.out_path("kernel_scaling.json"), out)
    curves = [
        (np.asarray(rep["nu"]), np.asarray(rep["M"]), key) for key, rep in out.items()
    ]
    svg_plot(
        spec.out_path("kernel_scaling.svg"),
        curves,
        xlabel="nu",
        ylabel="M(nu)",
        title="HL kernel sum scaling",
        xlog=True,
        ylog=True,
    )
    return out, failures


def exp_volterra_xcheck(params, spec):
    k = params["k"]
    nu = params["nu"]
    dt = params["dt"]
    n = int(round(params["T"] / dt))
    t = np.linspace(0.0, n * dt, n + 1)
    from .linflow import damping_factor_k
    from .spectral import saturating_clock

    h_in = lambda eta: np.exp(-np.asarray(eta) ** 2 / 2.0)
    H = h_in(k * saturating_clock(t, nu)) * damping_factor_k(t, k, nu)
    tab = resolvent(k, nu, t, params["lambda_bar"])
    rho_direct = solve_volterra(H, tab)
    rho_resolvent = resolvent_apply(H, tab)
    rel = float(np.abs(rho_direct - rho_resolvent).max() / np.abs(rho_direct).max())
    resid = resolvent_identity_residual(tab)
    failures = []
    if rel > 1e-4:
        failures.append(f"direct vs resolvent density paths differ by {rel:.3e} > 1e-4")
    if resid > 1e-6:
        failures.append(f"resolvent identity residual {resid:.3e} > 1e-6")
    summary = {"k": k, "nu": nu, "dt": dt, "relative_gap": rel, "identity_residual": resid}
    tab.write_csv(spec.out_path("kernel_table.csv"))
    write_csv(
        spec.out_path("volterra_xcheck.csv"),
        ["t", "rho_direct", "rho_resolvent"],
        zip(t, rho_direct.real, rho_resolvent.real),
    )
    write_json(spec.out_path("volterra_xcheck.json"), summary)
    return summary, failures


# ---------------------------------------------------------------------------

EXPERIMENTS = {
    "penrose": (
        {
            "nu_list": (list, [0.0, 1e-4, 1e-3]),
            "lambda_bar": (float, 1.0 / 24.0),
            "scan.k_max": (int, 16),
            "scan.omega_max": (float, 400.0),
            "scan.n_omega": (int, 1200),
        },
        exp_penrose,
    ),
    "dispersion": (
        {"nu": (float, 0.0), "k_list": (list, [1.0, 2.0, 3.0]), "z_cut": (float, 0.0)},
        exp_dispersion,
    ),
    "linear-run": (
        {
            **_GRID_SCHEMA,
            "nu": (float, 0.0),
            "dt": (float, 0.05),
            "T_end": (float, 12.0),
            "eps": (float, 1.0),
            "fit_lo": (float, 5.5),
            "fit_hi": (float, 11.5),
        },
        exp_linear_run,
    ),
    "sim": (
        {
            **_GRID_SCHEMA,
            "nu": (float, 1e-3),
            "dt": (float, 0.05),
            "T_end": (float, 10.0),
            "eps": (float, 1e-3),
            "modes": (str, "1:1.0:0.0:1.0"),
            "linear_on": (bool, True),
            "nonlinear_on": (bool, True),
            "stride": (int, 10),
            "entropy": (bool, False),
            "bootstrap": (bool, False),
        },
        exp_sim,
    ),
    "echo": (
        {
            "grid.Kmax": (int, 4),
            "grid.Neta": (int, 880),
            "grid.eta_max": (float, 44.0),
            "grid.Nx": (int, 32),
            "grid.Nv": (int, 192),
            "grid.v_max": (float, 9.0),
            "nu": (float, 0.0),
            "dt": (float, 0.05),
            "T_end": (float, 40.0),
            "eps": (float, 1e-3),
            "eta0": (float, 30.0),
            "seed_amp": (float, 1.0),
        },
        exp_echo,
    ),
    "ed-scaling": (
        {"nu_list": (list, [1e-3, 1e-4, 1e-5]), "dt": (float, 0.1), "fold": (float, 3.0)},
        exp_ed_scaling,
    ),
    "threshold-sweep": (
        {
            "s": (float, 0.2),
            "nu_list": (list, [1e-2, 1e-3]),
            "eps_grid": (list, [0.0, 1e-4, 1e-3, 1e-2]),
            "c": (float, 0.03),
        },
        exp_threshold_sweep,
    ),
    "kernel-scaling": (
        {
            "s_list": (list, [0.5, 0.2]),
            "nu_list": (list, [1e-2, 1e-3, 1e-4]),
            "k_cap": (int, 12),
            "t_factor": (float, 5.0),
            "n_t": (int, 50),
            "cap_check": (bool, False),
        },
        exp_kernel_scaling,
    ),
    "volterra-xcheck": (
        {
            "k": (int, 1),
            "nu": (float, 1e-3),
            "T": (float, 20.0),
            "dt": (float, 0.0025),
            "lambda_bar": (float, 1.0 / 24.0),
        },
        exp_volterra_xcheck,
    ),
}


def run_experiment(spec):
    """Dispatch an ExperimentSpec; returns (summary, failures)."""
    if spec.name not in EXPERIMENTS:
        known = ", ".join(sorted(EXPERIMENTS))
        raise ConfigurationError(f"unknown experiment {spec.name!r}; known: {known}")
    schema, fn = EXPERIMENTS[spec.name]
    params = apply_overrides(schema, spec.overrides)
    return fn(params, spec)
