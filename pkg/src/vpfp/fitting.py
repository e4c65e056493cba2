"""Least-squares rate extraction on log-transformed traces."""

from dataclasses import dataclass

import numpy as np

from .errors import FitError

MODELS = ("exponential", "power", "stretched")


@dataclass
class FitResult:
    """Fitted decay/scaling law with standard errors from the normal equations.

    exponential: y = A exp(-gamma t); power: y = A x^(-p);
    stretched: y = A exp(-c t^3).
    """

    model: str
    params: dict
    stderr: dict
    window: tuple
    residual_norm: float

    @property
    def rate(self):
        key = {"exponential": "gamma", "power": "p", "stretched": "c"}[self.model]
        return self.params[key]


def _design(model, t):
    if model == "exponential":
        return np.column_stack([np.ones_like(t), -t]), "gamma"
    if model == "power":
        if np.any(t <= 0):
            raise FitError("power-law fit needs positive abscissae")
        return np.column_stack([np.ones_like(t), -np.log(t)]), "p"
    if model == "stretched":
        return np.column_stack([np.ones_like(t), -(t**3)]), "c"
    raise FitError(f"unknown model {model!r}; choose from {MODELS}")


def fit_rate(times, values, model="exponential", window=None):
    """Fit log(values) against the chosen model inside the window.

    All trace values inside the window must be positive; fewer than three
    points or a rank-deficient design raises FitError.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is None:
        window = (float(t.min()), float(t.max()))
    sel = (t >= window[0]) & (t <= window[1])
    t, y = t[sel], y[sel]
    if len(t) < 3:
        raise FitError(f"window {window} holds {len(t)} points; need >= 3")
    if np.any(y <= 0):
        raise FitError("nonpositive trace values inside the fit window")
    X, rate_name = _design(model, t)
    g = np.log(y)
    gram = X.T @ X
    if np.linalg.cond(gram) > 1e12:
        raise FitError("degenerate fit: normal equations ill-conditioned")
    coef = np.linalg.solve(gram, X.T @ g)
    resid = g - X @ coef
    rss = float(resid @ resid)
    dof = max(len(t) - 2, 1)
    cov = rss / dof * np.linalg.inv(gram)
    params = {"amplitude": float(np.exp(coef[0])), rate_name: float(coef[1])}
    stderr = {
        "amplitude": float(np.exp(coef[0]) * np.sqrt(cov[0, 0])),
        rate_name: float(np.sqrt(cov[1, 1])),
    }
    return FitResult(model, params, stderr, (float(t.min()), float(t.max())), float(np.sqrt(rss)))


def envelope_peaks(times, values):
    """Indices of strict-or-flat local maxima; for oscillatory decay fits."""
    v = np.asarray(values)
    idx = [i for i in range(1, len(v) - 1) if v[i] >= v[i - 1] and v[i] >= v[i + 1]]
    return np.asarray(idx, dtype=int)
