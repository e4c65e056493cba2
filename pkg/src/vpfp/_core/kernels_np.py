"""NumPy fallback for the hot kernels; reference semantics for _kernels.pyx."""

import numpy as np

NAME = "numpy"


def _cubic_weights(f):
    cm1 = -f * (f - 1.0) * (f - 2.0) / 6.0
    c0 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0
    cp1 = -(f + 1.0) * f * (f - 2.0) / 2.0
    cp2 = (f + 1.0) * f * (f - 1.0) / 6.0
    return cm1, c0, cp1, cp2


def gather_points(col, q, x0, dx):
    """Cubic gather of a single column at arbitrary points q.

    4-point Lagrange cubic inside the grid, linear in the first/last cell,
    zero outside the window.
    """
    col = np.ascontiguousarray(col)
    q = np.asarray(q, dtype=float)
    n = col.shape[0]
    s = (q - x0) / dx
    j = np.floor(s).astype(np.int64)
    f = s - j
    out = np.zeros(q.shape, dtype=np.complex128)

    ok = (j >= 1) & (j <= n - 3)
    jj, ff = j[ok], f[ok]
    cm1, c0, cp1, cp2 = _cubic_weights(ff)
    out[ok] = cm1 * col[jj - 1] + c0 * col[jj] + cp1 * col[jj + 1] + cp2 * col[jj + 2]

    edge = ~ok & (j >= 0) & (j <= n - 2)
    jj, ff = j[edge], f[edge]
    out[edge] = (1.0 - ff) * col[jj] + ff * col[jj + 1]
    return out


def affine_gather(values, a, b, x0, dx):
    """out[i, j] = interp(values[i, :]) at q = a*(x0 + j*dx) + b[i]."""
    values = np.ascontiguousarray(values)
    M, N = values.shape
    x = x0 + dx * np.arange(N)
    out = np.empty((M, N), dtype=np.complex128)
    for i in range(M):
        out[i] = gather_points(values[i], a * x + b[i], x0, dx)
    return out


def mode_convolve(h, rho, eta):
    """Quadratic electric coupling: out[k] = -sum_{l!=0} rho[l]*(eta/l)*h[k-l]."""
    h = np.asarray(h)
    M, N = h.shape
    K = (M - 1) // 2
    out = np.zeros((M, N), dtype=np.complex128)
    for il in range(M):
        l = il - K
        if l == 0:
            continue
        coef = -rho[il] / l
        # rows ik with 0 <= ik-il+K < M
        ik_lo = max(0, il - K)
        ik_hi = min(M, il + K + 1)
        out[ik_lo:ik_hi] += coef * eta * h[ik_lo - il + K:ik_hi - il + K]
    return out
