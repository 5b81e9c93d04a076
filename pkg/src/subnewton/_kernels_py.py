"""Pure-NumPy kernels: exact l1/box projection and the accelerated
projected-gradient loop for constrained quadratic models.

Semantics match the compiled twins in _kernels.pyx; this module is the
fallback selected when the extension is unavailable.
"""

import numpy as np

KIND_L1 = 1
KIND_BOX = 2


def project_l1(v, radius):
    """Euclidean projection onto {z : ||z||_1 <= radius} (sort-based, exact)."""
    if not radius > 0.0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, u.shape[0] + 1)
    rho = np.nonzero(u - (css - radius) / j > 0.0)[0][-1]
    theta = (css[rho] - radius) / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def project_box(v, lower, upper):
    """Euclidean projection onto {z : lower <= z <= upper} (componentwise clip)."""
    return np.clip(np.asarray(v, dtype=float), lower, upper)


def _project(v, kind, radius, lower, upper):
    if kind == KIND_L1:
        return project_l1(v, radius)
    if kind == KIND_BOX:
        return project_box(v, lower, upper)
    raise ValueError(f"unknown constraint kind {kind!r}")


def solve_projected_quadratic(
    xk, g, hessian, lipschitz, kind, radius, lower, upper, tol, max_iter
):
    """Minimize g^T (z - xk) + (z - xk)^T H (z - xk) / 2 over the constraint.

    Accelerated projected gradient with gradient-mapping restarts; stops when
    the scaled fixed-point residual lipschitz * ||z - P(z - grad/lipschitz)||
    drops to `tol`. Returns (z, iterations_used, final_residual).
    """
    xk = np.asarray(xk, dtype=float)
    g = np.asarray(g, dtype=float)
    h = np.asarray(hessian, dtype=float)
    lip = float(lipschitz)
    if not lip > 0.0:
        raise ValueError(f"lipschitz constant must be positive, got {lipschitz!r}")
    z = _project(xk, kind, radius, lower, upper)
    y = z.copy()
    t = 1.0
    resid = np.inf
    iters = 0
    for iters in range(1, int(max_iter) + 1):
        grad = g + h @ (y - xk)
        z_new = _project(y - grad / lip, kind, radius, lower, upper)
        grad_new = g + h @ (z_new - xk)
        resid = lip * float(
            np.linalg.norm(z_new - _project(z_new - grad_new / lip, kind, radius, lower, upper))
        )
        if resid <= tol:
            return z_new, iters, resid
        if float((y - z_new) @ (z_new - z)) > 0.0:
            t_new = 1.0
            y = z_new.copy()
        else:
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = z_new + ((t - 1.0) / t_new) * (z_new - z)
        z = z_new
        t = t_new
    return z, iters, resid
