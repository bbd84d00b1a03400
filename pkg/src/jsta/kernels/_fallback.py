"""Pure numpy implementations of the compiled kernels."""
import numpy as np


def laplacian_matvec(wa, wb, x):
    """Weighted graph Laplacian of the 4-neighbour grid applied to ``x``.

    ``wa[i, j]`` weights the link (i, j)-(i+1, j); ``wb[i, j]`` the link
    (i, j)-(i, j+1).
    """
    y = np.zeros_like(x)
    fa = wa * (x[1:] - x[:-1])
    y[:-1] -= fa
    y[1:] += fa
    fb = wb * (x[:, 1:] - x[:, :-1])
    y[:, :-1] -= fb
    y[:, 1:] += fb
    return y


def degree(wa, wb):
    d = np.zeros((wa.shape[0] + 1, wa.shape[1]))
    d[:-1] += wa
    d[1:] += wa
    d[:, :-1] += wb
    d[:, 1:] += wb
    return d


def pcg_laplacian(wa, wb, b, x0, tol, maxiter):
    """Jacobi-preconditioned CG for ``L x = b``.

    Returns ``(x, iterations, relative_residual)``.  ``b`` must be orthogonal
    to the constants on each connected component.
    """
    wa = np.ascontiguousarray(wa, dtype=float)
    wb = np.ascontiguousarray(wb, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    x = np.array(x0, dtype=float, copy=True)
    d = degree(wa, wb)
    inv = np.zeros_like(d)
    inv[d > 0] = 1.0 / d[d > 0]
    bnorm = np.sqrt(np.sum(b * b))
    if bnorm == 0:
        return np.zeros_like(b), 0, 0.0
    r = b - laplacian_matvec(wa, wb, x)
    z = inv * r
    p = z.copy()
    rz = np.sum(r * z)
    rnorm = np.sqrt(np.sum(r * r))
    it = 0
    while rnorm > tol * bnorm and it < maxiter:
        q = laplacian_matvec(wa, wb, p)
        pq = np.sum(p * q)
        if pq <= 0:
            break
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        z = inv * r
        rz_new = np.sum(r * z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        rnorm = np.sqrt(np.sum(r * r))
        it += 1
    return x, it, float(rnorm / bnorm)
