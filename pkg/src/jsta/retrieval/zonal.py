"""Least-squares integration of phase differences on the joint grid.

A *link* joins two neighbouring cells; its target is the phase increment
``phi(b) - phi(a)`` estimated from a :class:`GradientField`.  The surface is
the least-squares solution of ``D phi = t``, i.e. the weighted graph
Laplacian system ``D^T D phi = D^T t``, solved per connected component and
pinned at each component's central cell.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.interpolate import CubicSpline
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .. import kernels
from ..core.grids import UniformAxis
from ..errors import ContractError, ConvergenceError
from .gradient import GradientField, _runs

DIRECT_MAX_CELLS = 64 * 64


@dataclass(frozen=True, eq=False)
class PhaseSurface:
    """Phase (rad) on ``grid_a x grid_b``; zero where ``mask`` is False."""

    grid_a: UniformAxis
    grid_b: UniformAxis
    values: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    pin: tuple = (0, 0)
    residual_rms: float = 0.0
    n_components: int = 1
    iterations: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True)
        m = np.array(self.mask, dtype=bool, copy=True)
        shape = (self.grid_a.n_points, self.grid_b.n_points)
        if v.shape != shape or m.shape != shape:
            raise ContractError(f"surface arrays must have shape {shape}")
        v[~m] = 0.0
        for a in (v, m):
            a.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "mask", m)

    def mesh(self):
        return np.meshgrid(self.grid_a.values, self.grid_b.values, indexing="ij")

    def relative_to(self, other: "PhaseSurface") -> np.ndarray:
        """Difference on the common mask after removing the mean offset."""
        m = self.mask & other.mask
        d = np.where(m, self.values - other.values, 0.0)
        if m.any():
            d[m] -= d[m].mean()
        return d


def _smooth_second_derivative(g: np.ndarray, mask: np.ndarray, x: np.ndarray, y: np.ndarray):
    """d^2 g / dx^2 from a total-degree-3 polynomial fit over the mask.

    Used for the small curvature correction of the link targets; a global
    fit keeps noise from being amplified by a local second difference.
    """
    X, Y = np.meshgrid(x, y, indexing="ij")
    sx = max(np.abs(x).max(), 1e-300)
    sy = max(np.abs(y).max(), 1e-300)
    u, v = X[mask] / sx, Y[mask] / sy
    powers = [(p, q) for p in range(4) for q in range(4 - p)]
    if mask.sum() < 2 * len(powers):
        return lambda xx, yy: np.zeros(np.broadcast(xx, yy).shape)
    A = np.stack([u ** p * v ** q for p, q in powers], axis=1)
    coef, *_ = np.linalg.lstsq(A, g[mask], rcond=None)

    def d2(xx, yy):
        uu, vv = np.asarray(xx) / sx, np.asarray(yy) / sy
        out = np.zeros(np.broadcast(uu, vv).shape)
        for c, (p, q) in zip(coef, powers):
            if p >= 2:
                out = out + c * p * (p - 1) * uu ** (p - 2) * vv ** q
        return out / sx ** 2

    return d2


def link_targets(grad: GradientField, curvature: bool = True):
    """Phase increments across links along the gradient's axis.

    Returns ``(targets, valid)`` oriented with the sheared axis first, shape
    ``(n - 1, m)``: entry ``k`` is the estimate of ``phi(nu_{k+1}) - phi(nu_k)``.

    ``-dphi / shear`` approximates ``phi'`` at ``nu + shear / 2``; it is
    interpolated to each link midpoint with a cubic spline along the line and
    multiplied by the grid spacing.  With ``curvature`` the midpoint-rule
    terms of order ``phi'''`` are corrected, which makes the increment exact
    for cubic phases.
    """
    v, m = grad.oriented()
    g = grad.grid
    other = grad.grid_i if grad.axis_index == 0 else grad.grid_s
    d, om = g.spacing, grad.shear
    nu = g.values
    G = -v / om
    n, n_other = v.shape
    t = np.zeros((n - 1, n_other))
    valid = m[:-1] & m[1:]
    d2 = _smooth_second_derivative(G, m, nu + om / 2, other.values) if curvature else None
    for j in range(n_other):
        for a, b in _runs(m[:, j]):
            if b - a < 2:
                continue
            xs = nu[a:b] + om / 2
            mids = nu[a:b - 1] + d / 2
            if b - a >= 4:
                vals = CubicSpline(xs, G[a:b, j], extrapolate=True)(mids)
            else:
                vals = np.polyval(np.polyfit(xs, G[a:b, j], b - a - 1), mids)
            if d2 is not None:
                vals = vals + d2(mids, other.values[j]) * (d * d - om * om) / 24
            t[a:b - 1, j] = d * vals
    t[~valid] = 0.0
    return t, valid


def integrate_axis(grad: GradientField, curvature: bool = True) -> PhaseSurface:
    """Integrate one gradient along its own axis only.

    Each masked run of each line is integrated independently and pinned to
    zero at the run's central cell; nothing ties lines together.
    """
    t, valid = link_targets(grad, curvature)
    _, m = grad.oriented()
    out = np.zeros(m.shape)
    for j in range(m.shape[1]):
        for a, b in _runs(m[:, j]):
            line = np.concatenate(([0.0], np.cumsum(t[a:b - 1, j])))
            out[a:b, j] = line - line[(b - a) // 2]
    if grad.axis_index == 1:
        out, m = out.T, m.T
    return PhaseSurface(grad.grid_s, grad.grid_i, out, m, pin=(grad.grid_s.center_index, grad.grid_i.center_index))


def _divergence(wa, wb, ta, tb, shape):
    """``D^T t`` for links weighted by ``wa``/``wb``."""
    rhs = np.zeros(shape)
    fa = wa * ta
    rhs[1:] += fa
    rhs[:-1] -= fa
    fb = wb * tb
    rhs[:, 1:] += fb
    rhs[:, :-1] -= fb
    return rhs


def _components(wa, wb, shape):
    n = shape[0] * shape[1]
    idx = np.arange(n).reshape(shape)
    ia = np.flatnonzero(wa > 0)
    ib = np.flatnonzero(wb > 0)
    rows = np.concatenate([idx[:-1].ravel()[ia], idx[:, :-1].ravel()[ib]])
    cols = np.concatenate([idx[1:].ravel()[ia], idx[:, 1:].ravel()[ib]])
    adj = sparse.coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    _, labels = connected_components(adj, directed=False)
    return labels.reshape(shape)


def _laplacian_matrix(wa, wb, shape):
    n = shape[0] * shape[1]
    idx = np.arange(n).reshape(shape)
    rows, cols, vals = [], [], []
    for w, i0, i1 in ((wa, idx[:-1], idx[1:]), (wb, idx[:, :-1], idx[:, 1:])):
        sel = w > 0
        a, b, ww = i0[sel], i1[sel], w[sel]
        rows += [a, b, a, b]
        cols += [b, a, a, b]
        vals += [-ww, -ww, ww, ww]
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))


def solve_links(wa, wb, ta, tb, grid_a: UniformAxis, grid_b: UniformAxis, method: str = "cg",
                tol: float = 1e-10, maxiter=None, largest_only: bool = False) -> PhaseSurface:
    """Least-squares potential for arbitrary link targets.

    ``wa``/``ta`` have shape ``(na - 1, nb)`` (links along a), ``wb``/``tb``
    shape ``(na, nb - 1)``.  Cells touched by no positive-weight link are
    outside the surface mask.  Separate components have unrelated offsets;
    ``largest_only`` drops every component but the largest.
    """
    shape = (grid_a.n_points, grid_b.n_points)
    wa = np.asarray(wa, float)
    wb = np.asarray(wb, float)
    ta = np.where(wa > 0, np.asarray(ta, float), 0.0)
    tb = np.where(wb > 0, np.asarray(tb, float), 0.0)
    if wa.shape != (shape[0] - 1, shape[1]) or wb.shape != (shape[0], shape[1] - 1):
        raise ContractError("link arrays do not match the grid")
    if np.any(wa < 0) or np.any(wb < 0):
        raise ContractError("link weights must be >= 0")
    mask = kernels.degree(wa, wb) > 0
    if not mask.any():
        raise ContractError("no valid links; nothing to integrate")
    labels = _components(wa, wb, shape)
    if largest_only:
        sizes = np.bincount(labels[mask])
        keep = labels == np.argmax(sizes)
        wa = wa * (keep[:-1] & keep[1:])
        wb = wb * (keep[:, :-1] & keep[:, 1:])
        mask = mask & keep
    rhs = _divergence(wa, wb, ta, tb, shape)
    n_cells = int(mask.sum())
    iters = 0
    if method == "direct":
        if shape[0] * shape[1] > DIRECT_MAX_CELLS:
            raise ContractError(f"direct solve is limited to {DIRECT_MAX_CELLS} cells")
        L = _laplacian_matrix(wa, wb, shape).tolil()
        b = rhs.ravel().copy()
        fix = ~mask.ravel()
        for lab in np.unique(labels[mask]):
            fix[np.flatnonzero((labels == lab).ravel() & mask.ravel())[0]] = True
        for k in np.flatnonzero(fix):
            L.rows[k], L.data[k] = [k], [1.0]
            b[k] = 0.0
        x = spsolve(L.tocsc(), b).reshape(shape)
    elif method == "cg":
        maxiter = 10 * n_cells if maxiter is None else maxiter
        x, iters, relres = kernels.pcg_laplacian(wa, wb, rhs, np.zeros(shape), tol, maxiter)
        x = np.asarray(x)
        if relres > tol:
            raise ConvergenceError(
                f"zonal CG stopped at relative residual {relres:.3g} after {iters} iterations "
                f"(tolerance {tol:g})", relres)
    else:
        raise ContractError(f"unknown method {method!r}")

    comps = np.unique(labels[mask])
    main_pin = None
    best = -1
    ii, jj = np.indices(shape)
    for lab in comps:
        sel = mask & (labels == lab)
        ci, cj = ii[sel].mean(), jj[sel].mean()
        cand = np.argwhere(sel)
        p = cand[np.argmin((cand[:, 0] - ci) ** 2 + (cand[:, 1] - cj) ** 2)]
        x[sel] -= x[p[0], p[1]]
        if sel.sum() > best:
            best, main_pin = int(sel.sum()), (int(p[0]), int(p[1]))
    x[~mask] = 0.0
    ra = (x[1:] - x[:-1] - ta)[wa > 0]
    rb = (x[:, 1:] - x[:, :-1] - tb)[wb > 0]
    res = np.concatenate([ra, rb])
    rms = float(np.sqrt(np.mean(res ** 2))) if res.size else 0.0
    return PhaseSurface(grid_a, grid_b, x, mask, main_pin, rms, int(comps.size), int(iters))


def zonal_solve(grad_s: GradientField, grad_i: GradientField, method: str = "cg",
                tol: float = 1e-10, curvature: bool = True, largest_only: bool = True) -> PhaseSurface:
    """Joint spectral phase from gradients along both axes.

    By default only the largest connected region is kept: small islands at
    the rim of the mask carry no information about their offset.
    """
    if grad_s.axis != "signal" or grad_i.axis != "idler":
        raise ContractError("zonal_solve needs a signal-axis and an idler-axis gradient")
    if grad_s.grid_s != grad_i.grid_s or grad_s.grid_i != grad_i.grid_i:
        raise ContractError("the two gradients are on different grids")
    ta, va = link_targets(grad_s, curvature)
    tb, vb = link_targets(grad_i, curvature)
    return solve_links(va.astype(float), vb.T.astype(float), ta, tb.T,
                       grad_s.grid_s, grad_s.grid_i, method, tol, largest_only=largest_only)
