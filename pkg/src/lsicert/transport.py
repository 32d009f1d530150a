"""Quadratic Wasserstein distances under the weighted metric.

Gaussian pairs use the Bures closed form after rescaling coordinate ``i``
by ``sqrt(rho_i)``; grid laws are compared by solving the transport linear
program exactly; 1-D grid laws also admit the monotone (quantile) coupling,
which serves as an independent check on the LP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import (
    DimensionMismatch,
    InfeasibleMarginals,
    NonPSDIntermediate,
    SizeLimitExceeded,
    VariantMismatch,
)
from .model import Gaussian1D, GaussianDensity, GridDensity, GridPmf, Weights

MAX_LP_VARIABLES = 10**6
PSD_BREACH_TOL = 1e-10
MARGINAL_TOL = 1e-9


def w2_gaussian_1d(p: Gaussian1D, q: Gaussian1D) -> float:
    """``sqrt((mean gap)^2 + (std gap)^2)``."""
    if not isinstance(p, Gaussian1D) or not isinstance(q, Gaussian1D):
        raise VariantMismatch("w2_gaussian_1d compares two Gaussian1D laws")
    return math.hypot(p.mean - q.mean, p.std - q.std)


def sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, eigenvalues floored at 0."""
    sym = (mat + mat.T) / 2
    vals, vecs = np.linalg.eigh(sym)
    scale = max(float(np.max(np.abs(vals))), 1.0)
    if vals[0] < -PSD_BREACH_TOL * scale:
        raise NonPSDIntermediate(f"eigenvalue {vals[0]:.3e} below the PSD tolerance")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def _bures_covariance_term(S1, S2, root1, cross) -> float:
    """``tr S1 + tr S2 - 2 tr (S1^1/2 S2 S1^1/2)^1/2`` without cancellation.

    For nonsingular ``S1`` the optimal map is ``T = S1^-1/2 cross S1^-1/2``
    and the term equals ``tr((I - T) S1 (I - T))``, whose rounding error is
    relative to the result rather than to the traces.
    """
    evals = np.linalg.eigvalsh(S1)
    if evals[0] > 1e-10 * max(evals[-1], 1e-300):
        inv_root = np.linalg.inv(root1)
        D = np.eye(len(S1)) - inv_root @ cross @ inv_root
        D = (D + D.T) / 2
        return float(np.trace(D @ S1 @ D))
    return float(np.trace(S1) + np.trace(S2) - 2.0 * np.trace(cross))


def w2_gaussian_weighted(p: GaussianDensity, q: GaussianDensity, weights: Weights) -> float:
    """Bures-Wasserstein distance with cost ``sum_i rho_i (x_i - y_i)^2``."""
    if not isinstance(p, GaussianDensity) or not isinstance(q, GaussianDensity):
        raise VariantMismatch("w2_gaussian_weighted compares two Gaussian densities")
    if p.dim != q.dim or weights.n != p.dim:
        raise DimensionMismatch("densities and weights differ in dimension")
    s = np.sqrt(weights.rho)
    S1 = p.cov * np.outer(s, s)
    S2 = q.cov * np.outer(s, s)
    root1 = sqrtm_psd(S1)
    cross = sqrtm_psd(root1 @ S2 @ root1)
    gap = s * (p.mean - q.mean)
    w2 = float(gap @ gap) + _bures_covariance_term(S1, S2, root1, cross)
    scale = max(float(np.trace(S1) + np.trace(S2)), 1.0)
    if w2 < -PSD_BREACH_TOL * scale:
        raise NonPSDIntermediate(f"negative squared distance {w2:.3e}")
    return math.sqrt(max(w2, 0.0))


@dataclass(frozen=True, eq=False)
class CouplingPlan:
    """A transport plan between two finitely supported laws.

    ``mass[a, b]`` is the mass moved from ``source[a]`` to ``target[b]``.
    """

    source: np.ndarray
    target: np.ndarray
    mass: np.ndarray

    def pairs(self, threshold: float = 0.0):
        """Yield ``(x, y, mass)`` for entries above ``threshold``."""
        for a, b in zip(*np.nonzero(self.mass > threshold)):
            yield self.source[a], self.target[b], float(self.mass[a, b])

    def marginal_residual(self, p_mass: np.ndarray, q_mass: np.ndarray) -> float:
        rows = np.abs(self.mass.sum(axis=1) - p_mass).max()
        cols = np.abs(self.mass.sum(axis=0) - q_mass).max()
        return float(max(rows, cols))

    def cost(self, weights: Weights) -> float:
        diff = self.source[:, None, :] - self.target[None, :, :]
        return float(np.sum(self.mass * np.sum(weights.rho * diff**2, axis=-1)))


def _support(density: GridDensity):
    mass = density.mass
    nz = np.nonzero(mass > 0)
    points = np.stack([g[ix] for g, ix in zip(density.grids, nz)], axis=-1)
    return points, mass[nz]


def solve_transport(a: np.ndarray, b: np.ndarray, cost: np.ndarray) -> np.ndarray:
    """Exact optimal plan for the discrete transport problem (HiGHS simplex)."""
    k, m = cost.shape
    if k * m > MAX_LP_VARIABLES:
        raise SizeLimitExceeded(f"{k * m} LP variables exceed the cap of {MAX_LP_VARIABLES}")
    if abs(a.sum() - 1.0) > MARGINAL_TOL or abs(b.sum() - 1.0) > MARGINAL_TOL:
        raise InfeasibleMarginals("marginals are not normalized")
    if k == 1 or m == 1:
        return np.outer(a, b)
    rows = sparse.kron(sparse.identity(k), np.ones((1, m)))
    cols = sparse.kron(np.ones((1, k)), sparse.identity(m))
    # one marginal constraint is implied by the others
    A_eq = sparse.vstack([rows, cols.tocsr()[:-1]]).tocsc()
    b_eq = np.concatenate([a, b[:-1]])
    res = linprog(
        cost.ravel(),
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        raise InfeasibleMarginals(f"transport LP failed: {res.message}")
    return np.clip(res.x.reshape(k, m), 0.0, None)


def w2_grid_exact(p: GridDensity, q: GridDensity, weights: Weights):
    """Exact ``W`` between grid laws and an optimal :class:`CouplingPlan`."""
    if not isinstance(p, GridDensity) or not isinstance(q, GridDensity):
        raise VariantMismatch("w2_grid_exact compares two grid densities")
    if p.dim != q.dim or weights.n != p.dim:
        raise DimensionMismatch("densities and weights differ in dimension")
    xs, a = _support(p)
    ys, b = _support(q)
    a = a / a.sum()
    b = b / b.sum()
    diff = xs[:, None, :] - ys[None, :, :]
    cost = np.sum(weights.rho * diff**2, axis=-1)
    plan = CouplingPlan(xs, ys, solve_transport(a, b, cost))
    return math.sqrt(max(float(np.sum(plan.mass * cost)), 0.0)), plan


def _as_pmf(law):
    if isinstance(law, GridPmf):
        return law.points, law.prob
    if isinstance(law, GridDensity) and law.dim == 1:
        return law.grids[0], law.mass
    raise VariantMismatch("w2_quantile_1d needs 1-D grid laws")


def quantile_w2_squared(xp, wp, xq, wq) -> float:
    """Squared ``W`` between 1-D discrete laws by inverting both CDFs.

    The CDFs are inverted on the common refinement of their jump levels.
    """
    cp = np.cumsum(wp / wp.sum())
    cq = np.cumsum(wq / wq.sum())
    cp[-1] = cq[-1] = 1.0
    levels = np.unique(np.concatenate([cp, cq]))
    du = np.diff(np.concatenate([[0.0], levels]))
    mid = levels - du / 2
    ip = np.minimum(np.searchsorted(cp, mid), xp.size - 1)
    iq = np.minimum(np.searchsorted(cq, mid), xq.size - 1)
    return float(np.sum(du * (xp[ip] - xq[iq]) ** 2))


def w2_quantile_1d(p, q, rho: float = 1.0) -> float:
    """``W`` between 1-D grid laws via the monotone rearrangement.

    ``rho`` scales the squared metric.
    """
    xp, wp = _as_pmf(p)
    xq, wq = _as_pmf(q)
    return math.sqrt(rho * quantile_w2_squared(xp, wp, xq, wq))
