"""Relative entropy, its conditional averages, and Gaussian Fisher information.

Gaussian closed forms used here (``p = N(m, S)``, ``q = N(mu, C)``):

* ``D(p||q) = 1/2 [sum_k (x_k - log(1 + x_k)) + (m - mu)' C^{-1} (m - mu)]``
  where ``x_k`` are the eigenvalues of ``C^{-1} S - I``, computed from the
  whitened difference ``L^{-1} (S - C) L^{-T}`` (``C = L L'``) so that
  nearly equal covariances do not cancel catastrophically.
* Two 1-D Gaussians whose means differ by an affine function
  ``alpha + gamma' y`` of a Gaussian condition ``y ~ N(a, A)`` have average
  divergence ``1/2 (r - 1 - log r) + E[(alpha + gamma' y)^2] / (2 v_q)``
  with ``r = v_p / v_q`` and ``E[...] = (alpha + gamma' a)^2 + gamma' A gamma``.
* With ``q`` given by precision ``J`` and linear term ``b``, the log-ratio
  gradient is ``(J - P) x + P m - b`` (``P = S^{-1}``), so
  ``I(p||q) = |J m - b|^2 + tr((J - P) S (J - P)')``.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import logsumexp

from .errors import DimensionMismatch, SupportMismatch, VariantMismatch
from .model import (
    Gaussian1D,
    GaussianDensity,
    GaussianModel,
    GridDensity,
    GridModel,
    GridPmf,
    _coord,
)


def _x_minus_log1p(x):
    """``x - log(1 + x)`` without cancellation for small ``x``."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = x - np.log1p(x)
    series = x**2 / 2 - x**3 / 3 + x**4 / 4 - x**5 / 5
    return np.where(small, series, direct)


def as_density(q):
    """Accept a model wherever a reference density is expected."""
    if isinstance(q, (GaussianModel, GridModel)):
        return q.reference()
    return q


def _same_grids(a, b) -> bool:
    return len(a) == len(b) and all(
        x.shape == y.shape and np.array_equal(x, y) for x, y in zip(a, b)
    )


def _grid_kl(log_p: np.ndarray, log_q: np.ndarray) -> float:
    support = log_p > -np.inf
    if np.any(log_q[support] == -np.inf):
        return math.inf
    lp = log_p[support]
    return max(float(np.sum(np.exp(lp) * (lp - log_q[support]))), 0.0)


def gaussian_kl(m1, S1, m0, S0) -> float:
    """``D(N(m1, S1) || N(m0, S0))``; ``S0`` must be positive definite."""
    m1, m0 = np.asarray(m1, float), np.asarray(m0, float)
    S1, S0 = np.asarray(S1, float), np.asarray(S0, float)
    L = np.linalg.cholesky(S0)
    W = solve_triangular(L, solve_triangular(L, S1 - S0, lower=True).T, lower=True)
    x = np.linalg.eigvalsh((W + W.T) / 2)
    if np.any(x <= -1.0 + 1e-14):
        return math.inf
    z = solve_triangular(L, m1 - m0, lower=True)
    return max(0.5 * (float(np.sum(_x_minus_log1p(x))) + float(z @ z)), 0.0)


def gaussian_kl_1d(mean_p, var_p, mean_q, var_q) -> float:
    r = var_p / var_q
    return 0.5 * float(_x_minus_log1p(r - 1.0)) + (mean_p - mean_q) ** 2 / (2 * var_q)


def _expected_kl_affine(var_p, var_q, alpha, gamma, mean, cov) -> float:
    """Average 1-D Gaussian divergence with mean gap ``alpha + gamma'y``."""
    shift = alpha + float(gamma @ mean) if gamma.size else alpha
    spread = float(gamma @ cov @ gamma) if gamma.size else 0.0
    r = var_p / var_q
    return max(0.5 * float(_x_minus_log1p(r - 1.0)) + (shift**2 + spread) / (2 * var_q), 0.0)


def relative_entropy(p, q) -> float:
    """``D(p||q)``; ``math.inf`` when ``p`` is not absolutely continuous.

    Accepts two densities of the same variant, two local specifications
    of the same variant, or a density and a model (its reference law).
    """
    q = as_density(q)
    if isinstance(p, GridDensity) and isinstance(q, GridDensity):
        if not _same_grids(p.grids, q.grids):
            raise DimensionMismatch("densities live on different grids")
        return _grid_kl(p.log_mass, q.log_mass)
    if isinstance(p, GaussianDensity) and isinstance(q, GaussianDensity):
        if p.dim != q.dim:
            raise DimensionMismatch("Gaussian densities differ in dimension")
        if p.is_degenerate:
            return math.inf
        return gaussian_kl(p.mean, p.cov, q.mean, q.cov)
    if isinstance(p, GridPmf) and isinstance(q, GridPmf):
        if not _same_grids((p.points,), (q.points,)):
            raise DimensionMismatch("pmfs live on different grids")
        return _grid_kl(p.log_prob, q.log_prob)
    if isinstance(p, Gaussian1D) and isinstance(q, Gaussian1D):
        return max(gaussian_kl_1d(p.mean, p.variance, q.mean, q.variance), 0.0)
    raise VariantMismatch(f"cannot compare {type(p).__name__} with {type(q).__name__}")


def avg_conditional_relative_entropy(p, model, i: int) -> float:
    """``E D(p_i(.|Y_bar_i) || Q_i(.|Y_bar_i))`` with ``Y ~ p``."""
    axis = _coord(i, model.dim)
    if isinstance(model, GridModel) and isinstance(p, GridDensity):
        if not _same_grids(p.grids, model.grids):
            raise DimensionMismatch("density and model live on different grids")
        lp = p.log_mass
        support = lp > -np.inf
        lq = model.conditional_log(i)
        if np.any(lq[support] == -np.inf):
            return math.inf
        with np.errstate(invalid="ignore"):
            cond = lp - logsumexp(lp, axis=axis, keepdims=True)
        vals = np.exp(lp[support]) * (cond[support] - lq[support])
        return max(float(np.sum(vals)), 0.0)
    if isinstance(model, GaussianModel) and isinstance(p, GaussianDensity):
        if p.dim != model.dim:
            raise DimensionMismatch("density and model differ in dimension")
        if p.is_degenerate:
            return math.inf
        P = np.linalg.inv(p.cov)
        J, b, m = model.precision, model.linear, p.mean
        others = np.arange(model.dim) != axis
        gamma = -P[axis, others] / P[axis, axis] + J[axis, others] / J[axis, axis]
        alpha = m[axis] + P[axis, others] @ m[others] / P[axis, axis] - b[axis] / J[axis, axis]
        return _expected_kl_affine(
            1.0 / P[axis, axis],
            1.0 / J[axis, axis],
            alpha,
            gamma,
            m[others],
            p.cov[np.ix_(others, others)],
        )
    raise VariantMismatch(f"cannot pair {type(p).__name__} with {type(model).__name__}")


def _gaussian_conditional(mean, cov, k):
    """Regression of coordinate ``k`` on coordinates ``0..k-1``."""
    if k == 0:
        return np.zeros(0), mean[0], cov[0, 0]
    A = cov[:k, :k]
    coef = cho_solve(cho_factor(A), cov[:k, k])
    var = cov[k, k] - cov[k, :k] @ coef
    intercept = mean[k] - coef @ mean[:k]
    return coef, intercept, var


def chain_rule_terms(p, q) -> np.ndarray:
    """``D(Y_i | Y^{i-1} || q_i(.|Y^{i-1}))`` for ``i = 1..n``.

    ``q_i(.|x^{i-1})`` is the law of ``X_i`` given the preceding coordinates
    under ``q``; the terms sum to ``D(p||q)``.
    """
    q = as_density(q)
    if isinstance(p, GridDensity) and isinstance(q, GridDensity):
        if not _same_grids(p.grids, q.grids):
            raise DimensionMismatch("densities live on different grids")
        n = p.dim
        terms = np.zeros(n)
        prev_p = prev_q = np.zeros(())
        for k in range(n):
            tail = tuple(range(k + 1, n))
            mp = logsumexp(p.log_mass, axis=tail) if tail else p.log_mass
            mq = logsumexp(q.log_mass, axis=tail) if tail else q.log_mass
            with np.errstate(invalid="ignore"):
                cp = mp - prev_p[..., None]
                cq = mq - prev_q[..., None]
            support = mp > -np.inf
            if np.any(mq[support] == -np.inf):
                terms[k] = math.inf
            else:
                terms[k] = max(float(np.sum(np.exp(mp[support]) * (cp[support] - cq[support]))), 0.0)
            prev_p, prev_q = mp, mq
        return terms
    if isinstance(p, GaussianDensity) and isinstance(q, GaussianDensity):
        if p.dim != q.dim:
            raise DimensionMismatch("Gaussian densities differ in dimension")
        if p.is_degenerate:
            return np.full(p.dim, math.inf)
        terms = np.zeros(p.dim)
        for k in range(p.dim):
            gp, ap, vp = _gaussian_conditional(p.mean, p.cov, k)
            gq, aq, vq = _gaussian_conditional(q.mean, q.cov, k)
            terms[k] = _expected_kl_affine(vp, vq, ap - aq, gp - gq, p.mean[:k], p.cov[:k, :k])
        return terms
    raise VariantMismatch(f"cannot compare {type(p).__name__} with {type(q).__name__}")


def conditional_relative_entropy_given(
    p_cond: Sequence, q_cond: Sequence, weighting
) -> float:
    """``E_pi D(p(.|U) || q(.|U))`` for a discrete condition ``U ~ pi``.

    ``weighting`` is a 1-D :class:`GridDensity`, a :class:`GridPmf`, or a
    vector of probabilities aligned with the two families.
    """
    if isinstance(weighting, GridDensity):
        w = weighting.mass.ravel()
    elif isinstance(weighting, GridPmf):
        w = weighting.prob
    else:
        w = np.asarray(weighting, dtype=float).ravel()
    if len(p_cond) != w.size or len(q_cond) != w.size:
        raise SupportMismatch(
            f"{w.size} conditions but families of sizes {len(p_cond)} and {len(q_cond)}"
        )
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise SupportMismatch("weighting is not a probability vector")
    total = 0.0
    for wk, pk, qk in zip(w, p_cond, q_cond):
        if wk == 0:
            continue
        d = relative_entropy(pk, qk)
        if math.isinf(d):
            return math.inf
        total += wk * d
    return total


def fisher_information_gaussian(p, q) -> float:
    """``I(p||q) = E_p |grad log(p/q)|^2`` for Gaussian ``p`` and ``q``."""
    if not isinstance(p, GaussianDensity):
        raise VariantMismatch("Fisher information is only defined for Gaussian pairs")
    if isinstance(q, GaussianModel):
        J, b = q.precision, q.linear
    elif isinstance(q, GaussianDensity):
        J = np.linalg.inv(q.cov)
        b = J @ q.mean
    else:
        raise VariantMismatch("Fisher information is only defined for Gaussian pairs")
    if J.shape[0] != p.dim:
        raise DimensionMismatch("Gaussian densities differ in dimension")
    if p.is_degenerate:
        return math.inf
    P = np.linalg.inv(p.cov)
    A = J - P
    g = J @ p.mean - b
    return max(float(g @ g + np.trace(A @ p.cov @ A.T)), 0.0)
