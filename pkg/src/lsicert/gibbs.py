"""The systematic-scan Gibbs kernel and exact propagation of laws through it.

One sweep updates coordinates ``1..n`` in ascending order; coordinate ``i``
is redrawn from ``Q_i(.|v_1..v_{i-1}, u_{i+1}..u_n)`` where ``v`` are the
already refreshed values and ``u`` the old ones. Densities are pushed
through the sweep exactly: grid laws by tensor operations, Gaussian laws
through the affine map ``x -> M x + c + noise(N)``.

Per-sweep entropy terms are the average conditional divergences of the
intermediate laws met inside the sweep. Replacing the conditional law of
one coordinate by ``Q_i`` lowers ``D(.||q)`` by exactly that average, so
the terms telescope: their sum is the entropy drop of the sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .divergence import avg_conditional_relative_entropy, relative_entropy
from .errors import (
    DeltaOutOfRange,
    DimensionMismatch,
    InvariantViolation,
    VariantMismatch,
    ZeroDistance,
)
from .model import GaussianDensity, GaussianModel, GridDensity, GridModel, Weights
from .transport import MAX_LP_VARIABLES, w2_gaussian_weighted, w2_grid_exact

ENTROPY_FLOOR = 1e-14
DEFAULT_SWEEP_CAP = 1000
MONOTONE_TOL = 1e-12
CUMULATIVE_TOL = 1e-8


# -- Gaussian sweep as an affine map ---------------------------------------------


def _site_map(model: GaussianModel, k: int):
    """Affine update of coordinate ``k`` (0-based): ``x -> L x + s`` plus noise."""
    J, b = model.precision, model.linear
    n = model.dim
    L = np.eye(n)
    L[k] = -J[k] / J[k, k]
    L[k, k] = 0.0
    s = np.zeros(n)
    s[k] = b[k] / J[k, k]
    noise = np.zeros((n, n))
    noise[k, k] = 1.0 / J[k, k]
    return L, s, noise


def gaussian_sweep_map(model: GaussianModel):
    """The sweep as ``(M, c, N)``: ``x -> M x + c + xi`` with ``xi ~ N(0, N)``.

    Built by composing the single-site updates in scan order.
    """
    if not isinstance(model, GaussianModel):
        raise VariantMismatch("the affine sweep map exists only for Gaussian models")
    n = model.dim
    M, c, N = np.eye(n), np.zeros(n), np.zeros((n, n))
    for k in range(n):
        L, s, noise = _site_map(model, k)
        M = L @ M
        c = L @ c + s
        N = L @ N @ L.T + noise
    return M, c, (N + N.T) / 2


def _push_gaussian(M, c, N, p: GaussianDensity) -> GaussianDensity:
    cov = M @ p.cov @ M.T + N
    return GaussianDensity(M @ p.mean + c, (cov + cov.T) / 2)


# -- grid single-site update -------------------------------------------------------


def _grid_site_update(model: GridModel, log_mass: np.ndarray, k: int) -> np.ndarray:
    """Replace the conditional law of axis ``k`` by ``Q_k``; the retired value is summed out."""
    with np.errstate(invalid="ignore"):
        rest = logsumexp(log_mass, axis=k, keepdims=True)
    return rest + model.conditional_log(k + 1)


def _check_pair(model, p):
    if isinstance(model, GridModel) and isinstance(p, GridDensity):
        if p.shape != model.shape or not all(
            np.array_equal(a, b) for a, b in zip(p.grids, model.grids)
        ):
            raise DimensionMismatch("density and model live on different grids")
        return "grid"
    if isinstance(model, GaussianModel) and isinstance(p, GaussianDensity):
        if p.dim != model.dim:
            raise DimensionMismatch("density and model differ in dimension")
        return "gaussian"
    raise VariantMismatch(f"cannot push {type(p).__name__} through a {type(model).__name__}")


def gibbs_sweep_exact(model, p):
    """Exact law after one ascending sweep started from ``p``."""
    kind = _check_pair(model, p)
    if kind == "grid":
        lm = p.log_mass
        for k in range(model.dim):
            lm = _grid_site_update(model, lm, k)
        return GridDensity(model.grids, lm - logsumexp(lm))
    return _push_gaussian(*gaussian_sweep_map(model), p)


def sweep_with_terms(model, p):
    """One exact sweep together with its ``n`` entropy terms.

    Term ``i`` is ``E D(pi_i(.|rest) || Q_i(.|rest))`` under the law
    ``pi_i`` reached after coordinates ``1..i-1`` have been refreshed.
    """
    kind = _check_pair(model, p)
    n = model.dim
    terms = np.zeros(n)
    if kind == "grid":
        lm = p.log_mass
        for k in range(n):
            state = GridDensity(model.grids, lm - logsumexp(lm))
            terms[k] = avg_conditional_relative_entropy(state, model, k + 1)
            lm = _grid_site_update(model, state.log_mass, k)
        return GridDensity(model.grids, lm - logsumexp(lm)), terms
    state = p
    for k in range(n):
        terms[k] = avg_conditional_relative_entropy(state, model, k + 1)
        state = _push_gaussian(*_site_map(model, k), state)
    return state, terms


def sweep_entropy_terms(model, p) -> np.ndarray:
    """The ``n`` nonnegative terms whose sum is ``D(p||q) - D(pG||q)``."""
    return sweep_with_terms(model, p)[1]


# -- sampled sweeps ------------------------------------------------------------------


def gibbs_sweep_sampled_batch(model, points, rng) -> np.ndarray:
    """One stochastic sweep applied independently to each row of ``points``."""
    x = np.array(points, dtype=float, ndmin=2)
    if x.shape[1] != model.dim:
        raise DimensionMismatch(f"points must have {model.dim} coordinates")
    if isinstance(model, GaussianModel):
        J, b = model.precision, model.linear
        for k in range(model.dim):
            others = np.arange(model.dim) != k
            mean = (b[k] - x[:, others] @ J[k, others]) / J[k, k]
            x[:, k] = mean + rng.standard_normal(x.shape[0]) / math.sqrt(J[k, k])
        return x
    if isinstance(model, GridModel):
        idx = model.indices(x)
        for k in range(model.dim):
            table = np.moveaxis(model.conditional_log(k + 1), k, -1)
            rest = tuple(idx[:, j] for j in range(model.dim) if j != k)
            probs = np.broadcast_to(np.exp(table[rest]), (x.shape[0], table.shape[-1]))
            cdf = np.cumsum(probs, axis=1)
            u = rng.random(x.shape[0]) * cdf[:, -1]
            pick = (cdf < u[:, None]).sum(axis=1)
            idx[:, k] = np.minimum(pick, model.grids[k].size - 1)
        return np.stack([g[idx[:, j]] for j, g in enumerate(model.grids)], axis=1)
    raise VariantMismatch(f"unsupported model {type(model).__name__}")


def gibbs_sweep_sampled(model, x, rng_seed) -> np.ndarray:
    """One stochastic sweep from the point ``x``, reproducible from ``rng_seed``.

    Coordinates consume the seeded stream in scan order, one draw each.
    """
    rng = np.random.default_rng(rng_seed)
    return gibbs_sweep_sampled_batch(model, np.asarray(x, dtype=float)[None, :], rng)[0]


# -- trajectories ----------------------------------------------------------------------


def _default_weights(model) -> Weights:
    if model.weights is not None:
        return model.weights
    return Weights(np.ones(model.dim))


def _w_gap(model, p, weights):
    if isinstance(p, GaussianDensity):
        return w2_gaussian_weighted(p, model.reference(), weights)
    states = int(np.count_nonzero(p.log_mass > -np.inf)) * int(np.prod(model.shape))
    if states > MAX_LP_VARIABLES:
        return None
    return w2_grid_exact(p, model.reference(), weights)[0]


@dataclass
class Trajectory:
    """Snapshots ``p G^t`` with their entropies, sweep terms and distances.

    ``sweep_terms[t]`` belongs to the sweep from snapshot ``t`` to ``t+1``.
    ``w_gaps`` holds ``None`` where the distance was not computed.
    """

    snapshots: list = field(default_factory=list)
    sweep_terms: list = field(default_factory=list)
    entropies: list = field(default_factory=list)
    w_gaps: list = field(default_factory=list)

    @property
    def sweeps(self) -> int:
        return len(self.sweep_terms)

    def telescoping_residuals(self) -> np.ndarray:
        """``(D_t - D_{t+1}) - sum_i E_t[i]`` for every finished sweep."""
        d = np.asarray(self.entropies, dtype=float)
        sums = np.array([float(np.sum(e)) for e in self.sweep_terms])
        if sums.size == 0:
            return np.zeros(0)
        return (d[:-1] - d[1:]) - sums

    def cumulative_residual(self) -> float:
        """``D_0 - sum_t sum_i E_t[i]``; nonnegative up to rounding."""
        total = sum(float(np.sum(e)) for e in self.sweep_terms)
        return float(self.entropies[0]) - total

    def decay_factors(self, floor: float = 1e-12) -> np.ndarray:
        """``D_{t+1} / D_t`` over sweeps that start above ``floor``."""
        d = np.asarray(self.entropies, dtype=float)
        keep = d[:-1] > floor
        return d[1:][keep] / d[:-1][keep]

    def verify(self) -> None:
        """Raise :class:`InvariantViolation` if a trajectory invariant fails."""
        d = np.asarray(self.entropies, dtype=float)
        if not np.all(np.isfinite(d)):
            return
        rises = np.diff(d) - MONOTONE_TOL * np.maximum(d[:-1], 1.0)
        if np.any(rises > 0):
            t = int(np.argmax(rises > 0))
            raise InvariantViolation(f"entropy increased at sweep {t}: {d[t]!r} -> {d[t + 1]!r}")
        for t, e in enumerate(self.sweep_terms):
            if np.any(np.asarray(e) < 0):
                raise InvariantViolation(f"negative sweep term at sweep {t}")
        if self.sweep_terms and self.cumulative_residual() < -CUMULATIVE_TOL:
            raise InvariantViolation(
                f"sweep terms exceed the initial entropy by {-self.cumulative_residual():.3e}"
            )


def run_trajectory(
    model,
    p,
    sweeps: int = DEFAULT_SWEEP_CAP,
    weights: Weights | None = None,
    distances: bool = True,
    floor: float = ENTROPY_FLOOR,
) -> Trajectory:
    """Iterate the exact sweep at most ``sweeps`` times.

    Stops as soon as the entropy falls below ``floor``. Distances to ``q``
    are recorded when ``distances`` is set and the variant allows it.
    """
    if sweeps < 1:
        raise ValueError("at least one sweep is required")
    _check_pair(model, p)
    weights = weights or _default_weights(model)
    traj = Trajectory()

    def record(state):
        traj.snapshots.append(state)
        traj.entropies.append(relative_entropy(state, model))
        traj.w_gaps.append(_w_gap(model, state, weights) if distances else None)

    record(p)
    for _ in range(sweeps):
        if traj.entropies[-1] < floor:
            break
        nxt, terms = sweep_with_terms(model, traj.snapshots[-1])
        traj.sweep_terms.append(terms)
        record(nxt)
    traj.verify()
    return traj


# -- contraction ------------------------------------------------------------------------


def contraction_rate_formula(delta: float) -> float:
    """``r(delta) = (1 - delta) / sqrt(1 + 2 delta - delta^2)`` for ``0 < delta <= 1``."""
    if not (0.0 < delta <= 1.0):
        raise DeltaOutOfRange(f"delta={delta!r} is outside (0, 1]")
    return (1.0 - delta) / math.sqrt(1.0 + 2.0 * delta - delta * delta)


def _distance(p, q, weights: Weights) -> float:
    if isinstance(p, GaussianDensity):
        return w2_gaussian_weighted(p, q, weights)
    return w2_grid_exact(p, q, weights)[0]


def measure_contraction(model, p, q_ref, weights: Weights | None = None) -> float:
    """Observed one-sweep factor ``W(pG, q_ref G) / W(p, q_ref)``."""
    _check_pair(model, p)
    _check_pair(model, q_ref)
    weights = weights or _default_weights(model)
    before = _distance(p, q_ref, weights)
    if before <= 1e-14:
        raise ZeroDistance("the two laws coincide; the contraction factor is undefined")
    after = _distance(gibbs_sweep_exact(model, p), gibbs_sweep_exact(model, q_ref), weights)
    return after / before


# -- elementary step of the chain bound -------------------------------------------------


def aux_chain_bound_check(p_joint: GridDensity, q) -> float:
    """Slack in ``D(Y||X) <= D(Y_n|Y^{n-1} || Q_n) + D((Y^{n-1}, Z_n)||X)``.

    ``p_joint`` is the joint grid law of ``(Y_1..Y_n, Z_n)`` with ``Z_n`` on
    the last axis, sharing the grid of ``Y_n``. ``q`` is the reference
    (a grid model or density) of ``X`` on ``n`` axes. The returned
    ``rhs - lhs`` equals ``D(Z_n|Y^{n-1} || Q_n(.|Y^{n-1}))`` and is zero
    exactly when ``Z_n`` given ``Y^{n-1}`` follows ``Q_n``.
    """
    if isinstance(q, GridModel):
        q = q.reference()
    if not isinstance(p_joint, GridDensity) or not isinstance(q, GridDensity):
        raise VariantMismatch("the chain bound check works on grid laws")
    n = q.dim
    if p_joint.dim != n + 1:
        raise DimensionMismatch(f"joint law needs {n + 1} axes, found {p_joint.dim}")
    if not np.array_equal(p_joint.grids[n], p_joint.grids[n - 1]):
        raise DimensionMismatch("Z_n must share the grid of Y_n")
    grids = p_joint.grids[:n]
    with np.errstate(invalid="ignore"):
        y = GridDensity(grids, logsumexp(p_joint.log_mass, axis=n))
        yz = GridDensity(grids, logsumexp(p_joint.log_mass, axis=n - 1))
        q_cond = q.log_mass - logsumexp(q.log_mass, axis=n - 1, keepdims=True)
        y_cond = y.log_mass - logsumexp(y.log_mass, axis=n - 1, keepdims=True)
    support = y.log_mass > -np.inf
    if np.any(q_cond[support] == -np.inf):
        last = math.inf
    else:
        last = max(float(np.sum(y.mass[support] * (y_cond[support] - q_cond[support]))), 0.0)
    lhs = relative_entropy(y, q)
    rhs = last + relative_entropy(yz, q)
    if math.isinf(rhs):
        return math.inf
    return rhs - lhs
