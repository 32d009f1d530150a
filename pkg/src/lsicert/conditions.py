"""Hypothesis checkers: beta matrices, the norm condition, and the DE/SQ/ED/CO bounds.

Sampling-based checks can falsify a bound but never prove it. Every check
returns its worst tuple so that a failure can be replayed offline.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .divergence import _grid_kl
from .errors import DegenerateSpec, DimensionMismatch, PartialsUnavailable, VariantMismatch
from .expr import HamiltonianExpr
from .model import (
    GaussianModel,
    GridModel,
    Weights,
    _coord,
    weighted_distance,
)
from .transport import quantile_w2_squared

PASS_TOL = 1e-9
EXHAUSTIVE_MAX_POINTS = 4
EXHAUSTIVE_MAX_DIM = 2
CONSTANT_PARTIAL_RTOL = 1e-9
DEFAULT_SAFETY_FACTOR = 0.9


@dataclass(frozen=True)
class SamplerConfig:
    count: int = 10_000
    seed: int = 0
    exhaustive: bool = False


@dataclass(frozen=True, eq=False)
class BetaMatrices:
    """Normalized mixed partials ``d_ik V / sqrt(rho_i rho_k)``.

    ``method`` is ``"exact"`` for Gaussian models, ``"constant"`` when the
    grid partials do not vary, and ``"abs_sup"`` when they do; in the last
    case ``B1``/``B2`` are replaced by ``A1``/``A2``, which bound the
    supremum of ``||B_j||`` from above.
    """

    B1: np.ndarray
    B2: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    method: str
    partials: str = "analytic"
    fd_steps: tuple | None = None


def spectral_norm(mat) -> float:
    """Largest singular value."""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


def _split(M: np.ndarray):
    return np.triu(M, 1), np.tril(M, -1)


def _evaluate(fn, coords):
    """Evaluate a Hamiltonian on broadcast coordinate arrays."""
    shape = np.broadcast(*coords).shape
    try:
        out = np.broadcast_to(np.asarray(fn(list(coords)), dtype=float), shape)
    except (TypeError, ValueError, IndexError):
        flat = [np.broadcast_to(c, shape).ravel() for c in coords]
        out = np.array([float(fn(pt)) for pt in zip(*flat)]).reshape(shape)
    return out


def _local_steps(grid: np.ndarray) -> np.ndarray:
    gaps = np.diff(grid)
    left = np.concatenate([[gaps[0]], gaps])
    right = np.concatenate([gaps, [gaps[-1]]])
    return np.minimum(left, right)


def _grid_mixed_partials(model: GridModel):
    """Tensors of ``d_ik V`` over the grid, plus how they were obtained."""
    n = model.dim
    meshes = np.meshgrid(*model.grids, indexing="ij")
    fn = model.hamiltonian
    out = {}
    if isinstance(fn, HamiltonianExpr):
        for i, k in itertools.permutations(range(n), 2):
            expr = fn.second(i + 1, k + 1)
            out[i, k] = np.broadcast_to(np.asarray(expr(meshes), dtype=float), model.shape)
        return out, "analytic", None
    if fn is None:
        raise PartialsUnavailable("tabulated-only Hamiltonian has no evaluable form")
    steps = [_local_steps(g) for g in model.grids]
    step_meshes = np.meshgrid(*steps, indexing="ij")
    for i, k in itertools.combinations(range(n), 2):
        hi, hk = step_meshes[i], step_meshes[k]
        vals = 0.0
        for si, sk in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
            coords = list(meshes)
            coords[i] = meshes[i] + si * hi
            coords[k] = meshes[k] + sk * hk
            vals = vals + si * sk * _evaluate(fn, coords)
        out[i, k] = out[k, i] = vals / (4 * hi * hk)
    fd = tuple((float(s.min()), float(s.max())) for s in steps)
    return out, "central_difference", fd


def beta_matrices(model, weights: Weights | None = None) -> BetaMatrices:
    weights = weights if weights is not None else model.weights
    if weights is None:
        raise PartialsUnavailable("model has no LSI weights; estimate them with de_constant")
    if weights.n != model.dim:
        raise DimensionMismatch("one weight per coordinate is required")
    norm = np.sqrt(np.outer(weights.rho, weights.rho))
    if isinstance(model, GaussianModel):
        beta = model.precision / norm
        np.fill_diagonal(beta, 0.0)
        B1, B2 = _split(beta)
        A1, A2 = _split(np.abs(beta))
        return BetaMatrices(B1, B2, A1, A2, "exact")
    if not isinstance(model, GridModel):
        raise VariantMismatch(f"unsupported model {type(model).__name__}")
    n = model.dim
    partials, how, fd = _grid_mixed_partials(model)
    signed = np.zeros((n, n))
    absolute = np.zeros((n, n))
    constant = True
    for (i, k), vals in partials.items():
        lo, hi = float(np.min(vals)), float(np.max(vals))
        scale = max(abs(lo), abs(hi), 1.0)
        if hi - lo > CONSTANT_PARTIAL_RTOL * scale:
            constant = False
        signed[i, k] = (lo + hi) / 2 / norm[i, k]
        absolute[i, k] = max(abs(lo), abs(hi)) / norm[i, k]
    A1, A2 = _split(absolute)
    if constant:
        B1, B2 = _split(signed)
        return BetaMatrices(B1, B2, A1, A2, "constant", how, fd)
    return BetaMatrices(A1.copy(), A2.copy(), A1, A2, "abs_sup", how, fd)


def delta_from_condition_c(beta: BetaMatrices) -> float:
    """Largest ``delta`` with ``||B_j|| <= (1 - delta)/2`` for ``j = 1, 2``."""
    return 1.0 - 2.0 * max(spectral_norm(beta.B1), spectral_norm(beta.B2))


# -- distance-entropy constants --------------------------------------------------------


@dataclass(frozen=True)
class DEConstant:
    """An LSI/DE constant for one coordinate.

    ``tag`` is ``"EXACT"`` or ``"UPPER_BOUND"``: a scan over test densities
    can only overestimate the true infimum.
    """

    value: float
    tag: str
    method: str
    coordinate: int
    tests: int = 0


TILT_STRENGTHS = (0.5, 1.0, 2.0)
TILT_DIRECTIONS = 32


def _de_scan(points, log_q, rng) -> tuple[float, int]:
    q = np.exp(log_q)
    mean = float(q @ points)
    std = math.sqrt(max(float(q @ (points - mean) ** 2), 0.0))
    if np.count_nonzero(q > 0) < 2 or std == 0.0:
        raise DegenerateSpec("conditional law is supported on a single point")
    z = (points - mean) / std
    basis = np.stack([z, (z**2 - 1) / math.sqrt(2)])
    angles = np.concatenate([[0.0, math.pi], rng.uniform(0, 2 * math.pi, TILT_DIRECTIONS)])
    directions = np.stack([np.cos(angles), np.sin(angles)], axis=-1) @ basis
    # centre under Q and rescale so that every direction has unit Q-norm
    directions = directions - (directions @ q)[:, None]
    norms = np.sqrt((directions**2) @ q)
    directions = directions[norms > 1e-12] / norms[norms > 1e-12, None]
    best = math.inf
    for kappa in TILT_STRENGTHS:
        for pert in kappa * directions:
            log_r = log_q + pert
            log_r = log_r - np.logaddexp.reduce(log_r)
            w2 = quantile_w2_squared(points, np.exp(log_r), points, q)
            if w2 > 0:
                best = min(best, 2.0 * _grid_kl(log_r, log_q) / w2)
    return best, len(TILT_STRENGTHS) * len(directions)


def de_constant(model, i: int, method: str | None = None, seed: int = 0) -> DEConstant:
    """Per-coordinate constant for ``W^2(r, Q_i) <= (2/rho_i) D(r || Q_i)``.

    ``gaussian_exact`` returns ``J_ii``. ``grid_empirical`` takes the minimum
    of ``2 D / W^2`` over every enumerated condition and a fixed family of
    test densities ``r ~ Q_i exp(k (cos(a) z + sin(a) (z^2 - 1)/sqrt(2)))``,
    with ``z`` the standardized coordinate under ``Q_i``, strengths
    ``k in {0.5, 1, 2}``, and angles ``a`` covering ``0``, ``pi`` and 32
    seeded uniform draws; each log-perturbation is centred and rescaled to
    unit ``L2(Q_i)`` norm before applying ``k``. On a finite grid the true infimum is zero (``W^2`` is
    first order in a perturbation, ``D`` second order), so the value
    describes perturbations of the sizes tested and is an upper bound.
    """
    axis = _coord(i, model.dim)
    if method is None:
        method = "gaussian_exact" if isinstance(model, GaussianModel) else "grid_empirical"
    if method == "gaussian_exact":
        if not isinstance(model, GaussianModel):
            raise VariantMismatch("gaussian_exact needs a Gaussian model")
        return DEConstant(float(model.precision[axis, axis]), "EXACT", method, i)
    if method != "grid_empirical":
        raise ValueError(f"unknown method {method!r}")
    if not isinstance(model, GridModel):
        raise VariantMismatch("grid_empirical needs a grid model")
    rng = np.random.default_rng([seed, i])
    cond = np.moveaxis(model.conditional_log(i), axis, -1)
    rows = cond.reshape(-1, cond.shape[-1])
    best, tests = math.inf, 0
    for log_q in rows:
        value, count = _de_scan(model.grids[axis], log_q, rng)
        best = min(best, value)
        tests += count
    return DEConstant(best, "UPPER_BOUND", method, i, tests)


# -- sampling ------------------------------------------------------------------------


def _random_points(model, rng, count: int) -> np.ndarray:
    """Points mixing grid extremes with random interior points."""
    n = model.dim
    if isinstance(model, GaussianModel):
        scale = np.sqrt(np.diag(model.covariance))
        radius = np.exp(rng.uniform(-2.0, 2.0, size=(count, 1)))
        return model.mean + radius * scale * rng.standard_normal((count, n))
    cols = []
    for g in model.grids:
        idx = rng.integers(0, g.size, size=count)
        extreme = rng.random(count) < 0.3
        idx = np.where(extreme, np.where(rng.random(count) < 0.5, 0, g.size - 1), idx)
        cols.append(g[idx])
    return np.stack(cols, axis=-1)


def _exhaustive_ok(model) -> bool:
    return (
        isinstance(model, GridModel)
        and model.dim <= EXHAUSTIVE_MAX_DIM
        and max(g.size for g in model.grids) <= EXHAUSTIVE_MAX_POINTS
    )


def _all_points(model: GridModel) -> np.ndarray:
    return np.array(list(itertools.product(*model.grids)), dtype=float)


def _direction_pairs(model, weights: Weights):
    """Structured displacement pairs ``(a, c)`` in unweighted coordinates.

    Signed basis pairs for every model, plus the top singular pairs of the
    normalized interaction triangles for Gaussian models.
    """
    n = model.dim
    inv = 1.0 / np.sqrt(weights.rho)
    eye = np.eye(n)
    pairs = []
    for i, k in itertools.product(range(n), repeat=2):
        for s in (1.0, -1.0):
            pairs.append((eye[i] * inv, s * eye[k] * inv))
    if isinstance(model, GaussianModel):
        beta = beta_matrices(model, weights)
        for M in (beta.B1, beta.B2):
            U, S, Vt = np.linalg.svd(M)
            pairs.append((U[:, 0] * inv, Vt[0] * inv))
    return pairs


# -- sub-quadratic bounds ---------------------------------------------------------------


def _mixed_sum(model, first, mid, last) -> np.ndarray:
    """``sum_i V(first^{i-1}, mid_i, last_{>i})`` for batches of points."""
    total = 0.0
    for i in range(model.dim):
        pts = np.concatenate([first[:, :i], mid[:, i : i + 1], last[:, i + 1 :]], axis=1)
        total = total + model.energy(pts)
    return total


def _double_differences(model, zeta, t, u, y, z):
    def phi(a, b):
        return _mixed_sum(model, zeta, a, b)

    def psi(a, b):
        return _mixed_sum(model, b, a, zeta)

    dd1 = phi(t, y) - phi(t, z) - phi(u, y) + phi(u, z)
    dd2 = psi(t, y) - psi(t, z) - psi(u, y) + psi(u, z)
    return dd1, dd2


def _batch(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    return arr[None, :] if arr.ndim == 1 else arr


def sq_defect(model, weights: Weights, delta: float, quintuple) -> float:
    """Largest violation of the two sub-quadratic bounds at one quintuple.

    ``quintuple = (zeta, t, u, y, z)``. Positive values are violations.
    """
    zeta, t, u, y, z = (_batch(p) for p in quintuple)
    dd1, dd2 = _double_differences(model, zeta, t, u, y, z)
    bound = (1.0 - delta) / 2 * weighted_distance(weights, t, u) * weighted_distance(weights, y, z)
    return float(np.max(np.maximum(dd1, dd2) - bound))


@dataclass(frozen=True, eq=False)
class CheckResult:
    """Outcome of a sampled check.

    ``worst_defect`` is ``LHS - RHS`` and ``worst_ratio`` is ``LHS / RHS``
    (for SQ, the double difference over the product of distances), both
    maximized over the tested tuples; ``witness`` realizes ``worst_defect``.
    """

    name: str
    passed: bool
    worst_defect: float
    worst_ratio: float
    witness: tuple
    tested: int
    exhaustive: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_defect": self.worst_defect,
            "worst_ratio": self.worst_ratio,
            "witness": [np.asarray(p).tolist() for p in self.witness],
            "tested": self.tested,
            "exhaustive": self.exhaustive,
        }


def _sq_tuples(model, weights, sampler: SamplerConfig):
    if sampler.exhaustive and _exhaustive_ok(model):
        pts = _all_points(model)
        grid = np.indices((len(pts),) * 5).reshape(5, -1).T
        return [pts[grid[:, c]] for c in range(5)], True
    rng = np.random.default_rng(sampler.seed)
    n = model.dim
    if isinstance(model, GaussianModel):
        base = model.mean
        structured = [
            (base, base + a, base, base + c, base) for a, c in _direction_pairs(model, weights)
        ]
    else:
        lo = np.array([g[0] for g in model.grids])
        hi = np.array([g[-1] for g in model.grids])
        structured = []
        for i, k in itertools.product(range(n), repeat=2):
            for anchor in (lo, hi):
                t, u, y, z = anchor.copy(), anchor.copy(), anchor.copy(), anchor.copy()
                t[i], u[i] = hi[i], lo[i]
                y[k], z[k] = hi[k], lo[k]
                structured.append((anchor, t, u, y, z))
                structured.append((anchor, t, u, z, y))
    cols = [np.array([s[c] for s in structured]) for c in range(5)]
    extra = max(sampler.count - len(structured), 0)
    cols = [np.concatenate([col, _random_points(model, rng, extra)]) for col in cols]
    return cols, False


def check_sq(model, weights: Weights, delta: float, sampler: SamplerConfig = SamplerConfig()) -> CheckResult:
    """Test both sub-quadratic bounds over sampled (or all) quintuples."""
    (zeta, t, u, y, z), exhaustive = _sq_tuples(model, weights, sampler)
    dd1, dd2 = _double_differences(model, zeta, t, u, y, z)
    dd = np.maximum(dd1, dd2)
    dist = weighted_distance(weights, t, u) * weighted_distance(weights, y, z)
    defect = dd - (1.0 - delta) / 2 * dist
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dist > 0, dd / dist, np.where(dd > PASS_TOL, np.inf, 0.0))
    worst = int(np.argmax(defect))
    return CheckResult(
        "SQ",
        bool(defect[worst] <= PASS_TOL),
        float(defect[worst]),
        float(np.max(ratio)),
        (zeta[worst], t[worst], u[worst], y[worst], z[worst]),
        len(dd),
        exhaustive,
    )


# -- entropy-distance and contractivity bounds ----------------------------------------------


def _conditions(model, y1, y2, i):
    """Conditions for coordinate ``i`` (0-based): ``< i`` from ``y1``, ``> i`` from ``y2``."""
    return np.concatenate([y1[:, :i], y1[:, i : i + 1], y2[:, i + 1 :]], axis=1)


def _ed_co_sides(model, weights, y1, y2, z1, z2):
    """Per-tuple ``sum_i D(.||.)`` and ``sum_i rho_i W^2(.,.)`` between the
    local specifications of coordinate ``i`` under the two conditions."""
    divs = np.zeros(len(y1))
    w2s = np.zeros(len(y1))
    for i in range(model.dim):
        cy = _conditions(model, y1, y2, i)
        cz = _conditions(model, z1, z2, i)
        if isinstance(model, GaussianModel):
            J, b = model.precision, model.linear
            row = J[i].copy()
            row[i] = 0.0
            gap2 = ((cy - cz) @ row / J[i, i]) ** 2
            divs += J[i, i] * gap2 / 2
            w2s += weights.rho[i] * gap2
            continue
        # each side is one row of the conditional table; evaluate distinct pairs once
        cond = np.moveaxis(model.conditional_log(i + 1), i, -1)
        table = cond.reshape(-1, cond.shape[-1])
        others = [a for a in range(model.dim) if a != i]
        dims = cond.shape[:-1]
        ry = np.ravel_multi_index(tuple(model.indices(cy)[:, others].T), dims)
        rz = np.ravel_multi_index(tuple(model.indices(cz)[:, others].T), dims)
        keys, inverse = np.unique(ry * len(table) + rz, return_inverse=True)
        pts = model.grids[i]
        kl = np.empty(len(keys))
        w2 = np.empty(len(keys))
        for j, key in enumerate(keys):
            a, b = table[key // len(table)], table[key % len(table)]
            kl[j] = _grid_kl(a, b)
            w2[j] = quantile_w2_squared(pts, np.exp(a), pts, np.exp(b))
        divs += kl[inverse.ravel()]
        w2s += weights.rho[i] * w2[inverse.ravel()]
    return divs, w2s


def _quad_tuples(model, weights, sampler: SamplerConfig):
    if sampler.exhaustive and _exhaustive_ok(model):
        pts = _all_points(model)
        grid = np.indices((len(pts),) * 4).reshape(4, -1).T
        return [pts[grid[:, c]] for c in range(4)], True
    rng = np.random.default_rng([sampler.seed, 1])
    n = model.dim
    structured = []
    if isinstance(model, GaussianModel):
        base = model.mean
        for a, c in _direction_pairs(model, weights):
            structured.append((base + a, base, base, base))
            structured.append((base, base + c, base, base))
            structured.append((base + a, base + c, base, base))
    else:
        lo = np.array([g[0] for g in model.grids])
        hi = np.array([g[-1] for g in model.grids])
        for k in range(n):
            for anchor in (lo, hi):
                moved = anchor.copy()
                moved[k] = hi[k] if anchor is lo else lo[k]
                structured.append((moved, anchor, anchor, anchor))
                structured.append((anchor, moved, anchor, anchor))
                structured.append((moved, moved, anchor, anchor))
    cols = [np.array([s[c] for s in structured]) for c in range(4)]
    extra = max(sampler.count - len(structured), 0)
    cols = [np.concatenate([col, _random_points(model, rng, extra)]) for col in cols]
    return cols, False


def _ratio_check(name, lhs, rhs, tuples, exhaustive) -> CheckResult:
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(lhs > PASS_TOL, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    return CheckResult(
        name,
        bool(ratio[worst] <= 1.0 + PASS_TOL),
        float(np.max(lhs - rhs)),
        float(ratio[worst]),
        tuple(col[worst] for col in tuples),
        len(lhs),
        exhaustive,
    )


def check_ed(model, weights: Weights, delta: float, sampler: SamplerConfig = SamplerConfig()) -> CheckResult:
    """``sum_i D(Q_i(.|y(1)^{i-1}, y(2)_{>i}) || Q_i(.|z(1)^{i-1}, z(2)_{>i}))
    <= (1 - delta)^2 / 8 [d(y(1), z(1)) + d(y(2), z(2))]^2``."""
    tuples, exhaustive = _quad_tuples(model, weights, sampler)
    y1, y2, z1, z2 = tuples
    divs, _ = _ed_co_sides(model, weights, y1, y2, z1, z2)
    span = weighted_distance(weights, y1, z1) + weighted_distance(weights, y2, z2)
    rhs = (1.0 - delta) ** 2 / 8 * span**2
    return _ratio_check("ED", divs, rhs, tuples, exhaustive)


def check_co(model, weights: Weights, delta: float, sampler: SamplerConfig = SamplerConfig()) -> CheckResult:
    """``sum_i rho_i W^2(Q_i(...), Q_i(...)) <= (1 - delta)^2 / 2 [...]^2``."""
    tuples, exhaustive = _quad_tuples(model, weights, sampler)
    y1, y2, z1, z2 = tuples
    _, w2s = _ed_co_sides(model, weights, y1, y2, z1, z2)
    span = weighted_distance(weights, y1, z1) + weighted_distance(weights, y2, z2)
    rhs = 0.5 * (1.0 - delta) ** 2 * span**2
    return _ratio_check("CO", w2s, rhs, tuples, exhaustive)


# -- report ---------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConditionReport:
    delta: float
    norm_b1: float
    norm_b2: float
    norm_a1: float
    norm_a2: float
    beta_method: str
    weights: Weights
    de_constants: tuple
    de_pass: bool
    sq: CheckResult
    ed: CheckResult
    co: CheckResult
    sample_count: int
    seed: int
    safety_factor: float
    beta: BetaMatrices = field(repr=False, default=None)

    @property
    def certified(self) -> bool:
        return (
            self.delta > 0
            and self.de_pass
            and self.sq.passed
            and self.ed.passed
            and self.co.passed
        )

    def to_dict(self) -> dict:
        beta = self.beta
        return {
            "delta": self.delta,
            "certified": self.certified,
            "norm_b1": self.norm_b1,
            "norm_b2": self.norm_b2,
            "norm_a1": self.norm_a1,
            "norm_a2": self.norm_a2,
            "beta_method": self.beta_method,
            "partials": None if beta is None else beta.partials,
            "fd_steps": None if beta is None or beta.fd_steps is None else [list(s) for s in beta.fd_steps],
            "weights": self.weights.rho.tolist(),
            "de_constants": [
                {"coordinate": d.coordinate, "value": d.value, "tag": d.tag, "method": d.method, "tests": d.tests}
                for d in self.de_constants
            ],
            "de_pass": self.de_pass,
            "sq": self.sq.to_dict(),
            "ed": self.ed.to_dict(),
            "co": self.co.to_dict(),
            "sample_count": self.sample_count,
            "seed": self.seed,
            "safety_factor": self.safety_factor,
        }


def full_condition_report(
    model,
    sampler: SamplerConfig = SamplerConfig(),
    weights: Weights | None = None,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
) -> ConditionReport:
    """Extract ``delta`` from the norm condition and test DE, SQ, ED and CO at it.

    Gaussian models use the exact weights ``rho_i = J_ii``. Grid models use
    explicit weights when given (checked against the empirical DE scan) and
    otherwise the empirical constants scaled by ``safety_factor``.
    """
    n = model.dim
    des = tuple(de_constant(model, i, seed=sampler.seed) for i in range(1, n + 1))
    estimates = np.array([d.value for d in des])
    if weights is None:
        weights = model.weights
    if weights is None:
        weights = Weights(safety_factor * estimates)
    exact = all(d.tag == "EXACT" for d in des)
    if exact:
        de_pass = bool(np.all(weights.rho <= estimates * (1 + 1e-12)))
    else:
        de_pass = bool(np.all(weights.rho <= estimates))
    beta = beta_matrices(model, weights)
    delta = delta_from_condition_c(beta)
    sq = check_sq(model, weights, delta, sampler)
    ed = check_ed(model, weights, delta, sampler)
    co = check_co(model, weights, delta, sampler)
    return ConditionReport(
        delta=delta,
        norm_b1=spectral_norm(beta.B1),
        norm_b2=spectral_norm(beta.B2),
        norm_a1=spectral_norm(beta.A1),
        norm_a2=spectral_norm(beta.A2),
        beta_method=beta.method,
        weights=weights,
        de_constants=des,
        de_pass=de_pass,
        sq=sq,
        ed=ed,
        co=co,
        sample_count=sampler.count,
        seed=sampler.seed,
        safety_factor=safety_factor,
        beta=beta,
    )
