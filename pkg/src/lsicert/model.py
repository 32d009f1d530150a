"""Reference measures ``q = exp(-V)`` and their local specifications.

Two families are supported: multivariate Gaussians given by a precision
matrix ``J`` and linear term ``b`` (``V(x) = x'Jx/2 - b'x``), and finite
real grids with an arbitrary Hamiltonian tabulated over the product grid.
Coordinates are 1-indexed in every public function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from .errors import (
    DimensionMismatch,
    EmptyGrid,
    IndexOutOfRange,
    InvalidDensity,
    InvalidWeights,
    NonFiniteHamiltonian,
    NotPositiveDefinite,
    NotSymmetric,
    PointNotOnGrid,
    SizeLimitExceeded,
)

MAX_GRID_STATES = 10**6
SYMMETRY_RTOL = 1e-12
NORMALIZATION_TOL = 1e-12


def _frozen(values, ndim=None) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-dimensional array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_symmetric(mat: np.ndarray, what: str) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {mat.shape}")
    scale = max(float(np.max(np.abs(mat))), 1.0)
    if np.max(np.abs(mat - mat.T)) > SYMMETRY_RTOL * scale:
        raise NotSymmetric(f"{what} is not symmetric")


def _coord(i: int, n: int) -> int:
    """Translate a 1-based coordinate index into a 0-based axis."""
    if not isinstance(i, (int, np.integer)) or not 1 <= i <= n:
        raise IndexOutOfRange(f"coordinate index {i} outside 1..{n}")
    return int(i) - 1


@dataclass(frozen=True)
class Weights:
    """Per-coordinate LSI constants ``rho_i`` entering the weighted metric."""

    rho: np.ndarray

    def __post_init__(self):
        rho = _frozen(self.rho, ndim=1)
        if rho.size == 0 or not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise InvalidWeights("weights must be positive and finite")
        object.__setattr__(self, "rho", rho)

    @property
    def n(self) -> int:
        return self.rho.size

    def scaled(self, factor: float) -> "Weights":
        return Weights(self.rho * factor)

    def __eq__(self, other):
        return isinstance(other, Weights) and np.array_equal(self.rho, other.rho)

    def __hash__(self):
        return hash(self.rho.tobytes())


# -- densities ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianDensity:
    """``N(mean, cov)``; a positive semidefinite covariance is allowed."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _frozen(self.mean, ndim=1)
        cov = _frozen(self.cov, ndim=2)
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch("covariance shape does not match the mean")
        _check_symmetric(cov, "covariance")
        cov = _frozen((cov + cov.T) / 2)
        scale = max(float(np.max(np.abs(cov))), 1.0)
        if np.linalg.eigvalsh(cov)[0] < -1e-10 * scale:
            raise InvalidDensity("covariance is not positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @cached_property
    def is_degenerate(self) -> bool:
        scale = max(float(np.max(np.abs(self.cov))), 1.0)
        return bool(np.linalg.eigvalsh(self.cov)[0] <= 1e-14 * scale)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A probability law on a product grid, stored as log point masses.

    ``log_mass`` has one axis per coordinate; ``-inf`` marks points without
    mass. Masses must sum to one within ``1e-12``.
    """

    grids: tuple
    log_mass: np.ndarray

    def __post_init__(self):
        grids = tuple(_frozen(g, ndim=1) for g in self.grids)
        log_mass = _frozen(self.log_mass)
        if log_mass.shape != tuple(g.size for g in grids):
            raise DimensionMismatch(
                f"log-mass shape {log_mass.shape} does not match the grid sizes"
            )
        if np.any(np.isnan(log_mass)) or np.any(log_mass == np.inf):
            raise InvalidDensity("log masses must be finite or -inf")
        total = float(np.exp(logsumexp(log_mass)))
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise InvalidDensity(f"masses sum to {total!r}, not 1")
        object.__setattr__(self, "grids", grids)
        object.__setattr__(self, "log_mass", log_mass)

    @classmethod
    def from_masses(cls, grids, masses) -> "GridDensity":
        """Build from (possibly unnormalized) nonnegative masses."""
        masses = np.asarray(masses, dtype=float)
        if np.any(masses < 0) or not np.all(np.isfinite(masses)) or masses.sum() <= 0:
            raise InvalidDensity("masses must be nonnegative, finite and not all zero")
        with np.errstate(divide="ignore"):
            log_mass = np.log(masses)
        return cls.from_log_weights(grids, log_mass)

    @classmethod
    def from_log_weights(cls, grids, log_weights) -> "GridDensity":
        """Normalize unnormalized log weights in the log domain."""
        log_weights = np.asarray(log_weights, dtype=float)
        return cls(tuple(grids), log_weights - logsumexp(log_weights))

    @property
    def dim(self) -> int:
        return len(self.grids)

    @property
    def shape(self) -> tuple:
        return self.log_mass.shape

    @property
    def mass(self) -> np.ndarray:
        return np.exp(self.log_mass)


Density = Union[GaussianDensity, GridDensity]


# -- local specifications ------------------------------------------------------


@dataclass(frozen=True)
class Gaussian1D:
    mean: float
    variance: float

    def __post_init__(self):
        if not (np.isfinite(self.variance) and self.variance > 0):
            raise InvalidDensity("variance must be positive")

    @property
    def std(self) -> float:
        return float(np.sqrt(self.variance))


@dataclass(frozen=True, eq=False)
class GridPmf:
    """A normalized law on the points of one coordinate's grid."""

    points: np.ndarray
    log_prob: np.ndarray

    def __post_init__(self):
        points = _frozen(self.points, ndim=1)
        log_prob = _frozen(self.log_prob, ndim=1)
        if points.shape != log_prob.shape:
            raise DimensionMismatch("points and log-probabilities differ in length")
        if abs(float(np.exp(logsumexp(log_prob))) - 1.0) > NORMALIZATION_TOL:
            raise InvalidDensity("pmf is not normalized")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "log_prob", log_prob)

    @classmethod
    def from_log_weights(cls, points, log_weights) -> "GridPmf":
        log_weights = np.asarray(log_weights, dtype=float)
        return cls(points, log_weights - logsumexp(log_weights))

    @property
    def prob(self) -> np.ndarray:
        return np.exp(self.log_prob)


LocalSpec = Union[Gaussian1D, GridPmf]


# -- models ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """``q = N(J^{-1} b, J^{-1})`` with ``V(x) = x'Jx/2 - b'x``."""

    precision: np.ndarray
    linear: np.ndarray

    @property
    def dim(self) -> int:
        return self.linear.size

    @cached_property
    def weights(self) -> Weights:
        return Weights(np.diag(self.precision).copy())

    @cached_property
    def covariance(self) -> np.ndarray:
        cov = np.linalg.inv(self.precision)
        return _frozen((cov + cov.T) / 2)

    @cached_property
    def mean(self) -> np.ndarray:
        return _frozen(np.linalg.solve(self.precision, self.linear))

    @cached_property
    def lambda_min(self) -> float:
        """Smallest eigenvalue of ``J``: the exact LSI constant of ``q``."""
        return float(np.linalg.eigvalsh(self.precision)[0])

    def reference(self) -> GaussianDensity:
        return GaussianDensity(self.mean, self.covariance)

    def energy(self, points) -> np.ndarray:
        """Vectorized ``V`` for points stacked along the last axis."""
        x = np.asarray(points, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", x, self.precision, x) - x @ self.linear


Hamiltonian = Union[Callable, np.ndarray]


@dataclass(frozen=True, eq=False)
class GridModel:
    """A reference law on a finite product grid of real points.

    Point masses are ``exp(-V(x)) * prod_i base_i(x_i)``, normalized.
    ``values`` holds ``V`` tabulated over the grid; ``hamiltonian`` keeps
    the evaluable form (``None`` for tabulated-only models).
    """

    grids: tuple
    values: np.ndarray
    base: tuple
    hamiltonian: object = None
    rho: Weights | None = None
    log_mass: np.ndarray = field(init=False, repr=False)
    log_normalizer: float = field(init=False)

    def __post_init__(self):
        log_w = -np.asarray(self.values, dtype=float)
        for axis, lam in enumerate(self.base):
            shape = [1] * len(self.grids)
            shape[axis] = lam.size
            log_w = log_w + np.log(lam).reshape(shape)
        log_z = float(logsumexp(log_w))
        object.__setattr__(self, "log_normalizer", log_z)
        object.__setattr__(self, "log_mass", _frozen(log_w - log_z))

    @property
    def dim(self) -> int:
        return len(self.grids)

    @property
    def shape(self) -> tuple:
        return self.values.shape

    @property
    def weights(self) -> Weights | None:
        return self.rho

    def with_weights(self, rho) -> "GridModel":
        rho = rho if isinstance(rho, Weights) else Weights(rho)
        if rho.n != self.dim:
            raise DimensionMismatch("one weight per coordinate is required")
        return GridModel(self.grids, self.values, self.base, self.hamiltonian, rho)

    def reference(self) -> GridDensity:
        return GridDensity(self.grids, self.log_mass)

    def conditional_log(self, i: int) -> np.ndarray:
        """``log Q_i(x_i | x_bar_i)`` as a full tensor (1-based ``i``)."""
        axis = _coord(i, self.dim)
        return self._conditional_logs[axis]

    @cached_property
    def _conditional_logs(self) -> tuple:
        out = []
        for axis in range(self.dim):
            arr = self.log_mass - logsumexp(self.log_mass, axis=axis, keepdims=True)
            out.append(_frozen(arr))
        return tuple(out)

    def indices(self, points) -> np.ndarray:
        """Map points (last axis = coordinates) to integer grid indices."""
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dim:
            raise DimensionMismatch(f"points must have {self.dim} coordinates")
        idx = np.empty(pts.shape, dtype=np.intp)
        for axis, grid in enumerate(self.grids):
            col = pts[..., axis]
            pos = np.clip(np.searchsorted(grid, col), 0, grid.size - 1)
            lower = np.clip(pos - 1, 0, grid.size - 1)
            pick = np.where(np.abs(grid[lower] - col) < np.abs(grid[pos] - col), lower, pos)
            tol = 1e-12 * max(1.0, float(np.max(np.abs(grid))))
            if np.any(np.abs(grid[pick] - col) > tol):
                raise PointNotOnGrid(f"coordinate {axis + 1} has values off its grid")
            idx[..., axis] = pick
        return idx

    def energy(self, points) -> np.ndarray:
        """Tabulated ``V`` looked up at grid points (last axis = coordinates)."""
        idx = self.indices(points)
        return self.values[tuple(np.moveaxis(idx, -1, 0))]


Model = Union[GaussianModel, GridModel]


# -- constructors ----------------------------------------------------------------


def build_gaussian(precision, linear=None) -> GaussianModel:
    """Validate ``(J, b)`` and return the Gaussian model with ``rho_i = J_ii``."""
    J = _frozen(precision)
    _check_symmetric(J, "precision")
    n = J.shape[0]
    b = _frozen(np.zeros(n) if linear is None else linear, ndim=1)
    if b.size != n:
        raise DimensionMismatch(f"linear term has length {b.size}, expected {n}")
    if not np.all(np.isfinite(J)) or not np.all(np.isfinite(b)):
        raise NotPositiveDefinite("non-finite entries")
    J = _frozen((J + J.T) / 2)
    lam_min = np.linalg.eigvalsh(J)[0]
    if lam_min <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {lam_min:.6g} is not positive")
    return GaussianModel(J, b)


def _tabulate(hamiltonian, grids) -> np.ndarray:
    shape = tuple(g.size for g in grids)
    if isinstance(hamiltonian, np.ndarray) or (
        not callable(hamiltonian) and hasattr(hamiltonian, "__len__")
    ):
        table = np.asarray(hamiltonian, dtype=float)
        if table.shape != shape:
            raise DimensionMismatch(f"tabulated Hamiltonian has shape {table.shape}, expected {shape}")
        return table
    meshes = np.meshgrid(*grids, indexing="ij")
    try:
        table = np.broadcast_to(np.asarray(hamiltonian(meshes), dtype=float), shape).copy()
    except (TypeError, ValueError, IndexError):
        # callables that only take scalar points
        table = np.array(
            [float(hamiltonian(pt)) for pt in itertools.product(*grids)], dtype=float
        ).reshape(shape)
    return table


def build_grid(grids: Sequence, hamiltonian: Hamiltonian, base=None, rho=None) -> GridModel:
    """Tabulate ``V`` over the product grid and cache the normalized masses.

    Args:
        grids: per-coordinate ascending point lists, each of length >= 2.
        hamiltonian: a callable taking the list of coordinate arrays (or a
            single point), a :class:`~lsicert.expr.HamiltonianExpr`, or a
            fully tabulated array.
        base: per-coordinate positive base weights; uniform by default.
        rho: explicit LSI weights, or ``None``/``"empirical"`` to estimate
            them later with :func:`lsicert.conditions.de_constant`.
    """
    if len(grids) == 0:
        raise EmptyGrid("at least one coordinate is required")
    arrs = []
    for axis, g in enumerate(grids):
        g = np.asarray(g, dtype=float)
        if g.ndim != 1 or g.size < 2:
            raise EmptyGrid(f"grid {axis + 1} needs at least two points")
        if not np.all(np.isfinite(g)) or np.any(np.diff(g) <= 0):
            raise EmptyGrid(f"grid {axis + 1} must be finite and strictly increasing")
        arrs.append(_frozen(g))
    states = int(np.prod([g.size for g in arrs], dtype=np.int64))
    if states > MAX_GRID_STATES:
        raise SizeLimitExceeded(f"{states} product points exceed the cap of {MAX_GRID_STATES}")
    if base is None:
        base = [np.ones(g.size) for g in arrs]
    if len(base) != len(arrs):
        raise DimensionMismatch("one base-weight vector per coordinate is required")
    lams = []
    for g, lam in zip(arrs, base):
        lam = np.asarray(lam, dtype=float)
        if lam.shape != g.shape or np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise DimensionMismatch("base weights must be positive, one per grid point")
        lams.append(_frozen(lam))
    table = _tabulate(hamiltonian, arrs)
    if not np.all(np.isfinite(table)):
        raise NonFiniteHamiltonian("the Hamiltonian is not finite on the whole grid")
    if isinstance(rho, str):
        if rho != "empirical":
            raise ValueError(f"unknown rho mode {rho!r}")
        rho = None
    weights = None
    if rho is not None:
        weights = rho if isinstance(rho, Weights) else Weights(rho)
        if weights.n != len(arrs):
            raise DimensionMismatch("one weight per coordinate is required")
    evaluable = None if isinstance(hamiltonian, np.ndarray) or not callable(hamiltonian) else hamiltonian
    return GridModel(tuple(arrs), _frozen(table), tuple(lams), evaluable, weights)


# -- queries -------------------------------------------------------------------------


def local_specification(model: Model, i: int, xbar) -> LocalSpec:
    """Conditional law of coordinate ``i`` given the other coordinates ``xbar``."""
    axis = _coord(i, model.dim)
    xbar = np.asarray(xbar, dtype=float).ravel()
    if xbar.size != model.dim - 1:
        raise DimensionMismatch(f"expected {model.dim - 1} conditioning values, got {xbar.size}")
    if isinstance(model, GaussianModel):
        J = model.precision
        others = np.delete(J[axis], axis)
        mean = (model.linear[axis] - others @ xbar) / J[axis, axis]
        return Gaussian1D(float(mean), float(1.0 / J[axis, axis]))
    full = np.insert(xbar, axis, model.grids[axis][0])
    idx = list(model.indices(full))
    idx[axis] = slice(None)
    return GridPmf(model.grids[axis], model.conditional_log(i)[tuple(idx)])


def weighted_distance(weights: Weights, x, y) -> float:
    """``d^(n)(x, y) = sqrt(sum_i rho_i (x_i - y_i)^2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != weights.n or y.shape[-1] != weights.n:
        raise DimensionMismatch("points and weights differ in dimension")
    return np.sqrt(np.sum(weights.rho * (x - y) ** 2, axis=-1))


def hamiltonian_eval(model: Model, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.dim,):
        raise DimensionMismatch(f"expected a point with {model.dim} coordinates")
    return float(model.energy(x))
