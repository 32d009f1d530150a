"""Headline bounds assembled from a condition report, and their verification.

A certified ``delta`` yields the tensorization constant
``1 / (delta (1 - delta/2))``, the LSI constant ``delta (1 - delta/2) rho_min``
and the sweep contraction rate. Verification evaluates both sides of each
inequality exactly on concrete laws. Nothing is asserted for an uncertified
report unless the caller opts in with ``unchecked=True``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from .conditions import ConditionReport, SamplerConfig, full_condition_report
from .divergence import (
    avg_conditional_relative_entropy,
    fisher_information_gaussian,
    relative_entropy,
)
from .errors import DeltaOutOfRange, NonPositiveConvexity, NotCertified, VariantMismatch
from .gibbs import contraction_rate_formula
from .model import GaussianDensity, GaussianModel, build_gaussian

HOLD_TOL = 1e-9


@dataclass(frozen=True)
class CertBound:
    """Constants certified for one model.

    ``comparison`` is the exact LSI constant ``lambda_min(J)`` and
    ``bakry_emery`` the convexity bound; both are ``None`` off the
    Gaussian family.
    """

    delta: float
    t1_constant: float
    rho_min: float
    lsi_bound: float
    rate: float
    comparison: float | None
    bakry_emery: float | None
    conjecture_constant: float

    def to_dict(self) -> dict:
        return asdict(self)


class Theorem1Check(NamedTuple):
    lhs: float
    rhs: float
    ratio: float
    holds: bool


class ConjectureCheck(NamedTuple):
    rhs_conjecture: float
    lhs: float
    ratio: float


class LsiCheck(NamedTuple):
    entropy: float
    fisher: float
    rhs: float
    holds: bool


def _check_delta(delta: float) -> None:
    if not (0.0 < delta <= 1.0):
        raise DeltaOutOfRange(f"delta={delta!r} is outside (0, 1]")


def theorem1_constant(delta: float) -> float:
    """``1 / (delta (1 - delta/2))``."""
    _check_delta(delta)
    return 1.0 / (delta * (1.0 - delta / 2.0))


def conjecture_constant(delta: float) -> float:
    _check_delta(delta)
    return 1.0 / delta


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0.0:
        return 1.0 if rhs == 0.0 else math.inf
    return rhs / lhs


def _require(report: ConditionReport, unchecked: bool) -> None:
    if unchecked:
        return
    if not report.certified:
        failed = [
            name
            for name, ok in (
                ("delta>0", report.delta > 0),
                ("DE", report.de_pass),
                ("SQ", report.sq.passed),
                ("ED", report.ed.passed),
                ("CO", report.co.passed),
            )
            if not ok
        ]
        raise NotCertified(
            f"hypotheses not certified (delta={report.delta:.6g}; failing: {', '.join(failed)})"
        )


def conditional_entropy_sum(model, p) -> float:
    """``sum_i E D(p_i(.|Y_bar_i) || Q_i(.|Y_bar_i))``."""
    return float(
        sum(avg_conditional_relative_entropy(p, model, i) for i in range(1, model.dim + 1))
    )


def theorem1_verify(model, p, report: ConditionReport, unchecked: bool = False) -> Theorem1Check:
    """Evaluate both sides of the tensorization inequality for ``p``.

    Raises:
        NotCertified: if ``report`` does not certify the hypotheses and
            ``unchecked`` is false.
    """
    _require(report, unchecked)
    lhs = relative_entropy(p, model)
    rhs = theorem1_constant(report.delta) * conditional_entropy_sum(model, p)
    return Theorem1Check(lhs, rhs, _ratio(lhs, rhs), bool(rhs >= lhs - HOLD_TOL))


def conjecture_ratio(model, p, report: ConditionReport, unchecked: bool = False) -> ConjectureCheck:
    """The conjectured ``1/delta`` form; exploratory, never asserted."""
    _require(report, unchecked)
    lhs = relative_entropy(p, model)
    rhs = conjecture_constant(report.delta) * conditional_entropy_sum(model, p)
    return ConjectureCheck(rhs, lhs, _ratio(lhs, rhs))


def bakry_emery_bound(c: float, k_sup: float = 0.0) -> float:
    """``c * exp(-4 k_sup)`` for a ``c``-convex Hamiltonian perturbed by ``|K| <= k_sup``."""
    if not c > 0:
        raise NonPositiveConvexity(f"convexity constant must be positive, got {c!r}")
    if k_sup < 0:
        raise ValueError("k_sup is a sup-norm and cannot be negative")
    return c * math.exp(-4.0 * k_sup)


def lsi_bound(model, report: ConditionReport, unchecked: bool = False) -> CertBound:
    """Collect the certified constants for ``model``."""
    _require(report, unchecked)
    delta = report.delta
    rho_min = float(np.min(report.weights.rho))
    factor = delta * (1.0 - delta / 2.0)
    comparison = bakry = None
    if isinstance(model, GaussianModel):
        comparison = model.lambda_min
        bakry = bakry_emery_bound(comparison, 0.0) if comparison > 0 else None
    return CertBound(
        delta=delta,
        t1_constant=theorem1_constant(delta),
        rho_min=rho_min,
        lsi_bound=factor * rho_min,
        rate=contraction_rate_formula(delta),
        comparison=comparison,
        bakry_emery=bakry,
        conjecture_constant=conjecture_constant(delta),
    )


def lsi_bound_verify(model, bound: CertBound, p) -> LsiCheck:
    """Check ``D(p||q) <= I(p||q) / (2 lsi_bound)`` for a Gaussian ``p``."""
    if not isinstance(model, GaussianModel) or not isinstance(p, GaussianDensity):
        raise VariantMismatch("the LSI check needs a Gaussian model and density")
    entropy = relative_entropy(p, model)
    fisher = fisher_information_gaussian(p, model)
    rhs = fisher / (2.0 * bound.lsi_bound)
    holds = bool(entropy <= rhs * (1.0 + 1e-12) + 1e-12)
    return LsiCheck(entropy, fisher, rhs, holds)


@dataclass(frozen=True)
class PathologicalReport:
    """Outcome of certifying ``V0(x) = |x|^2/2 + s (sum x - M)^2 / 2``."""

    n: int
    M: float
    scale: float
    delta: float
    norm_b1: float
    norm_b2: float
    lambda_min: float
    certified: bool
    note: str

    def to_dict(self) -> dict:
        return asdict(self)


def pathological_model(M: float, n: int, scale: float = 1.0) -> GaussianModel:
    """``J = I + s 11'`` and ``b = s M 1``."""
    if n < 2:
        raise ValueError("the mean-field example needs n >= 2")
    ones = np.ones(n)
    return build_gaussian(np.eye(n) + scale * np.outer(ones, ones), scale * M * ones)


def pathological_example_report(
    M: float, n: int, scale: float = 1.0, sampler: SamplerConfig = SamplerConfig(count=500)
) -> PathologicalReport:
    """Run the certification pipeline on the mean-field quadratic model.

    The true LSI constant is ``lambda_min(J) = 1`` for every ``n`` (the all
    ones direction only stiffens), yet the normalized mixed partials
    ``s / (1 + s)`` fill both triangles and ``|B1|`` grows with ``n``.
    """
    model = pathological_model(M, n, scale)
    report = full_condition_report(model, sampler)
    lam = model.lambda_min
    if report.certified:
        note = f"certified with delta={report.delta:.6g}; exact LSI constant {lam:.6g}"
    else:
        note = (
            f"certification refused: delta={report.delta:.6g} <= 0 although the exact "
            f"LSI constant is {lam:.6g}; the norm condition cannot see that the coupling "
            f"acts only along the all-ones direction"
            if report.delta <= 0
            else f"certification refused by a failing check (delta={report.delta:.6g})"
        )
    return PathologicalReport(
        n=n,
        M=float(M),
        scale=float(scale),
        delta=report.delta,
        norm_b1=report.norm_b1,
        norm_b2=report.norm_b2,
        lambda_min=lam,
        certified=report.certified,
        note=note,
    )
