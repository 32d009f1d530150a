"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are printed even when
output capture is on) or ``python tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest

from lsicert.certify import lsi_bound, lsi_bound_verify, pathological_example_report, theorem1_verify
from lsicert.conditions import SamplerConfig, check_sq, full_condition_report, spectral_norm
from lsicert.divergence import relative_entropy
from lsicert.gibbs import contraction_rate_formula, gibbs_sweep_exact, measure_contraction, run_trajectory
from lsicert.model import Gaussian1D, GaussianDensity, GridDensity, Weights, build_gaussian, build_grid
from lsicert.transport import w2_gaussian_1d, w2_grid_exact, w2_quantile_1d

SEED = 20240601


def emit(capsys, number, title, passed, detail, elapsed, limit=None):
    """Print the criterion line outside pytest's capture."""
    budget = f", limit {limit:g} s" if limit is not None else ""
    line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail} ({elapsed:.2f} s{budget})"
    if capsys is None:
        print(line)
        return
    with capsys.disabled():
        print("\n" + line)


def kl_masses(p, q):
    p, q = np.ravel(p), np.ravel(q)
    keep = p > 0
    return float(np.sum(p[keep] * np.log(p[keep] / q[keep])))


def random_gaussian_density(rng, n, center=None):
    A = rng.normal(size=(n, n))
    cov = A @ A.T / n + rng.uniform(0.05, 1.0) * np.eye(n)
    mean = (np.zeros(n) if center is None else center) + rng.normal(scale=1.5, size=n)
    return GaussianDensity(mean, cov)


def random_pd_precision(rng, n):
    A = rng.normal(size=(n, n))
    return A @ A.T + rng.uniform(0.1, 1.0) * np.eye(n)


def random_grid_model(rng, n, k):
    grids = [np.sort(rng.choice(np.linspace(-2.0, 2.0, 41), k, replace=False)) for _ in range(n)]
    return build_grid(grids, rng.normal(scale=1.5, size=(k,) * n))


def certified_unit_diagonal(rng, n, max_off, min_delta):
    """Unit-diagonal precision with |off-diagonal| <= max_off and delta >= min_delta."""
    while True:
        off = rng.uniform(-max_off, max_off, size=(n, n))
        J = np.triu(off, 1)
        J = J + J.T + np.eye(n)
        if np.linalg.eigvalsh(J)[0] <= 0:
            continue
        if 1 - 2 * spectral_norm(np.triu(J, 1)) >= min_delta:
            return build_gaussian(J)


# -- criteria ---------------------------------------------------------------------------------


def criterion_1():
    rng = np.random.default_rng(SEED + 1)
    start = time.perf_counter()
    grid_worst = 0.0
    for _ in range(20):
        model = random_grid_model(rng, int(rng.integers(1, 4)), int(rng.integers(2, 6)))
        q = model.reference()
        grid_worst = max(grid_worst, float(np.max(np.abs(gibbs_sweep_exact(model, q).mass - q.mass))))
    gauss_worst = 0.0
    for _ in range(20):
        n = int(rng.integers(1, 7))
        model = build_gaussian(random_pd_precision(rng, n), rng.normal(size=n))
        q = model.reference()
        out = gibbs_sweep_exact(model, q)
        gauss_worst = max(
            gauss_worst,
            float(np.max(np.abs(out.mean - q.mean))),
            float(np.max(np.abs(out.cov - q.cov))),
        )
    elapsed = time.perf_counter() - start
    passed = grid_worst <= 1e-12 and gauss_worst <= 1e-10 and elapsed < 5
    detail = f"grid sup-residual {grid_worst:.1e} (<= 1e-12), Gaussian parameter residual {gauss_worst:.1e} (<= 1e-10)"
    return passed, "Gibbs invariance", detail, elapsed, 5


def criterion_2():
    rng = np.random.default_rng(SEED + 2)
    start = time.perf_counter()
    worst_step, worst_cumulative = 0.0, math.inf
    for _ in range(20):
        model = random_grid_model(rng, int(rng.integers(2, 4)), int(rng.integers(2, 5)))
        p = GridDensity.from_masses(model.grids, rng.random(model.shape) ** 3 + 1e-3)
        traj = run_trajectory(model, p, sweeps=10, distances=False, floor=0.0)
        q = model.reference().mass
        direct = np.array([kl_masses(s.mass, q) for s in traj.snapshots])
        sums = np.array([e.sum() for e in traj.sweep_terms])
        worst_step = max(worst_step, float(np.max(np.abs((direct[:-1] - direct[1:]) - sums))))
        worst_cumulative = min(worst_cumulative, float(direct[0] - sums.sum()))
    elapsed = time.perf_counter() - start
    passed = worst_step <= 1e-9 and worst_cumulative >= -1e-8 and elapsed < 30
    detail = f"max per-sweep telescoping residual {worst_step:.1e} (<= 1e-9), min cumulative residual {worst_cumulative:.2e} (>= -1e-8)"
    return passed, "entropy telescoping", detail, elapsed, 30


def criterion_3():
    rng = np.random.default_rng(SEED + 3)
    start = time.perf_counter()
    gauss_min, gauss_count = math.inf, 0
    for n in (2, 3, 4):
        model = certified_unit_diagonal(rng, n, 0.35, 0.3)
        report = full_condition_report(model, SamplerConfig(seed=SEED))
        if not (report.certified and report.delta >= 0.3):
            return False, "tensorization bound", f"n={n} model not certified", time.perf_counter() - start, 60
        for _ in range(1000):
            check = theorem1_verify(model, random_gaussian_density(rng, n, model.mean), report)
            gauss_min = min(gauss_min, check.ratio)
            gauss_count += 1
    grid_min, grid_count = math.inf, 0
    for pts, c in (([-1.0, 1.0], 0.1), ([-1.5, 0.0, 1.5], 0.1), ([-1.5, -0.5, 0.5, 1.5], 0.15)):
        pts = np.asarray(pts)
        model = build_grid([pts, pts], lambda x, c=c: c * x[0] * x[1] + 0.5 * (x[0] ** 2 + x[1] ** 2))
        report = full_condition_report(model, SamplerConfig(seed=SEED, exhaustive=True))
        if not (report.certified and report.sq.exhaustive):
            return False, "tensorization bound", f"{len(pts)}-point grid not certified", time.perf_counter() - start, 60
        for _ in range(200):
            masses = rng.dirichlet(np.full(model.shape[0] ** 2, rng.uniform(0.2, 3.0)))
            check = theorem1_verify(model, GridDensity.from_masses(model.grids, masses.reshape(model.shape)), report)
            grid_min = min(grid_min, check.ratio)
            grid_count += 1
    elapsed = time.perf_counter() - start
    passed = gauss_min >= 1 - 1e-9 and grid_min >= 1 - 1e-9 and elapsed < 60
    detail = (
        f"min rhs/lhs {gauss_min:.4f} over {gauss_count} Gaussian laws, "
        f"{grid_min:.4f} over {grid_count} grid laws (>= 1 - 1e-9)"
    )
    return passed, "tensorization bound", detail, elapsed, 60


def criterion_4():
    rng = np.random.default_rng(SEED + 4)
    start = time.perf_counter()
    models = [build_gaussian([[1.0, 0.25], [0.25, 1.0]])]
    models += [certified_unit_diagonal(rng, n, 0.4, 0.05) for n in (2, 3, 4)]
    worst_gap, rate_half = -math.inf, contraction_rate_formula(0.5)
    for model in models:
        report = full_condition_report(model, SamplerConfig(count=2000, seed=SEED))
        if not report.certified:
            return False, "contraction", "instance not certified", time.perf_counter() - start, 10
        rate = contraction_rate_formula(report.delta)
        for _ in range(50):
            p = random_gaussian_density(rng, model.dim, model.mean)
            q = random_gaussian_density(rng, model.dim, model.mean)
            worst_gap = max(worst_gap, measure_contraction(model, p, q) - rate)
    elapsed = time.perf_counter() - start
    passed = worst_gap <= 1e-9 and abs(rate_half - 0.377964) <= 5e-7 and elapsed < 10
    detail = f"max(factor - r(delta)) = {worst_gap:.3f} over {50 * len(models)} pairs (<= 1e-9); r(0.5) = {rate_half:.6f}"
    return passed, "contraction", detail, elapsed, 10


def criterion_5():
    start = time.perf_counter()
    sigma_q = 1.3
    q = build_gaussian([[1.0 / sigma_q**2]])
    rho = 1.0 / sigma_q**2
    worst_slack = math.inf
    for mu in np.linspace(-3.0, 3.0, 10):
        for sigma in np.linspace(0.2, 3.0, 10):
            p = GaussianDensity([mu], [[sigma**2]])
            w2 = w2_gaussian_1d(Gaussian1D(mu, sigma**2), Gaussian1D(0.0, sigma_q**2)) ** 2
            worst_slack = min(worst_slack, 2.0 / rho * relative_entropy(p, q) - w2)
    worst_equality = 0.0
    for m in np.linspace(-3.0, 3.0, 25):
        p = GaussianDensity([m], [[sigma_q**2]])
        w2 = w2_gaussian_1d(Gaussian1D(m, sigma_q**2), Gaussian1D(0.0, sigma_q**2)) ** 2
        worst_equality = max(worst_equality, abs(2.0 / rho * relative_entropy(p, q) - w2))
    elapsed = time.perf_counter() - start
    passed = worst_slack >= -1e-12 and worst_equality <= 1e-9
    detail = f"min (2/rho) D - W^2 = {worst_slack:.2e} on 10x10 grid; equality family max gap {worst_equality:.1e} (<= 1e-9)"
    return passed, "one-dimensional transport-entropy", detail, elapsed


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    start = time.perf_counter()
    worst_overclaim, worst_corollary, checked = -math.inf, -math.inf, 0
    for k in range(100):
        n = int(rng.integers(2, 7))
        d = rng.uniform(0.5, 2.0, size=n)
        off = rng.uniform(-0.45, 0.45, size=n - 1) * np.sqrt(d[:-1] * d[1:])
        model = build_gaussian(np.diag(d) + np.diag(off, 1) + np.diag(off, -1))
        report = full_condition_report(model, SamplerConfig(count=2000, seed=SEED + k))
        if not report.certified:
            return False, "certificate validity", f"model {k} not certified", time.perf_counter() - start, 60
        bound = lsi_bound(model, report)
        worst_overclaim = max(worst_overclaim, bound.lsi_bound - model.lambda_min)
        if k % 10 == 0:
            for _ in range(100):
                check = lsi_bound_verify(model, bound, random_gaussian_density(rng, n, model.mean))
                worst_corollary = max(worst_corollary, check.entropy - check.rhs)
                checked += 1
    elapsed = time.perf_counter() - start
    passed = worst_overclaim <= 1e-12 and worst_corollary <= 1e-12 and elapsed < 60
    detail = (
        f"max(lsi_bound - lambda_min) = {worst_overclaim:.3f} over 100 models (<= 1e-12); "
        f"max(D - I/(2 lsi_bound)) = {worst_corollary:.3f} over {checked} laws"
    )
    return passed, "certificate validity", detail, elapsed, 60


def criterion_7():
    rng = np.random.default_rng(SEED + 7)
    start = time.perf_counter()
    worst_gap, worst_marginal = 0.0, 0.0
    for _ in range(50):
        size = int(rng.integers(2, 10))
        pts = np.sort(rng.choice(np.linspace(-5.0, 5.0, 101), size, replace=False))
        a = rng.dirichlet(np.ones(size)) * (rng.random(size) < 0.8)
        a[0] += 1e-3
        p = GridDensity.from_masses((pts,), a)
        q = GridDensity.from_masses((pts,), rng.dirichlet(np.ones(size)))
        lp, plan = w2_grid_exact(p, q, Weights([1.0]))
        worst_gap = max(worst_gap, abs(lp - w2_quantile_1d(p, q)))
        worst_marginal = max(worst_marginal, plan.marginal_residual(p.mass[p.mass > 0], q.mass[q.mass > 0]))
    elapsed = time.perf_counter() - start
    passed = worst_gap <= 1e-9 and worst_marginal <= 1e-9
    detail = f"max |LP - quantile| {worst_gap:.1e}, max marginal residual {worst_marginal:.1e} (<= 1e-9)"
    return passed, "transport oracle equivalence", detail, elapsed


def criterion_8():
    start = time.perf_counter()
    family = [(1.0, 1.0, b) for b in (-0.4, -0.25, -0.1, 0.05, 0.15, 0.25, 0.35, 0.45)]
    family += [(2.0, 0.5, 0.3), (3.0, 1.5, -0.9)]
    sampler = SamplerConfig(count=10_000, seed=SEED)
    worst_ratio_gap, worst_flip_gap = 0.0, 0.0
    for j11, j22, b in family:
        model = build_gaussian([[j11, b], [b, j22]])
        w = model.weights
        norm = abs(b) / math.sqrt(j11 * j22)
        worst_ratio_gap = max(worst_ratio_gap, abs(check_sq(model, w, 0.0, sampler).worst_ratio - norm))
        lo, hi = 1 - 2 * norm - 0.4, 1.0
        if not check_sq(model, w, lo, sampler).passed or check_sq(model, w, hi, sampler).passed:
            return False, "SQ versus norm", f"no flip bracketed for b={b}", time.perf_counter() - start
        for _ in range(40):
            mid = (lo + hi) / 2
            if check_sq(model, w, mid, sampler).passed:
                lo = mid
            else:
                hi = mid
        worst_flip_gap = max(worst_flip_gap, abs((lo + hi) / 2 - (1 - 2 * norm)))
    elapsed = time.perf_counter() - start
    passed = worst_ratio_gap <= 1e-6 and worst_flip_gap <= 1e-6
    detail = (
        f"max |sampled sup ratio - ||B1|||| {worst_ratio_gap:.1e}, "
        f"max |flip - (1 - 2||B1||)| {worst_flip_gap:.1e} over {len(family)} models (<= 1e-6)"
    )
    return passed, "SQ versus norm", detail, elapsed


def criterion_9():
    start = time.perf_counter()
    model = build_gaussian([[1.0, 0.25], [0.25, 1.0]])
    a = math.sqrt(0.8)
    traj = run_trajectory(model, GaussianDensity([a, a], model.covariance), distances=False)
    d = np.asarray(traj.entropies)
    factors = traj.decay_factors()
    limit = contraction_rate_formula(0.5) ** 2 + 0.05
    elapsed = time.perf_counter() - start
    passed = (
        abs(d[0] - 1.0) <= 1e-12
        and d[-1] < 1e-10
        and bool(np.all(np.diff(d) < 0))
        and float(np.max(factors)) <= limit
    )
    detail = (
        f"D_0 = {d[0]:.6f}, D = {d[-1]:.1e} after {traj.sweeps} sweeps (< 1e-10), strictly decreasing, "
        f"max decay factor {np.max(factors):.4f} (<= {limit:.4f})"
    )
    return passed, "entropy convergence", detail, elapsed


def criterion_10():
    start = time.perf_counter()
    rows = []
    ok = True
    for n in (2, 5, 10):
        r = pathological_example_report(1.0, n)
        stated = f"delta={r.delta:.6g}" in r.note and "LSI constant is 1" in r.note
        ok = ok and (not r.certified) and r.delta <= 1e-12 and abs(r.lambda_min - 1.0) <= 1e-12 and stated
        rows.append(f"n={n}: delta={r.delta:.3f}, lambda_min={r.lambda_min:.3f}")
    elapsed = time.perf_counter() - start
    return ok, "mean-field refusal", "; ".join(rows) + ", refusal stated in report", elapsed


CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
]


@pytest.mark.parametrize("number", range(1, 11), ids=[f"criterion_{k}" for k in range(1, 11)])
def test_acceptance(number, capsys):
    passed, title, detail, elapsed, *limit = CRITERIA[number - 1]()
    emit(capsys, number, title, passed, detail, elapsed, *limit)
    assert passed, detail


if __name__ == "__main__":
    failures = 0
    for k, fn in enumerate(CRITERIA, start=1):
        passed, title, detail, elapsed, *limit = fn()
        emit(None, k, title, passed, detail, elapsed, *limit)
        failures += not passed
    sys.exit(1 if failures else 0)
