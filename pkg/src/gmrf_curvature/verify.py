"""Oracle checks runnable outside pytest (``gmrf-curvature verify``)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracle
from .geometry import (entropy, first_form_nested, first_form_tensorial, second_form,
                       gaussian_entropy)
from .lattice import ModelParams
from .patch_stats import PatchCovariance, kron_plus_norm

FIRST_ENTRIES = {"A": (0, 0), "E": (1, 1), "F": (1, 2), "I": (2, 2), "B": (0, 1), "C": (0, 2)}
SECOND_ENTRIES = {"L": (0, 0), "P": (1, 1), "Q": (1, 2), "T": (2, 2), "M": (0, 1), "N": (0, 2)}

# (sigma_sq, beta, mu) for the synthetic patch models
MODEL_GRID = ((1.0, 0.05, 0.0), (0.7, 0.12, 1.5), (2.5, 0.2, -0.8), (1.6, 0.3, 0.3), (3.2, 0.02, 4.0))


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def synthetic_models(seed=2024):
    rng = np.random.default_rng(seed)
    return [
        oracle.SyntheticPatchModel(oracle.random_patch_covariance(rng, s2), mu, beta)
        for s2, beta, mu in MODEL_GRID
    ]


def mc_checks(model, draws, seed, label):
    cov = PatchCovariance.from_matrix(model.cov9)
    params = ModelParams(model.mu, model.sigma_sq, model.beta)
    exact = {"first": first_form_tensorial(cov, params), "second": second_form(cov, params)}
    checks = []
    for order, entries in (("first", FIRST_ENTRIES), ("second", SECOND_ENTRIES)):
        est, se = oracle.mc_fisher_matrix(model, order, draws, seed)
        for name, (a, b) in entries.items():
            ref = exact[order][a, b]
            z = abs(est[a, b] - ref)
            tol = oracle.mc_tolerance(se[a, b], ref)
            checks.append(Check(
                f"{label} {order} {name}", bool(z <= tol),
                f"closed={ref:.6g} mc={est[a, b]:.6g} se={se[a, b]:.2g} |diff|/se="
                + (f"{z / se[a, b]:.2f}" if se[a, b] > 0 else "n/a"),
            ))
    return checks


def run_suite(draws=100_000, seed=0, n_models=len(MODEL_GRID)):
    rng = np.random.default_rng(seed)
    checks = []

    worst = 0.0
    for _ in range(100):
        s2 = rng.uniform(0.5, 4.0)
        cov = PatchCovariance.from_matrix(oracle.random_patch_covariance(rng, s2))
        p = ModelParams(0.0, s2, rng.uniform(0.0, 0.3))
        worst = max(worst,
                    np.abs(first_form_tensorial(cov, p) - first_form_nested(cov, p)).max(),
                    np.abs(second_form(cov, p) - second_form(cov, p, "nested")).max())
    checks.append(Check("tensorial == nested (100 inputs)", worst <= 1e-10, f"max |diff| = {worst:.2e}"))

    worst = 0.0
    for _ in range(20):
        a, b = rng.standard_normal(8), rng.standard_normal((8, 8))
        worst = max(worst, abs(kron_plus_norm(a, b) - oracle.materialized_kron_sum(a, b)))
    checks.append(Check("factorised kron sum == materialised", worst <= 1e-12, f"max |diff| = {worst:.2e}"))

    worst = 0.0
    for _ in range(10):
        x = rng.standard_normal(9)
        theta = (rng.normal(), rng.uniform(0.5, 3.0), rng.uniform(0.0, 0.3))
        an = oracle.scores(x[4], np.delete(x, 4), *theta)
        fd = oracle.finite_difference_scores(x[4], np.delete(x, 4), *theta)
        worst = max(worst, float(np.abs(an - fd).max()))
    checks.append(Check("analytic scores == finite differences", worst <= 1e-5, f"max |diff| = {worst:.2e}"))

    worst = 0.0
    for _ in range(50):
        s2 = rng.uniform(0.5, 4.0)
        cov = PatchCovariance.from_matrix(oracle.random_patch_covariance(rng, s2))
        p = ModelParams(0.0, s2, rng.uniform(0.0, 0.3))
        ii = second_form(cov, p)
        ident = gaussian_entropy(s2) - p.beta * s2 * ii[1, 2] - p.beta ** 2 * ii[2, 2] / 2
        worst = max(worst, abs(entropy(cov, p) - ident))
    checks.append(Check("entropy == H_G - b s2 Q - b^2 T/2", worst <= 1e-12, f"max |diff| = {worst:.2e}"))

    for i, model in enumerate(synthetic_models()[:n_models]):
        checks.extend(mc_checks(model, draws, seed + 1 + i, f"model{i}"))
    return checks


def format_table(checks) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check'.ljust(width)}  result  detail"]
    for c in checks:
        lines.append(f"{c.name.ljust(width)}  {'PASS' if c.passed else 'FAIL':6}  {c.detail}")
    n_ok = sum(c.passed for c in checks)
    lines.append(f"{n_ok}/{len(checks)} checks passed")
    return "\n".join(lines)
