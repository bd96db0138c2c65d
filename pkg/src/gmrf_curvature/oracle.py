"""Brute-force reference computations used to check the closed forms.

Nothing here imports :mod:`gmrf_curvature.geometry`; the Monte Carlo
estimates come straight from the definitions

    first[a, b]  =  E[ d_a log p * d_b log p ]
    second[a, b] = -E[ d_a d_b log p ]

evaluated with analytic derivatives of the local conditional log density
and expectations over a 9-dimensional Gaussian patch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PARAMS = ("mu", "sigma_sq", "beta")
_CENTER = 4
_NEIGHBORS = [k for k in range(9) if k != _CENTER]
_CHUNK = 1 << 16
MAX_KRON_ENTRIES = 10_000


@dataclass(frozen=True)
class SyntheticPatchModel:
    """Gaussian 3x3 patch with mean ``mu`` and covariance ``cov9``.

    The conditional variance parameter is taken to be the centre variance
    ``cov9[4, 4]``; the closed forms assume the two coincide.
    """

    cov9: np.ndarray
    mu: float
    beta: float

    def __post_init__(self):
        cov9 = np.asarray(self.cov9, dtype=np.float64)
        if cov9.shape != (9, 9) or not np.allclose(cov9, cov9.T):
            raise ValueError("cov9 must be a symmetric 9x9 matrix")
        try:
            chol = np.linalg.cholesky(cov9)
        except np.linalg.LinAlgError:
            raise ValueError("cov9 must be positive definite") from None
        object.__setattr__(self, "cov9", cov9)
        object.__setattr__(self, "_chol", chol)

    @property
    def sigma_sq(self) -> float:
        return float(self.cov9[_CENTER, _CENTER])

    @property
    def delta(self) -> int:
        return len(_NEIGHBORS)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.mu + rng.standard_normal((size, 9)) @ self._chol.T


def log_density(x_center, neighbor_values, mu, sigma_sq, beta):
    """Local conditional log density, vectorised over leading axes."""
    s = np.sum(np.asarray(neighbor_values) - mu, axis=-1)
    r = x_center - mu - beta * s
    return -0.5 * np.log(2.0 * np.pi * sigma_sq) - r * r / (2.0 * sigma_sq)


def scores(x_center, neighbor_values, mu, sigma_sq, beta):
    """Gradient of :func:`log_density` w.r.t. ``(mu, sigma_sq, beta)``, stacked last."""
    nb = np.asarray(neighbor_values)
    delta = nb.shape[-1]
    s = np.sum(nb - mu, axis=-1)
    r = x_center - mu - beta * s
    return np.stack([
        (1.0 - beta * delta) * r / sigma_sq,
        -0.5 / sigma_sq + r * r / (2.0 * sigma_sq ** 2),
        r * s / sigma_sq,
    ], axis=-1)


def hessian(x_center, neighbor_values, mu, sigma_sq, beta):
    """Second derivatives of :func:`log_density`, shape ``(..., 3, 3)``."""
    nb = np.asarray(neighbor_values)
    delta = nb.shape[-1]
    s = np.sum(nb - mu, axis=-1)
    r = x_center - mu - beta * s
    k = 1.0 - beta * delta
    h = np.empty(np.shape(r) + (3, 3))
    h[..., 0, 0] = -k * k / sigma_sq * np.ones_like(r)
    h[..., 0, 1] = h[..., 1, 0] = -k * r / sigma_sq ** 2
    h[..., 0, 2] = h[..., 2, 0] = (-delta * r - k * s) / sigma_sq
    h[..., 1, 1] = 0.5 / sigma_sq ** 2 - r * r / sigma_sq ** 3
    h[..., 1, 2] = h[..., 2, 1] = -r * s / sigma_sq ** 2
    h[..., 2, 2] = -s * s / sigma_sq
    return h


def _integrand(model: SyntheticPatchModel, x: np.ndarray, order: str) -> np.ndarray:
    xc, nb = x[:, _CENTER], x[:, _NEIGHBORS]
    if order == "first":
        g = scores(xc, nb, model.mu, model.sigma_sq, model.beta)
        return g[:, :, None] * g[:, None, :]
    if order == "second":
        return -hessian(xc, nb, model.mu, model.sigma_sq, model.beta)
    raise ValueError(f"order must be 'first' or 'second', got {order!r}")


def mc_fisher_matrix(model: SyntheticPatchModel, order: str, draws: int, seed=0):
    """Monte Carlo estimate and standard error of the full 3x3 form.

    Draws are generated in fixed-size chunks from one generator and reduced
    in chunk order, so results depend only on ``(model, draws, seed)``.
    """
    if draws < 2:
        raise ValueError("need at least two draws")
    rng = np.random.default_rng(seed)
    total = np.zeros((3, 3))
    total_sq = np.zeros((3, 3))
    done = 0
    while done < draws:
        m = min(_CHUNK, draws - done)
        v = _integrand(model, model.sample(rng, m), order)
        total += v.sum(axis=0)
        total_sq += (v * v).sum(axis=0)
        done += m
    mean = total / draws
    var = np.maximum(total_sq / draws - mean * mean, 0.0) * draws / (draws - 1)
    return mean, np.sqrt(var / draws)


def mc_fisher_entry(model: SyntheticPatchModel, which: tuple[str, str], order: str,
                    draws: int, seed=0) -> tuple[float, float]:
    """``(estimate, standard_error)`` for one entry, e.g. ``("sigma_sq", "beta")``."""
    if draws < 100_000:
        raise ValueError("mc_fisher_entry needs at least 1e5 draws")
    a, b = (PARAMS.index(w) for w in which)
    mean, se = mc_fisher_matrix(model, order, draws, seed)
    return float(mean[a, b]), float(se[a, b])


def materialized_kron_sum(a, b) -> float:
    """Entry sum of the explicitly built Kronecker product."""
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if a.size * b.size > MAX_KRON_ENTRIES:
        raise ValueError(f"Kronecker product would have {a.size * b.size} entries "
                         f"(cap {MAX_KRON_ENTRIES})")
    return float(np.kron(a, b).sum())


def nested_loop_sums(rho, sigma_minus) -> dict[str, float]:
    """Neighbor-index sums by plain Python loops (slow, for cross-checks)."""
    rho = [float(v) for v in rho]
    sm = [[float(v) for v in row] for row in np.asarray(sigma_minus)]
    d = len(rho)
    idx = range(d)
    out = {"ij": 0.0, "jk": 0.0, "ij_ik": 0.0, "ijkl": 0.0, "jklm": 0.0}
    for j in idx:
        out["ij"] += rho[j]
        for k in idx:
            out["jk"] += sm[j][k]
            out["ij_ik"] += rho[j] * rho[k]
            for l in idx:
                out["ijkl"] += rho[j] * sm[k][l] + rho[k] * sm[j][l] + rho[l] * sm[j][k]
                for m in idx:
                    out["jklm"] += sm[j][k] * sm[l][m] + sm[j][l] * sm[k][m] + sm[j][m] * sm[k][l]
    return out


def random_patch_covariance(rng: np.random.Generator, sigma_sq: float | None = None,
                            strength: float = 1.0) -> np.ndarray:
    """Random positive-definite 9x9 covariance.

    Built as a spatially decaying kernel on the 3x3 grid plus a random
    Wishart perturbation; optionally rescaled to centre variance ``sigma_sq``.
    """
    pts = np.array([(r, c) for r in range(3) for c in range(3)], dtype=np.float64)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
    length = rng.uniform(0.5, 3.0)
    base = np.exp(-d2 / length) * strength
    g = rng.standard_normal((9, 12)) * rng.uniform(0.05, 0.4)
    cov = base + g @ g.T / 12 + 0.05 * np.eye(9)
    if sigma_sq is not None:
        cov *= sigma_sq / cov[_CENTER, _CENTER]
    return 0.5 * (cov + cov.T)


def finite_difference_scores(x_center, neighbor_values, mu, sigma_sq, beta, h=1e-6):
    """Central differences of :func:`log_density` in each parameter."""
    theta = np.array([mu, sigma_sq, beta], dtype=np.float64)
    out = np.empty(3)
    for i in range(3):
        step = h * max(1.0, abs(theta[i]))
        up, dn = theta.copy(), theta.copy()
        up[i] += step
        dn[i] -= step
        out[i] = (log_density(x_center, neighbor_values, *up)
                  - log_density(x_center, neighbor_values, *dn)) / (2.0 * step)
    return out


def mc_tolerance(se: float, exact: float) -> float:
    """Three standard errors, plus a rounding floor for entries with zero variance."""
    return 3.0 * se + 1e-12 * max(1.0, abs(exact))

