"""Local conditional density, MCMC sweeps and the exponential-family split.

The conditional density of a site given its neighbors is

    p(x_i | eta_i) = N(mu + beta * sum_j (x_j - mu), sigma_sq)

and both samplers here target it site by site.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .lattice import Lattice, ModelParams

LOG_2PI = math.log(2.0 * math.pi)


class SamplerMode(str, enum.Enum):
    RANDOM_WALK_MH = "random_walk_mh"
    GIBBS = "gibbs"


class SweepOrder(str, enum.Enum):
    RASTER = "raster"
    CHECKERBOARD = "checkerboard"


@dataclass(frozen=True)
class SamplerConfig:
    """How a sweep updates sites.

    ``proposal_std=None`` uses the current standard deviation ``sqrt(sigma_sq)``
    as the random-walk scale.
    """

    mode: SamplerMode = SamplerMode.RANDOM_WALK_MH
    proposal_std: float | None = None
    sweep_order: SweepOrder = SweepOrder.RASTER

    def __post_init__(self):
        object.__setattr__(self, "mode", SamplerMode(self.mode))
        object.__setattr__(self, "sweep_order", SweepOrder(self.sweep_order))
        if self.proposal_std is not None and not self.proposal_std > 0:
            raise ValueError(f"proposal_std must be > 0, got {self.proposal_std}")


@dataclass(frozen=True)
class NaturalDecomposition:
    """``log F(X) = c . t + d`` for the pseudo-likelihood ``F``."""

    c: np.ndarray
    t: np.ndarray
    d: float

    def log_value(self) -> float:
        return float(np.dot(self.c, self.t) + self.d)


def local_conditional_logdensity(x_center, neighbor_values, params: ModelParams) -> float:
    params.require_positive_variance()
    nb = np.asarray(neighbor_values, dtype=np.float64)
    if not (math.isfinite(x_center) and np.all(np.isfinite(nb))):
        raise ValueError("non-finite input to the conditional density")
    resid = x_center - params.mu - params.beta * float(np.sum(nb - params.mu))
    return -0.5 * (LOG_2PI + math.log(params.sigma_sq)) - resid * resid / (2.0 * params.sigma_sq)


def _coloring_period(lattice: Lattice) -> int:
    period = 3 if lattice.neighborhood.order == 3 else 2
    if lattice.side % period:
        raise ValueError(
            f"checkerboard sweeps on order-{lattice.neighborhood.order} "
            f"neighborhoods need a side divisible by {period}, got {lattice.side}"
        )
    return period


def sweep_values(lattice: Lattice, params: ModelParams, config: SamplerConfig,
                 rng: np.random.Generator) -> float:
    """One in-place sweep over every site; returns the acceptance rate.

    Draws one ``side x side`` block of standard normals and, in MH mode,
    one block of uniforms per sweep, in that order.
    """
    params.require_positive_variance()
    n = lattice.side
    sigma = math.sqrt(params.sigma_sq)
    gibbs = config.mode is SamplerMode.GIBBS
    z = rng.standard_normal((n, n))
    u = np.empty((0, 0)) if gibbs else rng.random((n, n))
    step = sigma if config.proposal_std is None else float(config.proposal_std)
    off_r, off_c = lattice.neighborhood.offset_arrays()
    args = (float(params.mu), sigma, float(params.beta), z, u, step, gibbs)
    if config.sweep_order is SweepOrder.RASTER:
        accepted = kernels.sweep_raster(lattice.values, off_r, off_c, *args)
    else:
        period = _coloring_period(lattice)
        accepted = kernels.sweep_colored(lattice.values, off_r, off_c, period, *args)
    return accepted / (n * n)


def metropolis_sweep(lattice: Lattice, params: ModelParams, config: SamplerConfig,
                     rng: np.random.Generator) -> Lattice:
    """Return a copy of ``lattice`` advanced by one sweep."""
    out = lattice.copy()
    sweep_values(out, params, config, rng)
    return out


def estimate_params(lattice: Lattice, beta: float) -> ModelParams:
    """Sample mean and biased (1/n^2) sample variance; ``beta`` passes through."""
    x = lattice.values
    mu = float(np.mean(x))
    sigma_sq = float(np.mean((x - mu) ** 2))
    return ModelParams(mu, sigma_sq, beta)


def natural_decomposition(lattice: Lattice, params: ModelParams) -> NaturalDecomposition:
    params.require_positive_variance()
    mu, s2, beta = params.mu, params.sigma_sq, params.beta
    delta = lattice.delta
    n = lattice.values.size
    x = lattice.values
    nsum = lattice.neighbor_sums()
    k = 1.0 - beta * delta
    c = np.array([
        mu * k / s2,
        -1.0 / (2.0 * s2),
        beta / s2,
        -beta * mu * k / s2,
        -beta * beta / (2.0 * s2),
    ])
    t = np.array([
        np.sum(x),
        np.sum(x * x),
        np.sum(x * nsum),
        np.sum(nsum),
        np.sum(nsum * nsum),
    ])
    d = (-0.5 * n * (LOG_2PI + math.log(s2) + mu * mu / s2)
         + beta * delta * mu * mu * n * (1.0 - beta * delta / 2.0) / s2)
    return NaturalDecomposition(c, t, float(d))


def pseudo_log_likelihood(lattice: Lattice, params: ModelParams) -> float:
    """Sum over sites of the local conditional log density."""
    params.require_positive_variance()
    resid = lattice.values - params.mu - params.beta * lattice.neighbor_sums(params.mu)
    n = lattice.values.size
    return float(-0.5 * n * (LOG_2PI + math.log(params.sigma_sq))
                 - np.sum(resid * resid) / (2.0 * params.sigma_sq))


class FieldChain:
    """A lattice evolved by repeated sweeps at a moving inverse temperature.

    With ``reestimate`` the sweep parameters are the lattice's own sample
    mean and variance, refreshed before every sweep. The update is then
    equivariant under affine maps of the site values, so with ``rescale``
    the chain keeps its lattice standardised after every sweep and carries
    the discarded scale in :attr:`log_scale`. This keeps ``beta * delta > 1``
    runs (which grow without bound) inside floating-point range while
    leaving every scale-free statistic unchanged.
    """

    def __init__(self, lattice: Lattice, config: SamplerConfig, rng: np.random.Generator,
                 *, reestimate: bool = True, rescale: bool = True,
                 fixed_params: ModelParams | None = None):
        if rescale and not reestimate:
            raise ValueError("rescale requires reestimate (fixed parameters are not scale-free)")
        if not reestimate and fixed_params is None:
            fixed_params = estimate_params(lattice, 0.0)
        self.lattice = lattice
        self.config = config
        self.rng = rng
        self.reestimate = reestimate
        self.rescale = rescale
        self.fixed_params = fixed_params
        self.log_scale = 0.0
        self.last_acceptance = float("nan")

    def sweep(self, beta: float, sweeps: int = 1):
        for _ in range(sweeps):
            if self.reestimate:
                params = estimate_params(self.lattice, beta)
            else:
                params = ModelParams(self.fixed_params.mu, self.fixed_params.sigma_sq, beta)
            self.last_acceptance = sweep_values(self.lattice, params, self.config, self.rng)
            if not np.all(np.isfinite(self.lattice.values)):
                raise FloatingPointError(f"lattice overflowed at beta={beta}")
            if self.rescale:
                self._standardise()

    def _standardise(self):
        x = self.lattice.values
        mu = np.mean(x)
        sd = math.sqrt(float(np.mean((x - mu) ** 2)))
        if sd == 0.0:
            raise FloatingPointError("lattice collapsed to a constant")
        x -= mu
        x /= sd
        self.log_scale += math.log(sd)
