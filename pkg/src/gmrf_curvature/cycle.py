"""Inverse-temperature cycles: heat from 0 to beta_max, cool back, record geometry."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import curvature_report, entropy, fundamental_forms
from .lattice import Lattice, ModelParams, init_lattice
from .patch_stats import patch_covariance
from .sampler import FieldChain, SamplerConfig, SamplerMode, estimate_params

FORM_KEYS = ("A", "E", "F", "I", "L", "P", "Q", "T")


class Phase(str, enum.Enum):
    HEATING = "heating"
    COOLING = "cooling"


class Direction(str, enum.Enum):
    NEGATIVE_TO_POSITIVE = "negative_to_positive"
    POSITIVE_TO_NEGATIVE = "positive_to_negative"


@dataclass(frozen=True)
class CycleConfig:
    """Schedule and sampler settings for one information cycle.

    Iteration ``t`` samples at ``beta = delta_beta * k`` with ``k = t`` while
    heating (``t < half_cycle_steps``) and ``k = 2 * half_cycle_steps - t``
    while cooling, so the peak ``beta_max`` is hit at ``t = half_cycle_steps``.

    With ``rescale`` (the default) the lattice is restandardised after each
    sweep; a fixed ``sampler.proposal_std`` is then in units of the current
    standard deviation.
    """

    side: int = 512
    delta_beta: float = 0.0006
    half_cycle_steps: int = 500
    sweeps_per_step: int = 1
    seed: int = 0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    ridge: float | None = None
    reestimate: bool = True
    rescale: bool = True
    initial_mu: float = 0.0
    initial_sigma_sq: float = 1.0

    def __post_init__(self):
        if self.side < 5:
            raise ValueError(f"side must be >= 5, got {self.side}")
        if not (self.delta_beta > 0 and math.isfinite(self.delta_beta)):
            raise ValueError(f"delta_beta must be > 0, got {self.delta_beta}")
        if self.half_cycle_steps < 1:
            raise ValueError(f"half_cycle_steps must be >= 1, got {self.half_cycle_steps}")
        if self.sweeps_per_step < 1:
            raise ValueError(f"sweeps_per_step must be >= 1, got {self.sweeps_per_step}")
        if self.ridge is not None and self.ridge < 0:
            raise ValueError(f"ridge must be >= 0, got {self.ridge}")
        if not self.initial_sigma_sq > 0:
            raise ValueError("initial_sigma_sq must be > 0")

    @property
    def beta_max(self) -> float:
        return self.delta_beta * self.half_cycle_steps

    @property
    def iterations(self) -> int:
        return 2 * self.half_cycle_steps

    def beta_at(self, iteration: int) -> float:
        n = self.half_cycle_steps
        k = iteration if iteration <= n else 2 * n - iteration
        return self.delta_beta * k

    def phase_at(self, iteration: int) -> Phase:
        return Phase.HEATING if iteration < self.half_cycle_steps else Phase.COOLING


@dataclass(frozen=True)
class CycleRecord:
    iteration: int
    beta: float
    entropy: float
    form_components: dict  # A, E, F, I, L, P, Q, T
    gaussian_k: float
    mean_h: float
    principal: tuple  # descending
    phase: Phase


@dataclass(frozen=True)
class SignChangeEvent:
    iteration: int
    beta: float
    direction: Direction


@dataclass(frozen=True)
class HysteresisLoop:
    """Heating and cooling polylines in the (curvature, entropy) plane."""

    heating: np.ndarray  # (m, 2)
    cooling: np.ndarray  # (k, 2)
    area: float  # signed shoelace area of heating followed by cooling


def measure(lattice: Lattice, beta: float, log_scale: float = 0.0, ridge=None):
    """Forms, curvatures and entropy of a lattice at inverse temperature ``beta``.

    ``log_scale`` is the log of any factor the lattice was divided by; it
    only shifts the entropy.
    """
    params = estimate_params(lattice, beta)
    cov = patch_covariance(lattice)
    params = ModelParams(params.mu, cov.sigma_sq_center, beta)
    forms = fundamental_forms(cov, params)
    report = curvature_report(forms, ridge)
    h = entropy(cov, params) + log_scale
    return forms, report, h


def run_cycle(config: CycleConfig, *, on_iteration=None) -> list[CycleRecord]:
    """Run one full cycle; deterministic in ``config``.

    ``on_iteration(iteration, chain)`` is called after each iteration's
    sweeps, before measurement, e.g. to snapshot the lattice.
    """
    seed_init, seed_chain = np.random.SeedSequence(config.seed).spawn(2)
    lattice = init_lattice(config.side,
                           ModelParams(config.initial_mu, config.initial_sigma_sq, 0.0),
                           seed_init)
    chain = FieldChain(lattice, config.sampler, np.random.default_rng(seed_chain),
                       reestimate=config.reestimate, rescale=config.rescale)
    records = []
    for t in range(config.iterations):
        beta = config.beta_at(t)
        chain.sweep(beta, config.sweeps_per_step)
        if on_iteration is not None:
            on_iteration(t, chain)
        forms, report, h = measure(chain.lattice, beta, chain.log_scale, config.ridge)
        comps = forms.components
        records.append(CycleRecord(
            iteration=t,
            beta=beta,
            entropy=h,
            form_components={k: float(comps[k]) for k in FORM_KEYS},
            gaussian_k=report.gaussian_k,
            mean_h=report.mean_h,
            principal=tuple(float(v) for v in report.principal),
            phase=config.phase_at(t),
        ))
    return records


def detect_sign_changes(records) -> list[SignChangeEvent]:
    """One event wherever the Gaussian curvature changes strict sign.

    Zeros carry no sign: a run ``-, 0, +`` reports its event at the ``+``.
    """
    if not records:
        raise ValueError("no records")
    events = []
    last = 0.0
    for rec in records:
        k = rec.gaussian_k
        if k == 0.0 or math.isnan(k):
            continue
        if last * k < 0:
            direction = (Direction.NEGATIVE_TO_POSITIVE if k > 0
                         else Direction.POSITIVE_TO_NEGATIVE)
            events.append(SignChangeEvent(rec.iteration, rec.beta, direction))
        last = k
    return events


def _shoelace(points: np.ndarray) -> float:
    if len(points) < 3:
        return 0.0
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def hysteresis_path(records, quantity: str = "gaussian_k") -> HysteresisLoop:
    """Split a cycle into heating/cooling (curvature, entropy) polylines."""
    if quantity not in ("gaussian_k", "mean_h"):
        raise ValueError(f"quantity must be 'gaussian_k' or 'mean_h', got {quantity!r}")

    def pts(phase):
        return np.array([(getattr(r, quantity), r.entropy)
                         for r in records if Phase(r.phase) is phase], dtype=np.float64
                        ).reshape(-1, 2)

    heating, cooling = pts(Phase.HEATING), pts(Phase.COOLING)
    area = _shoelace(np.concatenate([heating, cooling]))
    return HysteresisLoop(heating, cooling, area)


def default_test_config(seed: int = 0, **overrides) -> CycleConfig:
    """Desk-scale cycle: 128x128, exact Gibbs updates, full 0.0006 schedule."""
    kw = dict(side=128, seed=seed, sampler=SamplerConfig(mode=SamplerMode.GIBBS))
    kw.update(overrides)
    return CycleConfig(**kw)
