"""Square toroidal lattices, neighborhood systems and model parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Window offsets in row-major order, centre excluded.
_OFFSETS = {
    1: ((-1, 0), (0, -1), (0, 1), (1, 0)),
    2: ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)),
    3: (
        (-2, 0),
        (-1, -1), (-1, 0), (-1, 1),
        (0, -2), (0, -1), (0, 1), (0, 2),
        (1, -1), (1, 0), (1, 1),
        (2, 0),
    ),
}

MIN_SIDE = 5


@dataclass(frozen=True)
class ModelParams:
    """Parameter vector ``(mu, sigma_sq, beta)`` of the random field.

    ``sigma_sq == 0`` is accepted so that a constant lattice can be
    estimated; it is reported through :attr:`degenerate` and rejected by
    every operation that divides by the variance.
    """

    mu: float
    sigma_sq: float
    beta: float

    def __post_init__(self):
        for name in ("mu", "sigma_sq", "beta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sigma_sq < 0:
            raise ValueError(f"sigma_sq must be >= 0, got {self.sigma_sq}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")

    @property
    def degenerate(self) -> bool:
        return self.sigma_sq == 0.0

    def require_positive_variance(self):
        if self.sigma_sq <= 0:
            raise DegenerateParameters(
                f"sigma_sq must be > 0 (got {self.sigma_sq}); constant lattice?"
            )


class DegenerateParameters(ValueError):
    """Raised when an operation needs a strictly positive variance."""


@dataclass(frozen=True)
class NeighborhoodSpec:
    order: int = 2

    def __post_init__(self):
        if self.order not in _OFFSETS:
            raise ValueError(f"neighborhood order must be 1, 2 or 3, got {self.order}")

    @property
    def delta(self) -> int:
        return len(_OFFSETS[self.order])

    @property
    def offsets(self) -> tuple[tuple[int, int], ...]:
        return _OFFSETS[self.order]

    def offset_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        off = np.asarray(self.offsets, dtype=np.int64)
        return np.ascontiguousarray(off[:, 0]), np.ascontiguousarray(off[:, 1])


@dataclass
class Lattice:
    """An ``side x side`` grid of float64 site values with periodic boundaries."""

    values: np.ndarray
    neighborhood: NeighborhoodSpec = field(default_factory=NeighborhoodSpec)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"lattice must be square, got shape {values.shape}")
        if values.shape[0] < MIN_SIDE:
            raise ValueError(f"lattice side must be >= {MIN_SIDE}, got {values.shape[0]}")
        self.values = values

    @property
    def side(self) -> int:
        return self.values.shape[0]

    @property
    def delta(self) -> int:
        return self.neighborhood.delta

    def copy(self) -> "Lattice":
        return Lattice(self.values.copy(), self.neighborhood)

    def neighbor_sums(self, center: float = 0.0) -> np.ndarray:
        """Per-site sum of ``x_j - center`` over the neighborhood."""
        dev = self.values - center
        out = np.zeros_like(dev)
        for dr, dc in self.neighborhood.offsets:
            out += np.roll(dev, (-dr, -dc), axis=(0, 1))
        return out


def neighbors(lattice: Lattice, row: int, col: int) -> list[tuple[int, int]]:
    """Coordinates of the neighbors of ``(row, col)``, wrapped on the torus."""
    n = lattice.side
    if not (0 <= row < n and 0 <= col < n):
        raise IndexError(f"site ({row}, {col}) outside {n}x{n} lattice")
    return [((row + dr) % n, (col + dc) % n) for dr, dc in lattice.neighborhood.offsets]


def init_lattice(side: int, params: ModelParams, seed, order: int = 2) -> Lattice:
    """Independent Gaussian sites with the given mean and variance.

    ``seed`` is anything :func:`numpy.random.default_rng` accepts.
    """
    if side < MIN_SIDE:
        raise ValueError(f"lattice side must be >= {MIN_SIDE}, got {side}")
    params.require_positive_variance()
    rng = np.random.default_rng(seed)
    values = rng.normal(params.mu, math.sqrt(params.sigma_sq), size=(side, side))
    return Lattice(values, NeighborhoodSpec(order))
