"""3x3 patch covariance and its centre/neighbor decomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .lattice import Lattice

# Row-major offsets of the 3x3 window; index 4 is the centre.
PATCH_OFFSETS = np.array([(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)], dtype=np.int64)
CENTER = 4
_NEIGHBOR_IDX = np.array([k for k in range(9) if k != CENTER])

# Distinct offset differences between two patch positions.
_LAGS = np.array([(dr, dc) for dr in range(-2, 3) for dc in range(-2, 3)], dtype=np.int64)
_LAG_INDEX = {tuple(l): i for i, l in enumerate(_LAGS)}
_PAIR_LAG = np.array(
    [[_LAG_INDEX[tuple(PATCH_OFFSETS[b] - PATCH_OFFSETS[a])] for b in range(9)] for a in range(9)]
)


@dataclass(frozen=True)
class PatchCovariance:
    """Pooled 9x9 covariance of the 3x3 patch vectors of a lattice.

    Attributes
    ----------
    sigma_p : (9, 9) ndarray
        Full patch covariance, rows/columns in row-major window order.
    rho : (8,) ndarray
        Covariances between the centre site and each neighbor.
    sigma_minus : (8, 8) ndarray
        Covariances among the neighbors.
    sigma_sq_center : float
        Variance of the centre site.
    """

    sigma_p: np.ndarray
    rho: np.ndarray
    sigma_minus: np.ndarray
    sigma_sq_center: float

    @classmethod
    def from_matrix(cls, sigma_p) -> "PatchCovariance":
        sigma_p = np.asarray(sigma_p, dtype=np.float64)
        if sigma_p.shape != (9, 9):
            raise ValueError(f"patch covariance must be 9x9, got {sigma_p.shape}")
        if not np.allclose(sigma_p, sigma_p.T, rtol=0, atol=1e-12 * max(1.0, np.abs(sigma_p).max())):
            raise ValueError("patch covariance must be symmetric")
        rho = sigma_p[CENTER, _NEIGHBOR_IDX].copy()
        sigma_minus = sigma_p[np.ix_(_NEIGHBOR_IDX, _NEIGHBOR_IDX)].copy()
        return cls(sigma_p, rho, sigma_minus, float(sigma_p[CENTER, CENTER]))

    @property
    def degenerate(self) -> bool:
        """True for the all-zero covariance of a constant lattice."""
        return not np.any(self.sigma_p)


def _require_order2(lattice: Lattice):
    if lattice.neighborhood.order != 2:
        raise ValueError(
            "patch statistics are defined for the second-order (8-neighbor) system, "
            f"got order {lattice.neighborhood.order}"
        )


def patch_vectorize(lattice: Lattice, row: int, col: int) -> np.ndarray:
    """Row-major flattening of the wrapped 3x3 window centred on ``(row, col)``."""
    _require_order2(lattice)
    n = lattice.side
    rows = (row + PATCH_OFFSETS[:, 0]) % n
    cols = (col + PATCH_OFFSETS[:, 1]) % n
    return lattice.values[rows, cols].copy()


def patch_covariance(lattice: Lattice) -> PatchCovariance:
    """Biased (1/n^2) covariance of all n^2 patch vectors.

    On the torus every patch position is a permutation of the sites, so
    entry ``(a, b)`` depends only on the offset difference between
    positions ``a`` and ``b``. The 25 lagged moments are computed once and
    scattered, which makes the result exactly symmetric and independent
    of where the lattice origin sits.
    """
    _require_order2(lattice)
    x = lattice.values
    dev = x - np.mean(x)
    moments = kernels.lag_moments(dev, np.ascontiguousarray(_LAGS[:, 0]),
                                  np.ascontiguousarray(_LAGS[:, 1]))
    # C(d) and C(-d) are the same sum taken in a different order; average
    # them so the matrix is symmetric to the last bit.
    moments = 0.5 * (moments + moments[::-1])
    return PatchCovariance.from_matrix(moments[_PAIR_LAG])


def plus_norm(a) -> float:
    """Sum of all entries (signed)."""
    return float(np.sum(a))


def kron_plus_norm(a, b) -> float:
    """Entry sum of ``kron(a, b)`` without forming it."""
    return plus_norm(a) * plus_norm(b)
