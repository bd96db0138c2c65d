"""First and second fundamental forms of the (mu, sigma_sq, beta) manifold.

Rows and columns are ordered ``(mu, sigma_sq, beta)``. Both forms share
the block structure

    [[X, 0, 0],
     [0, Y, Z],
     [0, Z, W]]

with ``(A, E, F, I)`` in the first form and ``(L, P, Q, T)`` in the
second. Every component is a polynomial in ``beta`` whose coefficients
are sums of patch covariances: ``sum_j s_ij`` (centre/neighbor) and
``sum_jk s_jk`` (neighbor/neighbor) plus their Isserlis products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .lattice import ModelParams
from .patch_stats import PatchCovariance, kron_plus_norm, plus_norm

DELTA = 8  # forms are defined on the second-order neighborhood

FIRST_NAMES = ("A", "E", "F", "I")
SECOND_NAMES = ("L", "P", "Q", "T")


class SingularFirstForm(np.linalg.LinAlgError):
    """The metric tensor is numerically singular and no ridge was allowed."""


class MalformedShapeOperator(ValueError):
    """The shape operator has eigenvalues with non-negligible imaginary parts."""


def _block(x, y, z, w) -> np.ndarray:
    return np.array([[x, 0.0, 0.0], [0.0, y, z], [0.0, z, w]])


@dataclass(frozen=True)
class FundamentalForms:
    first: np.ndarray
    second: np.ndarray

    @property
    def components(self) -> dict[str, float]:
        f, s = self.first, self.second
        return {
            "A": f[0, 0], "E": f[1, 1], "F": f[1, 2], "I": f[2, 2],
            "L": s[0, 0], "P": s[1, 1], "Q": s[1, 2], "T": s[2, 2],
        }


@dataclass(frozen=True)
class CurvatureReport:
    gaussian_k: float
    mean_h: float
    principal: np.ndarray  # descending
    shape_operator: np.ndarray


# ------------------------------------------------------------ first form

def _first_from_sums(s1, s2, s3, s4, s5, params: ModelParams) -> np.ndarray:
    # s1 = sum_j s_ij, s2 = sum_jk s_jk, s3 = sum_jk s_ij s_ik,
    # s4 = 3-term Isserlis sum over (j, k, l), s5 = 3-term sum over (j, k, l, m).
    params.require_positive_variance()
    s2_, b = params.sigma_sq, params.beta
    lin = 2.0 * b * s1 - b * b * s2
    a_ = (1.0 - b * DELTA) ** 2 / s2_ * (1.0 - lin / s2_)
    e_ = (1.0 / (2.0 * s2_ ** 2) - lin / s2_ ** 3
          + (3.0 * b ** 2 * s3 - b ** 3 * s4 + 0.25 * b ** 4 * s5) / s2_ ** 4)
    f_ = ((s1 - b * s2) / s2_ ** 2
          - (6.0 * b * s3 - 3.0 * b ** 2 * s4 + b ** 3 * s5) / (2.0 * s2_ ** 3))
    i_ = s2 / s2_ + (2.0 * s3 - 2.0 * b * s4 + b ** 2 * s5) / s2_ ** 2
    return _block(a_, e_, f_, i_)


def first_form_nested(cov: PatchCovariance, params: ModelParams) -> np.ndarray:
    """First fundamental form from explicit sums over neighbor indices."""
    return _first_from_sums(*kernels.nested_sums(cov.rho, cov.sigma_minus), params)


def first_form_tensorial(cov: PatchCovariance, params: ModelParams) -> np.ndarray:
    """First fundamental form through entry sums of Kronecker products.

    ``||rho (x) Sm||+`` stands for each of the three equal Isserlis
    pairings over ``(j, k, l)``, ``||Sm (x) Sm||+`` likewise over
    ``(j, k, l, m)``.
    """
    params.require_positive_variance()
    s2_, b = params.sigma_sq, params.beta
    rho, sm = cov.rho, cov.sigma_minus
    r1 = plus_norm(rho)
    m1 = plus_norm(sm)
    rr = kron_plus_norm(rho, rho)
    rm = kron_plus_norm(rho, sm)
    mm = kron_plus_norm(sm, sm)
    lin = 2.0 * b * r1 - b * b * m1
    a_ = (1.0 - b * DELTA) ** 2 / s2_ * (1.0 - lin / s2_)
    e_ = (1.0 / (2.0 * s2_ ** 2) - lin / s2_ ** 3
          + (3.0 * b ** 2 * rr - 3.0 * b ** 3 * rm + 0.75 * b ** 4 * mm) / s2_ ** 4)
    f_ = ((r1 - b * m1) / s2_ ** 2
          - (6.0 * b * rr - 9.0 * b ** 2 * rm + 3.0 * b ** 3 * mm) / (2.0 * s2_ ** 3))
    i_ = m1 / s2_ + (2.0 * rr - 6.0 * b * rm + 3.0 * b ** 2 * mm) / s2_ ** 2
    return _block(a_, e_, f_, i_)


# ----------------------------------------------------------- second form

def _second(s1, s2, params: ModelParams) -> np.ndarray:
    params.require_positive_variance()
    s2_, b = params.sigma_sq, params.beta
    l_ = (1.0 - b * DELTA) ** 2 / s2_
    p_ = 1.0 / (2.0 * s2_ ** 2) - (2.0 * b * s1 - b * b * s2) / s2_ ** 3
    q_ = (s1 - b * s2) / s2_ ** 2
    t_ = s2 / s2_
    return _block(l_, p_, q_, t_)


def second_form(cov: PatchCovariance, params: ModelParams, method: str = "tensorial") -> np.ndarray:
    """Second fundamental form; ``method`` is ``"tensorial"`` or ``"nested"``."""
    if method == "tensorial":
        return _second(plus_norm(cov.rho), plus_norm(cov.sigma_minus), params)
    if method == "nested":
        s1, s2, *_ = kernels.nested_sums(cov.rho, cov.sigma_minus)
        return _second(s1, s2, params)
    raise ValueError(f"unknown method {method!r}")


def fundamental_forms(cov: PatchCovariance, params: ModelParams,
                      method: str = "tensorial") -> FundamentalForms:
    if method == "tensorial":
        first = first_form_tensorial(cov, params)
    elif method == "nested":
        first = first_form_nested(cov, params)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FundamentalForms(first, second_form(cov, params, method))


# ------------------------------------------------------------- curvature

def _is_singular(m: np.ndarray) -> bool:
    scale = np.linalg.norm(m)
    return scale == 0.0 or abs(np.linalg.det(m)) < 1e-12 * scale ** m.shape[0]


def default_ridge(first) -> float:
    return 1e-9 * float(np.linalg.norm(first))


def _ridged(first, second, ridge):
    first = np.asarray(first, dtype=np.float64)
    second = np.asarray(second, dtype=np.float64)
    if ridge is not None and ridge < 0:
        raise ValueError("ridge must be >= 0")
    if not _is_singular(first):
        return first, second
    if ridge == 0:
        raise SingularFirstForm("first fundamental form is singular; pass a ridge > 0")
    eps = default_ridge(first) if ridge is None else float(ridge)
    if eps == 0.0:
        eps = 1e-12
    shift = eps * np.eye(first.shape[0])
    return first + shift, second + shift


def shape_operator(first, second, ridge: float | None = None) -> np.ndarray:
    """``-(second) @ inv(first)``.

    When ``first`` is singular (``|det| < 1e-12 * ||first||^3``) the same
    ridge is added to both forms, ``-(II + eps) (I + eps)^-1``, so equal
    forms still give ``-identity``. ``ridge=None`` picks
    ``1e-9 * ||first||``; ``ridge=0`` raises :class:`SingularFirstForm`.
    """
    f, s = _ridged(first, second, ridge)
    # solve instead of inverting: P^T = -(f^T)^-1 s^T
    return -np.linalg.solve(f.T, s.T).T


def curvatures(p, first=None, second=None, ridge: float | None = None) -> CurvatureReport:
    """Gaussian (det), mean (trace) and principal (eigenvalue) curvatures of ``p``.

    With the forms supplied and a positive-definite first form, the
    principal curvatures come from the symmetric-definite pencil
    ``second v = lam first v`` (negated), which is guaranteed real.
    Otherwise the eigenvalues of ``p`` are used and must be real to 1e-8.
    """
    p = np.asarray(p, dtype=np.float64)
    k = float(np.linalg.det(p))
    h = float(np.trace(p))
    principal = None
    if first is not None and second is not None:
        f, s = _ridged(first, second, ridge)
        try:
            principal = -scipy.linalg.eigh(s, f, eigvals_only=True)
        except np.linalg.LinAlgError:
            principal = None
    if principal is None:
        ev = np.linalg.eigvals(p)
        scale = max(1.0, float(np.max(np.abs(ev))))
        if np.max(np.abs(ev.imag)) > 1e-8 * scale:
            raise MalformedShapeOperator(f"complex eigenvalues {ev}")
        principal = ev.real
    principal = np.sort(principal)[::-1].copy()
    return CurvatureReport(k, h, principal, p)


def curvature_report(forms: FundamentalForms, ridge: float | None = None) -> CurvatureReport:
    p = shape_operator(forms.first, forms.second, ridge)
    return curvatures(p, forms.first, forms.second, ridge)


# --------------------------------------------------------------- entropy

def gaussian_entropy(sigma_sq: float) -> float:
    return 0.5 * (math.log(2.0 * math.pi * sigma_sq) + 1.0)


def entropy(cov: PatchCovariance, params: ModelParams) -> float:
    """Expected self-information of the local conditional density.

    Equal to ``H_G - beta * sigma_sq * Q - beta^2 * T / 2`` with the
    second-form components built from the same two sums.
    """
    params.require_positive_variance()
    s2, b = params.sigma_sq, params.beta
    s1 = plus_norm(cov.rho)
    m1 = plus_norm(cov.sigma_minus)
    return gaussian_entropy(s2) - b * s1 / s2 + b * b * m1 / (2.0 * s2)
