import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmrf_curvature import oracle
from gmrf_curvature.geometry import (MalformedShapeOperator, SingularFirstForm, curvature_report,
                                     curvatures, entropy, first_form_nested, first_form_tensorial,
                                     fundamental_forms, gaussian_entropy, second_form,
                                     shape_operator)
from gmrf_curvature.lattice import ModelParams
from gmrf_curvature.patch_stats import PatchCovariance, plus_norm

from conftest import random_inputs

ZERO = PatchCovariance.from_matrix(np.zeros((9, 9)))


def _limit(s2):
    return np.diag([1 / s2, 1 / (2 * s2 ** 2), 0.0])


@pytest.mark.parametrize("s2", [0.5, 1.0, 2.7])
def test_degenerate_limit_both_forms(s2):
    p = ModelParams(0.0, s2, 0.0)
    for first in (first_form_nested(ZERO, p), first_form_tensorial(ZERO, p)):
        assert np.array_equal(first, _limit(s2))
    for m in ("tensorial", "nested"):
        assert np.array_equal(second_form(ZERO, p, m), _limit(s2))


def test_zero_cov_A_value():
    a = first_form_tensorial(ZERO, ModelParams(0.0, 2.0, 0.1))[0, 0]
    assert a == pytest.approx(0.04 / 2.0, rel=1e-14)


def test_beta0_F_and_I(rng):
    cov, p = random_inputs(rng, 1)[0]
    p = ModelParams(p.mu, p.sigma_sq, 0.0)
    f = first_form_tensorial(cov, p)
    r1, m1 = plus_norm(cov.rho), plus_norm(cov.sigma_minus)
    assert f[1, 2] == pytest.approx(r1 / p.sigma_sq ** 2, rel=1e-13)
    assert f[2, 2] == pytest.approx(m1 / p.sigma_sq + 2 * r1 ** 2 / p.sigma_sq ** 2, rel=1e-13)


def test_structure_and_symmetry(rng):
    for cov, p in random_inputs(rng, 20):
        forms = fundamental_forms(cov, p)
        for m in (forms.first, forms.second):
            assert np.array_equal(m, m.T)
            assert m[0, 1] == m[0, 2] == 0.0
        assert forms.second[2, 2] == pytest.approx(plus_norm(cov.sigma_minus) / p.sigma_sq)


def test_tensorial_equals_nested(rng):
    for cov, p in random_inputs(rng, 50):
        np.testing.assert_allclose(first_form_tensorial(cov, p), first_form_nested(cov, p),
                                   rtol=0, atol=1e-10)
        np.testing.assert_allclose(second_form(cov, p), second_form(cov, p, "nested"),
                                   rtol=0, atol=1e-10)


def test_nested_sums_match_loop_oracle(rng):
    from gmrf_curvature import kernels
    cov, _ = random_inputs(rng, 1)[0]
    s1, s2, s3, s4, s5 = kernels.nested_sums(cov.rho, cov.sigma_minus)
    o = oracle.nested_loop_sums(cov.rho, cov.sigma_minus)
    assert (s1, s2, s3) == pytest.approx((o["ij"], o["jk"], o["ij_ik"]), rel=1e-12)
    assert (s4, s5) == pytest.approx((o["ijkl"], o["jklm"]), rel=1e-12)


def test_unknown_method():
    with pytest.raises(ValueError):
        second_form(ZERO, ModelParams(0, 1, 0), "loops")


def test_first_form_mc_single_model():
    # one synthetic patch model with a dense covariance at beta = 0.05
    rng = np.random.default_rng(31)
    model = oracle.SyntheticPatchModel(oracle.random_patch_covariance(rng, 1.0), 0.0, 0.05)
    cov = PatchCovariance.from_matrix(model.cov9)
    exact = first_form_tensorial(cov, ModelParams(0.0, 1.0, 0.05))
    est, se = oracle.mc_fisher_matrix(model, "first", 400_000, seed=32)
    for a, b in [(0, 0), (1, 1), (1, 2), (2, 2)]:
        assert abs(est[a, b] - exact[a, b]) <= oracle.mc_tolerance(se[a, b], exact[a, b])


def test_Q_mc():
    rng = np.random.default_rng(33)
    model = oracle.SyntheticPatchModel(oracle.random_patch_covariance(rng, 1.5), 0.4, 0.15)
    cov = PatchCovariance.from_matrix(model.cov9)
    q = second_form(cov, ModelParams(0.4, 1.5, 0.15))[1, 2]
    est, se = oracle.mc_fisher_entry(model, ("sigma_sq", "beta"), "second", 200_000, seed=34)
    assert abs(est - q) <= 3 * se


# ---------------------------------------------------------------- shape operator

def test_equal_forms_give_minus_identity(rng):
    g = rng.normal(size=(3, 3))
    first = g @ g.T + np.eye(3)
    p = shape_operator(first, first)
    np.testing.assert_allclose(p, -np.eye(3), atol=1e-14)
    rep = curvatures(p, first, first)
    assert rep.gaussian_k == pytest.approx(-1.0, abs=1e-12)
    assert rep.mean_h == pytest.approx(-3.0, abs=1e-12)


def test_diagonal_example():
    p = shape_operator(np.diag([2.0, 2.0, 2.0]), np.eye(3))
    np.testing.assert_allclose(p, -0.5 * np.eye(3), atol=1e-15)


def test_curvatures_of_given_p():
    rep = curvatures(-np.eye(3))
    assert (rep.gaussian_k, rep.mean_h) == (-1.0, -3.0)
    assert rep.principal.tolist() == [-1.0, -1.0, -1.0]
    rep = curvatures(-np.diag([2.0, 1.0, 0.5]))
    assert rep.gaussian_k == pytest.approx(-1.0)
    assert rep.mean_h == pytest.approx(-3.5)
    assert rep.principal.tolist() == [-0.5, -1.0, -2.0]


def test_complex_eigenvalues_rejected():
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(MalformedShapeOperator):
        curvatures(rot)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_principal_identities(seed):
    r = np.random.default_rng(seed)
    g = r.normal(size=(3, 3))
    first = g @ g.T + 0.1 * np.eye(3)
    h = r.normal(size=(3, 3))
    second = h + h.T
    rep = curvatures(shape_operator(first, second), first, second)
    assert np.prod(rep.principal) == pytest.approx(rep.gaussian_k, rel=1e-9, abs=1e-12)
    assert np.sum(rep.principal) == pytest.approx(rep.mean_h, rel=1e-9, abs=1e-12)


def test_degenerate_ridge_gives_k_minus_one():
    forms = fundamental_forms(ZERO, ModelParams(0.0, 1.3, 0.0))
    rep = curvature_report(forms)
    assert rep.gaussian_k == pytest.approx(-1.0, abs=1e-6)
    assert rep.mean_h == pytest.approx(-3.0, abs=1e-6)


def test_unridged_singular_raises():
    forms = fundamental_forms(ZERO, ModelParams(0.0, 1.0, 0.0))
    with pytest.raises(SingularFirstForm):
        shape_operator(forms.first, forms.second, ridge=0.0)
    with pytest.raises(ValueError):
        shape_operator(forms.first, forms.second, ridge=-1.0)


def test_ridge_untouched_when_regular(rng):
    cov, p = random_inputs(rng, 1)[0]
    forms = fundamental_forms(cov, p)
    a = shape_operator(forms.first, forms.second, ridge=None)
    b = shape_operator(forms.first, forms.second, ridge=0.0)
    assert np.array_equal(a, b)


# ---------------------------------------------------------------- entropy

def test_entropy_beta0(rng):
    cov, p = random_inputs(rng, 1)[0]
    p = ModelParams(p.mu, p.sigma_sq, 0.0)
    assert entropy(cov, p) == 0.5 * (math.log(2 * math.pi * p.sigma_sq) + 1)


def test_entropy_unit_log_term():
    assert entropy(ZERO, ModelParams(0.0, 1 / (2 * math.pi), 0.0)) == pytest.approx(0.5, abs=1e-15)


def test_entropy_identity(rng):
    for cov, p in random_inputs(rng, 50):
        ii = second_form(cov, p)
        ident = gaussian_entropy(p.sigma_sq) - p.beta * p.sigma_sq * ii[1, 2] - p.beta ** 2 * ii[2, 2] / 2
        assert entropy(cov, p) == pytest.approx(ident, abs=1e-12)


def test_entropy_mc():
    # expected negative log conditional density under the patch distribution
    rng = np.random.default_rng(35)
    model = oracle.SyntheticPatchModel(oracle.random_patch_covariance(rng, 0.8), 0.0, 0.1)
    x = model.sample(np.random.default_rng(36), 200_000)
    vals = -oracle.log_density(x[:, 4], np.delete(x, 4, axis=1), 0.0, model.sigma_sq, 0.1)
    h = entropy(PatchCovariance.from_matrix(model.cov9), ModelParams(0.0, model.sigma_sq, 0.1))
    assert abs(vals.mean() - h) < 3 * vals.std() / math.sqrt(vals.size)
