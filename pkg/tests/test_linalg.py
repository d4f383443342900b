import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from eplab import generators, linalg
from eplab.errors import InvalidInputError, ShapeError
from eplab.linalg import DEFAULT_TOLERANCE

dims = st.integers(min_value=1, max_value=8)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def _general(dim: int, seed: int, cap: float = 1e3) -> np.ndarray:
    return generators.random_general(dim, seed % (dim + 1), seed, cap)


@given(dim=dims, seed=seeds)
def test_pinv_matches_scipy(dim, seed):
    t = _general(dim, seed)
    result = linalg.pinv(t)
    assert result.numerical_rank == seed % (dim + 1)
    assert_allclose(result.pinv, scipy.linalg.pinv(t, rtol=1e-10), atol=1e-9)


@given(dim=dims, seed=seeds)
def test_moore_penrose_equations(dim, seed):
    t = _general(dim, seed)
    residuals = linalg.mp_residuals(t, linalg.pinv(t).pinv)
    assert set(residuals) == {"TXT=T", "XTX=X", "(TX)*=TX", "(XT)*=XT"}
    assert max(residuals.values()) <= 1e-9


def test_pinv_result_is_read_only(ginibre):
    result = linalg.pinv(ginibre(3, 3, 0))
    with pytest.raises(ValueError):
        result.pinv[0, 0] = 1.0


def test_pinv_rectangular(ginibre):
    t = ginibre(4, 2, 1)
    p = linalg.pinv(t).pinv
    assert p.shape == (2, 4)
    assert_allclose(p @ t, np.eye(2), atol=1e-12)


def test_zero_matrix_has_zero_pinv():
    result = linalg.pinv(np.zeros((3, 3)))
    assert result.numerical_rank == 0
    assert not np.any(result.pinv)


def test_rank_floor_scales_with_power():
    t = generators.nilpotent_nEP(4, 2, seed=3)
    square = linalg.mat_power(t, 2)
    assert linalg.numerical_rank(square, scale=linalg.power_scale(t, 2)) == 0
    assert linalg.numerical_rank(t) == 1


@pytest.mark.parametrize(
    "bad, error",
    [
        (np.array([[1.0, np.nan], [0.0, 1.0]]), InvalidInputError),
        (np.array([[1.0, np.inf]]), InvalidInputError),
        (np.zeros(3), ShapeError),
        (np.zeros((0, 0)), ShapeError),
    ],
)
def test_as_matrix_rejects(bad, error):
    with pytest.raises(error):
        linalg.as_matrix(bad)


def test_require_square():
    with pytest.raises(ShapeError):
        linalg.require_square(np.zeros((2, 3)))


def test_operator_equal_shape_mismatch():
    with pytest.raises(ShapeError):
        linalg.operator_equal(np.eye(2), np.eye(3))


@given(dim=dims, seed=seeds)
def test_projectors(dim, seed):
    t = _general(dim, seed)
    rank = seed % (dim + 1)
    image = linalg.range_projector(t)
    kernel = linalg.kernel_projector(t)
    assert image.subspace_dim == rank
    assert kernel.subspace_dim == dim - rank
    for projector in (image, kernel):
        assert max(projector.residuals().values()) <= 1e-10
    assert_allclose(image.matrix @ t, t, atol=1e-10)
    assert_allclose(t @ kernel.matrix, np.zeros_like(t), atol=1e-10)


def test_kernel_projector_matches_null_space(ginibre):
    t = ginibre(5, 3, 2) @ ginibre(3, 5, 3)
    basis = scipy.linalg.null_space(t)
    assert_allclose(linalg.kernel_projector(t).matrix, basis @ basis.conj().T, atol=1e-10)


def test_range_included(ginibre):
    b = ginibre(4, 2, 4)
    a = b @ ginibre(2, 3, 5)
    assert linalg.range_included(a, b).holds
    assert not linalg.range_included(b, a[:, :1]).holds


def test_range_included_row_mismatch():
    with pytest.raises(ShapeError):
        linalg.range_included(np.eye(2), np.eye(3))


def test_douglas_constant(e1_e2):
    # R(e1 ⊗ e2) = Ce1 is not inside R((e1 ⊗ e2)*) = Ce2
    assert math.isinf(linalg.douglas_constant(e1_e2, e1_e2.conj().T))
    b = np.diag([2.0, 0.5]).astype(complex)
    a = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)
    assert linalg.douglas_constant(a, b) == pytest.approx(np.linalg.norm(np.linalg.inv(b) @ a, 2))


def test_subspace_invariant():
    kernel_of = np.diag([1.0, 0.0, 0.0]).astype(complex)
    keeps = np.array([[1, 0, 0], [0, 1, 1], [0, 1, 1]], dtype=complex)
    leaks = np.array([[1, 1, 0], [0, 1, 0], [0, 0, 1]], dtype=complex)
    assert linalg.subspace_invariant(keeps, kernel_of).holds
    assert not linalg.subspace_invariant(leaks, kernel_of).holds


def test_commutator():
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    assert_allclose(linalg.commutator(a.conj().T, a), np.diag([-1.0, 1.0]))
    assert linalg.commutes(np.eye(2), a).holds


def test_is_psd():
    assert linalg.is_psd(np.diag([1.0, 0.0])).holds
    check = linalg.is_psd(np.diag([1.0, -0.5]))
    assert not check.holds
    assert check.min_eigenvalue == pytest.approx(-0.5)
    assert not linalg.is_psd(np.array([[0, 1], [0, 0]], dtype=complex)).holds


@given(dim=st.integers(min_value=2, max_value=6), seed=seeds)
def test_cauchy_dual_forms_agree(dim, seed):
    t = generators.random_general(dim, seed % (dim + 1), seed, 100.0)
    forms = linalg.cauchy_dual_forms(t)
    omega = forms["(T^†)*"]
    for form in forms.values():
        assert linalg.operator_equal(form, omega).holds


def test_cauchy_dual_of_partial_isometry_is_itself():
    t = generators.random_partial_isometry(4, 2, seed=9)
    assert_allclose(linalg.cauchy_dual(t), t, atol=1e-12)


def test_limit_pinv_converges():
    u = generators.random_unitary(3, seed=0)
    t = u @ np.diag([2.0, 1.0, 0.0]) @ u.conj().T
    errors = linalg.limit_pinv_errors(t, [1e-2, 1e-4, 1e-6])
    assert errors == sorted(errors, reverse=True)
    assert errors[-1] < 1e-5


@pytest.mark.parametrize("sweep", [[], [1e-2, 1e-2], [1e-3, 1e-2], [1e-2, -1.0], [float("nan")]])
def test_limit_pinv_rejects_bad_sweep(sweep):
    with pytest.raises(InvalidInputError):
        linalg.limit_pinv_oracle(np.eye(2), sweep)


def test_mat_power():
    t = np.array([[1, 1], [0, 1]], dtype=complex)
    assert_allclose(linalg.mat_power(t, 0), np.eye(2))
    assert_allclose(linalg.mat_power(t, 3), [[1, 3], [0, 1]])
    with pytest.raises(InvalidInputError):
        linalg.mat_power(t, -1)


def test_default_tolerance():
    assert DEFAULT_TOLERANCE.residual_tol == 1e-8
    assert DEFAULT_TOLERANCE.rank_tol_factor == 1.0


def test_rank_rule_is_scale_invariant():
    tiny = 1e-13 * np.eye(3)
    result = linalg.pinv(tiny)
    assert result.numerical_rank == 3
    assert_allclose(result.pinv, 1e13 * np.eye(3), rtol=1e-12)
    assert linalg.range_projector(tiny).subspace_dim == 3
    assert linalg.kernel_projector(tiny).subspace_dim == 0
    assert linalg.numerical_rank(np.diag([1.0, 1e-13])) == 2


def test_power_scale():
    t = 3 * np.eye(2, dtype=complex)
    assert linalg.power_scale(t, 0) == linalg.power_scale(t, 1) == 0.0
    assert linalg.power_scale(t, 3) == pytest.approx(27.0)
    assert linalg.product_scale(t, 0.5 * t) == pytest.approx(4.5)


@given(dim=dims, seed=seeds)
def test_pinv_involution_and_adjoint(dim, seed):
    t = _general(dim, seed, cap=100.0)
    p = linalg.pinv(t).pinv
    assert linalg.operator_equal(linalg.pinv(p).pinv, t).holds
    assert_allclose(linalg.pinv(t.conj().T).pinv, p.conj().T, atol=1e-10)


def _mp_budget(t: np.ndarray) -> float:
    """1e-10, widened to the rounding a product T·X of condition cond(T) cannot avoid."""
    s = scipy.linalg.svdvals(t)
    rank = linalg.numerical_rank(t)
    cond = s[0] / s[rank - 1] if rank else 1.0
    return max(1e-10, 32 * max(t.shape) * linalg.EPS * cond)


MP_FAMILIES = [
    "random_general",
    "random_normal",
    "random_partial_isometry",
    "random_projection",
    "random_unitary",
    "rank_one",
    "non_normal_EP",
    "nilpotent_nEP",
]


def test_moore_penrose_axioms_over_500_draws():
    worst = {}
    for index in range(500):
        family = MP_FAMILIES[index % len(MP_FAMILIES)]
        dim = 2 + index % 9
        t, _ = generators.draw(family, dim, seed=1000 + index, condition_cap=1e6)
        residuals = linalg.mp_residuals(t, linalg.pinv(t).pinv)
        assert max(residuals.values()) <= _mp_budget(t), (family, dim, index, residuals)
        worst[family] = max(worst.get(family, 0.0), *residuals.values())
    # Only the wide draws need the widened budget
    assert all(r <= 1e-10 for family, r in worst.items() if family != "random_general")


def test_limit_oracle_on_the_2x2_example(paper_2x2):
    # T^2 = 4I, so T^† = T/4
    assert_allclose(linalg.limit_pinv_oracle(paper_2x2, [1e-12]), paper_2x2 / 4, atol=1e-8)


def test_limit_errors_decrease_on_rank_deficient_rectangular(ginibre):
    t = ginibre(5, 2, 11) @ ginibre(2, 3, 12)
    assert linalg.numerical_rank(t) == 2
    errors = linalg.limit_pinv_errors(t, [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])
    assert errors == sorted(errors, reverse=True)
    assert errors[-1] < errors[0]


def test_douglas_bound_holds_on_samples(paper_shift):
    square = linalg.mat_power(paper_shift, 2)
    c = linalg.douglas_constant(square, paper_shift.conj().T)
    assert math.isfinite(c)
    rng = np.random.default_rng(5)
    for _ in range(200):
        x = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        lhs = np.linalg.norm(square.conj().T @ x)
        rhs = np.linalg.norm(paper_shift @ x)
        assert lhs <= (c + 1e-9) * rhs + 1e-12


def test_subspace_invariant_against_jordan_kernel():
    jordan = np.diag([1.0, 1.0], k=1).astype(complex)
    basis = scipy.linalg.null_space(jordan)
    assert basis.shape == (3, 1)
    assert_allclose(linalg.kernel_projector(jordan).matrix, basis @ basis.conj().T, atol=1e-12)
    upper = np.triu(np.arange(1, 10).reshape(3, 3)).astype(complex)
    for b, keeps in ((upper, True), (jordan.conj().T, False), (jordan, True)):
        image = b @ basis
        leak = np.linalg.norm(image - basis @ (basis.conj().T @ image))
        assert (leak < 1e-12) == keeps
        assert linalg.subspace_invariant(b, jordan).holds == keeps


def test_cauchy_dual_of_rank_one(ginibre):
    x, y = ginibre(4, 1, 6).ravel(), ginibre(4, 1, 7).ravel()
    t = generators.rank_one(x, y)
    expected = t / (np.linalg.norm(x) ** 2 * np.linalg.norm(y) ** 2)
    assert_allclose(linalg.cauchy_dual(t), expected, atol=1e-12)


@pytest.mark.parametrize("weights", [[1.0, 2.0], [0.5, 1.5, 2.0, 0.75], [1.2] * 4])
def test_cauchy_dual_of_weighted_shift(weights):
    shift = generators.weighted_shift_trunc(weights, len(weights) + 1)
    omega = linalg.cauchy_dual(shift)
    for k, w in enumerate(weights):
        column = np.zeros(len(weights) + 1, dtype=complex)
        column[k + 1] = 1 / w
        assert_allclose(omega[:, k], column, atol=1e-12)
    assert_allclose(omega[:, -1], 0, atol=1e-12)
