import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from eplab import classes, generators, linalg
from eplab.errors import GenerationError, InvalidInputError
from eplab.schemas import GenParams, Spectrum

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.mark.parametrize("family", sorted(generators.FAMILIES))
def test_draw_is_deterministic(family):
    dim = max(4, generators.FAMILIES[family].min_dim)
    first, trace = generators.draw(family, dim, 1234)
    second, _ = generators.draw(family, dim, 1234)
    assert_array_equal(first, second)
    assert_array_equal(generators.replay(trace), first)
    assert trace.family == family and trace.seed == 1234


def test_different_seeds_differ():
    a, _ = generators.draw("random_general", 4, 1)
    b, _ = generators.draw("random_general", 4, 2)
    assert not np.allclose(a, b)


@given(dim=st.integers(min_value=1, max_value=8), seed=seeds)
def test_random_unitary_is_unitary(dim, seed):
    u = generators.random_unitary(dim, seed)
    assert_allclose(u.conj().T @ u, np.eye(dim), atol=1e-12)


@given(dim=st.integers(min_value=1, max_value=8), seed=seeds)
def test_random_general_spectrum(dim, seed):
    rank = seed % (dim + 1)
    t = generators.random_general(dim, rank, seed, condition_cap=100.0)
    sigma = np.linalg.svd(t, compute_uv=False)
    assert linalg.numerical_rank(t) == rank
    if rank:
        assert sigma[0] == pytest.approx(1.0)
        assert sigma[rank - 1] >= 1 / 100.0 - 1e-12


@given(dim=st.integers(min_value=1, max_value=6), seed=seeds)
def test_random_normal_real_spectrum_is_hermitian(dim, seed):
    t = generators.random_normal(dim, seed, spectrum=Spectrum.real)
    assert_allclose(t, t.conj().T, atol=1e-12)


def test_random_projection_and_partial_isometry():
    p = generators.random_projection(5, 2, seed=3)
    assert_allclose(p @ p, p, atol=1e-12)
    assert_allclose(p, p.conj().T, atol=1e-12)
    v = generators.random_partial_isometry(5, 3, seed=3)
    assert_allclose(v @ v.conj().T @ v, v, atol=1e-12)
    assert linalg.numerical_rank(v) == 3


@given(dim=st.integers(min_value=2, max_value=6), seed=seeds)
def test_non_normal_EP_draws(dim, seed):
    t = generators.non_normal_EP(dim, seed)
    assert classes.is_EP(t).member
    assert linalg.commutes(t.conj().T, t).residual >= generators.NON_NORMAL_MARGIN


def test_non_normal_EP_gives_up(monkeypatch):
    monkeypatch.setattr(generators, "NON_NORMAL_MARGIN", 1e9)
    with pytest.raises(GenerationError) as info:
        generators.non_normal_EP(3, seed=0)
    assert info.value.exit_code == 3


def test_paper_shift_example():
    s = generators.paper_shift_example(2.0, 5)
    expected = np.zeros((5, 5))
    expected[0, 0] = 2.0
    expected[2, 1] = 2.0
    expected[4, 3] = 2.0
    assert_array_equal(s, expected)
    square = linalg.mat_power(s, 2)
    assert_allclose(square, 4.0 * np.outer(np.eye(5)[0], np.eye(5)[0]))


def test_nilpotent_index():
    t = generators.nilpotent_nEP(5, 3, seed=8)
    assert linalg.fro(linalg.mat_power(t, 3)) < 1e-12
    assert linalg.fro(linalg.mat_power(t, 2)) > 0.5


def test_direct_sum_and_conjugate():
    s = generators.direct_sum(np.eye(2), 2 * np.eye(1))
    assert_array_equal(s, np.diag([1.0, 1.0, 2.0]))
    c = generators.unitary_conjugate(s, seed=4)
    assert_allclose(np.sort(np.linalg.eigvals(c).real), [1.0, 1.0, 2.0], atol=1e-12)


@pytest.mark.parametrize(
    "call",
    [
        lambda: generators.paper_shift_example(1.0, 4),
        lambda: generators.paper_shift_example(0.0, 5),
        lambda: generators.weighted_shift_trunc([1.0], 3),
        lambda: generators.weighted_shift_trunc([1.0, -1.0], 3),
        lambda: generators.rank_one([0, 0], [1, 0]),
        lambda: generators.rank_one([1, 0], [1, 0, 0]),
        lambda: generators.random_general(3, 4, seed=0),
        lambda: generators.nilpotent_nEP(3, 4, seed=0),
        lambda: generators.nhep_gap(2, seed=0),
        lambda: generators.get_family("bogus"),
    ],
)
def test_bad_parameters(call):
    with pytest.raises(InvalidInputError):
        call()


def test_generate_rank_one():
    t = generators.generate("rank_one", GenParams(dim=2, x=[1 + 0j, 0j], y=[0j, 1 + 0j]), seed=0)
    assert_array_equal(t, [[0, 1], [0, 0]])


def test_generate_defaults():
    assert_array_equal(generators.generate("paper_2x2", GenParams(), seed=0), [[2, 1], [0, -2]])
    assert generators.generate("paper_shift_example", GenParams(alpha=2.0), seed=0).shape == (9, 9)
    assert generators.generate("weighted_shift_trunc", GenParams(dim=4), seed=0).shape == (4, 4)
    nilpotent = generators.generate("nilpotent_nEP", GenParams(dim=3, n=3), seed=0)
    assert classes.ascent(nilpotent) == 3


def test_generate_unknown_or_missing():
    with pytest.raises(InvalidInputError):
        generators.generate("bogus", GenParams(), seed=0)
    with pytest.raises(InvalidInputError):
        generators.generate("rank_one", GenParams(dim=2), seed=0)
