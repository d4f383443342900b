"""Seeded matrix families.

Every generator is a pure function of its arguments: the same (family, dim,
seed) always yields a bit-identical matrix. Random draws go through
``numpy.random.default_rng(seed)``; retries use subseeds derived from the
original seed so they stay reproducible.
"""

import logging
from collections.abc import Callable, Sequence
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg

from . import linalg
from .errors import GenerationError, InvalidInputError
from .linalg import ComplexMatrix, adjoint
from .schemas import ClassTag, GenParams, SeedTrace, Spectrum
from .utils import derive_seed

logger = logging.getLogger(__name__)

MAX_RETRIES = 16
NON_NORMAL_MARGIN = 1e-3
PAPER_2X2 = np.array([[2, 1], [0, -2]], dtype=np.complex128)
# 2-hypo-EP but not 2-EP: R(T^2) = span{e2} sits in R(T*) while R(T*^2) leaves R(T)
NHEP_GAP_BLOCK = np.array([[0, 0, 0], [1, 1, 0], [1, 0, 0]], dtype=np.complex128)


def _require_dim(dim: int, minimum: int = 1) -> int:
    if dim < minimum:
        raise InvalidInputError(f"dim must be >= {minimum}, got {dim}")
    return dim


def _require_rank(rank: int, dim: int) -> int:
    if not 0 <= rank <= dim:
        raise InvalidInputError(f"rank must lie in [0, {dim}], got {rank}")
    return rank


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> ComplexMatrix:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def _haar(rng: np.random.Generator, dim: int) -> ComplexMatrix:
    q, r = scipy.linalg.qr(_ginibre(rng, dim, dim))
    d = np.diag(r)
    # Column phases fixed by diag(R) so the draw is Haar distributed
    return q * (d / np.abs(d))


def _conjugate(block: ComplexMatrix, u: ComplexMatrix) -> ComplexMatrix:
    return adjoint(u) @ block @ u


def random_unitary(dim: int, seed: int) -> ComplexMatrix:
    return _haar(np.random.default_rng(seed), _require_dim(dim))


def rank_one(x: Sequence[complex], y: Sequence[complex]) -> ComplexMatrix:
    """x ⊗ y, the matrix x·y* with (x ⊗ y)z = <z, y> x."""
    x = np.asarray(x, dtype=np.complex128).ravel()
    y = np.asarray(y, dtype=np.complex128).ravel()
    if x.shape != y.shape:
        raise InvalidInputError(f"x and y differ in length: {x.size} vs {y.size}")
    if not (np.any(x) and np.any(y)):
        raise InvalidInputError("rank_one needs nonzero vectors")
    return np.outer(x, y.conj())


def paper_shift_example(alpha: float, size: int) -> ComplexMatrix:
    """Truncated shift with S e1 = αe1, S e_{2p} = αe_{2p+1}, S e_{2p+1} = 0.

    The truncation closes exactly only for odd size; then S/α is a partial
    isometry and S^n = α^n e1e1* for n >= 2.
    """
    if alpha == 0 or not np.isfinite(alpha):
        raise InvalidInputError(f"alpha must be finite and nonzero, got {alpha}")
    if size < 3 or size % 2 == 0:
        raise InvalidInputError(f"size must be odd and >= 3, got {size}")
    s = np.zeros((size, size), dtype=np.complex128)
    s[0, 0] = alpha
    for row in range(2, size, 2):
        s[row, row - 1] = alpha
    return s


def weighted_shift_trunc(weights: Sequence[float], size: int) -> ComplexMatrix:
    """Forward weighted shift e_i -> w_i e_{i+1}, with e_size -> 0."""
    weights = [float(w) for w in weights]
    if len(weights) != size - 1:
        raise InvalidInputError(f"need {size - 1} weights for size {size}, got {len(weights)}")
    if any(not np.isfinite(w) or w <= 0 for w in weights):
        raise InvalidInputError("weights must be positive")
    s = np.zeros((size, size), dtype=np.complex128)
    for i, w in enumerate(weights):
        s[i + 1, i] = w
    return s


def paper_2x2() -> ComplexMatrix:
    return PAPER_2X2.copy()


def random_normal(
    dim: int, seed: int, rank: Optional[int] = None, spectrum: Spectrum = Spectrum.complex
) -> ComplexMatrix:
    """U diag(λ) U* with |λ| in [0.5, 1.5]; real spectrum gives a Hermitian draw."""
    _require_dim(dim)
    rank = _require_rank(dim if rank is None else rank, dim)
    rng = np.random.default_rng(seed)
    u = _haar(rng, dim)
    moduli = rng.uniform(0.5, 1.5, dim)
    if Spectrum(spectrum) is Spectrum.real:
        eig = moduli * rng.choice([-1.0, 1.0], dim)
    else:
        eig = moduli * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, dim))
    eig[rank:] = 0
    return (u * eig) @ adjoint(u)


def random_projection(dim: int, rank: int, seed: int) -> ComplexMatrix:
    _require_dim(dim)
    _require_rank(rank, dim)
    basis = _haar(np.random.default_rng(seed), dim)[:, :rank]
    return basis @ adjoint(basis)


def random_partial_isometry(dim: int, rank: int, seed: int) -> ComplexMatrix:
    """U (I_rank ⊕ 0) V* for independent Haar U, V."""
    _require_dim(dim)
    _require_rank(rank, dim)
    rng = np.random.default_rng(seed)
    u, v = _haar(rng, dim), _haar(rng, dim)
    return u[:, :rank] @ adjoint(v[:, :rank])


def random_general(dim: int, rank: int, seed: int, condition_cap: float = 1e6) -> ComplexMatrix:
    """U Σ V* with σ_max = 1 and the nonzero σ log-uniform in [1/condition_cap, 1]."""
    _require_dim(dim)
    _require_rank(rank, dim)
    if not condition_cap > 1:
        raise InvalidInputError(f"condition_cap must exceed 1, got {condition_cap}")
    rng = np.random.default_rng(seed)
    u, v = _haar(rng, dim), _haar(rng, dim)
    sigma = np.zeros(dim)
    if rank:
        sigma[0] = 1.0
        sigma[1:rank] = np.sort(np.exp(-rng.uniform(0.0, np.log(condition_cap), rank - 1)))[::-1]
    return (u * sigma) @ adjoint(v)


def non_normal_EP(dim: int, seed: int, rank: Optional[int] = None, condition_cap: float = 10.0) -> ComplexMatrix:
    """U* (A ⊕ 0) U with A upper triangular, invertible and non-normal.

    R(T) = R(T*) = U*(C^rank ⊕ 0) by construction. Draws that come out
    normal or worse conditioned than `condition_cap` are redrawn from
    derived subseeds.
    """
    _require_dim(dim, 2)
    attempt_seed = seed
    for attempt in range(MAX_RETRIES):
        rng = np.random.default_rng(attempt_seed)
        k = int(rng.integers(2, dim + 1)) if rank is None else rank
        if not 2 <= k <= dim:
            raise InvalidInputError(f"rank must lie in [2, {dim}], got {k}")
        diag = rng.uniform(0.8, 1.2, k) * np.exp(2j * np.pi * rng.uniform(0.0, 1.0, k))
        block = np.diag(diag) + np.triu(_ginibre(rng, k, k), 1) * (0.3 / np.sqrt(k))
        u = _haar(rng, dim)
        t = _conjugate(scipy.linalg.block_diag(block, np.zeros((dim - k, dim - k))), u)
        # stay well clear of the normal set
        normal = linalg.commutes(adjoint(t), t).residual < NON_NORMAL_MARGIN
        if not normal and np.linalg.cond(block) <= condition_cap:
            return t
        logger.debug("non_normal_EP(dim=%d, seed=%d) attempt %d rejected", dim, seed, attempt)
        attempt_seed = derive_seed(seed, "non_normal_EP", attempt + 1)
    raise GenerationError(f"non_normal_EP(dim={dim}, seed={seed}) exhausted {MAX_RETRIES} retries")


def nilpotent_nEP(dim: int, n: int, seed: int) -> ComplexMatrix:
    """U* (J_n ⊕ 0) U: a partial isometry with T^n = 0 and T^(n-1) != 0."""
    _require_dim(dim)
    if not 1 <= n <= dim:
        raise InvalidInputError(f"n must lie in [1, {dim}], got {n}")
    jordan = np.eye(n, k=-1, dtype=np.complex128)
    block = scipy.linalg.block_diag(jordan, np.zeros((dim - n, dim - n)))
    return _conjugate(block.astype(np.complex128), random_unitary(dim, seed))


def nhep_gap(dim: int, seed: int) -> ComplexMatrix:
    """U* (T0 ⊕ I) U with T0 in n-HEP for every n >= 2 and never n-EP."""
    _require_dim(dim, 3)
    block = scipy.linalg.block_diag(NHEP_GAP_BLOCK, np.eye(dim - 3)).astype(np.complex128)
    return _conjugate(block, random_unitary(dim, seed))


def unitary_conjugate(t, seed: int) -> ComplexMatrix:
    a = linalg.require_square(t)
    return _conjugate(a, random_unitary(a.shape[0], seed))


def direct_sum(a, b) -> ComplexMatrix:
    a, b = linalg.as_matrix(a), linalg.as_matrix(b)
    return scipy.linalg.block_diag(a, b).astype(np.complex128)


# Family registry

def _key(tag: ClassTag, n: Optional[int] = None) -> str:
    return tag.value if n is None else f"{tag.value}({n})"


def _normal_profile(n_max: int) -> dict[str, bool]:
    flags = {
        _key(t): True
        for t in (ClassTag.normal, ClassTag.quasi_normal, ClassTag.hyponormal, ClassTag.ep, ClassTag.sd, ClassTag.hypo_ep)
    }
    for m in range(1, n_max + 1):
        for tag in (ClassTag.n_normal, ClassTag.n_ep, ClassTag.n_hypo_ep):
            flags[_key(tag, m)] = True
    return flags


def _nep_from(index: int, n_max: int, *, hep_too: bool = True) -> dict[str, bool]:
    flags = {_key(ClassTag.n_ep, m): m >= index for m in range(1, n_max + 1)}
    if hep_too:
        flags.update({_key(ClassTag.n_hypo_ep, m): m >= index for m in range(1, n_max + 1)})
    return flags


def _nilpotent_index(dim: int, n: Optional[int]) -> int:
    return min(max(n or 2, 2), dim)


def _shift_size(dim: int) -> int:
    size = max(3, dim)
    return size if size % 2 else size + 1


class Family(NamedTuple):
    """A population: `draw(dim, seed, n, cap)` and the profile booleans every draw must show."""

    name: str
    draw: Callable[[int, int, Optional[int], float], ComplexMatrix]
    advertised: Callable[[int, Optional[int], int], dict[str, bool]]
    min_dim: int = 1


def _draw_paper_2x2(dim, seed, n, cap):
    return unitary_conjugate(direct_sum(paper_2x2(), np.eye(dim - 2)) if dim > 2 else paper_2x2(), seed)


def _draw_rank_one(dim, seed, n, cap):
    rng = np.random.default_rng(seed)
    x = _ginibre(rng, dim, 1).ravel()
    # A third of the draws take y parallel to x, which lands in EP
    y = x * (rng.uniform(0.5, 2.0) * np.exp(2j * np.pi * rng.uniform())) if seed % 3 == 0 else _ginibre(rng, dim, 1).ravel()
    return rank_one(x, y)


def _draw_paper_shift(dim, seed, n, cap):
    rng = np.random.default_rng(seed)
    alpha = float(rng.uniform(0.5, 2.0) * rng.choice([-1.0, 1.0]))
    return paper_shift_example(alpha, _shift_size(dim))


def _draw_weighted_shift(dim, seed, n, cap):
    rng = np.random.default_rng(seed)
    # A third of the draws take constant weights, the SD shifts
    weights = np.full(dim - 1, rng.uniform(0.5, 2.0)) if seed % 3 == 0 else rng.uniform(0.5, 2.0, dim - 1)
    return weighted_shift_trunc(weights, dim)


def _draw_random_normal(dim, seed, n, cap):
    spectrum = Spectrum.real if (seed // (dim + 1)) % 2 else Spectrum.complex
    return random_normal(dim, seed, rank=seed % (dim + 1), spectrum=spectrum)


FAMILIES: dict[str, Family] = {
    family.name: family
    for family in (
        Family(
            "paper_2x2",
            _draw_paper_2x2,
            lambda dim, n, n_max: {
                _key(ClassTag.ep): True,
                _key(ClassTag.normal): False,
                _key(ClassTag.sd): False,
                **_nep_from(1, n_max),
            },
            min_dim=2,
        ),
        Family("rank_one", _draw_rank_one, lambda dim, n, n_max: {_key(ClassTag.sd): True}),
        Family(
            "paper_shift_example",
            _draw_paper_shift,
            lambda dim, n, n_max: {_key(ClassTag.ep): False, _key(ClassTag.hypo_ep): False, **_nep_from(2, n_max)},
        ),
        Family("weighted_shift_trunc", _draw_weighted_shift, lambda dim, n, n_max: _nep_from(dim, n_max)),
        Family("random_normal", _draw_random_normal, lambda dim, n, n_max: _normal_profile(n_max)),
        Family(
            "random_unitary",
            lambda dim, seed, n, cap: random_unitary(dim, seed),
            lambda dim, n, n_max: {
                **_normal_profile(n_max),
                _key(ClassTag.partial_isometry): True,
                _key(ClassTag.regular): True,
            },
        ),
        Family(
            "random_projection",
            lambda dim, seed, n, cap: random_projection(dim, seed % (dim + 1), seed),
            lambda dim, n, n_max: {**_normal_profile(n_max), _key(ClassTag.partial_isometry): True},
        ),
        Family(
            "random_partial_isometry",
            lambda dim, seed, n, cap: random_partial_isometry(dim, seed % (dim + 1), seed),
            lambda dim, n, n_max: {_key(ClassTag.partial_isometry): True},
        ),
        Family(
            "random_general",
            lambda dim, seed, n, cap: random_general(dim, seed % (dim + 1), seed, cap),
            lambda dim, n, n_max: {},
        ),
        Family(
            "non_normal_EP",
            lambda dim, seed, n, cap: non_normal_EP(dim, seed),
            lambda dim, n, n_max: {
                _key(ClassTag.ep): True,
                _key(ClassTag.hypo_ep): True,
                _key(ClassTag.normal): False,
                _key(ClassTag.sd): False,
                **_nep_from(1, n_max),
            },
            min_dim=2,
        ),
        Family(
            "nilpotent_nEP",
            lambda dim, seed, n, cap: nilpotent_nEP(dim, _nilpotent_index(dim, n), seed),
            lambda dim, n, n_max: {
                _key(ClassTag.partial_isometry): True,
                **_nep_from(_nilpotent_index(dim, n), n_max),
            },
            min_dim=2,
        ),
        Family(
            "nhep_gap",
            lambda dim, seed, n, cap: nhep_gap(dim, seed),
            lambda dim, n, n_max: {
                **_nep_from(n_max + 1, n_max, hep_too=False),
                **{_key(ClassTag.n_hypo_ep, m): m >= 2 for m in range(1, n_max + 1)},
            },
            min_dim=3,
        ),
    )
}


def get_family(name: str) -> Family:
    try:
        return FAMILIES[name]
    except KeyError:
        raise InvalidInputError(f"Unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}") from None


def draw(family: str, dim: int, seed: int, n: Optional[int] = None, condition_cap: float = 10.0) -> tuple[ComplexMatrix, SeedTrace]:
    """Draw one member of a family and the trace that replays it."""
    fam = get_family(family)
    _require_dim(dim, fam.min_dim)
    trace = SeedTrace(family=family, dim=dim, seed=seed, n=n, condition_cap=condition_cap)
    return fam.draw(dim, seed, n, condition_cap), trace


def replay(trace: SeedTrace) -> ComplexMatrix:
    return get_family(trace.family).draw(trace.dim, trace.seed, trace.n, trace.condition_cap)


def _vector(values: Optional[list[complex]], name: str) -> list[complex]:
    if not values:
        raise InvalidInputError(f"--{name} is required")
    return values


def generate(name: str, params: GenParams, seed: int) -> ComplexMatrix:
    """Build a named generator from explicit parameters (the `gen` subcommand)."""
    p = params
    rank = p.dim if p.rank is None else p.rank
    builders: dict[str, Callable[[], ComplexMatrix]] = {
        "paper_2x2": paper_2x2,
        "rank_one": lambda: rank_one(_vector(p.x, "x"), _vector(p.y, "y")),
        "paper_shift_example": lambda: paper_shift_example(p.alpha, p.size or 9),
        "weighted_shift_trunc": lambda: weighted_shift_trunc(
            p.weights if p.weights is not None else [1.0] * ((p.size or p.dim) - 1), p.size or p.dim
        ),
        "random_normal": lambda: random_normal(p.dim, seed, rank=p.rank, spectrum=p.spectrum),
        "random_unitary": lambda: random_unitary(p.dim, seed),
        "random_projection": lambda: random_projection(p.dim, rank, seed),
        "random_partial_isometry": lambda: random_partial_isometry(p.dim, rank, seed),
        "random_general": lambda: random_general(p.dim, rank, seed, p.condition_cap),
        "non_normal_EP": lambda: non_normal_EP(p.dim, seed, rank=p.rank),
        "nilpotent_nEP": lambda: nilpotent_nEP(p.dim, p.n or 2, seed),
        "nhep_gap": lambda: nhep_gap(p.dim, seed),
    }
    if name not in builders:
        raise InvalidInputError(f"Unknown generator {name!r}; known: {', '.join(sorted(builders))}")
    return builders[name]()
