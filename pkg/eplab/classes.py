"""Class-membership predicates and the operator profile.

Where the literature gives several characterizations of a class, every one of
them is evaluated and the booleans must agree; a disagreement raises
RouteDisagreementError with all residuals attached. The agreement is itself
the content of the corresponding equivalence theorems.
"""

import logging

import numpy as np

from . import linalg
from .errors import ConsistencyError, InvalidInputError, RouteDisagreementError
from .linalg import DEFAULT_TOLERANCE, Check, adjoint, mat_power, power_scale, require_square
from .schemas import ClassLabel, ClassTag, Membership, OperatorProfile, ToleranceConfig

logger = logging.getLogger(__name__)


def key(tag: ClassTag, n: int | None = None) -> str:
    return ClassLabel(tag=tag, n=n).key


def _single(check: Check, route: str) -> Membership:
    return Membership(member=check.holds, residual=check.residual, routes={route: check.residual})


def _agree(label: str, routes: dict[str, Check]) -> Membership:
    verdicts = {name: check.holds for name, check in routes.items()}
    residuals = {name: check.residual for name, check in routes.items()}
    if len(set(verdicts.values())) > 1:
        logger.warning("%s: characterizations disagree %s residuals=%s", label, verdicts, residuals)
        raise RouteDisagreementError(f"{label}: characterizations disagree {verdicts}", residuals)
    headline = next(iter(routes.values()))
    return Membership(member=headline.holds, residual=headline.residual, routes=residuals)


def _require_n(n: int) -> int:
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return n


def is_normal(t, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Membership:
    a = require_square(t)
    return _single(linalg.commutes(adjoint(a), a, tol), "[T*,T]")


def is_n_normal(t, n: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Membership:
    a = require_square(t)
    _require_n(n)
    return _single(linalg.commutes(mat_power(a, n), adjoint(a), tol), "[T^n,T*]")


def is_quasi_normal(t, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Membership:
    a = require_square(t)
    return _single(linalg.commutes(adjoint(a) @ a, a, tol), "[T*T,T]")


def is_hyponormal(t, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Membership:
    a = require_square(t)
    h = linalg.commutator(adjoint(a), a)
    psd = linalg.is_psd(h, tol)
    deficit = max(0.0, -psd.min_eigenvalue) / max(1.0, linalg.fro(h))
    return Membership(
        member=psd.holds,
        residual=max(deficit, psd.hermitian_residual),
        routes={"lambda_min": psd.min_eigenvalue, "hermitian": psd.hermitian_residual},
    )


def is_partial_isometry(t, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Membership:
    a = linalg.as_matrix(t)
    return _agree(
        "PartialIsometry",
        {
            "TT*T=T": linalg.operator_equal(a @ adjoint(a) @ a, a, tol),
            "T^†=T*": linalg.operator_equal(linalg.pinv(a, tol).pinv, adjoint(a), tol),
        },
    )


def is_EP(t, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> Membership:
    a = require_square(t)
    p = linalg.pinv(a, tol, scale=scale).pinv
    return _agree(
        "EP",
        {
            "P_R(T)=P_R(T*)": linalg.operator_equal(
                linalg.range_projector(a, tol, scale=scale).matrix,
                linalg.range_projector(adjoint(a), tol, scale=scale).matrix,
                tol,
            ),
            "[T^†,T]=0": linalg.commutes(p, a, tol),
        },
    )


def is_SD(t, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> Membership:
    a = require_square(t)
    p = linalg.pinv(a, tol, scale=scale).pinv
    return _agree(
        "SD",
        {
            "[T*,T^†]=0": linalg.commutes(adjoint(a), p, tol),
            "[T,ω(T)]=0": linalg.commutes(a, adjoint(p), tol),
        },
    )


def is_hypo_EP(t, tol: ToleranceConfig = DEFAULT_TOLERANCE, *, scale: float = 0.0) -> Membership:
    a = require_square(t)
    p = linalg.pinv(a, tol, scale=scale).pinv
    h = p @ a - a @ p
    psd = linalg.is_psd(h, tol)
    psd_residual = max(0.0, -psd.min_eigenvalue) / max(1.0, linalg.fro(h))
    return _agree(
        "HypoEP",
        {
            "[T^†,T]>=0": Check(psd.holds, max(psd_residual, psd.hermitian_residual)),
            "R(T)⊆R(T*)": linalg.range_included(a, adjoint(a), tol, scale=scale),
            "T^†=T^†²T": linalg.operator_equal(p, p @ p @ a, tol),
        },
    )


def is_n_EP(t, n: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Membership:
    a = require_square(t)
    _require_n(n)
    p = linalg.pinv(a, tol).pinv
    tn = mat_power(a, n)
    forward = linalg.range_included(tn, adjoint(a), tol)
    backward = linalg.range_included(adjoint(tn), a, tol)
    return _agree(
        f"NEP({n})",
        {
            "T^nT^†=T^†T^n": linalg.operator_equal(tn @ p, p @ tn, tol),
            "R(T^n)⊆R(T*),R(T*^n)⊆R(T)": Check(
                forward.holds and backward.holds, max(forward.residual, backward.residual)
            ),
        },
    )


def is_n_hypo_EP(t, n: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Membership:
    a = require_square(t)
    _require_n(n)
    p = linalg.pinv(a, tol).pinv
    tn = mat_power(a, n)
    return _agree(
        f"NHypoEP({n})",
        {
            "R(T^n)⊆R(T*)": linalg.range_included(tn, adjoint(a), tol),
            "T^n=T^†T^(n+1)": linalg.operator_equal(tn, p @ tn @ a, tol),
        },
    )


def _power_ranks(a: np.ndarray, tol: ToleranceConfig) -> list[int]:
    dim = a.shape[0]
    return [linalg.numerical_rank(mat_power(a, k), tol, scale=power_scale(a, k)) for k in range(dim + 2)]


def _first_stable(values: list[int]) -> int:
    for k, (current, following) in enumerate(zip(values, values[1:])):
        if current == following:
            return k
    return len(values) - 1


def ascent(t, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> int:
    """Smallest k with N(T^k) = N(T^(k+1)), read off the nullities of T^k."""
    a = require_square(t)
    dim = a.shape[0]
    return _first_stable([dim - r for r in _power_ranks(a, tol)])


def descent(t, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> int:
    """Smallest k with R(T^k) = R(T^(k+1)), read off the ranks of T^k."""
    a = require_square(t)
    return _first_stable(_power_ranks(a, tol))


def is_regular_finite(t, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> Membership:
    """N(T) ⊆ R(T^k) for k = 0..dim; closed range is automatic here."""
    a = require_square(t)
    dim = a.shape[0]
    kernel = linalg.kernel_projector(a, tol).matrix
    worst = 0.0
    for k in range(dim + 1):
        image = linalg.range_projector(mat_power(a, k), tol, scale=power_scale(a, k)).matrix
        worst = max(worst, linalg.fro((np.eye(dim) - image) @ kernel))
    return Membership(member=worst <= tol.residual_tol, residual=worst, routes={"N(T)⊆R(T^k)": worst})


def classify(t, n_max: int = 4, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> OperatorProfile:
    """Evaluate every predicate and enforce the profile invariants."""
    a = require_square(t)
    _require_n(n_max)
    memberships = {
        key(ClassTag.normal): is_normal(a, tol),
        key(ClassTag.quasi_normal): is_quasi_normal(a, tol),
        key(ClassTag.hyponormal): is_hyponormal(a, tol),
        key(ClassTag.partial_isometry): is_partial_isometry(a, tol),
        key(ClassTag.ep): is_EP(a, tol),
        key(ClassTag.sd): is_SD(a, tol),
        key(ClassTag.hypo_ep): is_hypo_EP(a, tol),
        key(ClassTag.regular): is_regular_finite(a, tol),
    }
    adjoint_nhep = {}
    for n in range(1, n_max + 1):
        memberships[key(ClassTag.n_normal, n)] = is_n_normal(a, n, tol)
        memberships[key(ClassTag.n_ep, n)] = is_n_EP(a, n, tol)
        memberships[key(ClassTag.n_hypo_ep, n)] = is_n_hypo_EP(a, n, tol)
        adjoint_nhep[n] = is_n_hypo_EP(adjoint(a), n, tol)
    profile = OperatorProfile(
        dim=a.shape[0],
        n_max=n_max,
        memberships=dict(sorted(memberships.items())),
        ascent=ascent(a, tol),
        descent=descent(a, tol),
    )
    _check_invariants(profile, adjoint_nhep)
    return profile


def _check_invariants(profile: OperatorProfile, adjoint_nhep: dict[int, Membership]) -> None:
    m = profile.memberships
    violations = []
    for n in range(1, profile.n_max):
        for tag in (ClassTag.n_ep, ClassTag.n_hypo_ep):
            if m[key(tag, n)].member and not m[key(tag, n + 1)].member:
                violations.append((f"{key(tag, n)} without {key(tag, n + 1)}", m[key(tag, n + 1)].residual))
    for n in range(1, profile.n_max + 1):
        pair = m[key(ClassTag.n_hypo_ep, n)].member and adjoint_nhep[n].member
        if m[key(ClassTag.n_ep, n)].member != pair:
            violations.append((f"{key(ClassTag.n_ep, n)} vs {key(ClassTag.n_hypo_ep, n)} of T and T*", m[key(ClassTag.n_ep, n)].residual))
    if m[key(ClassTag.normal)].member and not (m[key(ClassTag.ep)].member and m[key(ClassTag.sd)].member):
        violations.append(("Normal outside EP∩SD", max(m[key(ClassTag.ep)].residual, m[key(ClassTag.sd)].residual)))
    if m[key(ClassTag.ep)].member != m[key(ClassTag.n_ep, 1)].member:
        violations.append(("EP vs NEP(1)", m[key(ClassTag.ep)].residual))
    if m[key(ClassTag.hypo_ep)].member != m[key(ClassTag.n_hypo_ep, 1)].member:
        violations.append(("HypoEP vs NHypoEP(1)", m[key(ClassTag.hypo_ep)].residual))
    if violations:
        raise ConsistencyError(
            "Profile invariants violated: " + "; ".join(name for name, _ in violations),
            {name: residual for name, residual in violations},
        )
