"""Moore-Penrose identities, the Cauchy dual and reverse order laws."""

import numpy as np

from .. import classes, linalg
from ..linalg import Check, adjoint, mat_power, power_scale
from ..suite import Case, ClaimRouter, Outcome, agreement, check_all, implication

router = ClaimRouter(tags=["moore-penrose"])

# Tikhonov sweep for the limit formula; strictly decreasing
LIMIT_SWEEP = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
LIMIT_ROUNDING = 1e-6

GENERAL_FAMILIES = (
    "random_general",
    "random_normal",
    "random_partial_isometry",
    "rank_one",
    "paper_shift_example",
    "nilpotent_nEP",
    "non_normal_EP",
)


def _limit_check(t, tol) -> Check:
    """The regularized inverse approaches the pseudoinverse within the first-order bound."""
    errors = linalg.limit_pinv_errors(t, LIMIT_SWEEP, tol)
    inverse_norm = max(1.0, linalg.spectral_norm(linalg.pinv(t, tol).pinv))
    bound = 2 * LIMIT_SWEEP[-1] * inverse_norm**3 + LIMIT_ROUNDING * inverse_norm
    converging = errors[-1] <= errors[0] + 1e-12
    return Check(converging and errors[-1] <= bound, errors[-1] / bound)


@router.claim(
    "mp_identities",
    description="Moore-Penrose equations, range projectors, T*TT^† = T^†TT* = T*, partial isometries and the limit formula",
    anchor="TT^† = P_R(T), T^†T = P_R(T^†), R(T^†) = R(T*), N(T^†) = N(T*), T*TT^† = T^†TT* = T*, "
    "T is a partial isometry iff T* = T^†, T^† = lim (T*T + sI)^-1 T*",
    families=GENERAL_FAMILIES,
)
def mp_identities(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    p = linalg.pinv(t, tol).pinv
    mp = linalg.mp_residuals(t, p, tol)
    checks = {
        "moore_penrose": Check(all(r <= tol.residual_tol for r in mp.values()), max(mp.values())),
        "TT^†=P_R(T)": linalg.operator_equal(t @ p, linalg.range_projector(t, tol).matrix, tol),
        "T^†T=P_R(T^†)": linalg.operator_equal(p @ t, linalg.range_projector(p, tol).matrix, tol),
        "R(T^†)=R(T*)": linalg.operator_equal(
            linalg.range_projector(p, tol).matrix, linalg.range_projector(adjoint(t), tol).matrix, tol
        ),
        "N(T^†)=N(T*)": linalg.operator_equal(
            linalg.kernel_projector(p, tol).matrix, linalg.kernel_projector(adjoint(t), tol).matrix, tol
        ),
        "T*TT^†=T*": linalg.operator_equal(adjoint(t) @ t @ p, adjoint(t), tol),
        "T^†TT*=T*": linalg.operator_equal(p @ t @ adjoint(t), adjoint(t), tol),
        "limit": _limit_check(t, tol),
    }
    # raises when TT*T = T and T^† = T* disagree
    isometric = classes.is_partial_isometry(t, tol)
    residuals = {name: c.residual for name, c in checks.items()} | mp | {"partial_isometry": isometric.residual}
    return implication(True, check_all(checks.values()), residuals)


@router.claim(
    "mp_axioms_ill_conditioned",
    description="The four Moore-Penrose equations hold for pinv on draws with condition number up to condition_cap",
    anchor="TXT = T, XTX = X, (TX)* = TX, (XT)* = XT",
    families=("random_general",),
    wide_conditioning=True,
)
def mp_axioms_ill_conditioned(case: Case) -> Outcome:
    mp = linalg.mp_residuals(case.t, linalg.pinv(case.t, case.tol).pinv, case.tol)
    worst = max(mp.values())
    return implication(True, Check(worst <= case.tol.residual_tol, worst), mp)


@router.claim(
    "cauchy_dual_identities",
    description="Closed forms of the Cauchy dual agree; ω(T) shares kernel and range with T; ω(T) = T iff partial isometry",
    anchor="ω(T) = T*^† = T(T*T + P_N(T))^-1 = (TT* + P_N(T*))^-1 T, N(ω(T)) = N(T), R(ω(T)) = R(T)",
    families=(
        "random_general",
        "random_partial_isometry",
        "random_projection",
        "rank_one",
        "nilpotent_nEP",
        "paper_shift_example",
    ),
)
def cauchy_dual_identities(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    forms = linalg.cauchy_dual_forms(t, tol)
    omega = forms["(T^†)*"]
    checks = {name: linalg.operator_equal(form, omega, tol) for name, form in forms.items() if name != "(T^†)*"}
    checks["N(ω(T))=N(T)"] = linalg.operator_equal(
        linalg.kernel_projector(omega, tol).matrix, linalg.kernel_projector(t, tol).matrix, tol
    )
    checks["R(ω(T))=R(T)"] = linalg.operator_equal(
        linalg.range_projector(omega, tol).matrix, linalg.range_projector(t, tol).matrix, tol
    )
    fixed = linalg.operator_equal(omega, t, tol)
    isometric = classes.is_partial_isometry(t, tol)
    checks["ω(T)=T iff partial isometry"] = Check(fixed.holds == isometric.member, 0.0)
    return implication(True, check_all(checks.values()), {name: c.residual for name, c in checks.items()})


@router.claim(
    "unitary_pinv",
    description="The Moore-Penrose inverse commutes with unitary conjugation",
    anchor="(U*TU)^† = U*T^†U for unitary U",
    families=("random_general", "non_normal_EP", "paper_shift_example", "nilpotent_nEP"),
    partners=("unitary",),
)
def unitary_pinv(case: Case) -> Outcome:
    t, u, tol = case.t, case.s, case.tol
    conjugated = linalg.pinv(adjoint(u) @ t @ u, tol).pinv
    return implication(True, linalg.operator_equal(conjugated, adjoint(u) @ linalg.pinv(t, tol).pinv @ u, tol))


@router.claim(
    "lemma_ranges",
    description="Right multiplication by T^† or T* does not shrink the range of T^n",
    anchor="R(A^n A^†) = R(A^n) = R(A^n A*)",
    families=(
        "random_general",
        "random_normal",
        "non_normal_EP",
        "nilpotent_nEP",
        "paper_shift_example",
        "nhep_gap",
        "weighted_shift_trunc",
    ),
    n_sweep=True,
)
def lemma_ranges(case: Case) -> Outcome:
    a, n, tol = case.t, case.n, case.tol
    p = linalg.pinv(a, tol).pinv
    an = mat_power(a, n)
    scale_n = power_scale(a, n)
    base = linalg.range_projector(an, tol, scale=scale_n).matrix
    with_pinv = linalg.range_projector(an @ p, tol, scale=linalg.spectral_norm(a) ** n * linalg.spectral_norm(p)).matrix
    with_adjoint = linalg.range_projector(an @ adjoint(a), tol, scale=power_scale(a, n + 1)).matrix
    checks = {
        "R(A^nA^†)=R(A^n)": linalg.operator_equal(with_pinv, base, tol),
        "R(A^nA*)=R(A^n)": linalg.operator_equal(with_adjoint, base, tol),
    }
    return implication(True, check_all(checks.values()), {name: c.residual for name, c in checks.items()})


def _order_law_conditions(s, t, tol) -> Check:
    """S*S leaves N(T*) invariant and TT* leaves N(S) invariant."""
    return check_all(
        [
            linalg.subspace_invariant(adjoint(s) @ s, adjoint(t), tol),
            linalg.subspace_invariant(t @ adjoint(t), s, tol),
        ]
    )


REVERSE_ORDER_FAMILIES = ("random_general", "random_normal", "non_normal_EP")
REVERSE_ORDER_PARTNERS = ("independent", "adjoint", "unitary", "polynomial")


@router.claim(
    "reverse_order_law",
    description="Reverse order law for the Moore-Penrose inverse versus the kernel-invariance conditions",
    anchor="(ST)^† = T^†S^† iff S*S(N(T*)) ⊂ N(T*) and TT*(N(S)) ⊂ N(S)",
    families=REVERSE_ORDER_FAMILIES,
    partners=REVERSE_ORDER_PARTNERS,
)
def reverse_order_law(case: Case) -> Outcome:
    s, t, tol = case.s, case.t, case.tol
    product_scale = linalg.product_scale(s, t)
    law = linalg.operator_equal(
        linalg.pinv(s @ t, tol, scale=product_scale).pinv,
        linalg.pinv(t, tol).pinv @ linalg.pinv(s, tol).pinv,
        tol,
    )
    return agreement({"(ST)^†=T^†S^†": law, "kernel invariance": _order_law_conditions(s, t, tol)})


@router.claim(
    "omega_product",
    description="The Cauchy dual of a product factors exactly under the kernel-invariance conditions",
    anchor="ω(ST) = ω(S)ω(T) iff S*S(N(T*)) ⊂ N(T*) and TT*(N(S)) ⊂ N(S)",
    families=REVERSE_ORDER_FAMILIES,
    partners=REVERSE_ORDER_PARTNERS,
)
def omega_product(case: Case) -> Outcome:
    s, t, tol = case.s, case.t, case.tol
    product_scale = linalg.product_scale(s, t)
    law = linalg.operator_equal(
        linalg.cauchy_dual(s @ t, tol, scale=product_scale),
        linalg.cauchy_dual(s, tol) @ linalg.cauchy_dual(t, tol),
        tol,
    )
    return agreement({"ω(ST)=ω(S)ω(T)": law, "kernel invariance": _order_law_conditions(s, t, tol)})


@router.claim(
    "omega_power",
    description="Kernel invariance of T*T and TT* up to order n-1 makes the Cauchy dual multiplicative on powers",
    anchor="T*T(N(T*^i)) ⊂ N(T*^i) and TT*(N(T^i)) ⊂ N(T^i) for i < n imply ω(T^i) = ω(T)^i for i ≤ n",
    families=(
        "non_normal_EP",
        "random_normal",
        "nilpotent_nEP",
        "paper_shift_example",
        "weighted_shift_trunc",
        "random_general",
    ),
    n_sweep=True,
    n_min=2,
)
def omega_power(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    gram, cogram = adjoint(t) @ t, t @ adjoint(t)
    hypotheses = []
    for i in range(1, n):
        ti = mat_power(t, i)
        scale = power_scale(t, i)
        hypotheses.append(linalg.subspace_invariant(gram, adjoint(ti), tol, scale=scale))
        hypotheses.append(linalg.subspace_invariant(cogram, ti, tol, scale=scale))
    hypothesis = check_all(hypotheses)
    omega = linalg.cauchy_dual(t, tol)
    conclusions = [
        linalg.operator_equal(
            linalg.cauchy_dual(mat_power(t, i), tol, scale=power_scale(t, i)), np.linalg.matrix_power(omega, i), tol
        )
        for i in range(1, n + 1)
    ]
    return implication(hypothesis.holds, check_all(conclusions), {"hypothesis": hypothesis.residual})

