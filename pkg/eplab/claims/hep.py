"""hypo-EP and n-hypo-EP operators."""

import math

from .. import classes, linalg
from ..linalg import Check, adjoint, mat_power, power_scale
from ..suite import Case, ClaimRouter, Outcome, agreement, as_check, check_all, conditional_agreement, implication

router = ClaimRouter(tags=["hep"])

HEP_POWERS = range(1, 5)


def _douglas(a, b, tol) -> tuple[Check, float]:
    """Finiteness of the minimal majorization constant, with the constant itself."""
    c = linalg.douglas_constant(a, b, tol)
    return Check(math.isfinite(c), linalg.range_included(a, b, tol).residual), c


@router.claim(
    "HEP_equivalences",
    description="Positivity of [T^†,T], T^† = T^†²T, T^†T = T^†^nT^n, R(T) ⊂ R(T*) and the majorization all agree",
    anchor="T ∈ (HEP) iff T^† = T^†²T iff T^†T = T^†^nT^n for every n ≥ 1 iff ||T*x|| ≤ c||Tx|| for some c ≥ 0",
    families=(
        "non_normal_EP",
        "random_normal",
        "random_general",
        "nilpotent_nEP",
        "paper_shift_example",
        "rank_one",
        "nhep_gap",
    ),
)
def HEP_equivalences(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    p = linalg.pinv(t, tol).pinv
    h = p @ t - t @ p
    psd = linalg.is_psd(h, tol)
    powers = check_all(
        linalg.operator_equal(p @ t, mat_power(p, n) @ mat_power(t, n), tol) for n in HEP_POWERS
    )
    majorized, c = _douglas(t, adjoint(t), tol)
    return agreement(
        {
            "[T^†,T]>=0": Check(psd.holds, max(0.0, -psd.min_eigenvalue) / max(1.0, linalg.fro(h))),
            "T^†=T^†²T": linalg.operator_equal(p, p @ p @ t, tol),
            "T^†T=T^†^nT^n": powers,
            "R(T)⊆R(T*)": linalg.range_included(t, adjoint(t), tol),
            "douglas(T,T*)<inf": majorized,
        },
        {"c": c},
    )


@router.claim(
    "HEP_comm_iff_EP",
    description="A hypo-EP operator is EP exactly when TT^† commutes with T + T*",
    anchor="T ∈ (HEP): [TT^†, T + T*] = 0 iff T ∈ (EP)",
    families=("non_normal_EP", "random_normal", "paper_2x2", "random_unitary", "random_general", "nhep_gap"),
)
def HEP_comm_iff_EP(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    hep = classes.is_hypo_EP(t, tol)
    p = linalg.pinv(t, tol).pinv
    return conditional_agreement(
        hep.member,
        {
            "[TT^†,T+T*]=0": linalg.commutes(t @ p, t + adjoint(t), tol),
            "EP": as_check(classes.is_EP(t, tol)),
        },
        {"HEP": hep.residual},
    )


@router.claim(
    "comm_implies_HEP",
    description="If T^†T commutes with T + T* then T is hypo-EP",
    anchor="[T^†T, T + T*] = 0 implies T ∈ (HEP)",
    families=("non_normal_EP", "random_normal", "paper_2x2", "random_general", "nilpotent_nEP"),
)
def comm_implies_HEP(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    p = linalg.pinv(t, tol).pinv
    hypothesis = linalg.commutes(p @ t, t + adjoint(t), tol)
    return implication(hypothesis.holds, as_check(classes.is_hypo_EP(t, tol)), {"[T^†T,T+T*]": hypothesis.residual})


NHEP_FAMILIES = (
    "nhep_gap",
    "nilpotent_nEP",
    "paper_shift_example",
    "non_normal_EP",
    "random_general",
    "weighted_shift_trunc",
)


@router.claim(
    "caractnHEP",
    description="Six characterizations of n-hypo-EP agree",
    anchor="T ∈ (n-HEP) iff T^n = T^†T^(n+1) iff T^nT^† = T^†T^(n+1)T^† iff T*^n = T*^nT^†T "
    "iff ||T*^nx|| ≤ c||T*x|| iff ||T*^nx|| ≤ c||ω(T)x||",
    families=NHEP_FAMILIES,
    n_sweep=True,
)
def caractnHEP(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    p = linalg.pinv(t, tol).pinv
    tn = mat_power(t, n)
    tn_star = adjoint(tn)
    by_adjoint, c_adjoint = _douglas(tn, adjoint(t), tol)
    by_dual, c_dual = _douglas(tn, p, tol)
    return agreement(
        {
            "R(T^n)⊆R(T*)": linalg.range_included(tn, adjoint(t), tol),
            "T^n=T^†T^(n+1)": linalg.operator_equal(tn, p @ tn @ t, tol),
            "T^nT^†=T^†T^(n+1)T^†": linalg.operator_equal(tn @ p, p @ tn @ t @ p, tol),
            "T*^n=T*^nT^†T": linalg.operator_equal(tn_star, tn_star @ p @ t, tol),
            "douglas(T^n,T*)<inf": by_adjoint,
            "douglas(T^n,T^†)<inf": by_dual,
        },
        {"c(T*)": c_adjoint, "c(ω(T))": c_dual},
    )


@router.claim(
    "TnHEP_implies_nHEP",
    description="If T^n is hypo-EP then T is n-hypo-EP",
    anchor="T^n ∈ (HEP) implies T ∈ (n-HEP)",
    families=NHEP_FAMILIES + ("random_normal",),
    n_sweep=True,
)
def TnHEP_implies_nHEP(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    power_hep = classes.is_hypo_EP(mat_power(t, n), tol, scale=power_scale(t, n))
    return implication(
        power_hep.member, as_check(classes.is_n_hypo_EP(t, n, tol)), {"HEP(T^n)": power_hep.residual}
    )


@router.claim(
    "comm_implies_nHEP",
    description="Either commutator condition with T^†T makes T n-hypo-EP",
    anchor="[T^†T, T^n + T^†] = 0 or [T^†T, T^n + T*] = 0 implies T ∈ (n-HEP)",
    families=("non_normal_EP", "random_normal", "nilpotent_nEP", "nhep_gap", "random_general", "paper_shift_example"),
    n_sweep=True,
)
def comm_implies_nHEP(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    p = linalg.pinv(t, tol).pinv
    tn = mat_power(t, n)
    with_pinv = linalg.commutes(p @ t, tn + p, tol)
    with_adjoint = linalg.commutes(p @ t, tn + adjoint(t), tol)
    return implication(
        with_pinv.holds or with_adjoint.holds,
        as_check(classes.is_n_hypo_EP(t, n, tol)),
        {"[T^†T,T^n+T^†]": with_pinv.residual, "[T^†T,T^n+T*]": with_adjoint.residual},
    )


@router.claim(
    "nHEP_comm_implies_nEP",
    description="An n-hypo-EP operator satisfying one of three commutator conditions is n-EP",
    anchor="T ∈ (n-HEP) and [TT^†, T^n + T^†] = 0, [TT^†, T^n + T*] = 0 or [T, T^nT^†] = 0 implies T ∈ (n-EP)",
    families=("nilpotent_nEP", "non_normal_EP", "nhep_gap", "paper_shift_example", "random_normal", "random_general"),
    n_sweep=True,
)
def nHEP_comm_implies_nEP(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    nhep = classes.is_n_hypo_EP(t, n, tol)
    p = linalg.pinv(t, tol).pinv
    tn = mat_power(t, n)
    commutators = {
        "[TT^†,T^n+T^†]": linalg.commutes(t @ p, tn + p, tol),
        "[TT^†,T^n+T*]": linalg.commutes(t @ p, tn + adjoint(t), tol),
        "[T,T^nT^†]": linalg.commutes(t, tn @ p, tol),
    }
    hypothesis = nhep.member and any(c.holds for c in commutators.values())
    residuals = {"n-HEP": nhep.residual} | {name: c.residual for name, c in commutators.items()}
    return implication(hypothesis, as_check(classes.is_n_EP(t, n, tol)), residuals)


@router.claim(
    "nEP_iff_nHEP_pair",
    description="T is n-EP exactly when T and T* are both n-hypo-EP",
    anchor="T and T* are simultaneously in (n-HEP) iff T ∈ (n-EP)",
    families=NHEP_FAMILIES + ("paper_2x2", "rank_one"),
    n_sweep=True,
)
def nEP_iff_nHEP_pair(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    own = classes.is_n_hypo_EP(t, n, tol)
    dual = classes.is_n_hypo_EP(adjoint(t), n, tol)
    return agreement(
        {
            "n-EP(T)": as_check(classes.is_n_EP(t, n, tol)),
            "n-HEP(T)∧n-HEP(T*)": Check(own.member and dual.member, max(own.residual, dual.residual)),
        }
    )


@router.claim(
    "nHEP_chain",
    description="n-hypo-EP grows with n and contains n-EP",
    anchor="(n-HEP) ⊂ ((n+1)-HEP) and (n-EP) ⊂ (n-HEP)",
    families=NHEP_FAMILIES,
    n_sweep=True,
)
def nHEP_chain(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    nhep = classes.is_n_hypo_EP(t, n, tol)
    nep = classes.is_n_EP(t, n, tol)
    conclusions = []
    if nhep.member:
        conclusions.append(as_check(classes.is_n_hypo_EP(t, n + 1, tol)))
    if nep.member:
        conclusions.append(as_check(nhep))
    return implication(nhep.member or nep.member, check_all(conclusions), {"n-HEP": nhep.residual, "n-EP": nep.residual})


@router.claim(
    "nHEP_regular_left_invertible",
    description="A regular n-hypo-EP operator has trivial kernel",
    anchor="T ∈ (n-HEP) regular implies N(T) = {0}",
    families=("random_unitary", "non_normal_EP", "paper_2x2", "random_normal", "nhep_gap", "random_general"),
    n_sweep=True,
)
def nHEP_regular_left_invertible(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    nhep = classes.is_n_hypo_EP(t, n, tol)
    regular = classes.is_regular_finite(t, tol)
    nullity = t.shape[1] - linalg.numerical_rank(t, tol)
    return implication(
        nhep.member and regular.member,
        Check(nullity == 0, float(nullity)),
        {"n-HEP": nhep.residual, "regular": regular.residual},
    )
