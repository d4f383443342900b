"""EP, SD, normal and quasi-normal operators."""

import numpy as np

from .. import classes, generators, linalg
from ..linalg import Check, adjoint, mat_power, power_scale
from ..suite import Case, ClaimRouter, Outcome, agreement, as_check, check_all, conditional_agreement, implication, invertible

router = ClaimRouter(tags=["ep-sd"])


@router.claim(
    "sd_unitary_invariance",
    description="SD is preserved by unitary equivalence",
    anchor="S = U*TU: T ∈ (SD) iff S ∈ (SD)",
    families=("random_normal", "non_normal_EP", "rank_one", "weighted_shift_trunc", "paper_2x2", "random_general"),
    partners=("unitary",),
)
def sd_unitary_invariance(case: Case) -> Outcome:
    t, u, tol = case.t, case.s, case.tol
    return agreement(
        {
            "SD(T)": as_check(classes.is_SD(t, tol)),
            "SD(U*TU)": as_check(classes.is_SD(adjoint(u) @ t @ u, tol)),
        }
    )


@router.claim(
    "sd_weighted_shift",
    description="A truncated weighted shift is SD exactly when its weights are constant; its Cauchy dual has weights 1/α_k",
    anchor="S_α is SD iff α_(k+1)/α_k = α_k/α_(k+1) for every k, i.e. α_k = α_0; ω(S_α)e_k = (1/α_k)e_(k+1)",
    families=("weighted_shift_trunc",),
)
def sd_weighted_shift(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    weights = np.diagonal(t, -1).real
    ratios = weights[1:] / weights[:-1]
    pattern_defect = float(np.max(np.abs(ratios - 1 / ratios), initial=0.0))
    pattern = Check(pattern_defect <= tol.residual_tol, pattern_defect)
    sd = as_check(classes.is_SD(t, tol))
    constant = generators.weighted_shift_trunc(np.full(weights.size, weights[0] if weights.size else 1.0), t.shape[0])
    omega = linalg.operator_equal(linalg.cauchy_dual(t, tol), generators.weighted_shift_trunc(1 / weights, t.shape[0]), tol)
    checks = {
        "SD iff constant weights": Check(sd.holds == pattern.holds, 0.0),
        "SD(constant weights)": as_check(classes.is_SD(constant, tol)),
        "ω(S_α)e_k=(1/α_k)e_(k+1)": omega,
    }
    residuals = {"SD": sd.residual, "pattern": pattern.residual} | {name: c.residual for name, c in checks.items()}
    return implication(True, check_all(checks.values()), residuals)


@router.claim(
    "normal_iff_EP_SD",
    description="Normal operators are exactly the EP operators that are SD",
    anchor="T is normal iff T ∈ (EP) ∩ (SD)",
    families=(
        "random_normal",
        "non_normal_EP",
        "random_general",
        "paper_2x2",
        "rank_one",
        "random_projection",
        "random_unitary",
    ),
)
def normal_iff_EP_SD(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    ep, sd = classes.is_EP(t, tol), classes.is_SD(t, tol)
    return agreement(
        {
            "Normal": as_check(classes.is_normal(t, tol)),
            "EP∧SD": Check(ep.member and sd.member, max(ep.residual, sd.residual)),
        }
    )


QUASI_NORMAL_FAMILIES = ("random_normal", "random_unitary", "random_projection", "random_general", "non_normal_EP")


@router.claim(
    "quasinormal_implies_SD",
    description="Quasi-normal operators are SD",
    anchor="Every quasi-normal operator with closed range is SD",
    families=QUASI_NORMAL_FAMILIES,
)
def quasinormal_implies_SD(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    quasi = classes.is_quasi_normal(t, tol)
    return implication(quasi.member, as_check(classes.is_SD(t, tol)), {"quasi_normal": quasi.residual})


@router.claim(
    "quasinormal_powers_SD",
    description="Powers of a quasi-normal operator are SD",
    anchor="If T is quasi-normal with closed range then T^n is SD for every n ≥ 0",
    families=QUASI_NORMAL_FAMILIES,
    n_sweep=True,
)
def quasinormal_powers_SD(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    quasi = classes.is_quasi_normal(t, tol)
    power_sd = classes.is_SD(mat_power(t, n), tol, scale=power_scale(t, n))
    return implication(quasi.member, as_check(power_sd), {"quasi_normal": quasi.residual})


@router.claim(
    "invertible_SD_iff_normal",
    description="An invertible operator is SD exactly when it is normal",
    anchor="An invertible operator is SD if and only if it is normal",
    families=("random_unitary", "paper_2x2", "random_normal", "non_normal_EP", "random_general"),
)
def invertible_SD_iff_normal(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    return conditional_agreement(
        invertible(t, tol),
        {"SD": as_check(classes.is_SD(t, tol)), "Normal": as_check(classes.is_normal(t, tol))},
    )


@router.claim(
    "ep_symmetries",
    description="EP is shared by T, T* and T^†, and equals commutation with T^†",
    anchor="T ∈ (EP) iff T* ∈ (EP) iff T^† ∈ (EP) iff [T^†, T] = 0 iff TT^†²T = T^†T and T^†T²T^† = TT^†",
    families=("non_normal_EP", "random_general", "paper_shift_example", "nilpotent_nEP", "paper_2x2", "rank_one"),
)
def ep_symmetries(case: Case) -> Outcome:
    t, tol = case.t, case.tol
    p = linalg.pinv(t, tol).pinv
    projections = check_all(
        [
            linalg.operator_equal(t @ p @ p @ t, p @ t, tol),
            linalg.operator_equal(p @ t @ t @ p, t @ p, tol),
        ]
    )
    return agreement(
        {
            "EP(T)": as_check(classes.is_EP(t, tol)),
            "EP(T*)": as_check(classes.is_EP(adjoint(t), tol)),
            "EP(T^†)": as_check(classes.is_EP(p, tol)),
            "[T^†,T]=0": linalg.commutes(p, t, tol),
            "TT^†²T=T^†T,T^†T²T^†=TT^†": projections,
        }
    )


@router.claim(
    "EP_omega_powers",
    description="The Cauchy dual of an EP operator is multiplicative on powers",
    anchor="When T is EP, ω(T^n) = ω(T)^n for every n",
    families=("non_normal_EP", "random_normal", "paper_2x2", "rank_one", "random_general"),
    n_sweep=True,
)
def EP_omega_powers(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    ep = classes.is_EP(t, tol)
    omega_n = linalg.cauchy_dual(mat_power(t, n), tol, scale=power_scale(t, n))
    conclusion = linalg.operator_equal(omega_n, mat_power(linalg.cauchy_dual(t, tol), n), tol)
    return implication(ep.member, conclusion, {"EP": ep.residual})


@router.claim(
    "profile_unitary_invariance",
    description="Every class membership, the ascent and the descent survive unitary conjugation",
    anchor="The classes are closed under unitary equivalence",
    families=("non_normal_EP", "paper_shift_example", "nilpotent_nEP", "nhep_gap", "random_general", "random_normal"),
    partners=("unitary",),
)
def profile_unitary_invariance(case: Case) -> Outcome:
    t, u, tol, n_max = case.t, case.s, case.tol, case.n_max
    before = classes.classify(t, n_max, tol)
    after = classes.classify(adjoint(u) @ t @ u, n_max, tol)
    mismatched = [key for key, member in before.booleans().items() if after.booleans()[key] != member]
    same_chains = (before.ascent, before.descent) == (after.ascent, after.descent)
    residuals = {f"mismatch:{key}": after.memberships[key].residual for key in mismatched}
    return implication(True, Check(not mismatched and same_chains, float(len(mismatched))), residuals)
