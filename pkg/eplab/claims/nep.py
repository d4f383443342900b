"""n-EP operators: range characterizations, powers, chains and spectral bounds."""

from .. import classes, generators, linalg
from ..linalg import Check, adjoint, mat_power, power_scale
from ..suite import Case, ClaimRouter, Outcome, agreement, as_check, check_all, conditional_agreement, implication, invertible

router = ClaimRouter(tags=["n-ep"])

NEP_FAMILIES = (
    "random_general",
    "nilpotent_nEP",
    "paper_shift_example",
    "paper_2x2",
    "nhep_gap",
    "non_normal_EP",
    "weighted_shift_trunc",
    "random_partial_isometry",
)


def _nep(t, n, tol) -> Check:
    return as_check(classes.is_n_EP(t, n, tol))


@router.claim(
    "equivEP",
    description="n-EP by definition agrees with the two range inclusions",
    anchor="T ∈ (n-EP) iff R(T^n) ⊂ R(T*) and R(T*^n) ⊂ R(T)",
    families=NEP_FAMILIES,
    n_sweep=True,
)
def equivEP(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    p = linalg.pinv(t, tol).pinv
    tn = mat_power(t, n)
    forward = linalg.range_included(tn, adjoint(t), tol)
    backward = linalg.range_included(adjoint(tn), t, tol)
    return agreement(
        {
            "T^nT^†=T^†T^n": linalg.operator_equal(tn @ p, p @ tn, tol),
            "R(T^n)⊆R(T*),R(T*^n)⊆R(T)": check_all([forward, backward]),
        },
        {"R(T^n)⊆R(T*)": forward.residual, "R(T*^n)⊆R(T)": backward.residual},
    )


@router.claim(
    "nEP_chain",
    description="n-EP operators are (n+1)-EP",
    anchor="(n-EP) ⊂ ((n+1)-EP)",
    families=NEP_FAMILIES,
    n_sweep=True,
)
def nEP_chain(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    current = classes.is_n_EP(t, n, tol)
    return implication(current.member, _nep(t, n + 1, tol), {"n-EP": current.residual})


@router.claim(
    "Tn_EP_implies_nEP",
    description="If T^n is EP then T is n-EP",
    anchor="If T^n ∈ (EP) then T ∈ (n-EP)",
    families=("nilpotent_nEP", "paper_shift_example", "nhep_gap", "non_normal_EP", "random_general", "paper_2x2"),
    n_sweep=True,
)
def Tn_EP_implies_nEP(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    power_ep = classes.is_EP(mat_power(t, n), tol, scale=power_scale(t, n))
    return implication(power_ep.member, _nep(t, n, tol), {"EP(T^n)": power_ep.residual})


@router.claim(
    "SD_nEP_iff_TnEP_iff_nNormal",
    description="For SD operators, n-EP, EP of T^n and n-normality coincide",
    anchor="If T ∈ (SD): T ∈ (n-EP) iff T^n ∈ (EP) iff T is n-normal",
    families=(
        "random_normal",
        "rank_one",
        "random_partial_isometry",
        "nilpotent_nEP",
        "paper_shift_example",
        "non_normal_EP",
        "random_general",
    ),
    n_sweep=True,
)
def SD_nEP_iff_TnEP_iff_nNormal(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    sd = classes.is_SD(t, tol)
    return conditional_agreement(
        sd.member,
        {
            "n-EP": _nep(t, n, tol),
            "EP(T^n)": as_check(classes.is_EP(mat_power(t, n), tol, scale=power_scale(t, n))),
            "n-normal": as_check(classes.is_n_normal(t, n, tol)),
        },
        {"SD": sd.residual},
    )


@router.claim(
    "equivEP2",
    description="Three algebraic characterizations of n-EP agree",
    anchor="T ∈ (n-EP) iff T^n = T^†T^(n+1) = T^(n+1)T^† iff TT^†(T^†T^n)* = (T^†T^n)* and T^†T(T^nT^†) = T^nT^†",
    families=NEP_FAMILIES,
    n_sweep=True,
)
def equivEP2(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    p = linalg.pinv(t, tol).pinv
    tn, tn1 = mat_power(t, n), mat_power(t, n + 1)
    left = adjoint(p @ tn)
    return agreement(
        {
            "T^nT^†=T^†T^n": linalg.operator_equal(tn @ p, p @ tn, tol),
            "T^n=T^†T^(n+1)=T^(n+1)T^†": check_all(
                [linalg.operator_equal(tn, p @ tn1, tol), linalg.operator_equal(tn, tn1 @ p, tol)]
            ),
            "projector form": check_all(
                [
                    linalg.operator_equal(t @ p @ left, left, tol),
                    linalg.operator_equal(p @ t @ tn @ p, tn @ p, tol),
                ]
            ),
        }
    )


EP_RANGE_FAMILIES = ("non_normal_EP", "random_normal", "paper_2x2", "random_projection", "random_general")


def _range(a, tol, scale):
    return linalg.range_projector(a, tol, scale=scale).matrix


@router.claim(
    "EP_power_ranges",
    description="For EP operators the ranges of A^nA^†, A^n and A^(n-1) coincide",
    anchor="A ∈ (EP), n ≥ 2: R(A^nA^†) = R(A^n) = R(A^(n-1))",
    families=EP_RANGE_FAMILIES,
    n_sweep=True,
    n_min=2,
)
def EP_power_ranges(case: Case) -> Outcome:
    a, n, tol = case.t, case.n, case.tol
    ep = classes.is_EP(a, tol)
    p = linalg.pinv(a, tol).pinv
    norm_a, norm_p = linalg.spectral_norm(a), linalg.spectral_norm(p)
    an = _range(mat_power(a, n), tol, power_scale(a, n))
    conclusion = check_all(
        [
            linalg.operator_equal(_range(mat_power(a, n) @ p, tol, norm_a**n * norm_p), an, tol),
            linalg.operator_equal(_range(mat_power(a, n - 1), tol, power_scale(a, n - 1)), an, tol),
        ]
    )
    return implication(ep.member, conclusion, {"EP": ep.residual})


@router.claim(
    "EP_power_ranges.nEP",
    description="For n-EP operators the ranges stabilize from A^n on",
    anchor="A ∈ (n-EP), k ≥ 0: R(A^(n+k)A^†) = R(A^n) = R(A^(n+k))",
    families=("nilpotent_nEP", "paper_shift_example", "non_normal_EP", "random_normal", "nhep_gap", "random_general"),
    n_sweep=True,
)
def EP_power_ranges_nEP(case: Case) -> Outcome:
    a, n, tol = case.t, case.n, case.tol
    nep = classes.is_n_EP(a, n, tol)
    p = linalg.pinv(a, tol).pinv
    norm_a, norm_p = linalg.spectral_norm(a), linalg.spectral_norm(p)
    an = _range(mat_power(a, n), tol, power_scale(a, n))
    checks = []
    for k in range(3):
        ank = mat_power(a, n + k)
        checks.append(linalg.operator_equal(_range(ank @ p, tol, norm_a ** (n + k) * norm_p), an, tol))
        checks.append(linalg.operator_equal(_range(ank, tol, power_scale(a, n + k)), an, tol))
    return implication(nep.member, check_all(checks), {"n-EP": nep.residual})


@router.claim(
    "ascent_descent",
    description="n-EP operators have ascent and descent at most n; nilpotent shifts attain the bound",
    anchor="T ∈ (n-EP): asc(T) ≤ n and dsc(T) ≤ n",
    families=("nilpotent_nEP", "paper_shift_example", "non_normal_EP", "nhep_gap", "weighted_shift_trunc", "random_general"),
    n_sweep=True,
)
def ascent_descent(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    nep = classes.is_n_EP(t, n, tol)
    asc, dsc = classes.ascent(t, tol), classes.descent(t, tol)
    bounded = Check(asc <= n and dsc <= n, float(max(0, asc - n, dsc - n)))
    return implication(nep.member, bounded, {"ascent": float(asc), "descent": float(dsc)}, tight=asc == n)


@router.claim(
    "regular_invertible",
    description="A regular n-EP operator is invertible",
    anchor="T ∈ (n-EP) regular implies T invertible",
    families=("random_unitary", "paper_2x2", "non_normal_EP", "random_normal", "nilpotent_nEP", "random_general"),
    n_sweep=True,
)
def regular_invertible(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    nep = classes.is_n_EP(t, n, tol)
    regular = classes.is_regular_finite(t, tol)
    nullity = t.shape[0] - linalg.numerical_rank(t, tol)
    return implication(
        nep.member and regular.member,
        Check(invertible(t, tol), float(nullity)),
        {"n-EP": nep.residual, "regular": regular.residual},
    )


@router.claim(
    "nNormal_implies_nEP",
    description="n-normal operators are n-EP",
    anchor="Closed range n-normal operators are n-EP",
    families=("random_normal", "nilpotent_nEP", "paper_shift_example", "paper_2x2", "random_general", "non_normal_EP"),
    n_sweep=True,
)
def nNormal_implies_nEP(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    n_normal = classes.is_n_normal(t, n, tol)
    return implication(n_normal.member, _nep(t, n, tol), {"n-normal": n_normal.residual})


@router.claim(
    "positivity",
    description="For n-EP operators, T^(2n) ≥ 0 exactly when T^(2n-1)ω(T) ≥ 0",
    anchor="If T is n-EP then T^(2n) ≥ 0 iff T^(2n-1)ω(T) ≥ 0",
    families=("random_normal", "random_projection", "paper_2x2", "non_normal_EP", "nilpotent_nEP"),
    n_sweep=True,
)
def positivity(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    nep = classes.is_n_EP(t, n, tol)
    even = linalg.is_psd(mat_power(t, 2 * n), tol)
    mixed = linalg.is_psd(mat_power(t, 2 * n - 1) @ linalg.cauchy_dual(t, tol), tol)
    return conditional_agreement(
        nep.member,
        {
            "T^(2n)>=0": Check(even.holds, max(0.0, -even.min_eigenvalue)),
            "T^(2n-1)ω(T)>=0": Check(mixed.holds, max(0.0, -mixed.min_eigenvalue)),
        },
        {"n-EP": nep.residual},
    )


@router.claim(
    "nEP_adjoint",
    description="T and T* are n-EP together",
    anchor="T is n-EP if and only if T* is n-EP",
    families=NEP_FAMILIES,
    n_sweep=True,
)
def nEP_adjoint(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    return agreement({"n-EP(T)": _nep(t, n, tol), "n-EP(T*)": _nep(adjoint(t), n, tol)})


@router.claim(
    "partial_isometry_nEP_iff_nNormal",
    description="A partial isometry is n-EP exactly when it is n-normal",
    anchor="A partial isometry T (T^† = T*) is n-EP if and only if it is n-normal",
    families=("random_partial_isometry", "nilpotent_nEP", "random_projection", "random_unitary", "random_general"),
    n_sweep=True,
)
def partial_isometry_nEP_iff_nNormal(case: Case) -> Outcome:
    t, n, tol = case.t, case.n, case.tol
    isometric = classes.is_partial_isometry(t, tol)
    return conditional_agreement(
        isometric.member,
        {"n-EP": _nep(t, n, tol), "n-normal": as_check(classes.is_n_normal(t, n, tol))},
        {"partial_isometry": isometric.residual},
    )


@router.claim(
    "restriction_nEP.reducing",
    description="n-EP passes to and from the blocks of a direct sum",
    anchor="If M is a reducing subspace of an n-EP operator T, then T restricted to M is n-EP",
    families=("nilpotent_nEP", "paper_shift_example", "non_normal_EP", "random_general"),
    n_sweep=True,
    partners=("unitary", "adjoint", "independent"),
)
def restriction_nEP_reducing(case: Case) -> Outcome:
    a, b, n, tol = case.t, case.s, case.n, case.tol
    blocks = [_nep(a, n, tol), _nep(b, n, tol)]
    return agreement(
        {
            "n-EP(A⊕B)": _nep(generators.direct_sum(a, b), n, tol),
            "n-EP(A)∧n-EP(B)": check_all(blocks),
        }
    )


@router.claim(
    "restriction_nEP.unitary",
    description="n-EP is preserved by unitary equivalence",
    anchor="If S and T are unitarily equivalent and T is n-EP, then S is n-EP",
    families=NEP_FAMILIES,
    n_sweep=True,
    partners=("unitary",),
)
def restriction_nEP_unitary(case: Case) -> Outcome:
    t, u, n, tol = case.t, case.s, case.n, case.tol
    return agreement({"n-EP(T)": _nep(t, n, tol), "n-EP(U*TU)": _nep(adjoint(u) @ t @ u, n, tol)})
