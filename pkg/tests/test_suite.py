import math

import numpy as np
import pytest

from eplab import classes, generators, linalg, suite
from eplab.claims import suite as claim_suite
from eplab.errors import InvalidInputError
from eplab.linalg import Check
from eplab.schemas import EnsembleConfig
from eplab.suite import Case, ClaimRouter, Outcome, Suite, agreement, implication, plan_trials, run_suite

# Claims that a sign flip in the pseudoinverse must break
PINV_SENSITIVE = [
    "mp_identities",
    "cauchy_dual_identities",
    "ep_symmetries",
    "equivEP2",
    "caractnHEP",
    "HEP_equivalences",
    "omega_power",
]


def _toy_suite(checker, families=("random_general",), **options) -> Suite:
    router = ClaimRouter(prefix="toy.", tags=["toy"])
    router.claim("claim", description="toy", anchor="toy anchor", families=families, **options)(checker)
    toy = Suite(title="toy")
    toy.include_router(router)
    return toy


def test_every_claim_is_registered():
    ids = set(claim_suite.claims)
    for expected in (
        "mp_identities",
        "omega_power",
        "normal_iff_EP_SD",
        "equivEP",
        "positivity",
        "HEP_equivalences",
        "caractnHEP",
        "nHEP_comm_implies_nEP",
        "restriction_nEP.reducing",
    ):
        assert expected in ids
    for claim in claim_suite.claims.values():
        assert claim.anchor and claim.families


def test_router_rejects_unknown_family():
    router = ClaimRouter()
    with pytest.raises(ValueError):
        router.claim("bad", description="", anchor="x", families=("bogus",))


def test_router_rejects_empty_anchor():
    router = ClaimRouter()
    with pytest.raises(ValueError):
        router.claim("bad", description="", anchor="  ", families=("random_general",))


def test_duplicate_claim_ids():
    router = ClaimRouter()
    router.claim("dup", description="", anchor="x", families=("random_general",))(lambda case: None)
    target = Suite()
    target.include_router(router)
    with pytest.raises(ValueError):
        target.include_router(router)


def test_implication_scoring():
    vacuous = implication(False, Check(False, 1.0))
    assert not vacuous.hypothesis
    hit = implication(True, Check(True, 1e-12), {"h": 0.0}, tight=True)
    assert hit.hypothesis and hit.passed and hit.tight
    assert hit.residuals == {"conclusion": 1e-12, "h": 0.0}


def test_agreement_scoring():
    same = agreement({"a": Check(True, 1e-10), "b": Check(True, 1e-9)})
    assert same.passed and same.residual == 1e-9
    split = agreement({"a": Check(True, 1e-10), "b": Check(False, 0.5)})
    assert not split.passed
    assert split.residual == 1e-10
    assert agreement({"a": Check(False, 0.3), "b": Check(False, 0.4)}).passed


def test_plan_trials_counts(small_ensemble):
    sweep = claim_suite.get("caractnHEP")
    trials = plan_trials(sweep, small_ensemble)
    assert len(trials) == len(sweep.families) * 3 * 3
    assert trials == plan_trials(sweep, small_ensemble)
    shifted = claim_suite.get("omega_power")
    assert len(plan_trials(shifted, small_ensemble)) == len(shifted.families) * 3 * 2


def test_plan_trials_respects_min_dim_and_filter(small_ensemble):
    claim = claim_suite.get("caractnHEP")
    gap_trials = [t for t in plan_trials(claim, small_ensemble) if t.family == "nhep_gap"]
    assert all(t.dim >= 3 for t in gap_trials)
    empty = small_ensemble.model_copy(update={"families": []})
    assert plan_trials(claim, empty) == []


def test_zero_trials_gives_empty_report():
    report = run_suite(EnsembleConfig(trials_per_family=0))
    assert report.all_passed
    assert set(report.claims) == set(claim_suite.claims)
    assert all(c.trials == 0 and not c.weakly_exercised for c in report.claims.values())


def test_failures_carry_capped_witnesses(small_ensemble):
    toy = _toy_suite(lambda case: implication(True, Check(False, 2.0)))
    report = run_suite(small_ensemble, suite=toy)
    claim = report.claims["toy.claim"]
    assert claim.trials == 3
    assert claim.failures == 3
    assert 1 <= len(claim.witnesses) <= suite.MAX_WITNESSES
    witness = claim.witnesses[0]
    assert witness.seed_trace[0].family == "random_general"
    assert not report.all_passed


def test_errors_are_failed_hits(small_ensemble):
    def raises(case: Case) -> Outcome:
        raise InvalidInputError("boom", {"r": 1.0})

    report = run_suite(small_ensemble, suite=_toy_suite(raises))
    claim = report.claims["toy.claim"]
    assert claim.errors == claim.hypothesis_hits == 3
    assert claim.passes == 0
    assert claim.witnesses[0].note == "boom"
    assert math.isfinite(claim.worst_residual)


def test_weakly_exercised_flag(small_ensemble):
    report = run_suite(small_ensemble, suite=_toy_suite(lambda case: implication(False, Check(True, 0.0))))
    claim = report.claims["toy.claim"]
    assert claim.weakly_exercised
    assert claim.hypothesis_hits == 0


def test_partners_are_drawn(small_ensemble):
    seen = []

    def record(case: Case) -> Outcome:
        seen.append(case.s)
        return implication(True, Check(True, 0.0))

    run_suite(small_ensemble, suite=_toy_suite(record, partners=("adjoint",)))
    assert len(seen) == 3 and all(s is not None for s in seen)


def test_tight_witnesses():
    report = run_suite(
        EnsembleConfig(master_seed=3, dims=[3, 4], trials_per_family=4, families=["nilpotent_nEP"], n_max=3),
        claim_ids=["ascent_descent"],
    )
    claim = report.claims["ascent_descent"]
    assert claim.failures == 0
    assert 1 <= len(claim.tight_witnesses) <= suite.MAX_TIGHT_WITNESSES


def test_default_suite_passes(small_ensemble):
    report = run_suite(small_ensemble)
    failing = {cid: c.worst_residual for cid, c in report.claims.items() if c.failures}
    assert failing == {}
    assert report.suite_version == "0.1.0"


def test_report_independent_of_workers(small_ensemble):
    ids = ["equivEP", "HEP_equivalences", "reverse_order_law"]
    serial = run_suite(small_ensemble, claim_ids=ids, workers=1)
    threaded = run_suite(small_ensemble, claim_ids=ids, workers=4)
    assert serial.model_dump() == threaded.model_dump()


def test_sign_flipped_pinv_is_caught(monkeypatch, small_ensemble):
    original = linalg._pinv_from_svd
    monkeypatch.setattr(linalg, "_pinv_from_svd", lambda u, s, vh, rank: -original(u, s, vh, rank))
    report = run_suite(small_ensemble, claim_ids=PINV_SENSITIVE)
    failed = [cid for cid, c in report.claims.items() if c.failures]
    assert len(failed) >= 5
    assert report.claims["mp_identities"].witnesses


def test_witness_replays(monkeypatch, small_ensemble):
    original = linalg._pinv_from_svd
    monkeypatch.setattr(linalg, "_pinv_from_svd", lambda u, s, vh, rank: -original(u, s, vh, rank))
    report = run_suite(small_ensemble, claim_ids=["mp_identities"])
    witness = report.claims["mp_identities"].witnesses[0]
    replayed = generators.replay(witness.seed_trace[0])
    np.testing.assert_allclose(replayed, witness.matrix.to_array())


def test_moore_penrose_axioms_use_wide_conditioning(small_ensemble):
    claim = claim_suite.get("mp_axioms_ill_conditioned")
    trial = plan_trials(claim, small_ensemble)[0]
    result = suite.run_trial(trial, small_ensemble, linalg.DEFAULT_TOLERANCE)
    assert result.traces[0].condition_cap == small_ensemble.condition_cap
    assert result.outcome.passed
    narrow = suite.run_trial(plan_trials(claim_suite.get("equivEP"), small_ensemble)[0], small_ensemble, linalg.DEFAULT_TOLERANCE)
    assert narrow.traces[0].condition_cap == small_ensemble.claim_condition_cap


def test_default_ensemble_gives_every_claim_fifty_trials():
    config = EnsembleConfig(dims=[2, 3, 4, 5, 6])
    for claim in claim_suite.claims.values():
        assert len(plan_trials(claim, config)) >= 50, claim.id


def test_trial_floor_leaves_zero_trials_alone():
    claim = claim_suite.get("mp_axioms_ill_conditioned")
    assert plan_trials(claim, EnsembleConfig(trials_per_family=0)) == []
    assert len(plan_trials(claim, EnsembleConfig(trials_per_family=2, min_trials_per_claim=7))) == 7
    assert len(plan_trials(claim, EnsembleConfig(trials_per_family=60))) == 60


def test_weighted_shift_claim_sees_both_outcomes():
    config = EnsembleConfig(master_seed=1, dims=[2, 3, 4, 5], trials_per_family=30, min_trials_per_claim=0)
    report = run_suite(config, claim_ids=["sd_weighted_shift"])
    claim = report.claims["sd_weighted_shift"]
    assert claim.trials == claim.passes == 30
    trials = plan_trials(claim_suite.get("sd_weighted_shift"), config)
    assert {t.seed % 3 == 0 for t in trials} == {True, False}


def test_profile_claim_uses_ensemble_n_max(monkeypatch, small_ensemble):
    seen = []
    original = classes.classify

    def spy(t, n_max=4, tol=linalg.DEFAULT_TOLERANCE):
        seen.append(n_max)
        return original(t, n_max, tol)

    monkeypatch.setattr(classes, "classify", spy)
    config = small_ensemble.model_copy(update={"n_max": 2})
    trial = plan_trials(claim_suite.get("profile_unitary_invariance"), config)[0]
    assert suite.run_trial(trial, config, linalg.DEFAULT_TOLERANCE).outcome.passed
    assert seen == [2, 2]
