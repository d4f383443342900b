"""Claim registry and the ensemble runner.

Claims are registered on a `ClaimRouter` with the `@router.claim(...)`
decorator and collected by a `Suite` through `include_router`, the same way
endpoints are grouped into routers and mounted on an application.
"""

import logging
import math
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple, Optional

import numpy as np

from . import generators, linalg
from .errors import EplabError
from .linalg import Check, ComplexMatrix, adjoint
from .schemas import (
    ClaimReport,
    EnsembleConfig,
    MatrixFile,
    Membership,
    SeedTrace,
    TheoremReport,
    ToleranceConfig,
    Witness,
)
from .utils import derive_seed

logger = logging.getLogger(__name__)

MAX_WITNESSES = 5
MAX_TIGHT_WITNESSES = 3
WEAK_HIT_RATE = 0.1


class Case(NamedTuple):
    """One trial input: the operator with its optional partner and power n, plus the run settings."""

    t: ComplexMatrix
    s: Optional[ComplexMatrix]
    n: Optional[int]
    tol: ToleranceConfig
    n_max: int = 4


class Outcome(NamedTuple):
    hypothesis: bool
    passed: bool
    residual: float
    residuals: dict[str, float]
    tight: bool = False


def implication(hypothesis: bool, conclusion: Check, residuals: Optional[dict[str, float]] = None, *, tight: bool = False) -> Outcome:
    """Score `hypothesis ⟹ conclusion`; trials that miss the hypothesis are not hits."""
    detail = {"conclusion": conclusion.residual, **(residuals or {})}
    return Outcome(hypothesis, conclusion.holds, conclusion.residual, detail, tight)


def agreement(sides: dict[str, Check], residuals: Optional[dict[str, float]] = None) -> Outcome:
    """Score a chain of equivalences: every side must return the same boolean."""
    verdicts = {check.holds for check in sides.values()}
    detail = {name: check.residual for name, check in sides.items()}
    detail.update(residuals or {})
    # headline residual: the sides that claim to hold
    worst = max((c.residual for c in sides.values() if c.holds), default=0.0)
    return Outcome(True, len(verdicts) <= 1, worst, detail)


def conditional_agreement(hypothesis: bool, sides: dict[str, Check], residuals: Optional[dict[str, float]] = None) -> Outcome:
    outcome = agreement(sides, residuals)
    return outcome._replace(hypothesis=hypothesis)


def check_all(checks: Iterable[Check]) -> Check:
    checks = list(checks)
    return Check(all(c.holds for c in checks), max((c.residual for c in checks), default=0.0))


# Partners for two-operator claims: (T, seed, cap) -> (S, trace or None)
Partner = Callable[[ComplexMatrix, int, float], tuple[ComplexMatrix, Optional[SeedTrace]]]


def _independent(t: ComplexMatrix, seed: int, cap: float) -> tuple[ComplexMatrix, Optional[SeedTrace]]:
    dim = t.shape[0]
    return generators.draw("random_general", dim, seed, condition_cap=cap)


PARTNERS: dict[str, Partner] = {
    "adjoint": lambda t, seed, cap: (adjoint(t), None),
    "unitary": lambda t, seed, cap: generators.draw("random_unitary", t.shape[0], seed),
    "polynomial": lambda t, seed, cap: (t @ t - 0.5 * t + np.eye(t.shape[0]), None),
    "independent": _independent,
}


class Claim(NamedTuple):
    id: str
    description: str
    anchor: str
    families: tuple[str, ...]
    checker: Callable[[Case], Outcome]
    n_sweep: bool = False
    n_min: int = 1
    partners: tuple[str, ...] = ()
    wide_conditioning: bool = False
    tags: tuple[str, ...] = ()

    def n_values(self, n_max: int) -> list[Optional[int]]:
        if not self.n_sweep:
            return [None]
        return list(range(self.n_min, n_max + 1))


class ClaimRouter:
    def __init__(self, prefix: str = "", tags: Sequence[str] = ()):
        self.prefix = prefix
        self.tags = tuple(tags)
        self.claims: list[Claim] = []

    def claim(
        self,
        claim_id: str,
        *,
        description: str,
        anchor: str,
        families: Sequence[str],
        n_sweep: bool = False,
        n_min: int = 1,
        partners: Sequence[str] = (),
        wide_conditioning: bool = False,
    ):
        """Register the decorated checker under `prefix + claim_id`."""
        unknown = [f for f in families if f not in generators.FAMILIES]
        unknown += [p for p in partners if p not in PARTNERS]
        if unknown:
            raise ValueError(f"{claim_id}: unknown families or partners {unknown}")
        if not anchor.strip():
            raise ValueError(f"{claim_id}: anchor must be nonempty")

        def decorator(func: Callable[[Case], Outcome]) -> Callable[[Case], Outcome]:
            self.claims.append(
                Claim(
                    id=self.prefix + claim_id,
                    description=description,
                    anchor=anchor,
                    families=tuple(families),
                    checker=func,
                    n_sweep=n_sweep,
                    n_min=n_min,
                    partners=tuple(partners),
                    wide_conditioning=wide_conditioning,
                    tags=self.tags,
                )
            )
            return func

        return decorator


class Suite:
    def __init__(self, title: str = "eplab"):
        self.title = title
        self.claims: dict[str, Claim] = {}

    def include_router(self, router: ClaimRouter) -> None:
        for claim in router.claims:
            if claim.id in self.claims:
                raise ValueError(f"Duplicate claim id {claim.id!r}")
            self.claims[claim.id] = claim

    def get(self, claim_id: str) -> Claim:
        return self.claims[claim_id]


class Trial(NamedTuple):
    claim: Claim
    family: str
    dim: int
    seed: int
    n: Optional[int]
    partner: Optional[str]


class TrialResult(NamedTuple):
    trial: Trial
    outcome: Outcome
    matrix: ComplexMatrix
    partner: Optional[ComplexMatrix]
    traces: list[SeedTrace]
    error: Optional[str] = None


def trials_per_family(claim: Claim, config: EnsembleConfig, families: Sequence[str]) -> int:
    """trials_per_family, raised so the claim sees at least min_trials_per_claim trials."""
    per_family = config.trials_per_family
    cells = len(families) * len(claim.n_values(config.n_max))
    if per_family == 0 or cells == 0:
        return per_family
    return max(per_family, math.ceil(config.min_trials_per_claim / cells))


def plan_trials(claim: Claim, config: EnsembleConfig) -> list[Trial]:
    """Deterministic trial list: family x trial index x n (x partner mode)."""
    families = list(dict.fromkeys(f for f in claim.families if config.families is None or f in config.families))
    per_family = trials_per_family(claim, config, families)
    trials = []
    for family in families:
        min_dim = generators.FAMILIES[family].min_dim
        for index in range(per_family):
            dim = max(config.dims[index % len(config.dims)], min_dim)
            for n in claim.n_values(config.n_max):
                partner = claim.partners[index % len(claim.partners)] if claim.partners else None
                seed = derive_seed(config.master_seed, claim.id, family, index, n or 0)
                trials.append(Trial(claim, family, dim, seed, n, partner))
    return trials


def run_trial(trial: Trial, config: EnsembleConfig, tol: ToleranceConfig) -> TrialResult:
    # Powers of T^† need well conditioned draws; the Moore-Penrose axioms do not
    cap = config.condition_cap if trial.claim.wide_conditioning else config.claim_condition_cap
    t = s = None
    traces: list[SeedTrace] = []
    try:
        t, trace = generators.draw(trial.family, trial.dim, trial.seed, trial.n, cap)
        traces.append(trace)
        if trial.partner is not None:
            s, partner_trace = PARTNERS[trial.partner](t, derive_seed(trial.seed, "partner"), cap)
            if partner_trace is not None:
                traces.append(partner_trace)
        outcome = trial.claim.checker(Case(t=t, s=s, n=trial.n, tol=tol, n_max=config.n_max))
    except (EplabError, np.linalg.LinAlgError) as e:
        detail = getattr(e, "detail", str(e))
        logger.warning("%s: trial on %s(dim=%d, seed=%d) raised %s", trial.claim.id, trial.family, trial.dim, trial.seed, detail)
        outcome = Outcome(True, False, math.inf, dict(getattr(e, "residuals", {})))
        if t is None:
            t = np.zeros((trial.dim, trial.dim), dtype=np.complex128)
        return TrialResult(trial, outcome, t, s, traces, error=detail)
    if not outcome.hypothesis:
        logger.debug("%s: hypothesis missed on %s(dim=%d, seed=%d)", trial.claim.id, trial.family, trial.dim, trial.seed)
    return TrialResult(trial, outcome, t, s, traces)


def _witness(result: TrialResult) -> Witness:
    trial = result.trial
    note = result.error or (f"partner: {trial.partner}" if trial.partner else None)
    return Witness(
        claim=trial.claim.id,
        n=trial.n,
        matrix=MatrixFile.from_array(result.matrix),
        partner=MatrixFile.from_array(result.partner) if result.partner is not None else None,
        residuals=result.outcome.residuals,
        seed_trace=result.traces,
        note=note,
    )


def aggregate(claim: Claim, results: Sequence[TrialResult]) -> ClaimReport:
    report = ClaimReport(id=claim.id, description=claim.description, anchor=claim.anchor)
    report.trials = len(results)
    for result in results:
        outcome = result.outcome
        if not outcome.hypothesis:
            continue
        report.hypothesis_hits += 1
        if result.error is not None:
            report.errors += 1
        if math.isfinite(outcome.residual):
            report.worst_residual = max(report.worst_residual, outcome.residual)
        if outcome.passed:
            report.passes += 1
            if outcome.tight and len(report.tight_witnesses) < MAX_TIGHT_WITNESSES:
                report.tight_witnesses.append(_witness(result))
        elif len(report.witnesses) < MAX_WITNESSES:
            report.witnesses.append(_witness(result))
    report.weakly_exercised = report.trials > 0 and report.hypothesis_hits < WEAK_HIT_RATE * report.trials
    if report.weakly_exercised:
        logger.warning("%s is weakly exercised: %d/%d hypothesis hits", claim.id, report.hypothesis_hits, report.trials)
    logger.info("%s: %d/%d passes over %d trials", claim.id, report.passes, report.hypothesis_hits, report.trials)
    return report


def run_suite(
    config: EnsembleConfig,
    tol: ToleranceConfig = linalg.DEFAULT_TOLERANCE,
    *,
    suite: Optional[Suite] = None,
    claim_ids: Optional[Sequence[str]] = None,
    workers: int = 1,
) -> TheoremReport:
    """Run every registered claim over its populations and aggregate a report."""
    from . import __version__
    from .claims import suite as default_suite

    suite = suite or default_suite
    selected = [suite.get(cid) for cid in claim_ids] if claim_ids else list(suite.claims.values())
    reports = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for claim in sorted(selected, key=lambda c: c.id):
            trials = plan_trials(claim, config)
            if workers > 1:
                results = list(pool.map(lambda tr: run_trial(tr, config, tol), trials))
            else:
                results = [run_trial(tr, config, tol) for tr in trials]
            reports[claim.id] = aggregate(claim, results)
    return TheoremReport(suite_version=__version__, config_echo=config, tolerance=tol, claims=reports)


def as_check(membership: Membership) -> Check:
    return Check(membership.member, membership.residual)


def invertible(t: ComplexMatrix, tol: ToleranceConfig) -> bool:
    return linalg.numerical_rank(t, tol) == t.shape[0]
