import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Optional

import numpy as np
import typer
from pydantic import ValidationError

from . import __version__, classes, generators
from .claims import suite as claim_suite
from .config import settings
from .errors import EplabError, InvalidInputError, RouteDisagreementError
from .schemas import (
    ClassLabel,
    ClassTag,
    CliConfig,
    GenParams,
    MatrixFile,
    OperatorProfile,
    OutputFormat,
    Spectrum,
    Subcommand,
    TheoremReport,
)
from .suite import run_suite
from .utils import derive_seed, format_residual, render_json, text_table

logger = logging.getLogger(__name__)

app = typer.Typer(
    name=settings.app_name,
    help="Numerical laboratory for EP, SD, hypo-EP, n-EP and n-hypo-EP matrices",
    no_args_is_help=True,
    add_completion=False,
)

# Separations with a directed search; any other "<A>-not-<B>" searches every family
SEPARATIONS: dict[str, tuple[str, ...]] = {
    "NEP2-not-EP": ("nilpotent_nEP", "paper_shift_example", "rank_one"),
    "NEP3-not-NEP2": ("nilpotent_nEP", "weighted_shift_trunc"),
    "NHEP1-not-EP": ("random_general", "rank_one", "paper_shift_example", "nhep_gap"),
    "NHEP2-not-NEP2": ("nhep_gap",),
    "EP-not-Normal": ("paper_2x2", "non_normal_EP"),
    "EP-not-SD": ("paper_2x2", "non_normal_EP"),
    "SD-not-EP": ("rank_one", "random_partial_isometry"),
    "SD-not-QN": ("rank_one", "random_partial_isometry"),
    "PI-not-EP": ("random_partial_isometry", "nilpotent_nEP"),
}


# Shared options
RankTolFactor = Annotated[Optional[float], typer.Option("--rank-tol-factor", help="Multiplier of max(m,n)·σmax·eps in the rank cutoff")]
ResidualTol = Annotated[Optional[float], typer.Option("--residual-tol", help="Relative residual accepted as zero")]
PsdTol = Annotated[Optional[float], typer.Option("--psd-tol", help="Slack on the smallest eigenvalue for positivity")]
NMax = Annotated[Optional[int], typer.Option("--n-max", help="Largest n for the n-parameterized classes")]
Seed = Annotated[Optional[int], typer.Option("--seed", help="Master seed; all randomness derives from it")]
Dims = Annotated[str, typer.Option("--dims", help='Dimensions as a range "2-6" or a list "2,3,5"')]
Trials = Annotated[Optional[int], typer.Option("--trials", help="Trials per family")]
Families = Annotated[Optional[str], typer.Option("--families", help="Comma separated family filter")]
Format = Annotated[OutputFormat, typer.Option("--format", help="Report format")]
Out = Annotated[Optional[Path], typer.Option("--out", help="Write the report here instead of stdout")]
LogLevel = Annotated[Optional[str], typer.Option("--log-level", help="Logging level on stderr")]


def _configure_logging(level: Optional[str]) -> None:
    name = (level or settings.log_level).upper()
    if not isinstance(logging.getLevelName(name), int):
        raise InvalidInputError(f"Unknown log level {level!r}")
    logging.basicConfig(
        level=name,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


@contextmanager
def _exit_codes():
    """Turn library errors into exit codes; reports stay on stdout, diagnostics on stderr."""
    try:
        yield
    except EplabError as e:
        logger.debug("%s: %s", type(e).__name__, e.detail)
        typer.echo(f"error: {e.detail}", err=True)
        if e.residuals:
            typer.echo(render_json(e.residuals), err=True, nl=False)
        raise typer.Exit(code=e.exit_code)
    except ValidationError as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=2)
    except OSError as e:
        typer.echo(f"error: {e}", err=True)
        raise typer.Exit(code=2)


def parse_dims(text: str) -> list[int]:
    """ "2-6" -> [2, 3, 4, 5, 6]; "2,4" -> [2, 4]."""
    try:
        if "-" in text:
            low, high = (int(part) for part in text.split("-", 1))
            dims = list(range(low, high + 1))
        else:
            dims = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise InvalidInputError(f"Cannot parse dims {text!r}") from None
    if not dims:
        raise InvalidInputError(f"Empty dims {text!r}")
    return dims


def parse_families(text: Optional[str]) -> Optional[list[str]]:
    if text is None:
        return None
    names = [name.strip() for name in text.split(",") if name.strip()]
    for name in names:
        generators.get_family(name)
    return names


def parse_vector(text: Optional[str], dim: int) -> Optional[list[complex]]:
    """ "e2" is the second basis vector of C^dim; otherwise comma separated complex entries."""
    if text is None:
        return None
    raw = text.strip()
    if raw.lower().startswith("e") and raw[1:].isdigit():
        index = int(raw[1:])
        if not 1 <= index <= dim:
            raise InvalidInputError(f"{raw} is not a basis vector of C^{dim}")
        return [1.0 + 0j if i == index - 1 else 0j for i in range(dim)]
    try:
        return [complex(part.strip().replace(" ", "")) for part in raw.split(",")]
    except ValueError:
        raise InvalidInputError(f"Cannot parse vector {text!r}") from None


def _cli_config(subcommand: Subcommand, **fields) -> CliConfig:
    tolerance = settings.tolerance(
        rank_tol_factor=fields.pop("rank_tol_factor", None),
        residual_tol=fields.pop("residual_tol", None),
        psd_tol=fields.pop("psd_tol", None),
    )
    defaults = {"n_max": settings.n_max, "seed": settings.master_seed, "trials": settings.trials_per_family}
    chosen = {key: value for key, value in fields.items() if value is not None}
    return CliConfig(subcommand=subcommand, tolerance=tolerance, **(defaults | chosen))


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        typer.echo(text, nl=False)
        return
    out.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", out)


def load_matrix(path: Path) -> np.ndarray:
    """Read a MatrixFile; unknown keys and non-finite entries are rejected."""
    return MatrixFile.model_validate_json(path.read_text(encoding="utf-8")).to_array()


# Rendering
def _mark(member: bool) -> str:
    return "✓" if member else "✗"


def render_profile(profile: OperatorProfile) -> str:
    rows = [(key, _mark(m.member), format_residual(m.residual)) for key, m in profile.memberships.items()]
    table = text_table(["class", "member", "residual"], rows)
    return table + f"\nascent {profile.ascent}  descent {profile.descent}  dim {profile.dim}\n"


def render_report(report: TheoremReport) -> str:
    rows = []
    for claim_id, claim in report.claims.items():
        notes = []
        if claim.failures:
            notes.append("FAIL")
        if claim.errors:
            notes.append(f"errors={claim.errors}")
        if claim.weakly_exercised:
            notes.append("weak")
        rows.append(
            (claim_id, claim.trials, claim.hypothesis_hits, claim.passes, format_residual(claim.worst_residual), " ".join(notes))
        )
    out = [text_table(["claim", "trials", "hits", "passes", "worst", "notes"], rows)]
    for claim_id, claim in report.claims.items():
        for witness in claim.witnesses:
            trace = ", ".join(f"{t.family}(dim={t.dim}, seed={t.seed})" for t in witness.seed_trace)
            out.append(f"witness {claim_id} n={witness.n}: {trace or witness.note}\n")
    failed = sum(1 for claim in report.claims.values() if claim.failures)
    out.append(f"\n{len(report.claims) - failed}/{len(report.claims)} claims passed\n")
    return "".join(out)


def render_matrix(a: np.ndarray) -> str:
    rows = (" ".join(f"{z.real:+.6g}{z.imag:+.6g}j" for z in row) for row in a)
    return "\n".join(rows) + "\n"


@app.command()
def classify(
    path: Annotated[Path, typer.Argument(help="MatrixFile to classify")],
    n_max: NMax = None,
    rank_tol_factor: RankTolFactor = None,
    residual_tol: ResidualTol = None,
    psd_tol: PsdTol = None,
    format: Format = OutputFormat.text,
    out: Out = None,
    log_level: LogLevel = None,
):
    """Print the full class profile of a square matrix"""
    with _exit_codes():
        _configure_logging(log_level)
        config = _cli_config(
            Subcommand.classify,
            n_max=n_max,
            rank_tol_factor=rank_tol_factor,
            residual_tol=residual_tol,
            psd_tol=psd_tol,
            format=format,
            out=out,
        )
        profile = classes.classify(load_matrix(path), config.n_max, config.tolerance)
        text = render_json(profile) if config.format is OutputFormat.json else render_profile(profile)
        _emit(text, config.out)


@app.command()
def suite(
    seed: Seed = None,
    dims: Dims = "2-6",
    trials: Trials = None,
    families: Families = None,
    claims: Annotated[Optional[str], typer.Option("--claims", help="Comma separated claim ids")] = None,
    n_max: NMax = None,
    rank_tol_factor: RankTolFactor = None,
    residual_tol: ResidualTol = None,
    psd_tol: PsdTol = None,
    workers: Annotated[Optional[int], typer.Option("--workers", help="Threads per claim")] = None,
    format: Format = OutputFormat.text,
    out: Out = None,
    log_level: LogLevel = None,
):
    """Run every registered claim over its populations; exit 1 if any claim fails"""
    with _exit_codes():
        _configure_logging(log_level)
        config = _cli_config(
            Subcommand.suite,
            seed=seed,
            dims=parse_dims(dims),
            trials=trials,
            families=parse_families(families),
            n_max=n_max,
            rank_tol_factor=rank_tol_factor,
            residual_tol=residual_tol,
            psd_tol=psd_tol,
            workers=workers or settings.workers,
            format=format,
            out=out,
        )
        claim_ids = [c.strip() for c in claims.split(",") if c.strip()] if claims else None
        unknown = [c for c in claim_ids or [] if c not in claim_suite.claims]
        if unknown:
            raise InvalidInputError(f"Unknown claims {unknown}")
        ensemble = settings.ensemble(
            master_seed=config.seed,
            dims=config.dims,
            trials_per_family=config.trials,
            families=config.families,
            n_max=config.n_max,
        )
        report = run_suite(ensemble, config.tolerance, claim_ids=claim_ids, workers=config.workers)
        text = render_json(report) if config.format is OutputFormat.json else render_report(report)
        _emit(text, config.out)
    if not report.all_passed:
        raise typer.Exit(code=1)


# Witness search
def _inclusions(small: ClassLabel, large: ClassLabel) -> bool:
    """Whether membership in `small` forces membership in `large` by a proven inclusion."""
    if small == large:
        return True
    level = {ClassTag.ep: (ClassTag.n_ep, 1), ClassTag.hypo_ep: (ClassTag.n_hypo_ep, 1), ClassTag.normal: (ClassTag.n_normal, 1)}
    a_tag, a_n = level.get(small.tag, (small.tag, small.n))
    b_tag, b_n = level.get(large.tag, (large.tag, large.n))
    if (a_tag, a_n) == (b_tag, b_n):
        return True
    if a_tag is ClassTag.n_normal and a_n == 1:
        return b_tag is not ClassTag.partial_isometry and b_tag is not ClassTag.regular
    if a_tag is ClassTag.quasi_normal:
        return b_tag in (ClassTag.sd, ClassTag.hyponormal)
    if a_tag is ClassTag.n_normal:
        if b_tag is ClassTag.n_normal:
            return b_n % a_n == 0
        return b_tag in (ClassTag.n_ep, ClassTag.n_hypo_ep) and b_n >= a_n
    if a_tag is ClassTag.n_ep:
        return b_tag in (ClassTag.n_ep, ClassTag.n_hypo_ep) and b_n >= a_n
    if a_tag is ClassTag.n_hypo_ep:
        return b_tag is ClassTag.n_hypo_ep and b_n >= a_n
    return False


def parse_separation(pair: str) -> tuple[ClassLabel, ClassLabel]:
    if "-not-" not in pair:
        raise InvalidInputError(f"Expected <A>-not-<B>, got {pair!r}")
    left, right = pair.split("-not-", 1)
    try:
        inside, outside = ClassLabel.parse(left), ClassLabel.parse(right)
    except ValueError as e:
        raise InvalidInputError(str(e)) from None
    if _inclusions(inside, outside):
        raise InvalidInputError(f"{pair} is contradictory: {inside.key} is contained in {outside.key}")
    return inside, outside


def _directed_families(inside: ClassLabel, outside: ClassLabel) -> list[str]:
    for name, families in SEPARATIONS.items():
        if parse_separation(name) == (inside, outside):
            return list(families) + [f for f in generators.FAMILIES if f not in families]
    return list(generators.FAMILIES)


def search_witness(pair: str, config: CliConfig) -> Optional[np.ndarray]:
    """Directed generation over the families, each candidate confirmed by classify."""
    inside, outside = parse_separation(pair)
    n = max((label.n for label in (inside, outside) if label.n is not None), default=None)
    n_max = max(config.n_max, n or 1)
    families = config.families or _directed_families(inside, outside)
    for family in families:
        min_dim = generators.get_family(family).min_dim
        for index in range(config.trials):
            dim = max(config.dims[index % len(config.dims)], min_dim)
            seed = derive_seed(config.seed, "witness", pair, family, index)
            t, _ = generators.draw(family, dim, seed, n, settings.claim_condition_cap)
            try:
                profile = classes.classify(t, n_max, config.tolerance)
            except RouteDisagreementError as e:
                logger.warning("%s: skipping %s(dim=%d, seed=%d): %s", pair, family, dim, seed, e.detail)
                continue
            if profile.member(inside) and not profile.member(outside):
                logger.info("%s: found in %s(dim=%d, seed=%d)", pair, family, dim, seed)
                return t
        logger.info("%s: no witness among %d draws of %s", pair, config.trials, family)
    return None


@app.command()
def witness(
    pair: Annotated[Optional[str], typer.Argument(help='Separation "<A>-not-<B>", e.g. NEP2-not-EP')] = None,
    list_pairs: Annotated[bool, typer.Option("--list", help="List the separations with a directed search")] = False,
    seed: Seed = None,
    dims: Dims = "2-6",
    trials: Trials = None,
    families: Families = None,
    n_max: NMax = None,
    rank_tol_factor: RankTolFactor = None,
    residual_tol: ResidualTol = None,
    psd_tol: PsdTol = None,
    format: Format = OutputFormat.json,
    out: Out = None,
    log_level: LogLevel = None,
):
    """Search for a matrix in class A but not in class B; exit 1 if none is found"""
    with _exit_codes():
        _configure_logging(log_level)
        if list_pairs:
            rows = [(name, ", ".join(families)) for name, families in SEPARATIONS.items()]
            _emit(text_table(["separation", "families"], rows), None)
            return
        if pair is None:
            raise InvalidInputError("A separation or --list is required")
        config = _cli_config(
            Subcommand.witness,
            seed=seed,
            dims=parse_dims(dims),
            trials=trials,
            families=parse_families(families),
            n_max=n_max,
            rank_tol_factor=rank_tol_factor,
            residual_tol=residual_tol,
            psd_tol=psd_tol,
            format=format,
            out=out,
        )
        found = search_witness(pair, config)
        if found is not None:
            text = render_json(MatrixFile.from_array(found)) if config.format is OutputFormat.json else render_matrix(found)
            _emit(text, config.out)
    if found is None:
        typer.echo(f"no witness for {pair} within {config.trials} trials per family", err=True)
        raise typer.Exit(code=1)


@app.command()
def gen(
    family: Annotated[str, typer.Argument(help="Generator name, e.g. paper_2x2 or random_normal")],
    dim: Annotated[int, typer.Option("--dim")] = 4,
    rank: Annotated[Optional[int], typer.Option("--rank")] = None,
    n: Annotated[Optional[int], typer.Option("--n", help="Nilpotency index for nilpotent_nEP")] = None,
    alpha: Annotated[float, typer.Option("--alpha")] = 1.0,
    size: Annotated[Optional[int], typer.Option("--size", help="Truncation size for the shifts")] = None,
    x: Annotated[Optional[str], typer.Option("--x", help='Vector "e1" or "1,0,1j"')] = None,
    y: Annotated[Optional[str], typer.Option("--y")] = None,
    weights: Annotated[Optional[str], typer.Option("--weights", help="Comma separated shift weights")] = None,
    spectrum: Annotated[Spectrum, typer.Option("--spectrum")] = Spectrum.complex,
    seed: Seed = None,
    format: Format = OutputFormat.json,
    out: Out = None,
    log_level: LogLevel = None,
):
    """Emit a generated matrix, deterministic in --seed"""
    with _exit_codes():
        _configure_logging(log_level)
        try:
            parsed_weights = [float(w) for w in weights.split(",")] if weights else None
        except ValueError:
            raise InvalidInputError(f"Cannot parse weights {weights!r}") from None
        params = GenParams(
            dim=dim,
            rank=rank,
            n=n,
            alpha=alpha,
            size=size,
            x=parse_vector(x, dim),
            y=parse_vector(y, dim),
            weights=parsed_weights,
            spectrum=spectrum,
            condition_cap=settings.condition_cap,
        )
        t = generators.generate(family, params, settings.master_seed if seed is None else seed)
        text = render_json(MatrixFile.from_array(t)) if format is OutputFormat.json else render_matrix(t)
        _emit(text, out)


@app.command()
def version():
    """Print the package version"""
    typer.echo(__version__)
