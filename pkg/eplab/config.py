from pydantic_settings import BaseSettings, SettingsConfigDict

from .schemas import EnsembleConfig, ToleranceConfig


class Settings(BaseSettings):
    # Tolerance policy
    rank_tol_factor: float = 1.0
    residual_tol: float = 1e-8
    psd_tol: float = 1e-8
    zero_tol: float = 1e-12

    # Ensembles
    n_max: int = 4
    master_seed: int = 42
    trials_per_family: int = 10
    min_trials_per_claim: int = 50
    condition_cap: float = 1e6
    claim_condition_cap: float = 10.0

    # App settings
    app_name: str = "eplab"
    log_level: str = "WARNING"
    workers: int = 1

    model_config = SettingsConfigDict(env_prefix="EPLAB_", env_file=".env", extra="ignore")

    def tolerance(self, **overrides) -> ToleranceConfig:
        """Tolerance policy from settings, with non-None overrides applied."""
        base = ToleranceConfig(
            rank_tol_factor=self.rank_tol_factor,
            residual_tol=self.residual_tol,
            psd_tol=self.psd_tol,
            zero_tol=self.zero_tol,
        )
        update = {key: value for key, value in overrides.items() if value is not None}
        return ToleranceConfig.model_validate(base.model_dump() | update)

    def ensemble(self, **overrides) -> EnsembleConfig:
        base = EnsembleConfig(
            master_seed=self.master_seed,
            trials_per_family=self.trials_per_family,
            min_trials_per_claim=self.min_trials_per_claim,
            n_max=self.n_max,
            condition_cap=self.condition_cap,
            claim_condition_cap=self.claim_condition_cap,
        )
        update = {key: value for key, value in overrides.items() if value is not None}
        return EnsembleConfig.model_validate(base.model_dump() | update)


settings = Settings()
