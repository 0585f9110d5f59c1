"""Configuration management for dyncoh."""

from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


# Version string embedded in every certificate that relies on the admissibility test
ADMISSIBILITY_CRITERION = "supermap-choi-psd+tp-span/v1"


class Settings(BaseSettings):
    """Numerical settings loaded from environment or a .env file."""

    model_config = SettingsConfigDict(env_prefix="DYNCOH_", env_file=".env", extra="ignore")

    # Conic solver
    solver: str = "CLARABEL"
    solver_tol: float = 1e-8
    solver_max_iter: int = 200000
    residual_tol: float = 1e-6

    # Spectral tolerances
    psd_tol: float = 1e-9
    hermitian_tol: float = 1e-10
    whitening_cutoff: float = 1e-10

    # Measures
    bisection_tol: float = 1e-7
    sampled_inputs: int = 64
    refinement_rounds: int = 20

    # Certification
    admissibility_tol: float = 1e-8
    membership_tol: float = 1e-9
    cptp_tol: float = 1e-8
    delta_slack: float = 1e-7
    rate_slack: float = 1e-7
    enumeration_cap: int = 4

    # Runs
    seed: int = 0
    log_level: str = "INFO"
    output_format: str = "json"
    reports_dir: str = "reports"


# Global settings instance
settings = Settings()


def get_reports_dir() -> Path:
    """Get the report output directory, creating it if needed."""
    reports_dir = Path(settings.reports_dir)
    if not reports_dir.is_absolute():
        reports_dir = Path.cwd() / reports_dir
    reports_dir.mkdir(parents=True, exist_ok=True)
    return reports_dir
