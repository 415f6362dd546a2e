from pathlib import Path
from pydantic_settings import BaseSettings
from decouple import config

MIB = 1024 * 1024
KIB = 1024


class Settings(BaseSettings):
    """Simulator settings loaded from environment variables."""

    # Heap geometry
    heap_bytes: int = config("GCSIM_HEAP_BYTES", default=64 * MIB, cast=int)
    region_bytes: int = config("GCSIM_REGION_BYTES", default=32 * KIB, cast=int)
    gen0_max_bytes: int = config("GCSIM_GEN0_MAX_BYTES", default=8 * MIB, cast=int)
    tlab_bytes: int = config("GCSIM_TLAB_BYTES", default=1 * KIB, cast=int)
    survivor_regions: int = config("GCSIM_SURVIVOR_REGIONS", default=2, cast=int)

    # Collection policy
    promotion_age: int = config("GCSIM_PROMOTION_AGE", default=2, cast=int)
    mixed_trigger_occupancy: float = config("GCSIM_MIXED_TRIGGER_OCCUPANCY", default=0.45, cast=float)
    region_live_threshold: float = config("GCSIM_REGION_LIVE_THRESHOLD", default=0.5, cast=float)
    full_trigger_occupancy: float = config("GCSIM_FULL_TRIGGER_OCCUPANCY", default=0.95, cast=float)
    pause_alpha: float = config("GCSIM_PAUSE_ALPHA", default=0.5, cast=float)

    # Determinism and checking
    deterministic: bool = config("GCSIM_DETERMINISTIC", default=True, cast=bool)
    debug_checks: bool = config("GCSIM_DEBUG_CHECKS", default=False, cast=bool)

    # Lifetime profiler
    long_lived_epochs: int = config("GCSIM_LONG_LIVED_EPOCHS", default=4, cast=int)
    cohort_tolerance: int = config("GCSIM_COHORT_TOLERANCE", default=2, cast=int)

    # Output
    output_dir: str = config("GCSIM_OUTPUT_DIR", default="./data/runs")
    results_db_path: str = config("GCSIM_RESULTS_DB", default="./data/gc_runs.db")

    # Logging
    log_level: str = config("LOG_LEVEL", default="INFO")
    log_file: str = config("LOG_FILE", default="./logs/gcsim.log")

    model_config = {
        "env_file": ".env",
        "case_sensitive": False
    }


# Global settings instance
settings = Settings()


def ensure_directories():
    """Ensure required directories exist."""
    Path(settings.log_file).parent.mkdir(parents=True, exist_ok=True)
    Path(settings.output_dir).mkdir(parents=True, exist_ok=True)
    Path(settings.results_db_path).parent.mkdir(parents=True, exist_ok=True)
