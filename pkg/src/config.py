from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache


class Settings(BaseSettings):
    """Application settings"""

    # API Settings
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000

    # Spectral Settings
    SPECTRAL_TOL: float = 1e-10
    POWER_ITER_MAX: int = 10_000
    POWER_ITER_SEED: int = 0

    # Reference Solver Settings
    REFERENCE_TOL: float = 1e-10
    REFERENCE_MAX_ITERS: int = 1_000_000

    # Lyapunov Check Settings
    NONNEG_TOL: float = 1e-12
    ENVELOPE_SLACK: float = 1e-7
    ENVELOPE_FLOOR: float = 1e-20

    # Bench Settings
    OUTPUT_DIR: str = "results"
    MAX_WORKERS: int = 4
    RECORD_WALL_TIME: bool = False
    EPSILON: float = 1e-6

    # Logging Settings
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = "splitbench.log"

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
