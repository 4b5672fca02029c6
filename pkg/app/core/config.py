from pydantic_settings import BaseSettings
from pydantic import field_validator, model_validator
from typing import Optional, List
import logging


class Settings(BaseSettings):
    # -------------------------
    # Application Info
    # -------------------------
    APP_NAME: str = "qtel"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = True
    LOG_LEVEL: str = "INFO"

    # -------------------------
    # Database (recursion cache)
    # -------------------------
    DATABASE_URL: Optional[str] = "sqlite:///./qtel.db"

    # -------------------------
    # Fixtures
    # -------------------------
    QTEL_FIXTURES: Optional[str] = None  # defaults to <repo>/fixtures

    # -------------------------
    # Randomized checks
    # -------------------------
    SEED: int = 20240917  # every evaluation point is drawn from this seed

    # -------------------------
    # Telescoping search bounds
    # -------------------------
    MAX_ORDER: int = 8
    MAX_NUMDEG: int = 40
    NUMDEG_STEP: int = 1
    SYMBOLIC_P_LIMIT: int = 3  # auto mode certifies published recursions at points above this |p|
    SEARCH_BUDGET_SECONDS: Optional[float] = None  # wall-clock cap on one recursion search
    ANNIHILATION_NMAX: int = 10
    POINTWISE_POINTS: int = 5

    # -------------------------
    # CORS / rate limiting
    # -------------------------
    ALLOWED_ORIGINS: List[str] = [
        "http://localhost:3000",
        "http://localhost:8000",
    ]
    RATE_LIMIT: str = "30/minute"

    @field_validator('SYMBOLIC_P_LIMIT')
    @classmethod
    def validate_symbolic_limit(cls, v):
        if v < 1:
            raise ValueError("SYMBOLIC_P_LIMIT must be at least 1")
        return v

    @field_validator('SEARCH_BUDGET_SECONDS')
    @classmethod
    def validate_search_budget(cls, v):
        if v is not None and v <= 0:
            raise ValueError("SEARCH_BUDGET_SECONDS must be positive")
        return v

    @field_validator('SEED')
    @classmethod
    def validate_seed(cls, v):
        if v < 0 or v >= 2 ** 64:
            raise ValueError("SEED must be a 64-bit unsigned integer")
        return v

    @field_validator('LOG_LEVEL')
    @classmethod
    def validate_log_level(cls, v):
        level = v.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown LOG_LEVEL: {v}")
        return level

    @model_validator(mode="after")
    def validate_numdeg_schedule(self):
        if self.NUMDEG_STEP < 1:
            raise ValueError("NUMDEG_STEP must be positive")
        if self.MAX_NUMDEG < self.NUMDEG_STEP:
            raise ValueError("MAX_NUMDEG must not be below NUMDEG_STEP")
        return self

    def validate_runtime_config(self):
        """Log warnings for settings that make the pipeline very slow"""
        logger = logging.getLogger(__name__)

        warnings = []

        if self.SYMBOLIC_P_LIMIT > 3 and self.SEARCH_BUDGET_SECONDS is None:
            warnings.append(f"SYMBOLIC_P_LIMIT={self.SYMBOLIC_P_LIMIT} - symbolic solves beyond |p|=3 can take hours")

        if self.MAX_ORDER > 12:
            warnings.append(f"MAX_ORDER={self.MAX_ORDER} - escalation may run for a long time")

        if self.ANNIHILATION_NMAX > 20:
            warnings.append(f"ANNIHILATION_NMAX={self.ANNIHILATION_NMAX} - colored Jones values grow quadratically in degree")

        for warning in warnings:
            logger.warning(f"Runtime config warning: {warning}")

    class Config:
        env_file = ".env"
        extra = "ignore"  # ignore extra env vars not defined here


# Create a settings instance
settings = Settings()

# Validate runtime configuration
settings.validate_runtime_config()
