"""
blowup-lab — Runtime Settings
Environment-driven knobs (BLOWUP_LAB_* variables or a local .env file)
and the structlog setup shared by the CLI and the test-suite.
"""
import logging
import os
import sys
from functools import lru_cache
from typing import Optional

import structlog
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


# ─── Settings ─────────────────────────────────────────────────────────────────

class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="BLOWUP_LAB_", env_file=".env", extra="ignore")

    threads:    Optional[int] = Field(default=None, ge=1)   # ensemble concurrency cap
    block_size: int           = Field(default=2048, ge=1)   # paths per ensemble block
    log_level:  str           = "INFO"
    log_json:   bool          = False

    def worker_count(self) -> int:
        return self.threads or os.cpu_count() or 1


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()


# ─── Logging ──────────────────────────────────────────────────────────────────

def configure_logging(level: str = "INFO", json: bool = False) -> None:
    """Route structlog output to stderr; stdout carries result tables only."""
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        numeric = logging.INFO

    renderer = structlog.processors.JSONRenderer() if json else structlog.dev.ConsoleRenderer(colors=False)
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
