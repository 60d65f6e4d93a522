"""msquantile configuration."""

from __future__ import annotations

from pathlib import Path
from typing import Literal, get_args

from pydantic import Field
from pydantic_settings import BaseSettings


LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
LOG_LEVELS: tuple[str, ...] = get_args(LogLevel)


class MultiscaleSettings(BaseSettings):
    """Defaults for simulations, benchmarks and logging."""

    default_reps: int = Field(
        default=5000,
        ge=1,
        description="Monte Carlo repetitions when --reps is not given.",
    )
    workers: int = Field(default=1, ge=1)
    quadratic_cap: int = Field(
        default=50_000,
        ge=1,
        description="Largest n timed with the O(n^2) oracle in benchmarks.",
    )
    cubic_cap: int = Field(
        default=2_000,
        ge=1,
        description="Largest n timed with the O(n^3) oracle in benchmarks.",
    )
    bench_seed: int = Field(default=0, ge=0)
    compensated_summation: bool = Field(
        default=False,
        description="Use compensated cumulative sums (worth it for n > 1e7).",
    )
    log_level: LogLevel = Field(default="WARNING")

    model_config = {
        "env_prefix": "MSQUANTILE_",
        "env_file": (
            str(Path.home() / ".local" / "share" / "msquantile" / ".env"),
            ".env",
        ),
        "env_file_encoding": "utf-8",
        "extra": "ignore",
    }


_config: MultiscaleSettings | None = None


def get_config() -> MultiscaleSettings:
    """Get msquantile configuration."""
    global _config
    if _config is None:
        _config = MultiscaleSettings()
    return _config
