"""Configuration management for the PT-SUSY toolkit."""

from pydantic_settings import BaseSettings
from typing import Literal
from functools import lru_cache


class Settings(BaseSettings):
    """Numerical defaults loaded from environment variables (PTSUSY_*)."""

    # Trap
    separation: float = 2.2  # calibrated against |E0| = 0.3920 at gamma=0

    # Integrator
    step: float = 1e-3
    nonlinear_step: float = 1e-2  # the cubic term keeps nonlinear shots in scalar Python
    overflow_guard: float = 1e150
    nonlinear_tail: float = 2.0  # past a/2; the nonlinear decay condition is exact there

    # Newton root search
    tolerance: float = 1e-10
    max_iterations: int = 50
    fd_relative_step: float = 1e-7
    fd_floor: float = 1e-9

    # Superpotentials
    node_threshold: float = 1e-8
    pole_threshold: float = 1e8

    # Continuation and sweeps
    continuation_bisections: int = 6
    gamma_step: float = 0.005
    ep_refine_step: float = 0.0005
    ep_refine_width: float = 0.01
    ep_gap: float = 1e-4
    ep_bracket_width: float = 1e-6

    # Output
    display_extent: float = 8.0
    jobs: int = 1
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "WARNING"

    class Config:
        env_prefix = "PTSUSY_"
        env_file = ".env"
        env_file_encoding = "utf-8"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
