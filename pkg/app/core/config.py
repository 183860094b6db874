from typing import Annotated, Any, Literal

from pydantic import (
    AnyUrl,
    BeforeValidator,
    computed_field,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing_extensions import Self


def parse_cors(v: Any) -> list[str] | str:
    if isinstance(v, str) and not v.startswith("["):
        return [i.strip() for i in v.split(",") if i.strip()]
    elif isinstance(v, list | str):
        return v
    raise ValueError(v)


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_ignore_empty=True,
        extra="ignore",
    )

    # Application
    PROJECT_NAME: str = "Tree Homomorphisms"
    API_V1_STR: str = "/api/v1"
    ENVIRONMENT: Literal["local", "staging", "production"] = "local"
    LOG_LEVEL: str = "INFO"

    # CORS
    BACKEND_CORS_ORIGINS: Annotated[
        list[AnyUrl] | str, BeforeValidator(parse_cors)
    ] = []

    @computed_field
    @property
    def all_cors_origins(self) -> list[str]:
        return [str(origin).rstrip("/") for origin in self.BACKEND_CORS_ORIGINS]

    # Rate Limiting
    RATE_LIMIT_ENABLED: bool = True
    RATE_LIMIT_STORAGE_URI: str = "memory://"  # Use Redis URI in production
    RATE_LIMIT_DEFAULT: str = "100/minute"  # General API limit
    RATE_LIMIT_HEAVY: str = "10/minute"  # Enumeration, sampling, solver endpoints

    # Security
    ALLOWED_HOSTS: list[str] = ["*"]  # Restrict in production

    # Enumeration
    ENUMERATION_NODE_BUDGET: int = 5_000_000  # DFS node cap for CLI runs
    API_NODE_BUDGET: int = 200_000  # DFS node cap per HTTP request

    # Dynamics
    BURN_IN_FACTOR: int = 50  # burn-in = factor * n^m steps
    API_MAX_STEPS: int = 20_000  # chain steps accepted per HTTP request
    COUPLING_DEVIATION_BOUND: int = 2

    # Variational solver
    SOLVER_MAX_ITERATIONS: int = 2000
    SOLVER_TOLERANCE: float = 1e-4  # stall tolerance on the objective
    SOLVER_STEP_SCALE: float = 0.5  # c in the c/sqrt(t) step size
    LIPSCHITZ_SWEEPS: int = 200

    @model_validator(mode="after")
    def _check_numeric_settings(self) -> Self:
        for name in (
            "ENUMERATION_NODE_BUDGET",
            "API_NODE_BUDGET",
            "BURN_IN_FACTOR",
            "API_MAX_STEPS",
            "SOLVER_MAX_ITERATIONS",
            "LIPSCHITZ_SWEEPS",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.SOLVER_TOLERANCE < 1:
            raise ValueError("SOLVER_TOLERANCE must lie in (0, 1)")
        if self.SOLVER_STEP_SCALE <= 0:
            raise ValueError("SOLVER_STEP_SCALE must be positive")
        return self


settings = Settings()  # type: ignore
