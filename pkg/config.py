"""Configuración global del toolkit."""
from functools import lru_cache

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Configuración del toolkit usando Pydantic Settings."""

    project_name: str = "Strong Predictability Toolkit"
    version: str = "1.0.0"

    # Logging
    log_level: str = "INFO"

    # Precisión (bits) para las cotas certificadas de Z(T)
    default_precision_bits: int = 40

    # Búsqueda acotada de complejidad
    complexity_cap_limit: int = 24
    default_budget: int = 256

    # Martingalas
    fairness_depth_limit: int = 16
    martingale_cache_depth: int = 20

    # Heurística de longitud de rachas
    default_tail_fraction: str = "1/2"
    estimate_sample_fraction: str = "1/2"

    # Tabla de fases
    parallel_temperatures: bool = True

    model_config = {
        "env_file": ".env",
        "case_sensitive": False,
    }


@lru_cache()
def get_settings() -> Settings:
    """Obtiene la configuración singleton."""
    return Settings()
