"""
Configuration settings for the mixed-ADC DOA toolkit
"""
from functools import lru_cache
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    # Application
    app_name: str = "Mixed-ADC DOA Toolkit"
    app_version: str = "1.0.0"
    log_level: str = "INFO"

    # Output
    output_dir: str = "./data/results"

    # Experiment defaults
    workers: int = 4
    default_trials: int = 2000
    api_max_trials: int = 5000
    max_failed_fraction: float = 0.01
    monotone_tolerance: float = 0.10  # relative RMSE rise allowed between SNR points

    # Quantizer design
    lloyd_tolerance: float = 1e-12
    lloyd_max_iter: int = 20000

    # Oracle validation
    validation_tolerance: float = 1e-8
    validation_floor: float = 1e-3  # relative to the ideal-array Fisher scale

    # Receiver power model (mW unless noted)
    p_aps_mw: float = 1.0
    p_lna_mw: float = 20.0
    p_mix_mw: float = 30.3
    p_fil_mw: float = 2.5
    p_ifa_mw: float = 3.0
    p_syc_mw: float = 50.5
    p_agc_mw: float = 2.0
    v_dd: float = 3.0  # V
    bandwidth_hz: float = 20e6
    l_min_m: float = 0.5e-6
    f_cor_hz: float = 1e6

    class Config:
        env_prefix = "DOA_"
        env_file = "../.env"
        env_file_encoding = "utf-8"
        extra = "ignore"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


# Export settings instance
settings = get_settings()
