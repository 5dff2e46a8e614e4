from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict

class Settings(BaseSettings):
    """
    Toolkit defaults loaded from environment variables (or a local .env file).
    """
    model_config = SettingsConfigDict(env_file='.env', env_file_encoding='utf-8', extra='ignore')

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None

    # Wavelength segmentation
    BAND_BOUNDARY_NM: float = 1050.0

    # Coded aperture / dispersion
    MASK_DENSITY: float = 0.5
    MASK_SEED: int = 42
    SHIFT_PER_CHANNEL: int = 1

    # Dense operator oracle guard (rows * cols)
    DENSE_ORACLE_MAX_ENTRIES: int = 10_000

    # Phantoms
    LED_FWHM_NM: float = 40.0

    # Solvers
    TWIST_ALPHA: float = 1.9
    TWIST_BETA: float = 1.0
    TAU_SCALE: float = 0.01
    MAX_ITERS: int = 200
    REL_OBJ_TOL: float = 1e-5
    TV_INNER_ITERS: int = 10
    GAPTV_WEIGHT: float = 0.05

settings = Settings()
