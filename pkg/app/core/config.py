"""
Core configuration management for the exclusion-gap toolkit.
Loads environment variables and provides centralized settings.
"""

import os
from pathlib import Path
from dotenv import load_dotenv



# Load environment variables
ROOT_DIR = Path(__file__).parent.parent.parent
load_dotenv(ROOT_DIR / '.env')


class Settings:
    """Application settings loaded from environment variables."""

    VERSION: str = "1.0.0"
    SCHEMA_VERSION: str = "1"

    # Enumeration and solver limits
    ENUMERATION_CAP: int = int(os.environ.get('ENUMERATION_CAP', 2**24))
    DENSE_CAP: int = int(os.environ.get('DENSE_CAP', 4096))
    ZERO_TOL: float = float(os.environ.get('ZERO_TOL', 1e-9))
    LANCZOS_TOL: float = float(os.environ.get('LANCZOS_TOL', 1e-8))
    LANCZOS_MAXITER: int = int(os.environ.get('LANCZOS_MAXITER', 20000))
    ENUMERATION_CACHE: int = int(os.environ.get('ENUMERATION_CACHE', 256))

    # Identity checks
    CHECK_TOL: float = float(os.environ.get('CHECK_TOL', 1e-12))
    EIGEN_TOL: float = float(os.environ.get('EIGEN_TOL', 1e-10))
    RANDOM_SEED: int = int(os.environ.get('RANDOM_SEED', 20240607))
    N_RANDOM_FUNCTIONS: int = int(os.environ.get('N_RANDOM_FUNCTIONS', 100))

    # Relaxation estimator
    ACF_UPPER: float = float(os.environ.get('ACF_UPPER', 0.5))
    ACF_LOWER: float = float(os.environ.get('ACF_LOWER', 0.05))
    BOOTSTRAP_RESAMPLES: int = int(os.environ.get('BOOTSTRAP_RESAMPLES', 200))
    MIN_SAMPLES: int = int(os.environ.get('MIN_SAMPLES', 1000))

    # Performance Configuration
    MAX_JOBS: int = int(os.environ.get('MAX_JOBS', 1))

    # Output Configuration
    OUTPUT_DIR: str = os.environ.get('EXGAP_OUTPUT_DIR', 'results')

    # Logging Configuration
    LOG_DIR: str = os.environ.get('LOG_DIR', 'logs')
    LOG_LEVEL: str = os.environ.get('LOG_LEVEL', 'INFO')
    LOG_TIMEZONE: str = os.environ.get('LOG_TIMEZONE', 'UTC')


settings = Settings()
