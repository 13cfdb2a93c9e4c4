"""Configuration settings for the toolkit."""

import math
import os


class Config:
    """Toolkit configuration (environment overrides, sensible defaults)."""

    # Numerics
    LOG_BASE: float = float(os.getenv("QMARKOV_LOG_BASE", str(math.e)))
    SPECTRAL_CUTOFF: float = float(os.getenv("QMARKOV_SPECTRAL_CUTOFF", "1e-12"))
    SANITIZE_TOLERANCE: float = 1e-8
    STATE_TOLERANCE: float = 1e-10  # Hermiticity / trace / positivity of a LocalState

    # Recovery maps
    RECOVERY_MAP: str = os.getenv("QMARKOV_RECOVERY_MAP", "petz")
    AVERAGED_NODES: int = 201
    AVERAGED_TRUNCATION: float = 10.0

    # Limits
    MAX_GLOBAL_DIM: int = 2 ** 14
    MAX_CHOI_DIM: int = 64

    # Runtime
    MAX_WORKERS: int = int(os.getenv("QMARKOV_MAX_WORKERS", "1"))
    LOG_LEVEL: str = os.getenv("QMARKOV_LOG_LEVEL", "INFO")

    @classmethod
    def validate(cls):
        """Validate numeric configuration."""
        problems = []
        if cls.LOG_BASE <= 0 or cls.LOG_BASE == 1:
            problems.append(f"QMARKOV_LOG_BASE={cls.LOG_BASE}")
        if not 0 < cls.SPECTRAL_CUTOFF < 1e-3:
            problems.append(f"QMARKOV_SPECTRAL_CUTOFF={cls.SPECTRAL_CUTOFF}")
        if cls.MAX_WORKERS < 1:
            problems.append(f"QMARKOV_MAX_WORKERS={cls.MAX_WORKERS}")

        if problems:
            raise ValueError(f"Invalid configuration: {', '.join(problems)}")


config = Config()
