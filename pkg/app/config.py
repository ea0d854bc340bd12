"""
应用配置管理
"""
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator
from functools import lru_cache


class Settings(BaseSettings):
    """应用配置类"""

    # Application
    APP_NAME: str = "OptomechScatter"
    APP_VERSION: str = "1.0.0"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = ""  # 为空时不写文件日志

    # Output
    OUTPUT_DIR: str = "output"  # 默认输出目录，可被配置文件的 output_dir 覆盖

    # Units: 所有速率以参考阻尼率 γ 为单位
    REFERENCE_RATE: float = 1.0

    # Steady state (自洽迭代)
    STEADY_STATE_TOL: float = 1e-12
    STEADY_STATE_MAX_ITER: int = 10000
    STEADY_STATE_DAMPING: float = 0.5
    ROOT_SCAN_POINTS: int = 4001

    # Linear algebra
    STABILITY_EPSILON: float = 1e-10
    SINGULAR_CONDITION_THRESHOLD: float = 1e12

    # Regime checks
    RWA_REGIME_RATIO: float = 5.0
    LINEARIZATION_MIN_OCCUPANCY: float = 10.0
    TIME_REVERSAL_TOL: float = 1e-9

    # CSV / sweep
    CSV_SIGNIFICANT_DIGITS: int = 12
    DEFAULT_JOBS: int = 1

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def normalize_log_level(cls, v: str) -> str:
        """日志级别统一为大写"""
        return str(v).strip().upper()

    @field_validator(
        "REFERENCE_RATE",
        "STEADY_STATE_TOL",
        "STABILITY_EPSILON",
        "SINGULAR_CONDITION_THRESHOLD",
        "RWA_REGIME_RATIO",
        "TIME_REVERSAL_TOL",
    )
    @classmethod
    def must_be_positive(cls, v: float) -> float:
        """容差与阈值必须为正"""
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("STEADY_STATE_DAMPING")
    @classmethod
    def damping_in_unit_interval(cls, v: float) -> float:
        """阻尼因子 λ 必须在 (0, 1] 内"""
        if not 0 < v <= 1:
            raise ValueError("damping must lie in (0, 1]")
        return v

    @field_validator("STEADY_STATE_MAX_ITER", "CSV_SIGNIFICANT_DIGITS", "DEFAULT_JOBS", "ROOT_SCAN_POINTS")
    @classmethod
    def must_be_at_least_one(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v


@lru_cache()
def get_settings() -> Settings:
    """获取配置单例"""
    return Settings()


settings = get_settings()
