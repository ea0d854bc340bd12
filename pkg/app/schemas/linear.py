"""
线性化模型

基矢顺序固定为 (δa, δb, δc, δa†, δb†, δc†)，下游所有 U_ij 索引都依赖该顺序：
行/列 0..5 依次对应 a, b, c, a†, b†, c†。RWA 模型只保留前三个 (δa, δb, δc)。
"""
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

BASIS_ORDER = ("a", "b", "c", "a_dag", "b_dag", "c_dag")
MODES = ("a", "b", "c")


def _square(value: np.ndarray, size: int, name: str) -> np.ndarray:
    array = np.asarray(value)
    if array.shape != (size, size):
        raise ValueError(f"{name} must be {size}x{size}, got {array.shape}")
    return array


class LinearModel(BaseModel):
    """6×6 系数矩阵 M 与阻尼矩阵 Γ"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    M: np.ndarray = Field(..., description="系数矩阵 M（复数 6×6）")
    Gamma: np.ndarray = Field(..., description="diag(√γ_a, √γ_b, √γ_m, √γ_a, √γ_b, √γ_m)")

    @field_validator("M", mode="before")
    @classmethod
    def check_m(cls, v: np.ndarray) -> np.ndarray:
        return _square(v, 6, "M").astype(complex)

    @field_validator("Gamma", mode="before")
    @classmethod
    def check_gamma(cls, v: np.ndarray) -> np.ndarray:
        return _square(v, 6, "Gamma").astype(float)

    @property
    def size(self) -> int:
        return 6


class RwaModel(BaseModel):
    """旋波近似下的 3×3 矩阵 M′ 与 Γ₃"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    Mp: np.ndarray = Field(..., description="系数矩阵 M′（复数 3×3）")
    Gamma3: np.ndarray = Field(..., description="diag(√γ_a, √γ_b, √γ_m)")

    @field_validator("Mp", mode="before")
    @classmethod
    def check_mp(cls, v: np.ndarray) -> np.ndarray:
        return _square(v, 3, "Mp").astype(complex)

    @field_validator("Gamma3", mode="before")
    @classmethod
    def check_gamma3(cls, v: np.ndarray) -> np.ndarray:
        return _square(v, 3, "Gamma3").astype(float)

    @property
    def size(self) -> int:
        return 3

    # 与 LinearModel 同名访问，便于散射求解共用
    @property
    def M(self) -> np.ndarray:
        return self.Mp

    @property
    def Gamma(self) -> np.ndarray:
        return self.Gamma3


class StabilityReport(BaseModel):
    """稳定性报告"""

    model_config = ConfigDict(frozen=True)

    eigenvalue_real_parts: List[float] = Field(..., description="本征值实部（升序）")
    stable: bool
    margin: float = Field(..., description="最小实部")
