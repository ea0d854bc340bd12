"""
运行配置（JSON 文档）模型
"""
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.angles import parse_angle
from app.schemas.params import ComplexNumber, SystemParams


class RunMode(str, Enum):
    """参数模式"""
    PHYSICAL = "physical"    # 原始驱动，经稳态求解得到有效参数
    EFFECTIVE = "effective"  # 直接给出 Δ′、G、θ


class Command(str, Enum):
    """CLI 命令"""
    STEADY_STATE = "steady-state"
    STABILITY = "stability"
    SWEEP = "sweep"
    CIRCULATOR = "circulator"
    DESIGN_DRIVES = "design-drives"
    COMPARE_RWA = "compare-rwa"
    THETA_SCAN = "theta-scan"
    PRESET = "preset"


class EffectiveBlock(BaseModel):
    """effective 模式参数块"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    delta_a_eff: float
    delta_b_eff: float
    omega_m: float = Field(..., gt=0)
    J: float = 0.0
    gamma_a: float = Field(..., gt=0)
    gamma_b: float = Field(..., gt=0)
    gamma_m: float = Field(..., gt=0)
    G_a: ComplexNumber = 0j
    G_b: ComplexNumber = 0j


class PhysicalBlock(SystemParams):
    """physical 模式参数块（SystemParams 的全部字段，禁止多余键）"""

    model_config = ConfigDict(extra="forbid", frozen=True)


class GridSpec(BaseModel):
    """频率网格：端点包含、均匀间隔"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    min: float
    max: float
    count: int = Field(..., ge=1)

    @model_validator(mode="after")
    def check_bounds(self) -> "GridSpec":
        if self.count > 1 and not self.max > self.min:
            raise ValueError("grid max must exceed min when count > 1")
        return self

    def points(self) -> np.ndarray:
        if self.count == 1:
            return np.array([float(self.min)])
        return np.linspace(self.min, self.max, self.count)


class DesignBlock(BaseModel):
    """design-drives 命令的目标"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    target_G: float = Field(..., gt=0, description="目标 |G_a|")
    exact: bool = False


class SpectraBlock(BaseModel):
    """平稳输入谱（常数）"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    s_a_in: float = Field(0.0, ge=0)
    s_b_in: float = Field(0.0, ge=0)
    s_c_in: float = Field(0.0, ge=0)


class RunConfig(BaseModel):
    """一次运行的完整配置"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: RunMode
    params: Dict[str, Any] = Field(..., description="扁平参数表（速率单位）")
    grid: GridSpec
    theta: List[float] = Field(default_factory=list, description="相位差列表（弧度）")
    output_dir: Optional[str] = None
    design: Optional[DesignBlock] = None
    spectra: Optional[SpectraBlock] = None
    name: str = Field("run", pattern=r"^[A-Za-z0-9_.-]+$", description="输出文件名前缀")
    command: Optional[Command] = Field(None, description="未指定 --command 时使用的命令")

    @field_validator("command")
    @classmethod
    def no_nested_preset(cls, v: Optional[Command]) -> Optional[Command]:
        if v is Command.PRESET:
            raise ValueError("a run document cannot itself request a preset")
        return v

    @field_validator("theta", mode="before")
    @classmethod
    def parse_thetas(cls, v: Any) -> List[float]:
        """θ 支持数值或 "3pi/4" 字符串"""
        if v is None:
            return []
        if not isinstance(v, (list, tuple)):
            v = [v]
        return [parse_angle(item) for item in v]

    @model_validator(mode="after")
    def check_params_block(self) -> "RunConfig":
        # 校验参数块与模式匹配，错误直接抛出
        self.parameter_block()
        return self

    def parameter_block(self) -> EffectiveBlock | PhysicalBlock:
        """按模式解析参数块"""
        if self.mode is RunMode.EFFECTIVE:
            return EffectiveBlock.model_validate(self.params)
        return PhysicalBlock.model_validate(self.params)
