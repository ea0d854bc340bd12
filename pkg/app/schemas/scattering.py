"""
散射结果、输入谱、扫频表与偏差报告
"""
from typing import Any, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.linear import MODES

# T_ij: 输出模式 i 由输入模式 j 引起的散射概率；T 矩阵行=输出，列=输入
T_COLUMNS = [f"T_{out}{inp}" for out in MODES for inp in MODES]
SVAC_COLUMNS = [f"svac_{mode}" for mode in MODES]
SOUT_COLUMNS = [f"sout_{mode}" for mode in MODES]
CSV_COLUMNS = ["omega", *T_COLUMNS, *SVAC_COLUMNS, "stable_flag"]
FAILURE_COLUMN = "failure"


class ScatteringResult(BaseModel):
    """单个频率点的散射结果"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    omega: float = Field(..., description="信号频率 ω")
    U: np.ndarray = Field(..., description="散射矩阵（全模型 6×6，RWA 3×3）")
    T: np.ndarray = Field(..., description="3×3 散射概率矩阵")
    S_vac: np.ndarray = Field(..., description="真空噪声谱 (s_a, s_b, s_c)")
    rwa: bool = Field(False, description="True 表示来自 RWA 3×3 路径")
    S_out: Optional[np.ndarray] = Field(None, description="输出谱（给定输入谱时）")
    failure: Optional[str] = Field(None, description="该点失败原因；成功时为 None")

    @model_validator(mode="after")
    def check_shapes(self) -> "ScatteringResult":
        size = 3 if self.rwa else 6
        if np.shape(self.U) != (size, size):
            raise ValueError(f"U must be {size}x{size}")
        if np.shape(self.T) != (3, 3) or np.shape(self.S_vac) != (3,):
            raise ValueError("T must be 3x3 and S_vac a 3-vector")
        return self

    @property
    def ok(self) -> bool:
        return self.failure is None

    @classmethod
    def failed(cls, omega: float, reason: str, rwa: bool = False) -> "ScatteringResult":
        """构造失败点（数值全部为 NaN）"""
        size = 3 if rwa else 6
        nan = complex(np.nan, np.nan)
        return cls(
            omega=omega,
            U=np.full((size, size), nan),
            T=np.full((3, 3), np.nan),
            S_vac=np.full(3, np.nan),
            rwa=rwa,
            failure=reason,
        )

    def row(self) -> dict:
        """展平为一行表格数据"""
        data = {"omega": self.omega}
        data.update(zip(T_COLUMNS, np.asarray(self.T, dtype=float).ravel()))
        data.update(zip(SVAC_COLUMNS, np.asarray(self.S_vac, dtype=float)))
        if self.S_out is not None:
            data.update(zip(SOUT_COLUMNS, np.asarray(self.S_out, dtype=float)))
        return data


SpectrumValue = Any


class InputSpectra(BaseModel):
    """输入场谱 s_in(ω)，常数或逐网格点数组"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    s_a_in: SpectrumValue = 0.0
    s_b_in: SpectrumValue = 0.0
    s_c_in: SpectrumValue = 0.0

    @field_validator("s_a_in", "s_b_in", "s_c_in", mode="before")
    @classmethod
    def non_negative(cls, v: SpectrumValue) -> SpectrumValue:
        array = np.asarray(v, dtype=float)
        if np.any(array < 0) or not np.all(np.isfinite(array)):
            raise ValueError("input spectra must be finite and non-negative")
        return float(array) if array.ndim == 0 else array

    def at(self, index: int = 0) -> np.ndarray:
        """取第 index 个网格点的 (s_a, s_b, s_c)"""
        values = []
        for spectrum in (self.s_a_in, self.s_b_in, self.s_c_in):
            array = np.asarray(spectrum, dtype=float)
            values.append(float(array) if array.ndim == 0 else float(array[index]))
        return np.array(values)

    def check_length(self, count: int) -> None:
        for spectrum in (self.s_a_in, self.s_b_in, self.s_c_in):
            array = np.asarray(spectrum)
            if array.ndim > 0 and array.shape[0] != count:
                raise ValueError(f"input spectrum has {array.shape[0]} points, grid has {count}")


class SweepTable(BaseModel):
    """扫频表：网格与逐点结果"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: np.ndarray = Field(..., description="严格递增的频率网格")
    rows: List[ScatteringResult]
    stable: bool = Field(True, description="模型是否动力学稳定")

    @field_validator("grid", mode="before")
    @classmethod
    def strictly_increasing(cls, v: np.ndarray) -> np.ndarray:
        grid = np.asarray(v, dtype=float).ravel()
        if grid.size == 0:
            raise ValueError("grid must contain at least one point")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        return grid

    @model_validator(mode="after")
    def one_row_per_point(self) -> "SweepTable":
        if len(self.rows) != self.grid.size:
            raise ValueError("one row per grid point is required")
        return self

    @property
    def failures(self) -> List[ScatteringResult]:
        return [row for row in self.rows if not row.ok]

    def T_stack(self) -> np.ndarray:
        """所有点的 T 矩阵，形状 (N, 3, 3)"""
        return np.stack([row.T for row in self.rows])

    def S_vac_stack(self) -> np.ndarray:
        return np.stack([row.S_vac for row in self.rows])

    def to_frame(self) -> pd.DataFrame:
        """
        转为 DataFrame，列顺序固定；有失败点时追加 failure 列

        Returns:
            pd.DataFrame
        """
        frame = pd.DataFrame([row.row() for row in self.rows])
        columns = list(CSV_COLUMNS[:-1])
        if any(row.S_out is not None for row in self.rows):
            columns += SOUT_COLUMNS
        frame = frame.reindex(columns=columns)
        frame["stable_flag"] = int(self.stable)
        if self.failures:
            frame[FAILURE_COLUMN] = [row.failure or "" for row in self.rows]
        return frame


class DeviationReport(BaseModel):
    """全模型与 RWA 模型的偏差报告"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: np.ndarray
    max_abs_T_deviation: float = Field(..., ge=0)
    per_element_deviation: np.ndarray = Field(..., description="3×3，每个元素在网格上的最大偏差")
    worst_frequency: float
    regime_warning: bool = Field(False, description="RWA 适用条件不满足")
    deviation_curve: Optional[np.ndarray] = Field(None, description="每个网格点上的最大偏差")

    @model_validator(mode="after")
    def check_consistency(self) -> "DeviationReport":
        if np.any(np.asarray(self.per_element_deviation) < 0):
            raise ValueError("deviations must be non-negative")
        if not np.any(np.isclose(self.grid, self.worst_frequency, rtol=0, atol=0)):
            raise ValueError("worst_frequency must be a grid point")
        return self

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"omega": self.grid})
        if self.deviation_curve is not None:
            frame["max_deviation"] = self.deviation_curve
        return frame
