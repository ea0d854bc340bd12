"""
RWA 解析结果：理想环行器矩阵、时间反演对称判据、全模型与 RWA 的偏差
"""
import math
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
from loguru import logger

from app.config import settings
from app.core.angles import wrap_phase
from app.core.exceptions import InstabilityError, SingularAtFrequency, UnsupportedPhase
from app.schemas.params import EffectiveParams, SystemParams
from app.schemas.scattering import DeviationReport
from app.services import linearized_service, scattering_service, steady_state_service

# 理想环行器（ω = Δ′ = ω_m，J = |G| = γ/2 时的散射矩阵），作为金标准常数
CIRCULATOR_COUNTERCLOCKWISE = np.array(
    [
        [0, 0, -1j],
        [-1j, 0, 0],
        [0, -1, 0],
    ],
    dtype=complex,
)
CIRCULATOR_CLOCKWISE = np.array(
    [
        [0, -1j, 0],
        [0, 0, -1],
        [-1j, 0, 0],
    ],
    dtype=complex,
)

COUNTERCLOCKWISE = "counterclockwise"  # a→b→c→a
CLOCKWISE = "clockwise"                # a→c→b→a
NO_CIRCULATION = "none"

# (输出, 输入) 索引
_COUNTERCLOCKWISE_PATHS = ((1, 0), (2, 1), (0, 2))
_CLOCKWISE_PATHS = ((2, 0), (0, 1), (1, 2))


def analytic_circulator_matrix(theta: float) -> np.ndarray:
    """
    θ = π/2 或 3π/2 处的理想环行器散射矩阵

    Args:
        theta: 相位差

    Returns:
        np.ndarray: 3×3 常数矩阵（副本）

    Raises:
        UnsupportedPhase: θ 不在 {π/2, 3π/2}（容差 1e−9）
    """
    wrapped = wrap_phase(theta)
    if abs(wrapped - math.pi / 2) <= 1e-9:
        return CIRCULATOR_COUNTERCLOCKWISE.copy()
    if abs(wrapped - 3 * math.pi / 2) <= 1e-9:
        return CIRCULATOR_CLOCKWISE.copy()
    raise UnsupportedPhase(theta)


def is_time_reversal_symmetric(theta: float, tol: Optional[float] = None) -> bool:
    """
    时间反演对称判据：θ 到最近的 π 整数倍距离不超过 tol

    Args:
        theta: 规范不变相位和
        tol: 容差，默认 settings.TIME_REVERSAL_TOL

    Returns:
        bool
    """
    tol = settings.TIME_REVERSAL_TOL if tol is None else tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    distance = abs(theta - math.pi * round(theta / math.pi))
    return distance <= tol


def circulation_direction(T: np.ndarray, threshold: float = 0.5) -> str:
    """
    判断环行方向

    Args:
        T: 3×3 散射概率矩阵
        threshold: 主导通道的最小散射概率

    Returns:
        str: "counterclockwise"、"clockwise" 或 "none"
    """
    ccw = min(T[i, j] for i, j in _COUNTERCLOCKWISE_PATHS)
    cw = min(T[i, j] for i, j in _CLOCKWISE_PATHS)
    if ccw >= threshold and ccw > cw:
        return COUNTERCLOCKWISE
    if cw >= threshold and cw > ccw:
        return CLOCKWISE
    return NO_CIRCULATION


def _resolve(p: SystemParams, eff: Optional[EffectiveParams]) -> EffectiveParams:
    if eff is not None:
        return eff
    state = steady_state_service.solve_steady_state(p)
    return steady_state_service.effective_params(p, state)


def compare_full_vs_rwa(
    p: SystemParams,
    grid: Iterable[float],
    eff: Optional[EffectiveParams] = None,
    jobs: Optional[int] = None,
) -> DeviationReport:
    """
    在网格上比较全模型 T 与 RWA 的 |S|²

    Args:
        p: 系统参数（physical 模式下会先求稳态）
        grid: 频率网格
        eff: 有效参数；为 None 时由 p 求稳态得到
        jobs: 并行线程数

    Returns:
        DeviationReport: 偏差 = max |T_full − |S_rwa|²|

    Raises:
        InstabilityError: 任一模型不稳定
        SingularAtFrequency: 任一网格点奇异
    """
    eff = _resolve(p, eff)
    full = linearized_service.build_full_matrix(eff, p)
    rwa = linearized_service.build_rwa_matrix(eff, p)
    for model in (full, rwa):
        report = linearized_service.stability(model)
        if not report.stable:
            raise InstabilityError(report.margin)

    full_table = scattering_service.sweep(full, grid, jobs=jobs)
    rwa_table = scattering_service.sweep(rwa, grid, jobs=jobs)
    for table in (full_table, rwa_table):
        if table.failures:
            failed = table.failures[0]
            # 偏差报告不接受缺失点
            raise SingularAtFrequency(failed.omega, math.inf)

    deviation = np.abs(full_table.T_stack() - rwa_table.T_stack())
    curve = deviation.reshape(deviation.shape[0], -1).max(axis=1)
    worst = int(np.argmax(curve))
    regime_ok = linearized_service.rwa_regime_ok(eff, p)
    report = DeviationReport(
        grid=full_table.grid,
        max_abs_T_deviation=float(curve[worst]),
        per_element_deviation=deviation.max(axis=0),
        worst_frequency=float(full_table.grid[worst]),
        regime_warning=not regime_ok,
        deviation_curve=curve,
    )
    logger.info(
        f"Full vs RWA: max deviation {report.max_abs_T_deviation:.3e} at omega={report.worst_frequency:.6g}"
        + ("" if regime_ok else " (RWA regime violated)")
    )
    return report


def optimal_point(
    omega_m: float = 10.0,
    gamma: Optional[float] = None,
    theta: float = math.pi / 2,
    coupling: Optional[float] = None,
    gamma_m: Optional[float] = None,
) -> tuple[SystemParams, EffectiveParams]:
    """
    最优环行器参数：Δ′_a = Δ′_b = ω_m，J = G_a = G_b e^{−iθ} = γ/2

    Args:
        omega_m: 机械频率
        gamma: 参考阻尼率，默认 settings.REFERENCE_RATE
        theta: 相位差
        coupling: |G_a| = |G_b|，默认 γ/2
        gamma_m: 机械阻尼，默认 γ

    Returns:
        (SystemParams, EffectiveParams)
    """
    gamma = settings.REFERENCE_RATE if gamma is None else gamma
    coupling = gamma / 2 if coupling is None else coupling
    gamma_m = gamma if gamma_m is None else gamma_m
    return steady_state_service.effective_system(
        delta_a_eff=omega_m,
        delta_b_eff=omega_m,
        omega_m=omega_m,
        J=gamma / 2,
        gamma_a=gamma,
        gamma_b=gamma,
        gamma_m=gamma_m,
        G_a=coupling,
        G_b=coupling,
        theta=theta,
    )


def deviation_trend(
    omega_m_values: Sequence[float],
    theta: float = math.pi / 2,
    half_width: Optional[float] = None,
    count: int = 201,
) -> Dict[float, float]:
    """
    最优点上全模型与 RWA 的偏差随 ω_m 的变化

    Args:
        omega_m_values: ω_m 列表
        theta: 相位差
        half_width: 网格半宽（围绕 ω_m），默认 2γ
        count: 网格点数

    Returns:
        dict: ω_m → 最大偏差
    """
    gamma = settings.REFERENCE_RATE
    half_width = 2 * gamma if half_width is None else half_width
    trend: Dict[float, float] = {}
    for omega_m in omega_m_values:
        p, eff = optimal_point(omega_m=omega_m, theta=theta)
        grid = np.linspace(omega_m - half_width, omega_m + half_width, count)
        trend[float(omega_m)] = compare_full_vs_rwa(p, grid, eff=eff).max_abs_T_deviation
    return trend

