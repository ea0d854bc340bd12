"""
散射服务：U(ω)、散射概率 T(ω)、真空噪声谱、输出谱与扫频

U(ω) = Γ(M − iωI)⁻¹Γ − I，通过 LU 分解对 Γ 的六列求解线性方程组得到，不显式求逆。
"""
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from loguru import logger
from scipy.linalg import LinAlgWarning, get_lapack_funcs, lu_factor, lu_solve

from app.config import settings
from app.core.exceptions import ConfigValidationError, SingularAtFrequency
from app.schemas.linear import LinearModel, RwaModel
from app.schemas.scattering import InputSpectra, ScatteringResult, SweepTable
from app.services.linearized_service import stability

AnyModel = Union[LinearModel, RwaModel]


def condition_estimate(lu: np.ndarray, anorm: float) -> float:
    """
    由 LU 因子估计 1-范数条件数（LAPACK gecon）

    Args:
        lu: lu_factor 返回的 LU 因子
        anorm: 原矩阵的 1-范数

    Returns:
        float: 条件数估计，奇异时为 inf
    """
    gecon, = get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    if info != 0 or rcond <= 0 or not math.isfinite(rcond):
        return math.inf
    return 1.0 / rcond


def _response(m: AnyModel, omega: float, threshold: Optional[float]) -> np.ndarray:
    """Γ(M − iωI)⁻¹Γ − I"""
    threshold = settings.SINGULAR_CONDITION_THRESHOLD if threshold is None else threshold
    A = m.M - 1j * omega * np.eye(m.size)
    with warnings.catch_warnings():
        # 奇异性由条件数估计统一判定
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=True)
    cond = condition_estimate(lu, float(np.linalg.norm(A, 1)))
    if cond > threshold:
        logger.debug(f"Singular at omega={omega:.12g}: condition estimate {cond:.3e}")
        raise SingularAtFrequency(float(omega), cond)
    X = lu_solve((lu, piv), m.Gamma.astype(complex))
    return m.Gamma @ X - np.eye(m.size)


def scattering_matrix(m: LinearModel, omega: float, threshold: Optional[float] = None) -> np.ndarray:
    """
    全模型散射矩阵 U(ω)（6×6）

    Args:
        m: 线性模型
        omega: 信号频率
        threshold: 条件数阈值，默认 settings.SINGULAR_CONDITION_THRESHOLD

    Returns:
        np.ndarray: 6×6 复矩阵

    Raises:
        SingularAtFrequency: M − iωI 数值奇异
    """
    return _response(m, omega, threshold)


def rwa_scattering(m: RwaModel, omega: float, threshold: Optional[float] = None) -> np.ndarray:
    """
    RWA 散射矩阵 S(ω) = Γ₃(M′ − iωI)⁻¹Γ₃ − I（3×3）

    Raises:
        SingularAtFrequency: M′ − iωI 数值奇异
    """
    return _response(m, omega, threshold)


def transmission(U: np.ndarray) -> np.ndarray:
    """
    散射概率矩阵 T（行=输出模式，列=输入模式）

    6×6：T_ij = |U_ij|² + |U_i,j+3|²；3×3（RWA）：T_ij = |S_ij|²。

    Args:
        U: 散射矩阵

    Returns:
        np.ndarray: 3×3 实矩阵
    """
    U = np.asarray(U)
    power = np.abs(U) ** 2
    if U.shape == (3, 3):
        return power
    if U.shape != (6, 6):
        raise ValueError(f"scattering matrix must be 6x6 or 3x3, got {U.shape}")
    return power[:3, :3] + power[:3, 3:]


def vacuum_spectra(U: np.ndarray) -> np.ndarray:
    """
    真空噪声谱 s_v,vac = Σ_{j∈共轭块} |U_vj|²

    RWA 模型没有反旋转项，返回零。

    Returns:
        np.ndarray: (s_a, s_b, s_c)
    """
    U = np.asarray(U)
    if U.shape == (3, 3):
        return np.zeros(3)
    if U.shape != (6, 6):
        raise ValueError(f"scattering matrix must be 6x6 or 3x3, got {U.shape}")
    return np.sum(np.abs(U[:3, 3:]) ** 2, axis=1)


def output_spectra(T: np.ndarray, S_vac: np.ndarray, S_in: Sequence[float]) -> np.ndarray:
    """
    输出谱 S_out = T·S_in + S_vac

    Raises:
        ConfigValidationError: S_in 存在负值
    """
    S_in = np.asarray(S_in, dtype=float)
    if S_in.shape != (3,) or np.any(S_in < 0):
        raise ConfigValidationError("input spectra must be a non-negative 3-vector", {"S_in": S_in.tolist()})
    return np.asarray(T) @ S_in + np.asarray(S_vac)


def nonreciprocity_contrast(T: np.ndarray) -> float:
    """T_ba − T_ab（有符号）"""
    return float(T[1, 0] - T[0, 1])


def isolation_db(T: np.ndarray) -> float:
    """隔离度 10·log10(T_ba / T_ab)"""
    if T[0, 1] == 0:
        return math.inf
    if T[1, 0] == 0:
        return -math.inf
    return 10.0 * math.log10(T[1, 0] / T[0, 1])


def scattering_point(
    m: AnyModel,
    omega: float,
    spectra: Optional[InputSpectra] = None,
    index: int = 0,
    threshold: Optional[float] = None,
) -> ScatteringResult:
    """
    单频点完整结果（U、T、S_vac，可选 S_out）

    Raises:
        SingularAtFrequency
    """
    rwa = isinstance(m, RwaModel)
    U = _response(m, omega, threshold)
    T = transmission(U)
    S_vac = vacuum_spectra(U)
    S_out = output_spectra(T, S_vac, spectra.at(index)) if spectra is not None else None
    return ScatteringResult(omega=float(omega), U=U, T=T, S_vac=S_vac, rwa=rwa, S_out=S_out)


def _validate_grid(grid: Iterable[float]) -> np.ndarray:
    points = np.asarray(list(grid) if not isinstance(grid, np.ndarray) else grid, dtype=float).ravel()
    if points.size == 0:
        raise ConfigValidationError("frequency grid is empty")
    if not np.all(np.isfinite(points)):
        raise ConfigValidationError("frequency grid contains non-finite values")
    if points.size > 1 and not np.all(np.diff(points) > 0):
        raise ConfigValidationError("frequency grid must be strictly increasing")
    return points


def sweep(
    m: AnyModel,
    grid: Iterable[float],
    jobs: Optional[int] = None,
    spectra: Optional[InputSpectra] = None,
    threshold: Optional[float] = None,
) -> SweepTable:
    """
    扫频：每个网格点一行，点与点之间相互独立

    奇异点记录为失败行而不中断扫频；结果按网格顺序装配，与完成顺序无关。

    Args:
        m: 线性模型（全模型或 RWA）
        grid: 严格递增的频率网格
        jobs: 并行线程数，默认 settings.DEFAULT_JOBS
        spectra: 输入谱，给定时计算输出谱
        threshold: 条件数阈值

    Returns:
        SweepTable

    Raises:
        ConfigValidationError: 网格或输入谱不合法
    """
    points = _validate_grid(grid)
    jobs = settings.DEFAULT_JOBS if jobs is None else max(1, int(jobs))
    rwa = isinstance(m, RwaModel)
    if spectra is not None:
        try:
            spectra.check_length(points.size)
        except ValueError as exc:
            raise ConfigValidationError(str(exc)) from exc

    def evaluate(index: int) -> ScatteringResult:
        omega = float(points[index])
        try:
            return scattering_point(m, omega, spectra=spectra, index=index, threshold=threshold)
        except SingularAtFrequency as exc:
            return ScatteringResult.failed(omega, f"singular(cond={exc.condition_estimate:.3e})", rwa=rwa)

    indices = range(points.size)
    if jobs > 1 and points.size > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(evaluate, indices))
    else:
        rows = [evaluate(i) for i in indices]

    table = SweepTable(grid=points, rows=rows, stable=stability(m).stable)
    if table.failures:
        logger.warning(f"Sweep finished with {len(table.failures)} singular points out of {points.size}")
    else:
        logger.debug(f"Sweep finished: {points.size} points, jobs={jobs}, rwa={rwa}")
    return table


def rwa_sweep(m: RwaModel, grid: Iterable[float], jobs: Optional[int] = None) -> SweepTable:
    """RWA 路径扫频（T = |S|²，S_vac = 0）"""
    return sweep(m, grid, jobs=jobs)
