"""
线性化服务：系数矩阵 M、RWA 矩阵 M′ 与稳定性分析

基矢顺序 (δa, δb, δc, δa†, δb†, δc†)，索引 0..5；见 app.schemas.linear。
"""
from typing import Optional, Union

import numpy as np
import scipy.linalg
from loguru import logger

from app.config import settings
from app.core.exceptions import EigSolverFailure
from app.schemas.linear import LinearModel, RwaModel, StabilityReport
from app.schemas.params import EffectiveParams, SystemParams

# Π：交换 i ↔ i+3，Π M Π = conj(M)（J 为实数时）
PARTICLE_HOLE_SWAP = np.block(
    [[np.zeros((3, 3)), np.eye(3)], [np.eye(3), np.zeros((3, 3))]]
)


def damping_matrix(p: SystemParams, full: bool = True) -> np.ndarray:
    """Γ = diag(√γ_a, √γ_b, √γ_m[, √γ_a, √γ_b, √γ_m])"""
    roots = np.sqrt([p.gamma_a, p.gamma_b, p.gamma_m])
    return np.diag(np.concatenate([roots, roots]) if full else roots)


def build_full_matrix(eff: EffectiveParams, p: SystemParams) -> LinearModel:
    """
    组装 6×6 系数矩阵 M

    Args:
        eff: 有效参数（Δ′、G）
        p: 系统参数（J、ω_m、阻尼）

    Returns:
        LinearModel
    """
    Ga, Gb, J = eff.G_a, eff.G_b, p.J
    Ga_c, Gb_c = Ga.conjugate(), Gb.conjugate()
    da, db, wm = eff.delta_a_eff, eff.delta_b_eff, p.omega_m
    ka, kb, km = p.gamma_a / 2, p.gamma_b / 2, p.gamma_m / 2

    M = np.array(
        [
            [ka + 1j * da, 1j * J, 1j * Ga, 0, 0, 1j * Ga],
            [1j * J, kb + 1j * db, 1j * Gb, 0, 0, 1j * Gb],
            [1j * Ga_c, 1j * Gb_c, km + 1j * wm, 1j * Ga, 1j * Gb, 0],
            [0, 0, -1j * Ga_c, ka - 1j * da, -1j * J, -1j * Ga_c],
            [0, 0, -1j * Gb_c, -1j * J, kb - 1j * db, -1j * Gb_c],
            [-1j * Ga_c, -1j * Gb_c, 0, -1j * Ga, -1j * Gb, km - 1j * wm],
        ],
        dtype=complex,
    )
    return LinearModel(M=M, Gamma=damping_matrix(p))


def rwa_regime_ok(eff: EffectiveParams, p: SystemParams, ratio: Optional[float] = None) -> bool:
    """
    RWA 适用条件 ω_m ≈ Δ′ ≫ {J, |G|, γ}

    Args:
        ratio: "≫" 的倍数，默认 settings.RWA_REGIME_RATIO

    Returns:
        bool
    """
    ratio = settings.RWA_REGIME_RATIO if ratio is None else ratio
    small = max(abs(p.J), abs(eff.G_a), abs(eff.G_b), p.gamma_a, p.gamma_b, p.gamma_m)
    near = max(abs(eff.delta_a_eff - p.omega_m), abs(eff.delta_b_eff - p.omega_m))
    return p.omega_m >= ratio * small and near <= p.omega_m / ratio


def build_rwa_matrix(eff: EffectiveParams, p: SystemParams) -> RwaModel:
    """
    组装旋波近似下的 3×3 矩阵 M′

    Args:
        eff: 有效参数
        p: 系统参数

    Returns:
        RwaModel
    """
    if not rwa_regime_ok(eff, p):
        logger.warning(
            f"RWA regime not satisfied: omega_m={p.omega_m:g}, "
            f"delta_eff=({eff.delta_a_eff:g}, {eff.delta_b_eff:g}), |G|=({abs(eff.G_a):g}, {abs(eff.G_b):g})"
        )
    Ga, Gb, J = eff.G_a, eff.G_b, p.J
    Mp = np.array(
        [
            [p.gamma_a / 2 + 1j * eff.delta_a_eff, 1j * J, 1j * Ga],
            [1j * J, p.gamma_b / 2 + 1j * eff.delta_b_eff, 1j * Gb],
            [1j * Ga.conjugate(), 1j * Gb.conjugate(), p.gamma_m / 2 + 1j * p.omega_m],
        ],
        dtype=complex,
    )
    return RwaModel(Mp=Mp, Gamma3=damping_matrix(p, full=False))


def stability(m: Union[LinearModel, RwaModel], epsilon: Optional[float] = None) -> StabilityReport:
    """
    稳定性：M 所有本征值实部必须为正

    Args:
        m: 线性模型
        epsilon: 判定阈值，默认 settings.STABILITY_EPSILON

    Returns:
        StabilityReport

    Raises:
        EigSolverFailure: 本征值求解不收敛
    """
    epsilon = settings.STABILITY_EPSILON if epsilon is None else epsilon
    try:
        eigenvalues = scipy.linalg.eigvals(m.M)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigSolverFailure(f"eigenvalue computation failed: {exc}") from exc
    if not np.all(np.isfinite(eigenvalues)):
        raise EigSolverFailure("eigenvalue computation returned non-finite values")

    real_parts = np.sort(eigenvalues.real)
    margin = float(real_parts[0])
    report = StabilityReport(
        eigenvalue_real_parts=[float(v) for v in real_parts],
        stable=margin > epsilon,
        margin=margin,
    )
    logger.debug(f"Stability: margin={margin:.6g}, stable={report.stable}")
    return report
