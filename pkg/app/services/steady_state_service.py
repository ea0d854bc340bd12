"""
稳态服务：平均场自洽求解、有效参数与驱动设计

自洽性只通过实的机械位移 x = ξ + ξ* 反馈：给定 x，α、β、ξ 都有闭式表达，
因此把问题化为标量不动点 x = f(x)，用阻尼迭代 x ← (1−λ)x + λ f(x) 求解，x₀ = 0。
"""
import cmath
import math
from typing import Optional, Tuple, Union

import numpy as np
from loguru import logger

from app.config import settings
from app.core.angles import wrap_phase
from app.core.exceptions import ConfigValidationError, NonConvergence, RegimeViolation
from app.schemas.params import DriveDesign, EffectiveParams, SteadyState, SystemParams

ArrayLike = Union[float, np.ndarray]


def mean_fields(p: SystemParams, x: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """
    给定位移 x 计算平均场 (α, β, ξ)

    支持标量或 numpy 数组形式的 x（用于网格扫描）。

    Args:
        p: 系统参数
        x: 机械位移 ξ + ξ*

    Returns:
        (alpha, beta, xi)
    """
    lam_a = p.gamma_a / 2 + 1j * (p.delta_a + p.g_a * x)
    lam_b = p.gamma_b / 2 + 1j * (p.delta_b + p.g_b * x)
    det = lam_a * lam_b + p.J ** 2
    alpha = (lam_b * p.drive_a - 1j * p.J * p.drive_b) / det
    beta = (lam_a * p.drive_b - 1j * p.J * p.drive_a) / det
    xi = -1j * (p.g_a * np.abs(alpha) ** 2 + p.g_b * np.abs(beta) ** 2) / (p.gamma_m / 2 + 1j * p.omega_m)
    return alpha, beta, xi


def displacement_map(p: SystemParams, x: ArrayLike) -> ArrayLike:
    """f(x) = 2 Re ξ(x)"""
    return 2.0 * np.real(mean_fields(p, x)[2])


def steady_state_residual(p: SystemParams, alpha: complex, beta: complex, xi: complex) -> float:
    """
    把 (α, β, ξ) 代回稳态方程右端（Δ′ 由 ξ 构造）得到的相对最大范数残差

    Args:
        p: 系统参数
        alpha, beta, xi: 候选平均场

    Returns:
        float: max(|Δα|, |Δβ|, |Δξ|) / max(|α|, |β|, 1)
    """
    a_rhs, b_rhs, xi_rhs = mean_fields(p, 2.0 * xi.real)
    scale = max(abs(alpha), abs(beta), 1.0)
    return max(abs(a_rhs - alpha), abs(b_rhs - beta), abs(xi_rhs - xi)) / scale


def displacement_bound(p: SystemParams) -> float:
    """
    |x| 的严格上界

    线性稳态方程 A v = e 中 A = D + iH（D 正定对角，H 厄米），故 |v| ≤ 2|e| / min(γ_a, γ_b)。
    """
    occupancy = 4.0 * (p.eps_a ** 2 + p.eps_b ** 2) / min(p.gamma_a, p.gamma_b) ** 2
    g_max = max(abs(p.g_a), abs(p.g_b))
    return 2.0 * p.omega_m * g_max * occupancy / (p.gamma_m ** 2 / 4 + p.omega_m ** 2)


def displacement_root_count(p: SystemParams, points: Optional[int] = None) -> int:
    """
    多稳态诊断：在 |x| ≤ 上界 的网格上统计 x − f(x) 的变号次数

    Args:
        p: 系统参数
        points: 网格点数，默认 settings.ROOT_SCAN_POINTS

    Returns:
        int: 变号次数（无反馈时返回 1）
    """
    bound = displacement_bound(p)
    if bound == 0.0:
        return 1
    points = points or settings.ROOT_SCAN_POINTS
    # 端点略向外扩，保证 h(−X) < 0 < h(X)
    xs = np.linspace(-1.05 * bound - 1e-12, 1.05 * bound + 1e-12, points)
    h = xs - displacement_map(p, xs)
    signs = np.sign(h)
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def solve_steady_state(
    p: SystemParams,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    damping: Optional[float] = None,
    check_multistability: bool = True,
) -> SteadyState:
    """
    求解自洽稳态

    Args:
        p: 系统参数
        tol: 相对残差容差，默认 settings.STEADY_STATE_TOL
        max_iter: 最大迭代次数，默认 settings.STEADY_STATE_MAX_ITER
        damping: 阻尼因子 λ，默认 settings.STEADY_STATE_DAMPING
        check_multistability: 是否做多稳态网格诊断

    Returns:
        SteadyState: 与 x = 0 连续相连分支上的稳态

    Raises:
        ConfigValidationError: tol 非正
        NonConvergence: max_iter 次迭代后残差仍大于 tol
    """
    tol = settings.STEADY_STATE_TOL if tol is None else tol
    max_iter = settings.STEADY_STATE_MAX_ITER if max_iter is None else max_iter
    damping = settings.STEADY_STATE_DAMPING if damping is None else damping
    if tol <= 0:
        raise ConfigValidationError("tol must be positive", {"tol": tol})

    x = 0.0
    residual = math.inf
    for iteration in range(max_iter + 1):
        alpha, beta, xi = mean_fields(p, x)
        residual = steady_state_residual(p, alpha, beta, xi)
        if residual <= tol:
            logger.debug(f"Steady state converged: iterations={iteration}, residual={residual:.3e}, x={x:.12g}")
            if check_multistability and displacement_bound(p) > 0:
                roots = displacement_root_count(p)
                if roots > 1:
                    logger.warning(
                        f"Multistable mean field: {roots} displacement roots, returning the branch connected to x=0"
                    )
            return SteadyState(alpha=alpha, beta=beta, xi=xi, residual=residual, iterations=iteration)
        if iteration == max_iter:
            break
        x = (1.0 - damping) * x + damping * 2.0 * xi.real

    logger.error(f"Steady state did not converge: iterations={max_iter}, residual={residual:.3e}")
    raise NonConvergence(max_iter, float(residual))


def effective_params(p: SystemParams, s: SteadyState) -> EffectiveParams:
    """
    由稳态计算有效参数

    Args:
        p: 系统参数
        s: 已收敛的稳态

    Returns:
        EffectiveParams: Δ′_a, Δ′_b, G_a = g_a α, G_b = g_b β, θ ∈ [0, 2π)
    """
    x = s.displacement
    for name, g, field in (("a", p.g_a, s.alpha), ("b", p.g_b, s.beta)):
        occupancy = abs(field) ** 2
        if g != 0 and occupancy < settings.LINEARIZATION_MIN_OCCUPANCY:
            logger.warning(
                f"Mode {name} mean occupancy {occupancy:.3g} is below "
                f"{settings.LINEARIZATION_MIN_OCCUPANCY:g}; linearization may not hold"
            )
    return EffectiveParams.from_couplings(
        delta_a_eff=p.delta_a + p.g_a * x,
        delta_b_eff=p.delta_b + p.g_b * x,
        G_a=p.g_a * s.alpha,
        G_b=p.g_b * s.beta,
    )


def effective_system(
    delta_a_eff: float,
    delta_b_eff: float,
    omega_m: float,
    J: float,
    gamma_a: float,
    gamma_b: float,
    gamma_m: float,
    G_a: complex,
    G_b: complex,
    theta: Optional[float] = None,
) -> Tuple[SystemParams, EffectiveParams]:
    """
    直接由有效参数（Δ′、G、θ）构造模型输入

    Args:
        theta: 给定时 G_b 改写为 |G_b|·e^{i(arg G_a + θ)}

    Returns:
        (SystemParams, EffectiveParams)：SystemParams 只承载阻尼、ω_m、J 与 Δ′
    """
    G_a, G_b = complex(G_a), complex(G_b)
    if theta is not None:
        G_b = abs(G_b) * np.exp(1j * (np.angle(G_a) + theta))
    p = SystemParams(
        delta_a=delta_a_eff,
        delta_b=delta_b_eff,
        omega_m=omega_m,
        J=J,
        gamma_a=gamma_a,
        gamma_b=gamma_b,
        gamma_m=gamma_m,
    )
    eff = EffectiveParams.from_couplings(delta_a_eff, delta_b_eff, G_a, complex(G_b))
    return p, eff


def _target_displacement(target_G_mag: float, p: SystemParams) -> float:
    """|G_a| = |G_b| = 目标值时的位移 x"""
    occupancy = 2.0 * (target_G_mag / p.g_a) ** 2
    return -2.0 * p.omega_m * p.g_a * occupancy / (p.gamma_m ** 2 / 4 + p.omega_m ** 2)


def design_drives(
    target_G_mag: float, target_theta: float, p: SystemParams, exact: bool = False
) -> DriveDesign:
    """
    由目标耦合 |G| 与相位差 θ 反推驱动

    近似模式：ε_a = ε_b ≈ |G|·ω_m / g（|G| = γ/2 时即 γω_m/(2g)），φ_a ≈ π/2，φ_b ≈ φ_a + θ。
    J 引起的相位偏移（约 2·atan(J/Δ′)）按等幅驱动的线性关系修正到 φ_b 中，|G| 仍是一阶估计。
    精确模式直接反演线性稳态方程。

    Args:
        target_G_mag: 目标 |G_a| = |G_b|
        target_theta: 目标相位差 θ
        p: 系统参数（使用其失谐、J、阻尼、g）
        exact: 是否精确反演

    Returns:
        DriveDesign

    Raises:
        ConfigValidationError: g_a ≠ g_b、g ≤ 0 或目标非正
        RegimeViolation: ω_m < 5·max(γ)
    """
    if target_G_mag <= 0:
        raise ConfigValidationError("target |G| must be positive", {"target_G_mag": target_G_mag})
    if p.g_a != p.g_b or p.g_a <= 0:
        raise ConfigValidationError(
            "drive design requires g_a = g_b = g > 0", {"g_a": p.g_a, "g_b": p.g_b}
        )
    if p.omega_m < settings.RWA_REGIME_RATIO * p.max_damping:
        raise RegimeViolation(
            f"omega_m={p.omega_m:g} is below {settings.RWA_REGIME_RATIO:g} x max damping",
            {"omega_m": p.omega_m, "max_damping": p.max_damping},
        )
    for name, delta in (("a", p.delta_a), ("b", p.delta_b)):
        if abs(delta - p.omega_m) > p.max_damping:
            logger.warning(f"Detuning delta_{name}={delta:g} is far from omega_m={p.omega_m:g}; design is approximate")

    g = p.g_a
    x = _target_displacement(target_G_mag, p)
    if not exact:
        eps = target_G_mag * p.omega_m / g
        phi_a = math.pi / 2
        # 等幅驱动下 β/α = (z − q)/(1 − q z)，z = e^{i(φ_b−φ_a)}，q = iJ/λ；取其逆映射
        lam = (p.gamma_a + p.gamma_b) / 4 + 1j * ((p.delta_a + p.delta_b) / 2 + g * x)
        q = 1j * p.J / lam
        target = cmath.exp(1j * target_theta)
        if abs(q) < 1.0:
            drive_theta = cmath.phase((target + q) / (1.0 + q * target))
        else:
            logger.warning(f"Hopping J={p.J:g} exceeds |lambda|={abs(lam):.3g}; phase offset not corrected")
            drive_theta = target_theta
        design = DriveDesign(eps_a=eps, eps_b=eps, phi_a=phi_a, phi_b=wrap_phase(phi_a + drive_theta))
        logger.info(f"Approximate drive design: eps={eps:.6g}, phi_a={phi_a:.6g}, phi_b={design.phi_b:.6g}")
        return design

    # 精确反演：θ_a = 0
    alpha = target_G_mag / g
    beta = target_G_mag * complex(math.cos(target_theta), math.sin(target_theta)) / g
    drive_a = (p.gamma_a / 2 + 1j * (p.delta_a + g * x)) * alpha + 1j * p.J * beta
    drive_b = (p.gamma_b / 2 + 1j * (p.delta_b + g * x)) * beta + 1j * p.J * alpha
    design = DriveDesign(
        eps_a=abs(drive_a),
        eps_b=abs(drive_b),
        phi_a=wrap_phase(math.atan2(drive_a.imag, drive_a.real)),
        phi_b=wrap_phase(math.atan2(drive_b.imag, drive_b.real)),
        exact=True,
    )
    logger.info(f"Exact drive design: {design.as_tuple()}")
    return design
