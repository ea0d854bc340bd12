"""
稳态求解与驱动设计测试
"""
import cmath
import math

import numpy as np
import pytest
from scipy.optimize import bisect

from app.core.exceptions import ConfigValidationError, ExitCode, NonConvergence, RegimeViolation
from app.schemas.params import SystemParams
from app.services import steady_state_service


def _bistable_params() -> SystemParams:
    """单模强驱动：Δ = 5γ，g = γ，ε = 6γ 时 x − f(x) 有三个根"""
    return SystemParams(
        delta_a=5.0,
        delta_b=5.0,
        omega_m=10.0,
        g_a=1.0,
        gamma_a=1.0,
        gamma_b=1.0,
        gamma_m=1.0,
        eps_a=6.0,
    )


def _design_params(J: float) -> SystemParams:
    return SystemParams(
        delta_a=10.0,
        delta_b=10.0,
        omega_m=10.0,
        J=J,
        g_a=1e-3,
        g_b=1e-3,
        gamma_a=1.0,
        gamma_b=1.0,
        gamma_m=1.0,
    )


@pytest.mark.unit
@pytest.mark.steady_state
class TestSolveSteadyState:
    """自洽稳态求解测试"""

    def test_converged_residual_within_tol(self, physical_params: SystemParams):
        """测试收敛解代回方程的残差不超过容差"""
        state = steady_state_service.solve_steady_state(physical_params)
        assert state.residual <= 1e-12
        assert steady_state_service.steady_state_residual(
            physical_params, state.alpha, state.beta, state.xi
        ) <= 1e-12
        assert abs(state.alpha) > 100

    def test_no_feedback_matches_linear_solution(self):
        """测试 g = 0 时与线性方程闭式解一致且无需迭代"""
        p = SystemParams(
            delta_a=3.0, delta_b=-2.0, omega_m=10.0, J=0.7,
            gamma_a=1.0, gamma_b=0.5, gamma_m=1.0,
            eps_a=2.0, eps_b=1.0, phi_a=0.3, phi_b=1.1,
        )
        state = steady_state_service.solve_steady_state(p)

        lam_a = p.gamma_a / 2 + 1j * p.delta_a
        lam_b = p.gamma_b / 2 + 1j * p.delta_b
        det = lam_a * lam_b + p.J ** 2
        drive_a = p.eps_a * cmath.exp(1j * p.phi_a)
        drive_b = p.eps_b * cmath.exp(1j * p.phi_b)
        assert state.alpha == pytest.approx((lam_b * drive_a - 1j * p.J * drive_b) / det, abs=1e-14)
        assert state.beta == pytest.approx((lam_a * drive_b - 1j * p.J * drive_a) / det, abs=1e-14)
        assert state.xi == 0
        assert state.iterations == 0

    def test_zero_drive_gives_vacuum(self):
        """测试无驱动时平均场为零"""
        p = _design_params(J=0.5)
        state = steady_state_service.solve_steady_state(p)
        assert state.alpha == 0 and state.beta == 0 and state.xi == 0
        assert state.displacement == 0

    def test_common_drive_phase_rotates_fields(self, physical_params: SystemParams):
        """测试两路驱动同加相位 χ 时 α、β 乘 e^{iχ}，ξ 不变"""
        chi = 0.7
        shifted = physical_params.model_copy(
            update={"phi_a": physical_params.phi_a + chi, "phi_b": physical_params.phi_b + chi}
        )
        base = steady_state_service.solve_steady_state(physical_params)
        rotated = steady_state_service.solve_steady_state(shifted)
        phase = cmath.exp(1j * chi)
        assert abs(rotated.alpha - base.alpha * phase) <= 1e-9 * abs(base.alpha)
        assert abs(rotated.beta - base.beta * phase) <= 1e-9 * abs(base.beta)
        assert rotated.xi == pytest.approx(base.xi, rel=1e-9)

    def test_no_feedback_scales_linearly(self):
        """测试 g = 0 时驱动加倍，|α|、|β| 也加倍"""
        p = SystemParams(
            delta_a=3.0, delta_b=-2.0, omega_m=10.0, J=0.7,
            gamma_a=1.0, gamma_b=0.5, gamma_m=1.0,
            eps_a=2.0, eps_b=1.0, phi_a=0.3, phi_b=1.1,
        )
        doubled = p.model_copy(update={"eps_a": 4.0, "eps_b": 2.0})
        base = steady_state_service.solve_steady_state(p)
        scaled = steady_state_service.solve_steady_state(doubled)
        assert abs(scaled.alpha) == pytest.approx(2 * abs(base.alpha), rel=1e-12)
        assert abs(scaled.beta) == pytest.approx(2 * abs(base.beta), rel=1e-12)

    def test_non_convergence_reports_iterations(self, physical_params: SystemParams):
        """测试迭代次数用尽时抛出 NonConvergence"""
        with pytest.raises(NonConvergence) as exc_info:
            steady_state_service.solve_steady_state(physical_params, max_iter=1)
        assert exc_info.value.code == ExitCode.NON_CONVERGENCE
        assert exc_info.value.iterations == 1
        assert exc_info.value.last_residual > 1e-12

    @pytest.mark.parametrize("tol", [0.0, -1e-9])
    def test_non_positive_tol_rejected(self, physical_params: SystemParams, tol: float):
        """测试非正容差"""
        with pytest.raises(ConfigValidationError):
            steady_state_service.solve_steady_state(physical_params, tol=tol)


def _weak_params() -> SystemParams:
    """ε = 500γ：|x| 的上界远小于把 Δ′ 拉到共振所需的位移，只有一个根"""
    p = _design_params(J=0.5)
    return p.model_copy(update={"eps_a": 500.0, "eps_b": 500.0, "phi_a": math.pi / 2, "phi_b": math.pi})


def _nearest_displacement_root(p: SystemParams, points: int = 4001) -> float:
    """从 x = 0 向外扫描到 x − f(x) 第一次变号，只在该区间内二分"""
    bound = steady_state_service.displacement_bound(p)
    # g > 0 时 f(x) ≤ 0，根都在负半轴
    xs = -np.linspace(0.0, 1.05 * bound, points)
    h = xs - steady_state_service.displacement_map(p, xs)
    first = int(np.nonzero(h <= 0)[0][0])
    return bisect(
        lambda x: x - steady_state_service.displacement_map(p, x),
        xs[first],
        xs[first - 1],
        xtol=1e-14,
    )


@pytest.mark.unit
@pytest.mark.steady_state
class TestMultistability:
    """多稳态诊断测试"""

    def test_weak_drive_has_single_root(self):
        """测试弱驱动时只有一个位移根"""
        assert steady_state_service.displacement_root_count(_weak_params()) == 1

    def test_strong_drive_counts_three_roots(self, physical_params: SystemParams):
        """测试 ε = 5000γ 时 Δ′ 可被拉到共振附近，出现三个根"""
        assert steady_state_service.displacement_root_count(physical_params) == 3

    def test_bistable_drive_counts_three_roots(self):
        """测试双稳区间内检测到三个位移根"""
        assert steady_state_service.displacement_root_count(_bistable_params()) == 3

    def test_bistable_returns_branch_connected_to_origin(self):
        """测试多稳态时返回与 x = 0 相连的分支"""
        p = _bistable_params()
        state = steady_state_service.solve_steady_state(p)
        assert state.residual <= 1e-12
        # 低占据数分支 |α|² ≈ 1.6，x ≈ −0.32
        assert -1.0 < state.displacement < 0
        assert abs(state.alpha) ** 2 < 3.0

    @pytest.mark.parametrize("params", ["weak", "strong"])
    def test_matches_bisection_root(self, physical_params: SystemParams, params: str):
        """测试迭代解与离 x = 0 最近的二分法位移根一致"""
        p = _weak_params() if params == "weak" else physical_params
        root = _nearest_displacement_root(p)
        state = steady_state_service.solve_steady_state(p)
        assert state.displacement == pytest.approx(root, rel=1e-9, abs=1e-12)

    def test_strong_drive_stays_off_resonance(self, physical_params: SystemParams):
        """测试三稳参数下返回的分支 Δ′ 仍接近 Δ"""
        state = steady_state_service.solve_steady_state(physical_params)
        assert -110.0 < state.displacement < -95.0

    def test_root_lies_within_bound(self, physical_params: SystemParams):
        """测试收敛位移不超过解析上界"""
        state = steady_state_service.solve_steady_state(physical_params)
        assert abs(state.displacement) <= steady_state_service.displacement_bound(physical_params)


@pytest.mark.unit
@pytest.mark.steady_state
class TestEffectiveParams:
    """有效参数测试"""

    def test_effective_params_from_state(self, physical_params: SystemParams):
        """测试 Δ′ = Δ + g·x 与 G = gα"""
        state = steady_state_service.solve_steady_state(physical_params)
        eff = steady_state_service.effective_params(physical_params, state)
        x = 2 * state.xi.real
        assert eff.delta_a_eff == pytest.approx(physical_params.delta_a + physical_params.g_a * x)
        assert eff.delta_b_eff == pytest.approx(physical_params.delta_b + physical_params.g_b * x)
        assert eff.G_a == pytest.approx(physical_params.g_a * state.alpha)
        assert eff.G_b == pytest.approx(physical_params.g_b * state.beta)
        assert 0 <= eff.theta < 2 * math.pi

    def test_effective_system_rotates_G_b(self):
        """测试给定 θ 时 G_b 的模不变、相位为 arg G_a + θ"""
        _, eff = steady_state_service.effective_system(
            delta_a_eff=10.0, delta_b_eff=10.0, omega_m=10.0, J=0.5,
            gamma_a=1.0, gamma_b=1.0, gamma_m=1.0,
            G_a=0.5j, G_b=0.3, theta=math.pi / 2,
        )
        assert abs(eff.G_b) == pytest.approx(0.3)
        assert eff.theta == pytest.approx(math.pi / 2)
        assert eff.G_b == pytest.approx(-0.3, abs=1e-15)


@pytest.mark.unit
@pytest.mark.steady_state
@pytest.mark.physics
class TestDesignDrives:
    """驱动设计测试"""

    def _round_trip(self, p: SystemParams, exact: bool):
        design = steady_state_service.design_drives(0.5, math.pi / 2, p, exact=exact)
        designed = design.apply(p)
        state = steady_state_service.solve_steady_state(designed)
        return design, steady_state_service.effective_params(designed, state)

    def test_approximate_round_trip(self):
        """测试近似设计：|G| 误差 ≤ 10%，θ 误差 ≤ 0.1 rad"""
        design, eff = self._round_trip(_design_params(J=0.0), exact=False)
        assert design.eps_a == pytest.approx(0.5 * 10.0 / 1e-3)
        assert design.phi_a == pytest.approx(math.pi / 2)
        assert design.phi_b == pytest.approx(math.pi)
        assert abs(abs(eff.G_a) - 0.5) / 0.5 <= 0.1
        assert abs(math.remainder(eff.theta - math.pi / 2, 2 * math.pi)) <= 0.1

    def test_approximate_round_trip_with_hopping(self):
        """测试近似设计在 J = γ/2 时修正 J 带来的相位偏移"""
        design, eff = self._round_trip(_design_params(J=0.5), exact=False)
        # 未修正时 φ_b − φ_a = π/2，实际 θ 偏出约 2·atan(J/Δ′) ≈ 0.1
        assert design.phi_b - design.phi_a == pytest.approx(math.pi / 2 - 2 * math.atan(0.5 / 9.9), abs=5e-3)
        assert abs(abs(eff.G_a) - 0.5) / 0.5 <= 0.1
        assert abs(abs(eff.G_b) - 0.5) / 0.5 <= 0.1
        assert abs(math.remainder(eff.theta - math.pi / 2, 2 * math.pi)) <= 0.01

    def test_exact_round_trip_with_hopping(self):
        """测试精确设计在 J = γ/2 时仍能恢复目标"""
        design, eff = self._round_trip(_design_params(J=0.5), exact=True)
        assert design.exact
        assert abs(eff.G_a) == pytest.approx(0.5, rel=1e-8)
        assert abs(eff.G_b) == pytest.approx(0.5, rel=1e-8)
        assert eff.theta == pytest.approx(math.pi / 2, abs=1e-8)

    def test_unequal_couplings_rejected(self):
        """测试 g_a ≠ g_b"""
        p = _design_params(J=0.0).model_copy(update={"g_b": 2e-3})
        with pytest.raises(ConfigValidationError):
            steady_state_service.design_drives(0.5, math.pi / 2, p)

    def test_unresolved_sideband_rejected(self):
        """测试 ω_m < 5·max(γ) 时抛出 RegimeViolation"""
        p = _design_params(J=0.0).model_copy(update={"omega_m": 2.0})
        with pytest.raises(RegimeViolation) as exc_info:
            steady_state_service.design_drives(0.5, math.pi / 2, p)
        assert exc_info.value.code == ExitCode.VALIDATION
