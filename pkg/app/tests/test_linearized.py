"""
线性化模型与稳定性测试
"""
import math

import numpy as np
import pytest

from app.core.exceptions import EigSolverFailure, InstabilityError
from app.services import linearized_service, rwa_analytics_service, steady_state_service
from app.services.linearized_service import PARTICLE_HOLE_SWAP


def _blue_detuned(coupling: float):
    """Δ′ = −ω_m（蓝失谐）参数点"""
    return steady_state_service.effective_system(
        delta_a_eff=-10.0, delta_b_eff=-10.0, omega_m=10.0, J=0.0,
        gamma_a=1.0, gamma_b=1.0, gamma_m=1.0,
        G_a=coupling, G_b=coupling,
    )


def _margin(coupling: float) -> float:
    p, eff = _blue_detuned(coupling)
    return linearized_service.stability(linearized_service.build_full_matrix(eff, p)).margin


@pytest.mark.unit
@pytest.mark.linearized
class TestFullMatrix:
    """系数矩阵结构测试"""

    def test_particle_hole_symmetry(self, random_stable_models):
        """测试 Π M Π = conj(M)"""
        for model in random_stable_models(20):
            mirrored = PARTICLE_HOLE_SWAP @ model.M @ PARTICLE_HOLE_SWAP
            assert np.max(np.abs(mirrored - model.M.conj())) <= 1e-14

    def test_rwa_matrix_is_rotating_block(self, optimal_ccw):
        """测试 M′ 等于 M 的左上 3×3 块"""
        p, eff = optimal_ccw
        full = linearized_service.build_full_matrix(eff, p)
        rwa = linearized_service.build_rwa_matrix(eff, p)
        np.testing.assert_array_equal(rwa.M, full.M[:3, :3])
        np.testing.assert_allclose(rwa.Gamma, full.Gamma[:3, :3])

    def test_uncoupled_mechanics_is_block_diagonal(self):
        """测试 G = 0 时机械模与光学模、产生与湮灭算符完全解耦"""
        p, eff = steady_state_service.effective_system(
            delta_a_eff=9.0, delta_b_eff=11.0, omega_m=10.0, J=0.5,
            gamma_a=1.0, gamma_b=2.0, gamma_m=0.5, G_a=0, G_b=0,
        )
        M = linearized_service.build_full_matrix(eff, p).M
        assert np.all(M[:3, 3:] == 0) and np.all(M[3:, :3] == 0)
        assert M[2, 2] == pytest.approx(0.25 + 10j)
        assert M[5, 5] == pytest.approx(0.25 - 10j)
        assert M[0, 2] == 0 and M[1, 2] == 0

    def test_damping_matrix(self, optimal_ccw):
        """测试 Γ 对角元为阻尼率的平方根"""
        p, _ = optimal_ccw
        p = p.model_copy(update={"gamma_a": 4.0, "gamma_m": 0.25})
        np.testing.assert_allclose(
            np.diag(linearized_service.damping_matrix(p)), [2.0, 1.0, 0.5, 2.0, 1.0, 0.5]
        )
        assert linearized_service.damping_matrix(p, full=False).shape == (3, 3)

    def test_rwa_regime(self, optimal_ccw):
        """测试 RWA 适用条件判定"""
        p, eff = optimal_ccw
        assert linearized_service.rwa_regime_ok(eff, p)
        p_slow, eff_slow = rwa_analytics_service.optimal_point(omega_m=2.0)
        assert not linearized_service.rwa_regime_ok(eff_slow, p_slow)


@pytest.mark.unit
@pytest.mark.linearized
@pytest.mark.physics
class TestStability:
    """稳定性分析测试"""

    def test_optimal_point_is_stable(self, optimal_ccw):
        """测试最优环行器参数点稳定"""
        p, eff = optimal_ccw
        report = linearized_service.stability(linearized_service.build_full_matrix(eff, p))
        assert report.stable
        assert report.margin > 0
        assert report.eigenvalue_real_parts == sorted(report.eigenvalue_real_parts)
        assert len(report.eigenvalue_real_parts) == 6

    def test_eigenvalues_come_in_conjugate_pairs(self, random_stable_models):
        """测试 M 的本征值在复共轭下封闭"""
        for model in random_stable_models(20):
            eigenvalues = np.linalg.eigvals(model.M)
            for value in eigenvalues:
                assert np.min(np.abs(eigenvalues - value.conjugate())) <= 1e-10

    def test_blue_detuned_threshold(self):
        """测试蓝失谐时存在不稳定阈值，二分法可定位"""
        low, high = 0.05, 1.0
        assert _margin(low) > 0
        assert _margin(high) < 0
        for _ in range(40):
            mid = 0.5 * (low + high)
            if _margin(mid) > 0:
                low = mid
            else:
                high = mid
        assert high - low < 1e-9
        assert 0.05 < low < 1.0
        assert abs(_margin(low)) < 1e-3

    def test_unstable_model_blocks_rwa_comparison(self):
        """测试不稳定模型拒绝全模型与 RWA 的比较"""
        p, eff = _blue_detuned(1.0)
        with pytest.raises(InstabilityError) as exc_info:
            rwa_analytics_service.compare_full_vs_rwa(p, np.linspace(9.0, 11.0, 11), eff=eff)
        assert exc_info.value.margin < 0

    def test_eigensolver_failure(self, optimal_ccw, mocker):
        """测试本征值求解异常转换为 EigSolverFailure"""
        p, eff = optimal_ccw
        model = linearized_service.build_full_matrix(eff, p)
        mocker.patch(
            "app.services.linearized_service.scipy.linalg.eigvals",
            side_effect=np.linalg.LinAlgError("eigenvalues did not converge"),
        )
        with pytest.raises(EigSolverFailure):
            linearized_service.stability(model)

    def test_non_finite_eigenvalues(self, optimal_ccw, mocker):
        """测试本征值非有限时报错"""
        p, eff = optimal_ccw
        model = linearized_service.build_full_matrix(eff, p)
        mocker.patch(
            "app.services.linearized_service.scipy.linalg.eigvals",
            return_value=np.array([math.nan + 0j] * 6),
        )
        with pytest.raises(EigSolverFailure):
            linearized_service.stability(model)
