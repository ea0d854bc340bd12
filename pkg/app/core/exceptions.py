"""
模拟器异常定义

每个异常携带进程退出码，由 app.main 统一转换为退出状态和机器可读的错误行。
"""
import json
from typing import Any, Dict, Optional


class ExitCode:
    """退出码"""
    OK = 0
    VALIDATION = 2
    NON_CONVERGENCE = 3
    INSTABILITY = 4
    SINGULARITY = 5


class SimulationError(Exception):
    """模拟器异常基类"""

    code: int = ExitCode.VALIDATION

    def __init__(self, message: str, detail: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def to_error_line(self) -> str:
        """
        生成机器可读的错误行

        Returns:
            str: 形如 ERROR code=3 type=NonConvergence message="..." detail={...}
        """
        detail = json.dumps(self.detail, sort_keys=True, default=str)
        message = self.message.replace('"', "'")
        return f'ERROR code={self.code} type={type(self).__name__} message="{message}" detail={detail}'


class ConfigValidationError(SimulationError):
    """配置或输入参数校验失败"""
    code = ExitCode.VALIDATION


class RegimeViolation(SimulationError):
    """近似公式的适用条件不成立"""
    code = ExitCode.VALIDATION


class UnsupportedPhase(SimulationError):
    """解析散射矩阵只在 θ = π/2, 3π/2 处给出"""
    code = ExitCode.VALIDATION

    def __init__(self, theta: float):
        super().__init__(
            f"no closed-form circulator matrix at theta={theta!r}",
            {"theta": theta},
        )
        self.theta = theta


class NonConvergence(SimulationError):
    """稳态自洽迭代未收敛"""
    code = ExitCode.NON_CONVERGENCE

    def __init__(self, iterations: int, last_residual: float):
        super().__init__(
            f"steady state did not converge after {iterations} iterations",
            {"iterations": iterations, "last_residual": last_residual},
        )
        self.iterations = iterations
        self.last_residual = last_residual


class InstabilityError(SimulationError):
    """线性化系统动力学不稳定"""
    code = ExitCode.INSTABILITY

    def __init__(self, margin: float):
        super().__init__(
            f"linearized system is unstable (min eigenvalue real part {margin:.6g})",
            {"margin": margin},
        )
        self.margin = margin


class SingularAtFrequency(SimulationError):
    """M - iωI 在该频率数值奇异"""
    code = ExitCode.SINGULARITY

    def __init__(self, omega: float, condition_estimate: float):
        super().__init__(
            f"M - i*omega*I is numerically singular at omega={omega:.12g}",
            {"omega": omega, "condition_estimate": condition_estimate},
        )
        self.omega = omega
        self.condition_estimate = condition_estimate


class EigSolverFailure(SimulationError):
    """本征值求解失败"""
    code = ExitCode.SINGULARITY
