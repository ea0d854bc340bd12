"""
物理参数、稳态与有效参数模型

所有速率、失谐与频率都以参考阻尼率 γ 为单位。
"""
import cmath
from typing import Annotated, Any

from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, model_validator

from app.core.angles import wrap_phase


def _to_complex(value: Any) -> complex:
    """接受 complex、实数、[re, im] 或 "1+2j" 字符串"""
    if isinstance(value, bool):
        raise ValueError("boolean is not a complex number")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    if hasattr(value, "real") and hasattr(value, "imag"):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", "").replace("i", "j"))
    raise ValueError(f"cannot interpret {value!r} as a complex number")


# JSON 中以 [re, im] 序列化
ComplexNumber = Annotated[
    complex,
    PlainValidator(_to_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list, when_used="json"),
]


class SystemParams(BaseModel):
    """哈密顿量参数：失谐、频率、耦合、阻尼与驱动"""

    model_config = ConfigDict(frozen=True)

    delta_a: float = Field(..., description="模式 a 失谐 Δ_a = ω_a − ω_d")
    delta_b: float = Field(..., description="模式 b 失谐 Δ_b = ω_b − ω_d")
    omega_m: float = Field(..., gt=0, description="机械频率 ω_m")
    J: float = Field(0.0, description="光学模式间线性耦合（实数）")
    g_a: float = Field(0.0, description="单光子光力耦合 g_a")
    g_b: float = Field(0.0, description="单光子光力耦合 g_b")
    gamma_a: float = Field(..., gt=0, description="光学阻尼 γ_a")
    gamma_b: float = Field(..., gt=0, description="光学阻尼 γ_b")
    gamma_m: float = Field(..., gt=0, description="机械阻尼 γ_m")
    eps_a: float = Field(0.0, ge=0, description="驱动振幅 ε_a")
    eps_b: float = Field(0.0, ge=0, description="驱动振幅 ε_b")
    phi_a: float = Field(0.0, description="驱动相位 φ_a（弧度）")
    phi_b: float = Field(0.0, description="驱动相位 φ_b（弧度）")

    @property
    def drive_a(self) -> complex:
        """复驱动 ε_a e^{iφ_a}"""
        return self.eps_a * cmath.exp(1j * self.phi_a)

    @property
    def drive_b(self) -> complex:
        """复驱动 ε_b e^{iφ_b}"""
        return self.eps_b * cmath.exp(1j * self.phi_b)

    @property
    def max_damping(self) -> float:
        return max(self.gamma_a, self.gamma_b, self.gamma_m)


class SteadyState(BaseModel):
    """稳态平均场 α、β、ξ"""

    model_config = ConfigDict(frozen=True)

    alpha: ComplexNumber = Field(..., description="⟨a⟩")
    beta: ComplexNumber = Field(..., description="⟨b⟩")
    xi: ComplexNumber = Field(..., description="⟨c⟩")
    residual: float = Field(..., ge=0, description="稳态方程残差（相对最大范数）")
    iterations: int = Field(..., ge=0, description="迭代次数")

    @property
    def displacement(self) -> float:
        """机械位移 x = ξ + ξ*"""
        return 2.0 * self.xi.real


class EffectiveParams(BaseModel):
    """线性化后的有效参数 Δ′、G 与相位差 θ"""

    model_config = ConfigDict(frozen=True)

    delta_a_eff: float = Field(..., description="有效失谐 Δ′_a")
    delta_b_eff: float = Field(..., description="有效失谐 Δ′_b")
    G_a: ComplexNumber = Field(..., description="有效光力耦合 G_a = g_a α")
    G_b: ComplexNumber = Field(..., description="有效光力耦合 G_b = g_b β")
    theta: float = Field(..., ge=0, description="相位差 θ = arg G_b − arg G_a ∈ [0, 2π)")

    @model_validator(mode="after")
    def check_theta_range(self) -> "EffectiveParams":
        if not self.theta < 2 * cmath.pi:
            raise ValueError("theta must lie in [0, 2*pi)")
        return self

    @classmethod
    def from_couplings(
        cls, delta_a_eff: float, delta_b_eff: float, G_a: complex, G_b: complex
    ) -> "EffectiveParams":
        """
        由耦合常数构造，θ 自动计算并约化到 [0, 2π)

        Args:
            delta_a_eff: Δ′_a
            delta_b_eff: Δ′_b
            G_a: 复耦合 G_a
            G_b: 复耦合 G_b

        Returns:
            EffectiveParams
        """
        G_a, G_b = _to_complex(G_a), _to_complex(G_b)
        theta = wrap_phase(cmath.phase(G_b) - cmath.phase(G_a))
        return cls(delta_a_eff=delta_a_eff, delta_b_eff=delta_b_eff, G_a=G_a, G_b=G_b, theta=theta)


class DriveDesign(BaseModel):
    """驱动设计结果 (ε_a, ε_b, φ_a, φ_b)"""

    model_config = ConfigDict(frozen=True)

    eps_a: float = Field(..., ge=0)
    eps_b: float = Field(..., ge=0)
    phi_a: float
    phi_b: float
    exact: bool = Field(False, description="True 表示精确反演线性稳态方程")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.eps_a, self.eps_b, self.phi_a, self.phi_b

    def apply(self, p: SystemParams) -> SystemParams:
        """把驱动写入参数"""
        return p.model_copy(
            update={"eps_a": self.eps_a, "eps_b": self.eps_b, "phi_a": self.phi_a, "phi_b": self.phi_b}
        )
