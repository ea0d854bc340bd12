"""
图预设：生成可重新读入的运行配置并执行，输出复现各图曲线的 CSV
"""
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import pandas as pd
from loguru import logger

from app.config import settings
from app.core.exceptions import ConfigValidationError, ExitCode
from app.schemas.common import CommandResult, complex_pair
from app.schemas.run_config import Command, GridSpec, RunConfig, RunMode
from app.services import linearized_service, scattering_service
from app.services.run_service import RunService, resolve_cases, write_config, write_csv

# 频率轴约定：[8γ, 12γ]，801 点
PRESET_GRID = GridSpec(min=8.0, max=12.0, count=801)
FIG2_THETAS = [k * math.pi / 4 for k in range(8)]
FIG3_COUPLINGS = [0.05, 0.25, 0.5, 1.0]
FIG4_MECHANICAL_DAMPINGS = [0.01, 0.2, 1.0, 2.0]


def optimal_params(G_a: complex = 0.5, G_b: complex = 0.5, gamma_m: float = 1.0) -> Dict:
    """
    最优点的 effective 参数表（以 γ 为单位，γ = settings.REFERENCE_RATE）

    复数以 [re, im] 形式写入，保证配置文件可直接 JSON 序列化。
    """
    gamma = settings.REFERENCE_RATE
    omega_m = 10 * gamma
    return {
        "delta_a_eff": omega_m,
        "delta_b_eff": omega_m,
        "omega_m": omega_m,
        "J": gamma / 2,
        "gamma_a": gamma,
        "gamma_b": gamma,
        "gamma_m": gamma_m * gamma,
        "G_a": complex_pair(G_a * gamma),
        "G_b": complex_pair(G_b * gamma),
    }


def _config(name: str, command: Command, params: Dict, theta: Optional[List[float]] = None) -> RunConfig:
    return RunConfig(
        mode=RunMode.EFFECTIVE,
        params=params,
        grid=PRESET_GRID,
        theta=theta or [],
        name=name,
        command=command,
    )


def fig2_configs() -> List[RunConfig]:
    """θ = 0…7π/4 八条曲线"""
    return [_config("fig2", Command.SWEEP, optimal_params(), theta=FIG2_THETAS)]


def fig3_configs() -> List[RunConfig]:
    """G_b = iG_a，G_a ∈ {0.05, 0.25, 0.5, 1}γ"""
    return [
        _config(f"fig3_Ga_{value:g}", Command.SWEEP, optimal_params(G_a=value, G_b=1j * value))
        for value in FIG3_COUPLINGS
    ]


def fig4_configs() -> List[RunConfig]:
    """G_b = iG_a = 0.5iγ，γ_m ∈ {0.01, 0.2, 1, 2}γ"""
    return [
        _config(f"fig4_gm_{value:g}", Command.SWEEP, optimal_params(G_b=0.5j, gamma_m=value))
        for value in FIG4_MECHANICAL_DAMPINGS
    ]


def fig5_configs() -> List[RunConfig]:
    """θ = π/2 与 3π/2 的环行器（全模型与 RWA 列）"""
    return [_config("fig5", Command.CIRCULATOR, optimal_params())]


def fig7_configs() -> List[RunConfig]:
    """θ = π/2 与 3π/2 的真空噪声谱"""
    return [_config("fig7", Command.SWEEP, optimal_params(), theta=[math.pi / 2, 3 * math.pi / 2])]


PRESETS: Dict[str, Callable[[], List[RunConfig]]] = {
    "fig2": fig2_configs,
    "fig3": fig3_configs,
    "fig4": fig4_configs,
    "fig5": fig5_configs,
    "fig7": fig7_configs,
}

# 带对比度汇总的预设：汇总列名与取值
CONTRAST_SUMMARIES: Dict[str, Tuple[str, List[float]]] = {
    "fig3": ("G_a", FIG3_COUPLINGS),
    "fig4": ("gamma_m", FIG4_MECHANICAL_DAMPINGS),
}


def preset_configs(name: str) -> List[RunConfig]:
    """
    预设的运行配置列表

    Raises:
        ConfigValidationError: 未知预设
    """
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ConfigValidationError(
            f"unknown preset '{name}'", {"available": sorted(PRESETS)}
        ) from None
    return factory()


def contrast_at_resonance(config: RunConfig) -> Tuple[float, float]:
    """ω = ω_m 处的 (T_ab, T_ba)"""
    case = resolve_cases(config)[0]
    model = linearized_service.build_full_matrix(case.effective, case.params)
    T = scattering_service.scattering_point(model, case.params.omega_m).T
    return float(T[0, 1]), float(T[1, 0])


def run_preset(
    name: str,
    output_dir: Optional[str | Path] = None,
    jobs: Optional[int] = None,
    emit_plot_script: bool = False,
) -> CommandResult:
    """
    执行预设：写出 <name>_params.json 与 CSV

    Args:
        name: 预设名（fig2、fig3、fig4、fig5、fig7）
        output_dir: 输出目录，默认 settings.OUTPUT_DIR
        jobs: 并行线程数
        emit_plot_script: 是否写出绘图脚本

    Returns:
        CommandResult: 汇总所有子运行的文件与退出码
    """
    configs = preset_configs(name)
    out = Path(output_dir or settings.OUTPUT_DIR)
    files: List[str] = []
    code = ExitCode.OK
    runs: Dict[str, Dict] = {}

    for config in configs:
        files.append(str(write_config(config, out / f"{config.name}_params.json")))
        result = RunService(config, output_dir=out, jobs=jobs, emit_plot_script=emit_plot_script).run()
        files.extend(result.files)
        runs[config.name] = {"code": result.code, "message": result.message, **result.data}
        code = max(code, result.code)

    if name in CONTRAST_SUMMARIES:
        column, values = CONTRAST_SUMMARIES[name]
        rows = []
        for value, config in zip(values, configs):
            T_ab, T_ba = contrast_at_resonance(config)
            rows.append({column: value, "T_ab": T_ab, "T_ba": T_ba, "contrast": abs(T_ba - T_ab)})
        frame = pd.DataFrame(rows)
        files.append(str(write_csv(frame, out / f"{name}_contrast.csv")))
        best = frame.loc[frame["contrast"].idxmax()]
        logger.info(f"Preset {name}: maximal contrast {best['contrast']:.4f} at {column}={best[column]:g}")

    message = "Success" if code == ExitCode.OK else "preset completed with failures"
    return CommandResult(command=f"{Command.PRESET.value} {name}", code=code, message=message,
                         data=runs, files=files)
