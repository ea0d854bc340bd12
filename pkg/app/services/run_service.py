"""
运行服务：配置加载、模型解析、命令分发与 CSV / 绘图脚本输出
"""
import json
import math
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, ValidationError

from app.config import settings
from app.core.angles import format_angle
from app.core.exceptions import ConfigValidationError, ExitCode
from app.schemas.common import CommandResult, complex_pair
from app.schemas.params import EffectiveParams, SteadyState, SystemParams
from app.schemas.run_config import Command, EffectiveBlock, RunConfig, RunMode
from app.schemas.scattering import InputSpectra, SweepTable, T_COLUMNS
from app.services import (
    linearized_service,
    rwa_analytics_service,
    scattering_service,
    steady_state_service,
)

CIRCULATOR_THETAS = (math.pi / 2, 3 * math.pi / 2)


class ModelCase(BaseModel):
    """一个待计算的参数点"""

    model_config = ConfigDict(frozen=True)

    label: str
    theta: Optional[float]
    params: SystemParams
    effective: EffectiveParams
    state: Optional[SteadyState] = None


def load_config(path: str | Path) -> RunConfig:
    """
    读取并校验 JSON 运行配置

    Args:
        path: 配置文件路径

    Returns:
        RunConfig

    Raises:
        ConfigValidationError: 文件不可读或内容不合法
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigValidationError(f"cannot read config {path}: {exc}", {"path": str(path)}) from exc
    try:
        return RunConfig.model_validate_json(text)
    except ValidationError as exc:
        errors = [
            {"loc": ".".join(str(part) for part in err["loc"]), "msg": err["msg"]}
            for err in exc.errors(include_url=False)
        ]
        raise ConfigValidationError("invalid run config", {"path": str(path), "errors": errors}) from exc


def write_config(config: RunConfig, path: Path) -> Path:
    """写出可重新读入的运行配置"""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2, exclude_none=True) + "\n", encoding="utf-8")
    return path


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    """按固定格式写 CSV（有效数字由 settings.CSV_SIGNIFICANT_DIGITS 决定）"""
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path,
        index=False,
        float_format=f"%.{settings.CSV_SIGNIFICANT_DIGITS}g",
        lineterminator="\n",
    )
    logger.info(f"Wrote {path} ({len(frame)} rows)")
    return path


def write_plot_script(path: Path, csv_files: List[Path], columns: List[str], title: str) -> Path:
    """
    写出引用 CSV 的纯文本绘图脚本（运行时需要 pandas 与 matplotlib）

    Args:
        path: 脚本路径
        csv_files: CSV 文件
        columns: 需要绘制的列
        title: 图标题

    Returns:
        Path
    """
    names = ",\n    ".join(repr(f.name) for f in csv_files)
    script = f'''"""Plot {title}."""
from pathlib import Path

import matplotlib.pyplot as plt
import pandas as pd

HERE = Path(__file__).resolve().parent
FILES = [
    {names},
]
COLUMNS = {columns!r}

fig, axes = plt.subplots(len(FILES), 1, figsize=(6, 2.4 * len(FILES)), squeeze=False, sharex=True)
for ax, name in zip(axes[:, 0], FILES):
    frame = pd.read_csv(HERE / name)
    x = frame.columns[0]
    for column in COLUMNS:
        if column in frame:
            ax.plot(frame[x], frame[column], label=column)
    ax.set_title(name, fontsize=8)
    ax.legend(fontsize=7)
axes[-1, 0].set_xlabel(x)
fig.suptitle({title!r})
fig.tight_layout()
fig.savefig(HERE / {path.with_suffix(".png").name!r}, dpi=150)
'''
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(script, encoding="utf-8")
    return path


def resolve_cases(config: RunConfig) -> List[ModelCase]:
    """
    把配置解析为参数点列表

    physical 模式：求稳态得到有效参数（θ 由驱动决定，θ 列表不参与）。
    effective 模式：每个 θ 一个参数点；θ 列表为空时直接使用给定的 G_b。

    Returns:
        List[ModelCase]
    """
    block = config.parameter_block()
    if config.mode is RunMode.PHYSICAL:
        p = SystemParams.model_validate(block.model_dump())
        state = steady_state_service.solve_steady_state(p)
        eff = steady_state_service.effective_params(p, state)
        return [ModelCase(label="", theta=None, params=p, effective=eff, state=state)]

    assert isinstance(block, EffectiveBlock)
    kwargs = block.model_dump()
    if not config.theta:
        p, eff = steady_state_service.effective_system(**kwargs)
        return [ModelCase(label="", theta=None, params=p, effective=eff)]
    cases = []
    for theta in config.theta:
        p, eff = steady_state_service.effective_system(**kwargs, theta=theta)
        cases.append(ModelCase(label=f"_theta_{format_angle(theta)}", theta=theta, params=p, effective=eff))
    return cases


def _with_theta(case: ModelCase, theta: float) -> ModelCase:
    """把 G_b 的相位改写为 arg G_a + θ"""
    eff = case.effective
    G_b = abs(eff.G_b) * np.exp(1j * (np.angle(eff.G_a) + theta))
    rotated = EffectiveParams.from_couplings(eff.delta_a_eff, eff.delta_b_eff, eff.G_a, complex(G_b))
    return ModelCase(
        label=f"_theta_{format_angle(theta)}", theta=theta, params=case.params, effective=rotated, state=case.state
    )


def _effective_summary(eff: EffectiveParams) -> Dict:
    return {
        "delta_a_eff": eff.delta_a_eff,
        "delta_b_eff": eff.delta_b_eff,
        "G_a": complex_pair(eff.G_a),
        "G_b": complex_pair(eff.G_b),
        "theta": eff.theta,
    }


class RunService:
    """命令执行服务"""

    def __init__(
        self,
        config: RunConfig,
        output_dir: Optional[str | Path] = None,
        jobs: Optional[int] = None,
        emit_plot_script: bool = False,
    ):
        self.config = config
        self.output_dir = Path(output_dir or config.output_dir or settings.OUTPUT_DIR)
        self.jobs = jobs if jobs is not None else settings.DEFAULT_JOBS
        self.emit_plot_script = emit_plot_script
        self._cases: Optional[List[ModelCase]] = None

    @property
    def cases(self) -> List[ModelCase]:
        if self._cases is None:
            self._cases = resolve_cases(self.config)
        return self._cases

    @property
    def grid(self) -> np.ndarray:
        return self.config.grid.points()

    def _path(self, stem: str, suffix: str = ".csv") -> Path:
        return self.output_dir / f"{self.config.name}_{stem}{suffix}"

    def _maybe_plot(self, files: List[Path], columns: List[str], title: str) -> None:
        if not self.emit_plot_script:
            return
        script = self.output_dir / f"plot_{self.config.name}.py"
        files.append(write_plot_script(script, list(files), columns, f"{self.config.name} {title}"))

    def run(self, command: Optional[Command] = None) -> CommandResult:
        """
        执行命令

        Args:
            command: 命令；None 时使用配置中的 command

        Returns:
            CommandResult

        Raises:
            ConfigValidationError: 未给出命令或命令与模式不匹配
            SimulationError: 计算过程中的错误
        """
        command = command or self.config.command
        if command is None:
            raise ConfigValidationError("no command given (use --command or the config 'command' key)")
        if command is Command.PRESET:
            raise ConfigValidationError("preset is dispatched by the preset service, not by a run config")
        if self.config.mode is RunMode.PHYSICAL and self.config.theta and command is not Command.DESIGN_DRIVES:
            logger.warning("theta list is ignored in physical mode; the phase follows from the drives")

        handlers = {
            Command.STEADY_STATE: self.steady_state,
            Command.STABILITY: self.stability,
            Command.SWEEP: self.sweep,
            Command.CIRCULATOR: self.circulator,
            Command.DESIGN_DRIVES: self.design_drives,
            Command.COMPARE_RWA: self.compare_rwa,
            Command.THETA_SCAN: self.theta_scan,
        }
        logger.info(f"Running {command.value} for '{self.config.name}' ({self.config.mode.value} mode)")
        return handlers[command]()

    def steady_state(self) -> CommandResult:
        """打印 α、β、ξ、Δ′、G、θ 与残差"""
        if self.config.mode is not RunMode.PHYSICAL:
            raise ConfigValidationError("steady-state requires physical mode")
        case = self.cases[0]
        state = case.state
        data = {
            "alpha": complex_pair(state.alpha),
            "beta": complex_pair(state.beta),
            "xi": complex_pair(state.xi),
            "residual": state.residual,
            "iterations": state.iterations,
            "displacement_roots": steady_state_service.displacement_root_count(case.params),
            **_effective_summary(case.effective),
        }
        return CommandResult(command=Command.STEADY_STATE.value, data=data)

    def stability(self) -> CommandResult:
        """每个参数点的稳定性报告；任一不稳定时退出码为 4"""
        reports = {}
        code = ExitCode.OK
        for case in self.cases:
            model = linearized_service.build_full_matrix(case.effective, case.params)
            report = linearized_service.stability(model)
            reports[case.label.lstrip("_") or "base"] = report.model_dump()
            if not report.stable:
                code = ExitCode.INSTABILITY
        message = "Success" if code == ExitCode.OK else "unstable parameter point"
        return CommandResult(command=Command.STABILITY.value, code=code, message=message, data=reports)

    def _sweep_case(self, case: ModelCase) -> SweepTable:
        model = linearized_service.build_full_matrix(case.effective, case.params)
        spectra = None
        if self.config.spectra is not None:
            spectra = InputSpectra(**self.config.spectra.model_dump())
        return scattering_service.sweep(model, self.grid, jobs=self.jobs, spectra=spectra)

    def _table_code(self, tables: List[SweepTable]) -> int:
        if any(not table.stable for table in tables):
            return ExitCode.INSTABILITY
        if any(table.failures for table in tables):
            return ExitCode.SINGULARITY
        return ExitCode.OK

    def sweep(self) -> CommandResult:
        """每个参数点一个 CSV：九个 T 元素与三个真空噪声谱"""
        files, tables = [], []
        for case in self.cases:
            table = self._sweep_case(case)
            tables.append(table)
            files.append(write_csv(table.to_frame(), self._path(f"sweep{case.label}")))
        self._maybe_plot(files, ["T_ab", "T_ba", "svac_a", "svac_b", "svac_c"], "sweep")
        code = self._table_code(tables)
        data = {"points": int(self.grid.size), "singular_points": sum(len(t.failures) for t in tables)}
        message = "Success" if code == ExitCode.OK else "sweep completed with failures"
        return CommandResult(command=Command.SWEEP.value, code=code, message=message, data=data,
                             files=[str(f) for f in files])

    def circulator(self) -> CommandResult:
        """θ ∈ {π/2, 3π/2} 的全模型与 RWA 扫频"""
        base = self.cases[0]
        files, tables, directions = [], [], {}
        for theta in CIRCULATOR_THETAS:
            case = _with_theta(base, theta)
            full_table = self._sweep_case(case)
            rwa_model = linearized_service.build_rwa_matrix(case.effective, case.params)
            rwa_table = scattering_service.rwa_sweep(rwa_model, self.grid, jobs=self.jobs)
            tables.extend([full_table, rwa_table])

            frame = full_table.to_frame()
            rwa_frame = rwa_table.to_frame()[T_COLUMNS].add_suffix("_rwa")
            frame = pd.concat([frame.drop(columns="stable_flag"), rwa_frame], axis=1)
            frame["stable_flag"] = int(full_table.stable and rwa_table.stable)
            files.append(write_csv(frame, self._path(f"circulator{case.label}")))

            at_resonance = scattering_service.scattering_point(
                linearized_service.build_full_matrix(case.effective, case.params), case.params.omega_m
            )
            directions[format_angle(theta)] = rwa_analytics_service.circulation_direction(at_resonance.T)
        self._maybe_plot(files, [*T_COLUMNS, *(f"{c}_rwa" for c in T_COLUMNS)], "circulator")
        code = self._table_code(tables)
        return CommandResult(command=Command.CIRCULATOR.value, code=code, data={"direction": directions},
                             message="Success" if code == ExitCode.OK else "circulator sweep completed with failures",
                             files=[str(f) for f in files])

    def design_drives(self) -> CommandResult:
        """驱动设计与闭环校验"""
        if self.config.mode is not RunMode.PHYSICAL:
            raise ConfigValidationError("design-drives requires physical mode")
        if self.config.design is None:
            raise ConfigValidationError("design-drives requires a 'design' block with target_G")
        p = SystemParams.model_validate(self.config.parameter_block().model_dump())
        target_theta = self.config.theta[0] if self.config.theta else math.pi / 2
        target = self.config.design.target_G
        design = steady_state_service.design_drives(target, target_theta, p, exact=self.config.design.exact)

        designed = design.apply(p)
        state = steady_state_service.solve_steady_state(designed)
        eff = steady_state_service.effective_params(designed, state)
        G_error = abs(abs(eff.G_a) - target) / target
        theta_error = abs(math.remainder(eff.theta - target_theta, 2 * math.pi))
        data = {
            "eps_a": design.eps_a,
            "eps_b": design.eps_b,
            "phi_a": design.phi_a,
            "phi_b": design.phi_b,
            "exact": design.exact,
            "round_trip": {
                "G_a_abs": abs(eff.G_a),
                "theta": eff.theta,
                "G_relative_error": G_error,
                "theta_error": theta_error,
                "within_tolerance": G_error <= 0.1 and theta_error <= 0.1,
            },
        }
        return CommandResult(command=Command.DESIGN_DRIVES.value, data=data)

    def compare_rwa(self) -> CommandResult:
        """全模型与 RWA 偏差报告"""
        files, summary = [], {}
        for case in self.cases:
            report = rwa_analytics_service.compare_full_vs_rwa(
                case.params, self.grid, eff=case.effective, jobs=self.jobs
            )
            files.append(write_csv(report.to_frame(), self._path(f"compare_rwa{case.label}")))
            summary[case.label.lstrip("_") or "base"] = {
                "max_abs_T_deviation": report.max_abs_T_deviation,
                "worst_frequency": report.worst_frequency,
                "regime_warning": report.regime_warning,
                "per_element_deviation": np.asarray(report.per_element_deviation).tolist(),
            }
        self._maybe_plot(files, ["max_deviation"], "full vs RWA")
        worst = max(summary.values(), key=lambda item: item["max_abs_T_deviation"])
        message = (
            f"max deviation {worst['max_abs_T_deviation']:.6g} at omega={worst['worst_frequency']:.6g}"
        )
        return CommandResult(command=Command.COMPARE_RWA.value, message=message, data=summary,
                             files=[str(f) for f in files])

    def theta_scan(self) -> CommandResult:
        """ω = ω_m 处 T_ab、T_ba 随 θ 的变化"""
        if self.config.mode is not RunMode.EFFECTIVE or not self.config.theta:
            raise ConfigValidationError("theta-scan requires effective mode and a non-empty theta list")
        rows = []
        for case in self.cases:
            model = linearized_service.build_full_matrix(case.effective, case.params)
            T = scattering_service.scattering_point(model, case.params.omega_m).T
            rows.append({
                "theta": case.theta,
                "T_ab": T[0, 1],
                "T_ba": T[1, 0],
                "contrast": scattering_service.nonreciprocity_contrast(T),
                "isolation_db": scattering_service.isolation_db(T),
                "time_reversal_symmetric": int(rwa_analytics_service.is_time_reversal_symmetric(case.theta)),
            })
        files = [write_csv(pd.DataFrame(rows), self._path("theta_scan"))]
        self._maybe_plot(files, ["T_ab", "T_ba", "contrast"], "theta scan")
        return CommandResult(command=Command.THETA_SCAN.value, data={"points": len(rows)},
                             files=[str(f) for f in files])


def dump_result(result: CommandResult) -> str:
    """结果 JSON（稳定的键顺序）"""
    return json.dumps(result.model_dump(), sort_keys=True, default=str)
