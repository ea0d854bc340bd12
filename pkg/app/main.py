"""
命令行入口

结果以一行 JSON 写到 stdout，日志与错误行写到 stderr；退出码见 app.core.exceptions.ExitCode。
"""
import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.config import settings
from app.core.exceptions import ConfigValidationError, SimulationError
from app.schemas.run_config import Command
from app.services.preset_service import PRESETS, run_preset
from app.services.run_service import RunService, dump_result, load_config
from app.utils.logger import setup_logger


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optomech-scatter",
        description="三模光机械系统的非互易散射模拟",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例用法:
  python -m app.main --config run.json --command sweep          # 扫频并写出 CSV
  python -m app.main --config run.json --command stability      # 稳定性报告
  python -m app.main --preset fig2 --output-dir output          # 复现 θ 扫描曲线
  python -m app.main --preset fig5 --emit-plot-script           # 附带绘图脚本
        """,
    )
    parser.add_argument("--config", type=str, help="JSON 运行配置路径")
    parser.add_argument(
        "--command",
        type=str,
        choices=[c.value for c in Command],
        help="要执行的命令（缺省时使用配置中的 command）",
    )
    parser.add_argument("--preset", type=str, choices=sorted(PRESETS), help="图预设名称")
    parser.add_argument("--emit-plot-script", action="store_true", help="同时写出绘图脚本")
    parser.add_argument("--jobs", type=int, default=None, help="扫频并行线程数")
    parser.add_argument("--output-dir", type=str, default=None, help="输出目录（覆盖配置与环境变量）")
    parser.add_argument("--log-level", type=str, default=None, help="日志级别（覆盖 LOG_LEVEL）")
    return parser


def run(args: argparse.Namespace) -> int:
    """执行一次命令，返回退出码"""
    if args.jobs is not None and args.jobs < 1:
        raise ConfigValidationError("--jobs must be at least 1", {"jobs": args.jobs})

    if args.preset or args.command == Command.PRESET.value:
        if not args.preset:
            raise ConfigValidationError("the preset command requires --preset <name>")
        result = run_preset(
            args.preset, output_dir=args.output_dir, jobs=args.jobs, emit_plot_script=args.emit_plot_script
        )
    else:
        if not args.config:
            raise ConfigValidationError("either --config or --preset is required")
        config = load_config(args.config)
        command = Command(args.command) if args.command else None
        service = RunService(
            config, output_dir=args.output_dir, jobs=args.jobs, emit_plot_script=args.emit_plot_script
        )
        result = service.run(command)

    print(dump_result(result))
    return result.code


def main(argv: Optional[List[str]] = None) -> int:
    """
    CLI 主函数

    Args:
        argv: 参数列表，None 时读取 sys.argv

    Returns:
        int: 进程退出码
    """
    args = build_parser().parse_args(argv)
    try:
        logger = setup_logger(args.log_level)
    except ValueError as exc:
        error = ConfigValidationError(f"invalid log level: {exc}", {"log_level": args.log_level})
        print(error.to_error_line(), file=sys.stderr)
        return error.code
    logger.debug(f"{settings.APP_NAME} v{settings.APP_VERSION}")

    try:
        return run(args)
    except ValidationError as exc:
        error = ConfigValidationError(
            "parameter validation failed",
            {"errors": [f"{'.'.join(map(str, e['loc']))}: {e['msg']}" for e in exc.errors(include_url=False)]},
        )
    except SimulationError as exc:
        error = exc
    logger.error(error.message)
    print(error.to_error_line(), file=sys.stderr)
    return error.code


if __name__ == "__main__":
    sys.exit(main())
