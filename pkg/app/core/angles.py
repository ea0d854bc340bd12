"""
角度表达式解析

接受弧度数值，或形如 "pi/2"、"3pi/4"、"-7*pi/4"、"2pi" 的 k·π/n 字符串。
"""
import math
import re
from typing import Union

_PI_FRACTION = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<k>\d+(?:\.\d+)?)?\s*\*?\s*(?:pi|π)\s*(?:/\s*(?P<n>\d+(?:\.\d+)?))?\s*$",
    re.IGNORECASE,
)

TWO_PI = 2.0 * math.pi


def parse_angle(value: Union[str, float, int]) -> float:
    """
    解析角度

    Args:
        value: 弧度数值或 k·π/n 表达式

    Returns:
        float: 弧度

    Raises:
        ValueError: 无法解析
    """
    if isinstance(value, bool):
        raise ValueError(f"invalid angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)

    text = str(value).strip()
    try:
        return float(text)
    except ValueError:
        pass

    match = _PI_FRACTION.match(text)
    if not match:
        raise ValueError(f"invalid angle expression: {value!r}")

    k = float(match.group("k")) if match.group("k") else 1.0
    n = float(match.group("n")) if match.group("n") else 1.0
    if n == 0:
        raise ValueError(f"zero denominator in angle expression: {value!r}")
    sign = -1.0 if match.group("sign") == "-" else 1.0
    return sign * k * math.pi / n


def wrap_phase(angle: float) -> float:
    """将相位约化到 [0, 2π)"""
    wrapped = math.fmod(angle, TWO_PI)
    if wrapped < 0:
        wrapped += TWO_PI
    # fmod 对 -tiny 会得到 2π
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


def format_angle(angle: float, max_denominator: int = 8) -> str:
    """
    把弧度格式化为 k·π/n 形式（用于文件名与表头），无法表示时返回数值

    Args:
        angle: 弧度
        max_denominator: 允许的最大分母

    Returns:
        str: 例如 "3pi_4"、"0"、"pi"
    """
    ratio = angle / math.pi
    for n in range(1, max_denominator + 1):
        k = round(ratio * n)
        if abs(k - ratio * n) < 1e-9:
            if k == 0:
                return "0"
            g = math.gcd(int(k), n)
            k, n = int(k) // g, n // g
            head = "pi" if k == 1 else ("-pi" if k == -1 else f"{k}pi")
            return head if n == 1 else f"{head}_{n}"
    return f"{angle:.6g}"
