"""
通用输出模型
"""
from typing import Any, Dict, List

from pydantic import BaseModel, Field


class CommandResult(BaseModel):
    """命令结果（以一行 JSON 输出到 stdout）"""

    command: str = Field(..., description="命令名")
    code: int = Field(default=0, description="退出码")
    message: str = Field(default="Success", description="结果消息")
    data: Dict[str, Any] = Field(default_factory=dict, description="结果数据")
    files: List[str] = Field(default_factory=list, description="写出的文件")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "command": "stability",
                    "code": 0,
                    "message": "Success",
                    "data": {"stable": True, "margin": 0.25},
                    "files": [],
                }
            ]
        }
    }


def complex_pair(z: complex) -> List[float]:
    """复数序列化为 [re, im]"""
    z = complex(z)
    return [z.real, z.imag]
