"""
Манифест запуска: подкоманда, параметры, версия, время и хеши файлов
"""
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List

import numpy as np

from mtm import __version__
from utils.snapshots import file_digest, read_json, write_json


def _plain(value: Any) -> Any:
    """JSON-совместимое представление значения параметра"""
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "value"):
        return value.value
    return value


@dataclass
class RunManifest:
    """Воспроизводимое описание одного запуска"""

    subcommand: str
    parameters: Dict[str, Any]
    version: str = __version__
    wall_time: float = 0.0
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    results: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def build(cls, subcommand: str, parameters: Dict[str, Any], inputs: List[str], outputs: List[str],
              wall_time: float, results: Dict[str, Any]) -> "RunManifest":
        return cls(
            subcommand=subcommand,
            parameters={k: _plain(v) for k, v in parameters.items()},
            wall_time=wall_time,
            inputs={p: file_digest(p) for p in inputs},
            outputs={p: file_digest(p) for p in outputs},
            results={k: _plain(v) for k, v in results.items()},
        )

    def write(self, path: str):
        write_json(asdict(self), path)

    @classmethod
    def read(cls, path: str) -> "RunManifest":
        return cls(**read_json(path))

    def stale_files(self) -> List[str]:
        """Файлы, чей текущий SHA-256 не совпадает с записанным"""
        recorded = {**self.inputs, **self.outputs}
        return [p for p, digest in recorded.items() if not os.path.exists(p) or file_digest(p) != digest]
