"""
Разрешение параметров подкоманд: флаг > файл конфигурации > значение по умолчанию
"""
import logging
import os
from typing import Any, Callable, Dict, Optional

from dotenv import dotenv_values

logger = logging.getLogger(__name__)

# Документированные ключи файла конфигурации
CONFIG_KEYS = {
    "GAMMA", "GAMMA0", "LAMBDA_RE", "LAMBDA_IM", "A", "THETA", "T",
    "GRID_L", "GRID_N", "DT", "T_END", "STRIDE", "EPSILON", "SEED",
    "SHAPE", "PIPELINE", "OUT_DIR", "SAMPLE_EVERY",
}


class UsageError(ValueError):
    """Неверные аргументы командной строки или файла конфигурации"""


class ParameterResolver:
    """
    Источник значений параметров для одной подкоманды

    Файл конфигурации: плоский KEY=VALUE (разбирается dotenv_values).
    Все разрешенные значения запоминаются для манифеста.
    """

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path
        self.values: Dict[str, Optional[str]] = {}
        self.resolved: Dict[str, Any] = {}
        if config_path:
            if not os.path.exists(config_path):
                raise UsageError(f"Файл конфигурации не найден: {config_path}")
            self.values = dict(dotenv_values(config_path))
            unknown = sorted(set(self.values) - CONFIG_KEYS)
            if unknown:
                raise UsageError(f"Неизвестные ключи в {config_path}: {', '.join(unknown)}")
            logger.info("Загружен файл конфигурации %s (%d ключей)", config_path, len(self.values))

    def get(self, key: str, flag_value: Any, cast: Callable[[str], Any], default: Any = None,
            required: bool = False) -> Any:
        """
        Значение параметра

        Args:
            key: ключ файла конфигурации
            flag_value: значение флага (None, если флаг не задан)
            cast: преобразование строки из файла
            default: значение по умолчанию
            required: ошибка, если значение не найдено нигде
        """
        if flag_value is not None:
            value = flag_value
        elif self.values.get(key) not in (None, ""):
            raw = self.values[key]
            try:
                value = cast(raw)
            except ValueError:
                raise UsageError(f"{key}: некорректное значение {raw!r}")
        elif default is not None:
            value = default
        elif required:
            raise UsageError(f"Параметр {key} не задан ни флагом, ни в файле конфигурации")
        else:
            value = None
        self.resolved[key] = value
        return value

    def get_complex(self, re_key: str, im_key: str, re_flag: Optional[float], im_flag: Optional[float],
                    default: Optional[complex] = None) -> Optional[complex]:
        """λ из пары (re, im); мнимая часть по умолчанию 0"""
        default_re = default.real if default is not None else None
        re = self.get(re_key, re_flag, float, default_re)
        if re is None:
            return None
        im = self.get(im_key, im_flag, float, default.imag if default is not None else 0.0)
        return complex(re, im)
