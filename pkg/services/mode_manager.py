"""
Режимы конвейера устойчивости (прямая эволюция / Бэклунд / оба)
"""
from typing import Dict, List

from mtm.harness import PipelineMode


class ModeManager:
    """Разбор и описание режимов конвейера для подкоманды stability"""

    # Режимы работы
    DIRECT_MODE = PipelineMode.DIRECT.value
    BACKLUND_MODE = PipelineMode.BACKLUND.value
    BOTH_MODE = PipelineMode.BOTH.value

    _NAMES: Dict[str, str] = {
        DIRECT_MODE: "Прямая эволюция",
        BACKLUND_MODE: "Конвейер Бэклунда",
        BOTH_MODE: "Оба конвейера со сверкой",
    }

    def __init__(self, default: str = DIRECT_MODE):
        self.default = self.parse(default)

    def choices(self) -> List[str]:
        return [mode.value for mode in PipelineMode]

    def parse(self, mode: str) -> PipelineMode:
        """Строка -> PipelineMode"""
        if mode is None:
            return self.default
        try:
            return PipelineMode(str(mode).strip().lower())
        except ValueError:
            raise ValueError(f"Неизвестный режим: {mode}")

    def get_mode_name(self, mode: PipelineMode) -> str:
        """Возвращает человекочитаемое название режима"""
        return self._NAMES[mode.value]

    def stages(self, mode: PipelineMode) -> List[str]:
        """Этапы, которые выполнит режим"""
        direct = ["собственное значение", "эволюция", "модулированное расстояние"]
        backlund = ["собственное значение", "отображение вниз", "эволюция малого решения",
                    "краевые задачи по x", "отображение вверх"]
        if mode is PipelineMode.DIRECT:
            return direct
        if mode is PipelineMode.BACKLUND:
            return backlund
        return backlund + ["прямая эволюция", "подбор (a, θ)"]
