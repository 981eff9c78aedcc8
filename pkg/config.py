"""
Конфигурация лаборатории и загрузка переменных окружения
"""
import os
from dotenv import load_dotenv

# Загружаем переменные окружения
load_dotenv()


def _env_float(name: str, default: float) -> float:
    """Читает вещественную переменную окружения"""
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} должно быть числом, получено: {raw!r}")


def _env_int(name: str, default: int) -> int:
    """Читает целую переменную окружения"""
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} должно быть целым числом, получено: {raw!r}")


# Пути к файлам
PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
OUTPUT_DIR = os.getenv("MTM_OUTPUT_DIR") or os.path.join(PROJECT_ROOT, "runs")

# Сетка по умолчанию: [-L, L], n узлов
GRID_L = _env_float("MTM_GRID_L", 30.0)
GRID_N = _env_int("MTM_GRID_N", 4096)

# Поиск собственного значения (секущая на функции Эванса)
EVANS_TOL = _env_float("MTM_EVANS_TOL", 1e-10)
EVANS_MAXITER = _env_int("MTM_EVANS_MAXITER", 50)

# Неявная средняя точка в нелинейном подшаге
FIXED_POINT_TOL = _env_float("MTM_FIXED_POINT_TOL", 1e-14)
FIXED_POINT_MAXITER = _env_int("MTM_FIXED_POINT_MAXITER", 30)

LOG_LEVEL = os.getenv("MTM_LOG_LEVEL", "INFO").upper()

# Проверка значений
if GRID_L <= 0:
    raise ValueError("MTM_GRID_L должно быть положительным")
if GRID_N < 8:
    raise ValueError("MTM_GRID_N должно быть не меньше 8")
if EVANS_TOL <= 0 or FIXED_POINT_TOL <= 0:
    raise ValueError("Допуски MTM_EVANS_TOL и MTM_FIXED_POINT_TOL должны быть положительными")
if EVANS_MAXITER < 1 or FIXED_POINT_MAXITER < 1:
    raise ValueError("Число итераций должно быть положительным")
