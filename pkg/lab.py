"""
Точка входа численной лаборатории модели Тирринга
"""
import logging
import sys

# Импорты модулей проекта
import config
from services.mode_manager import ModeManager
from services.router import EXIT_INTERRUPTED, CommandRouter

# Импорты handlers
from handlers import backlund, eigen, evolve, soliton, stability


# Настройка логирования
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=getattr(logging, config.LOG_LEVEL, logging.INFO)
)
logger = logging.getLogger(__name__)


def build_router() -> CommandRouter:
    """Передает зависимости в handlers и регистрирует подкоманды"""
    stability.set_dependencies(ModeManager())
    return CommandRouter({
        "soliton": soliton,
        "eigen": eigen,
        "backlund": backlund,
        "evolve": evolve,
        "stability": stability,
    })


def main(argv=None) -> int:
    """Главная функция запуска"""
    if argv is None:
        argv = sys.argv[1:]
    print("🚀 MTM lab")
    return build_router().parse_and_dispatch(argv)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n👋 Остановлено")
        sys.exit(EXIT_INTERRUPTED)
    except Exception as e:
        print(f"❌ Критическая ошибка: {e}")
        logger.exception("Критическая ошибка при запуске")
        sys.exit(1)
