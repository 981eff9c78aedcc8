"""
Маршрутизация подкоманд командной строки и коды завершения
"""
import argparse
import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from mtm.errors import MTMError
from services.manifest import RunManifest
from services.parameters import ParameterResolver, UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130


@dataclass
class CommandResult:
    """Итог подкоманды: файлы, скалярные результаты и путь манифеста"""

    manifest_path: str
    outputs: List[str]
    inputs: List[str] = field(default_factory=list)
    results: Dict[str, Any] = field(default_factory=dict)
    failed: bool = False


def manifest_beside(path: str) -> str:
    """Путь манифеста рядом с файлом вывода"""
    return f"{path}.manifest.json"


class CommandRouter:
    """
    Собирает парсер из модулей-обработчиков и запускает выбранную подкоманду

    Каждый обработчик предоставляет register(subparsers, common) и handle(args, params).
    """

    def __init__(self, handlers: Dict[str, Any]):
        self.handlers = handlers
        self.parser = self._build_parser()

    def _build_parser(self) -> argparse.ArgumentParser:
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--config", help="Файл KEY=VALUE с параметрами (флаги имеют приоритет)")
        common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                            help="Уровень логирования")
        parser = argparse.ArgumentParser(
            prog="lab",
            description="Численная лаборатория модели Тирринга: солитоны, спектр, Бэклунд, эволюция",
        )
        subparsers = parser.add_subparsers(dest="command", metavar="{" + ",".join(self.handlers) + "}")
        for name, handler in self.handlers.items():
            handler.register(subparsers, common)
        return parser

    def usage(self) -> str:
        return self.parser.format_usage()

    def parse_and_dispatch(self, argv: Optional[Sequence[str]]) -> int:
        """
        Разбирает аргументы, выполняет подкоманду и пишет манифест

        Returns:
            0: успех, 1: ошибка модели, 2: ошибка использования, 130: прерывание
        """
        argv = list(argv or [])
        if not argv:
            print(self.usage(), end="")
            return EXIT_USAGE
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
        if args.command is None:
            print(self.usage(), end="")
            return EXIT_USAGE
        if args.log_level:
            logging.getLogger().setLevel(args.log_level)

        handler = self.handlers[args.command]
        started = time.perf_counter()
        try:
            params = ParameterResolver(args.config)
            result = handler.handle(args, params)
            manifest = RunManifest.build(
                args.command, params.resolved, result.inputs, result.outputs,
                time.perf_counter() - started, result.results,
            )
            manifest.write(result.manifest_path)
        except UsageError as e:
            print(f"❌ Ошибка параметров: {e}")
            print(self.usage(), end="")
            return EXIT_USAGE
        except MTMError as e:
            print(f"❌ {type(e).__name__}: {e}")
            logger.error("Подкоманда %s завершилась ошибкой модели: %s", args.command, e)
            return EXIT_DOMAIN
        except KeyboardInterrupt:
            print("\n👋 Прервано пользователем")
            return EXIT_INTERRUPTED
        except OSError as e:
            print(f"❌ Ошибка файла: {e}")
            return EXIT_DOMAIN
        except Exception as e:
            print(f"❌ Критическая ошибка: {e}")
            logger.exception("Непредвиденная ошибка в подкоманде %s", args.command)
            return EXIT_DOMAIN

        for path in result.outputs:
            print(f"📄 {os.path.relpath(path)}")
        if result.failed:
            print(f"⚠️  {args.command}: часть этапов завершилась ошибкой, см. вывод")
            return EXIT_DOMAIN
        print(f"✅ {args.command} выполнено за {manifest.wall_time:.2f} с")
        return EXIT_OK
