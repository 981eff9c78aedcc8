"""
Проверка настройки проекта: конфигурация, зависимости, структура

Запуск без pytest: python -m tests.test_setup
"""
import os
import sys

import config


def check_config() -> bool:
    """Проверка конфигурации"""
    ok = True
    if config.GRID_L > 0 and config.GRID_N >= 8:
        print(f"✅ Сетка по умолчанию: [-{config.GRID_L:g}, {config.GRID_L:g}], {config.GRID_N} узлов")
    else:
        print("❌ Некорректная сетка по умолчанию")
        ok = False
    if 0 < config.EVANS_TOL < 1e-6 and config.EVANS_MAXITER >= 1:
        print(f"✅ Поиск собственного значения: tol {config.EVANS_TOL:g}, до {config.EVANS_MAXITER} итераций")
    else:
        print("❌ Некорректные параметры поиска собственного значения")
        ok = False
    if 0 < config.FIXED_POINT_TOL < 1e-8 and config.FIXED_POINT_MAXITER >= 1:
        print(f"✅ Неявная средняя точка: tol {config.FIXED_POINT_TOL:g}")
    else:
        print("❌ Некорректные параметры неявной средней точки")
        ok = False
    return ok


def check_imports() -> bool:
    """Проверка импорта зависимостей"""
    modules = ["numpy", "scipy", "pandas", "dotenv", "pytest"]
    all_ok = True
    for module in modules:
        try:
            __import__(module)
            print(f"✅ {module}")
        except ImportError:
            print(f"❌ {module} не установлен")
            all_ok = False
    return all_ok


def check_project_structure() -> bool:
    """Проверка структуры проекта"""
    required_files = [
        "lab.py",
        "config.py",
        "requirements.txt",
        "handlers/__init__.py",
        "handlers/soliton.py",
        "handlers/eigen.py",
        "handlers/backlund.py",
        "handlers/evolve.py",
        "handlers/stability.py",
        "services/__init__.py",
        "services/router.py",
        "services/mode_manager.py",
        "services/parameters.py",
        "services/manifest.py",
        "utils/__init__.py",
        "utils/snapshots.py",
        "mtm/__init__.py",
        "mtm/fields.py",
        "mtm/solitons.py",
        "mtm/lax.py",
        "mtm/backlund.py",
        "mtm/evolution.py",
        "mtm/harness.py",
    ]
    all_ok = True
    for file in required_files:
        if os.path.exists(os.path.join(config.PROJECT_ROOT, file)):
            print(f"✅ {file}")
        else:
            print(f"❌ {file} отсутствует")
            all_ok = False
    return all_ok


def test_config():
    assert check_config()


def test_imports():
    assert check_imports()


def test_project_structure():
    assert check_project_structure()


def main():
    """Главная функция проверки"""
    print("=" * 50)
    print("Проверка настройки MTM lab")
    print("=" * 50)

    print("\n1. Проверка конфигурации:")
    config_ok = check_config()

    print("\n2. Проверка зависимостей:")
    imports_ok = check_imports()

    print("\n3. Проверка структуры проекта:")
    structure_ok = check_project_structure()

    print("\n" + "=" * 50)
    if config_ok and imports_ok and structure_ok:
        print("✅ ВСЕ ПРОВЕРКИ ПРОЙДЕНЫ!")
        print("\nМожно запускать: python lab.py soliton --gamma 1.5707963267948966")
    else:
        print("❌ ЕСТЬ ПРОБЛЕМЫ")
        sys.exit(1)
    print("=" * 50)


if __name__ == "__main__":
    main()
