"""
Подкоманда stability: эксперимент об орбитальной устойчивости и серии по ε
"""
import logging
import os

import config
from handlers import add_grid_arguments
from mtm.harness import ExperimentConfig, PerturbationShape, records_frame, sweep
from services.mode_manager import ModeManager
from services.parameters import UsageError
from services.router import CommandResult
from utils.snapshots import write_frame

logger = logging.getLogger(__name__)

# Глобальный менеджер режимов (инициализируется в lab.py)
mode_manager: ModeManager = None


def set_dependencies(mode_mgr: ModeManager):
    """Устанавливает зависимости"""
    global mode_manager
    mode_manager = mode_mgr


def _epsilon_list(raw: str):
    return [float(part) for part in raw.replace(";", ",").split(",") if part.strip()]


def register(subparsers, common):
    parser = subparsers.add_parser("stability", parents=[common], help="Эксперимент об устойчивости солитона")
    parser.add_argument("--gamma0", type=float, help="γ₀ ∈ (0, π) невозмущенного солитона")
    parser.add_argument("--epsilon", type=float, action="append", help="Размер возмущения (можно повторять)")
    parser.add_argument("--seed", type=int, help="Зерно возмущения")
    parser.add_argument("--shape", choices=[s.value for s in PerturbationShape], help="Форма возмущения")
    parser.add_argument("--t-end", type=float, help="Длительность эволюции")
    parser.add_argument("--sample-every", type=float, help="Интервал записи")
    parser.add_argument("--pipeline", choices=["direct", "backlund", "both"], help="Конвейер")
    parser.add_argument("--workers", type=int, default=1, help="Потоки для серии по ε")
    add_grid_arguments(parser)
    parser.add_argument("--out-dir", help="Папка результатов")


def handle(args, params) -> CommandResult:
    manager = mode_manager or ModeManager()
    gamma0 = params.get("GAMMA0", args.gamma0, float, required=True)
    epsilons = params.get("EPSILON", args.epsilon, _epsilon_list, required=True)
    if not epsilons:
        raise UsageError("Список ε пуст")
    if len(set(epsilons)) != len(epsilons):
        raise UsageError(f"Значения ε повторяются: {epsilons}")
    try:
        mode = manager.parse(params.get("PIPELINE", args.pipeline, str, manager.default.value))
    except ValueError as e:
        raise UsageError(str(e))
    shape_name = params.get("SHAPE", args.shape, str, PerturbationShape.GAUSSIAN_BUMP.value)
    try:
        shape = PerturbationShape(shape_name)
    except ValueError:
        raise UsageError(f"Неизвестная форма возмущения: {shape_name}")
    template = ExperimentConfig(
        gamma0=gamma0,
        epsilon=epsilons[0],
        perturbation_seed=params.get("SEED", args.seed, int, 0),
        perturbation_shape=shape,
        grid_l=params.get("GRID_L", args.grid_l, float, config.GRID_L),
        grid_n=params.get("GRID_N", args.grid_n, int, config.GRID_N),
        t_end=params.get("T_END", args.t_end, float, 20.0),
        sample_every=params.get("SAMPLE_EVERY", args.sample_every, float, 1.0),
        pipeline=mode,
    )
    out_dir = args.out_dir or params.get("OUT_DIR", None, str, config.OUTPUT_DIR)
    os.makedirs(out_dir, exist_ok=True)

    print(f"🧪 Режим: {manager.get_mode_name(mode)} ({' → '.join(manager.stages(mode))})")
    result = sweep(template, epsilons, workers=max(1, args.workers))

    outputs = []
    for eps, records in result.records.items():
        name = "records.csv" if len(epsilons) == 1 else f"records_eps_{eps:g}.csv"
        path = os.path.join(out_dir, name)
        write_frame(records_frame(records), path)
        outputs.append(path)
    summary_path = os.path.join(out_dir, "summary.csv")
    write_frame(result.summary, summary_path)
    outputs.append(summary_path)

    failures = [e for e in result.summary["error"].tolist() if e]
    for message in failures:
        print(f"❌ {message}")
    for name, slope in result.slopes.items():
        print(f"📈 наклон {name}: {slope:.3f}")
    return CommandResult(os.path.join(out_dir, "manifest.json"), outputs,
                         results={"slopes": result.slopes, "failures": len(failures)},
                         failed=bool(failures))
