"""
Подкоманда evolve: эволюция снимка поля со снимками и рядом заряда
"""
import logging

import pandas as pd

from handlers import default_output
from mtm.evolution import ChargeMonitor, EvolutionConfig, charge, evolve
from services.router import CommandResult
from utils.snapshots import read_field, write_field, write_frame

logger = logging.getLogger(__name__)


def register(subparsers, common):
    parser = subparsers.add_parser("evolve", parents=[common], help="Проинтегрировать систему по времени")
    parser.add_argument("--field", required=True, help="CSV начального поля (периодическая сетка)")
    parser.add_argument("--dt", type=float, help="Шаг по времени, ±dx (по умолчанию dx)")
    parser.add_argument("--t-end", type=float, help="Длительность")
    parser.add_argument("--stride", type=int, help="Снимок каждые stride шагов")
    parser.add_argument("--out-prefix", help="Префикс файлов: <prefix>snapshot_0000.csv, <prefix>series.csv")


def handle(args, params) -> CommandResult:
    field = read_field(args.field)
    dt = params.get("DT", args.dt, float, field.grid.dx)
    t_end = params.get("T_END", args.t_end, float, required=True)
    stride = params.get("STRIDE", args.stride, int, 1)
    prefix = args.out_prefix or default_output("evolve_", params)
    cfg = EvolutionConfig(dt=dt, t_end=t_end, output_stride=stride)

    monitor = ChargeMonitor(field)
    rows = []
    outputs = []

    def observer(t, f):
        path = f"{prefix}snapshot_{len(rows):04d}.csv"
        write_field(f, path)
        outputs.append(path)
        rows.append({"t": t, "charge": charge(f), "charge_drift": monitor.drift(f)})

    evolve(field, cfg, observer)
    series = f"{prefix}series.csv"
    write_frame(pd.DataFrame(rows, columns=["t", "charge", "charge_drift"]), series)
    outputs.append(series)
    print(f"⏱  {cfg.n_steps} шагов, дрейф заряда {monitor.max_drift:.2e}")
    return CommandResult(f"{prefix}manifest.json", outputs, [args.field],
                         results={"steps": cfg.n_steps, "max_charge_drift": monitor.max_drift})
