"""
Обработчики подкоманд: soliton, eigen, backlund, evolve, stability
"""
import os

import config
from mtm.fields import Grid
from services.parameters import ParameterResolver


def add_grid_arguments(parser):
    parser.add_argument("--grid-l", type=float, help=f"Полуширина области [-L, L] (по умолчанию {config.GRID_L})")
    parser.add_argument("--grid-n", type=int, help=f"Число узлов сетки (по умолчанию {config.GRID_N})")


def add_lambda_arguments(parser, what: str = "λ"):
    parser.add_argument("--lambda-re", type=float, help=f"Re {what}")
    parser.add_argument("--lambda-im", type=float, help=f"Im {what}")


def resolve_grid(args, params: ParameterResolver) -> Grid:
    half = params.get("GRID_L", args.grid_l, float, config.GRID_L)
    n = params.get("GRID_N", args.grid_n, int, config.GRID_N)
    return Grid.symmetric(half, n)


def default_output(name: str, params: ParameterResolver) -> str:
    """Путь в папке вывода (OUT_DIR из файла или MTM_OUTPUT_DIR)"""
    directory = params.get("OUT_DIR", None, str, config.OUTPUT_DIR)
    return os.path.join(directory, name)
