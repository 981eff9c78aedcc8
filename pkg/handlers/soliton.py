"""
Подкоманда soliton: солитон в явном виде на сетке
"""
import logging

import numpy as np

from handlers import add_grid_arguments, add_lambda_arguments, default_output, resolve_grid
from mtm.evolution import charge
from mtm.fields import SpinorField
from mtm.solitons import SpectralParameter, soliton_values, stationary_soliton
from services.parameters import UsageError
from services.router import CommandResult, manifest_beside
from utils.snapshots import write_field

logger = logging.getLogger(__name__)


def register(subparsers, common):
    parser = subparsers.add_parser("soliton", parents=[common], help="Записать солитон в CSV")
    parser.add_argument("--gamma", type=float, help="γ ∈ (0, π) стационарного солитона, радианы")
    add_lambda_arguments(parser)
    parser.add_argument("--a", type=float, help="Сдвиг: поле берется в точке x + a")
    parser.add_argument("--theta", type=float, help="Фаза e^{iθ}")
    parser.add_argument("--t", type=float, help="Момент времени")
    add_grid_arguments(parser)
    parser.add_argument("--out", help="CSV файла поля")


def handle(args, params) -> CommandResult:
    grid = resolve_grid(args, params)
    a = params.get("A", args.a, float, 0.0)
    theta = params.get("THETA", args.theta, float, 0.0)
    t = params.get("T", args.t, float, 0.0)
    lam = params.get_complex("LAMBDA_RE", "LAMBDA_IM", args.lambda_re, args.lambda_im)
    if lam is not None:
        u, v = soliton_values(SpectralParameter(lam), grid.x + a, t)
        phase = np.exp(1j * theta)
        field = SpinorField(grid, phase * u, phase * v)
    else:
        gamma = params.get("GAMMA", args.gamma, float)
        if gamma is None:
            raise UsageError("Нужно задать --gamma или --lambda-re/--lambda-im")
        field = stationary_soliton(gamma, a, theta, t, grid)

    out = args.out or default_output("soliton.csv", params)
    write_field(field, out)
    q = charge(field)
    print(f"🌊 Заряд солитона: {q:.12g}")
    logger.info("Солитон записан в %s, заряд %.12g", out, q)
    return CommandResult(manifest_beside(out), [out], results={"charge": q})
