"""
Подкоманда backlund: отображение вниз (с собственным вектором) или вверх (через краевые задачи)
"""
import logging

from handlers import add_lambda_arguments, default_output
from mtm.backlund import backlund_transform, up_map
from mtm.evolution import charge
from mtm.lax import solve_time_bvp
from services.parameters import UsageError
from services.router import CommandResult, manifest_beside
from utils.snapshots import read_field, read_vector, write_field

logger = logging.getLogger(__name__)


def register(subparsers, common):
    parser = subparsers.add_parser("backlund", parents=[common], help="Преобразование Бэклунда поля")
    parser.add_argument("--field", required=True, help="CSV снимка поля")
    parser.add_argument("--eigenvector", help="CSV вектора Лакса (обязателен для --direction down)")
    add_lambda_arguments(parser)
    parser.add_argument("--direction", choices=["down", "up"], default="down",
                        help="down: поле и его вектор Лакса; up: малое решение и краевые задачи")
    parser.add_argument("--a", type=float, help="Параметр a отображения вверх")
    parser.add_argument("--theta", type=float, help="Параметр θ отображения вверх")
    parser.add_argument("--t", type=float, help="Момент времени малого решения")
    parser.add_argument("--out", help="CSV результата")


def handle(args, params) -> CommandResult:
    field = read_field(args.field)
    lam = params.get_complex("LAMBDA_RE", "LAMBDA_IM", args.lambda_re, args.lambda_im)
    if lam is None:
        raise UsageError("Нужно задать --lambda-re и --lambda-im")
    inputs = [args.field]
    if args.direction == "down":
        if not args.eigenvector:
            raise UsageError("--direction down требует --eigenvector")
        phi = read_vector(args.eigenvector, field.grid)
        result = backlund_transform(field, phi, lam)
        inputs.append(args.eigenvector)
    else:
        a = params.get("A", args.a, float, 0.0)
        theta = params.get("THETA", args.theta, float, 0.0)
        t = params.get("T", args.t, float, 0.0)
        jost = solve_time_bvp(field, lam, t)
        result = up_map(field, jost, lam, a, theta)

    out = args.out or default_output(f"backlund_{args.direction}.csv", params)
    write_field(result, out)
    q = charge(result)
    print(f"🔁 Бэклунд ({args.direction}): заряд {q:.12g}")
    return CommandResult(manifest_beside(out), [out], inputs,
                         results={"direction": args.direction, "charge": q})
