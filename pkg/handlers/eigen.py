"""
Подкоманда eigen: собственное значение и собственный вектор по снимку поля
"""
import logging
import os

import numpy as np

from handlers import add_lambda_arguments, default_output
from mtm.lax import eigenvector_remainder, find_eigenvalue
from mtm.solitons import SpectralParameter
from services.router import CommandResult, manifest_beside
from utils.snapshots import read_field, write_json, write_vector

logger = logging.getLogger(__name__)


def register(subparsers, common):
    parser = subparsers.add_parser("eigen", parents=[common], help="Найти собственное значение рядом с λ")
    parser.add_argument("--field", required=True, help="CSV снимка поля")
    add_lambda_arguments(parser, "начального приближения")
    parser.add_argument("--gamma", type=float, help="Приближение λ = e^{iγ/2}, если λ не задано")
    parser.add_argument("--out-prefix", help="Префикс файлов результата")


def handle(args, params) -> CommandResult:
    field = read_field(args.field)
    guess = params.get_complex("LAMBDA_RE", "LAMBDA_IM", args.lambda_re, args.lambda_im)
    if guess is None:
        gamma = params.get("GAMMA", args.gamma, float, required=True)
        guess = SpectralParameter.on_unit_circle(gamma).lam
    res = find_eigenvalue(field, guess)

    prefix = args.out_prefix or default_output("eigen", params)
    json_path = f"{prefix}.json"
    vector_path = f"{prefix}_eigenvector.csv"
    summary = {
        "lambda_re": res.lam.real,
        "lambda_im": res.lam.imag,
        "evans_residual": res.evans_residual,
        "iterations": res.iterations,
    }
    p = SpectralParameter(res.lam)
    if 0 < p.gamma < np.pi:
        diag = eigenvector_remainder(field, res)
        summary["remainder_sup"] = diag.sup_norms
        summary["remainder_l2"] = diag.l2_norms
    write_json(summary, json_path)
    write_vector(res.eigenvector, vector_path)
    print(f"🎯 λ = {res.lam.real:.12g} {res.lam.imag:+.12g}i, |E| = {res.evans_residual:.2e}")
    logger.info("Результаты записаны с префиксом %s", os.path.relpath(prefix))
    return CommandResult(manifest_beside(json_path), [json_path, vector_path], [args.field],
                         results={"lambda": res.lam, "iterations": res.iterations})
