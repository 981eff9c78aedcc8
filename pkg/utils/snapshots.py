"""
Снимки полей и векторов Лакса в CSV, JSON-результаты, атомарная запись и хеши
"""
import hashlib
import json
import logging
import os
import tempfile
from typing import Any, Dict

import numpy as np
import pandas as pd

from mtm.errors import ParameterError
from mtm.fields import Grid, LaxVector, SpinorField

logger = logging.getLogger(__name__)

FIELD_COLUMNS = ["x", "re_u", "im_u", "re_v", "im_v"]
VECTOR_COLUMNS = ["x", "re_phi1", "im_phi1", "re_phi2", "im_phi2"]
FLOAT_FORMAT = "%.17g"


def atomic_write_text(path: str, text: str):
    """Пишет файл через временный файл в той же папке и os.replace"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def write_frame(frame: pd.DataFrame, path: str):
    """CSV без потери точности (17 значащих цифр)"""
    atomic_write_text(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))
    logger.debug("записан %s (%d строк)", path, len(frame))


def read_frame(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Файл не найден: {path}")
    return pd.read_csv(path, float_precision="round_trip")


def _grid_from_x(x: np.ndarray, periodic: bool) -> Grid:
    n = len(x)
    if n < 8:
        raise ParameterError(f"Снимок содержит {n} точек, нужно не меньше 8")
    dx = (x[-1] - x[0]) / (n - 1)
    if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0.0):
        raise ParameterError("Сетка снимка неравномерна")
    return Grid(float(x[0]), float(x[0] + n * dx), n, periodic)


def _require_columns(frame: pd.DataFrame, columns, path: str):
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ParameterError(f"{path}: нет столбцов {missing}")


def field_frame(f: SpinorField) -> pd.DataFrame:
    return pd.DataFrame({
        "x": f.grid.x, "re_u": f.u.real, "im_u": f.u.imag, "re_v": f.v.real, "im_v": f.v.imag,
    }, columns=FIELD_COLUMNS)


def write_field(f: SpinorField, path: str):
    write_frame(field_frame(f), path)


def read_field(path: str, periodic: bool = True) -> SpinorField:
    """Читает снимок поля; сетка восстанавливается по столбцу x"""
    frame = read_frame(path)
    _require_columns(frame, FIELD_COLUMNS, path)
    grid = _grid_from_x(frame["x"].to_numpy(dtype=float), periodic)
    u = frame["re_u"].to_numpy(dtype=float) + 1j * frame["im_u"].to_numpy(dtype=float)
    v = frame["re_v"].to_numpy(dtype=float) + 1j * frame["im_v"].to_numpy(dtype=float)
    return SpinorField(grid, u, v)


def write_vector(phi: LaxVector, path: str):
    write_frame(pd.DataFrame({
        "x": phi.grid.x,
        "re_phi1": phi.phi1.real, "im_phi1": phi.phi1.imag,
        "re_phi2": phi.phi2.real, "im_phi2": phi.phi2.imag,
    }, columns=VECTOR_COLUMNS), path)


def read_vector(path: str, grid: Grid) -> LaxVector:
    """Читает вектор Лакса на заданной сетке"""
    frame = read_frame(path)
    _require_columns(frame, VECTOR_COLUMNS, path)
    if len(frame) != grid.n:
        raise ParameterError(f"{path}: {len(frame)} точек, а в сетке {grid.n}")
    phi1 = frame["re_phi1"].to_numpy(dtype=float) + 1j * frame["im_phi1"].to_numpy(dtype=float)
    phi2 = frame["re_phi2"].to_numpy(dtype=float) + 1j * frame["im_phi2"].to_numpy(dtype=float)
    return LaxVector(grid, phi1, phi2)


def write_json(data: Dict[str, Any], path: str):
    atomic_write_text(path, json.dumps(data, indent=2, ensure_ascii=False, sort_keys=True) + "\n")


def read_json(path: str) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def file_digest(path: str) -> str:
    """SHA-256 содержимого файла"""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
