"""
Сетки, двухкомпонентные комплексные поля, нормы и квадратуры
"""
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import trapezoid

from mtm.errors import GridMismatchError, ParameterError

ComplexArray = NDArray[np.complex128]


@dataclass(frozen=True)
class Grid:
    """
    Равномерная сетка x_j = x_min + j*dx, j = 0..n-1

    На периодической сетке x_max отождествляется с x_min.
    """

    x_min: float
    x_max: float
    n: int
    periodic: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ParameterError("Границы сетки должны быть конечными")
        if self.x_max <= self.x_min:
            raise ParameterError(f"Требуется x_max > x_min, получено [{self.x_min}, {self.x_max}]")
        if int(self.n) != self.n or self.n < 8:
            raise ParameterError(f"Число узлов должно быть целым и не меньше 8, получено {self.n}")

    @classmethod
    def symmetric(cls, half_width: float, n: int, periodic: bool = True) -> "Grid":
        """Сетка на [-L, L]"""
        return cls(-float(half_width), float(half_width), int(n), periodic)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def x(self) -> NDArray[np.float64]:
        return self.x_min + self.dx * np.arange(self.n)

    def nearest_index(self, x0: float) -> int:
        """Индекс узла, ближайшего к x0"""
        j = int(round((x0 - self.x_min) / self.dx))
        return min(max(j, 0), self.n - 1)


def _frozen(values, n: int, name: str) -> ComplexArray:
    """Копия массива длины n, защищенная от записи"""
    arr = np.array(values, dtype=np.complex128)
    if arr.shape != (n,):
        raise ParameterError(f"{name}: ожидалась длина {n}, получена форма {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpinorField:
    """Пара (u, v) на сетке: состояние системы MTM"""

    grid: Grid
    u: ComplexArray = field(repr=False)
    v: ComplexArray = field(repr=False)

    def __post_init__(self):
        u = _frozen(self.u, self.grid.n, "u")
        v = _frozen(self.v, self.grid.n, "v")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ParameterError("Поле содержит NaN или Inf")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpinorField":
        return cls(grid, np.zeros(grid.n), np.zeros(grid.n))

    def phased(self, theta: float) -> "SpinorField":
        """e^{iθ}·(u, v)"""
        phase = np.exp(1j * theta)
        return SpinorField(self.grid, phase * self.u, phase * self.v)

    def rolled(self, cells: int) -> "SpinorField":
        """Сдвиг на целое число ячеек (точный на периодической сетке)"""
        return SpinorField(self.grid, np.roll(self.u, cells), np.roll(self.v, cells))

    def __add__(self, other: "SpinorField") -> "SpinorField":
        require_same_grid(self, other)
        return SpinorField(self.grid, self.u + other.u, self.v + other.v)

    def __sub__(self, other: "SpinorField") -> "SpinorField":
        require_same_grid(self, other)
        return SpinorField(self.grid, self.u - other.u, self.v - other.v)


@dataclass(frozen=True)
class LaxVector:
    """Двухкомпонентное решение линейных уравнений Лакса (φ₁, φ₂)"""

    grid: Grid
    phi1: ComplexArray = field(repr=False)
    phi2: ComplexArray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "phi1", _frozen(self.phi1, self.grid.n, "phi1"))
        object.__setattr__(self, "phi2", _frozen(self.phi2, self.grid.n, "phi2"))

    def scaled(self, c: complex) -> "LaxVector":
        return LaxVector(self.grid, c * self.phi1, c * self.phi2)

    def sigma3(self) -> "LaxVector":
        """σ₃φ = (φ₁, -φ₂)"""
        return LaxVector(self.grid, self.phi1, -self.phi2)

    def pointwise_norm_sq(self) -> NDArray[np.float64]:
        return np.abs(self.phi1) ** 2 + np.abs(self.phi2) ** 2

    def __add__(self, other: "LaxVector") -> "LaxVector":
        require_same_grid(self, other)
        return LaxVector(self.grid, self.phi1 + other.phi1, self.phi2 + other.phi2)

    def __sub__(self, other: "LaxVector") -> "LaxVector":
        require_same_grid(self, other)
        return LaxVector(self.grid, self.phi1 - other.phi1, self.phi2 - other.phi2)


TwoComponent = Union[SpinorField, LaxVector]


def components(f: TwoComponent) -> Tuple[ComplexArray, ComplexArray]:
    """Компоненты поля или вектора Лакса"""
    if isinstance(f, SpinorField):
        return f.u, f.v
    return f.phi1, f.phi2


def require_same_grid(f: TwoComponent, g: TwoComponent):
    """Проверяет, что операнды заданы на одной сетке"""
    if f.grid != g.grid:
        raise GridMismatchError(f"Сетки не совпадают: {f.grid} и {g.grid}")


def integrate(values: NDArray, grid: Grid) -> complex:
    """
    Квадратура трапеций по сетке

    На периодической сетке замыкающая ячейка учитывается, и формула трапеций
    совпадает с dx * sum.
    """
    if grid.periodic:
        return grid.dx * np.sum(values)
    return trapezoid(values, dx=grid.dx)


def norm(values: NDArray, grid: Grid) -> float:
    """L²-норма одной компоненты"""
    return float(np.sqrt(np.real(integrate(np.abs(values) ** 2, grid))))


def l2_norm_sq(f: TwoComponent) -> float:
    """Заряд поля ∫(|u|² + |v|²)dx"""
    a, b = components(f)
    return float(np.real(integrate(np.abs(a) ** 2 + np.abs(b) ** 2, f.grid)))


def inner_product(f: TwoComponent, g: TwoComponent) -> complex:
    """
    ⟨f, g⟩ = ∫(f̄₁g₁ + f̄₂g₂)dx, сопряженно-линейное по первому аргументу

    Raises:
        GridMismatchError: если сетки различаются
    """
    require_same_grid(f, g)
    f1, f2 = components(f)
    g1, g2 = components(g)
    return complex(integrate(np.conj(f1) * g1 + np.conj(f2) * g2, f.grid))


def derivative(values: NDArray, grid: Grid) -> NDArray:
    """
    Центральная разность четвертого порядка

    На периодической сетке шаблон замыкается; иначе в двух крайних узлах
    с каждой стороны используется np.gradient второго порядка.
    """
    dx = grid.dx
    if grid.periodic:
        return (
            -np.roll(values, -2) + 8.0 * np.roll(values, -1)
            - 8.0 * np.roll(values, 1) + np.roll(values, 2)
        ) / (12.0 * dx)
    out = np.gradient(values, dx, edge_order=2)
    out[2:-2] = (-values[4:] + 8.0 * values[3:-1] - 8.0 * values[1:-3] + values[:-4]) / (12.0 * dx)
    return out


def h1_seminorm(f: TwoComponent) -> float:
    """‖∂ₓf‖ в L²"""
    a, b = components(f)
    da = derivative(a, f.grid)
    db = derivative(b, f.grid)
    return float(np.sqrt(np.real(integrate(np.abs(da) ** 2 + np.abs(db) ** 2, f.grid))))


def h1_norm(f: TwoComponent) -> float:
    """Полная норма H¹"""
    return float(np.sqrt(l2_norm_sq(f) + h1_seminorm(f) ** 2))


def distance(f: TwoComponent, g: TwoComponent) -> float:
    """Расстояние ‖f₁ − g₁‖ + ‖f₂ − g₂‖"""
    require_same_grid(f, g)
    f1, f2 = components(f)
    g1, g2 = components(g)
    return norm(f1 - g1, f.grid) + norm(f2 - g2, f.grid)
