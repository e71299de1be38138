"""Uniform grids and sampled potentials on (0, a).

A :class:`Potential` is immutable after construction: operations never
mutate the sample array.  Closed-form presets additionally carry a callable
so integrators can evaluate the potential off the nodes without
interpolation error.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGrid

__all__ = ["Grid", "Potential", "grid_pi", "grid_2pi", "PRESETS"]


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``cells + 1`` nodes on [0, endpoint]."""

    endpoint: float
    cells: int

    def __post_init__(self):
        if not (self.endpoint > 0 and math.isfinite(self.endpoint)):
            raise InvalidGrid(f"endpoint must be positive, got {self.endpoint}")
        if self.cells < 1:
            raise InvalidGrid(f"need at least 2 nodes, got cells={self.cells}")

    @property
    def nodes(self) -> int:
        return self.cells + 1

    @property
    def spacing(self) -> float:
        return self.endpoint / self.cells

    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.endpoint, self.nodes)

    def simpson_weights(self) -> np.ndarray:
        """Composite Simpson weights (trapezoid on a trailing odd cell)."""
        n = self.cells
        h = self.spacing
        w = np.zeros(self.nodes)
        m = n if n % 2 == 0 else n - 1
        if m >= 2:
            w[0:m + 1:2] += 2.0
            w[1:m:2] += 4.0
            w[0] -= 1.0
            w[m] -= 1.0
            w[:m + 1] *= h / 3.0
        if m != n:
            w[-2] += h / 2.0
            w[-1] += h / 2.0
        return w


def grid_pi(cells: int = 2048) -> Grid:
    return Grid(math.pi, cells)


def grid_2pi(cells: int = 4096) -> Grid:
    return Grid(2 * math.pi, cells)


@dataclass(frozen=True, eq=False)
class Potential:
    """Complex-valued potential sampled on a uniform grid."""

    grid: Grid
    values: np.ndarray
    preset_tag: str | None = None
    func: object = field(default=None, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.nodes,):
            raise InvalidGrid(
                f"value count {vals.shape} does not match grid nodes {self.grid.nodes}"
            )
        if not np.all(np.isfinite(vals.view(float))):
            raise InvalidGrid("potential samples must be finite")
        object.__setattr__(self, "values", vals)

    # -- constructors -------------------------------------------------

    @classmethod
    def from_callable(cls, f, grid: Grid, tag: str | None = None) -> "Potential":
        vals = np.array([complex(f(x)) for x in grid.x()])
        return cls(grid, vals, preset_tag=tag, func=f)

    @classmethod
    def zero(cls, grid: Grid) -> "Potential":
        return cls.from_callable(lambda x: 0.0, grid, tag="zero")

    @classmethod
    def constant(cls, c: complex, grid: Grid) -> "Potential":
        c = complex(c)
        return cls.from_callable(lambda x: c, grid, tag=f"constant {c}")

    @classmethod
    def preset(cls, name: str, grid: Grid) -> "Potential":
        name = name.strip()
        if name in PRESETS:
            return cls.from_callable(PRESETS[name], grid, tag=name)
        if name.startswith("constant:"):
            return cls.constant(_parse_complex(name.partition(":")[2]), grid)
        if name.startswith("ramp:"):
            c = _parse_complex(name.partition(":")[2])
            return cls.from_callable(lambda x: c * x / math.pi, grid,
                                     tag=name)
        raise InvalidGrid(f"unknown potential preset {name!r}")

    # -- file format: line 'a <endpoint>' then nodes of 'x re im' -----

    @classmethod
    def read(cls, path) -> "Potential":
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
        if not lines or not lines[0].startswith("a "):
            raise InvalidGrid(f"{path}: first line must be 'a <endpoint>'")
        endpoint = float(lines[0].split()[1])
        rows = np.array([[float(tok) for tok in ln.split()] for ln in lines[1:]])
        if rows.ndim != 2 or rows.shape[1] != 3 or rows.shape[0] < 2:
            raise InvalidGrid(f"{path}: expected rows of 'x re(q) im(q)'")
        grid = Grid(endpoint, rows.shape[0] - 1)
        if not np.allclose(rows[:, 0], grid.x(), atol=1e-9 * endpoint):
            raise InvalidGrid(f"{path}: abscissas are not the uniform grid")
        return cls(grid, rows[:, 1] + 1j * rows[:, 2], preset_tag=None)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("a %.17g\n" % self.grid.endpoint)
            for x, v in zip(self.grid.x(), self.values):
                fh.write("%.17g %.17g %.17g\n" % (x, v.real, v.imag))

    # -- helpers ------------------------------------------------------

    def at(self, x: np.ndarray) -> np.ndarray:
        """Values at arbitrary abscissas: exact for presets, cubic otherwise."""
        x = np.asarray(x, dtype=float)
        if self.func is not None:
            return np.array([complex(self.func(xi)) for xi in x.ravel()]).reshape(x.shape)
        return _cubic_interp(self.grid, self.values, x)

    def restrict_second_half(self) -> np.ndarray:
        """Samples on [a/2, a] (used by the half-inverse reduction)."""
        n = self.grid.cells
        if n % 2:
            raise InvalidGrid("second-half restriction needs an even cell count")
        return self.values[n // 2:]


def _parse_complex(text: str) -> complex:
    text = text.strip().replace(" ", "")
    try:
        return complex(text)
    except ValueError:
        parts = text.split(",")
        return complex(float(parts[0]), float(parts[1]) if len(parts) > 1 else 0.0)


def _cubic_interp(grid: Grid, vals: np.ndarray, x: np.ndarray) -> np.ndarray:
    """4-point Lagrange interpolation on the uniform grid (O(h^4))."""
    h = grid.spacing
    n = grid.cells
    xi = np.clip(x / h, 0.0, n)
    i0 = np.clip(np.floor(xi).astype(int) - 1, 0, n - 3)
    t = xi - i0
    # Lagrange basis on offsets 0,1,2,3
    l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0
    l1 = t * (t - 2) * (t - 3) / 2.0
    l2 = -t * (t - 1) * (t - 3) / 2.0
    l3 = t * (t - 1) * (t - 2) / 6.0
    return (l0 * vals[i0] + l1 * vals[i0 + 1] + l2 * vals[i0 + 2]
            + l3 * vals[i0 + 3])


def _cosine(x: float) -> complex:
    return complex(math.cos(x))


PRESETS = {
    "zero": lambda x: 0.0,
    "one": lambda x: 1.0,
    "cosine": _cosine,
    "complex-ramp": lambda x: (1 + 1j) * x / math.pi,
}
