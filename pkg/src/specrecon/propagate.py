"""Initial-value solves of  -y'' + q(x) y = lambda y  on the potential grid.

``integrate_forward`` produces the solution with y(0) = 0, y'(0) = 1 (and,
with other initial data, any other solution); ``integrate_backward``
produces the solution with y(a) = 0, y'(a) = -1 by propagating the
reflected potential forward.  All entry points accept batches of spectral
points; the per-cell work happens in the selected kernel backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import OverflowGuard
from .grids import Grid, Potential, _cubic_interp

__all__ = [
    "SolutionSample", "SolutionPath", "endpoint_values", "integrate_forward",
    "integrate_backward", "second_solution", "omega_of", "LAMBDA_GUARD",
]

# |lambda| above this is rejected outright rather than risking overflow.
LAMBDA_GUARD = 1e8

_GAUSS_C1 = 0.5 - math.sqrt(3.0) / 6.0
_GAUSS_C2 = 0.5 + math.sqrt(3.0) / 6.0


class SolutionSample(NamedTuple):
    x: float
    S: complex
    Sprime: complex
    lam: complex


@dataclass(frozen=True)
class SolutionPath:
    """Solution values and x-derivatives at every grid node, fixed lambda."""

    x: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    lam: complex

    def __getitem__(self, i: int) -> SolutionSample:
        return SolutionSample(self.x[i], self.y[i], self.dy[i], self.lam)

    def __len__(self) -> int:
        return len(self.x)

    @property
    def endpoint(self) -> SolutionSample:
        return self[len(self.x) - 1]


def _gauss_values(q: Potential, refine: int) -> tuple[np.ndarray, np.ndarray]:
    """Potential at the two Gauss points of every (sub)cell, cached."""
    key = ("gauss", refine)
    if key not in q._cache:
        h = q.grid.spacing / refine
        left = np.arange(q.grid.cells * refine) * h
        if q.func is not None:
            g1 = q.at(left + _GAUSS_C1 * h)
            g2 = q.at(left + _GAUSS_C2 * h)
        else:
            g1 = _cubic_interp(q.grid, q.values, left + _GAUSS_C1 * h)
            g2 = _cubic_interp(q.grid, q.values, left + _GAUSS_C2 * h)
        q._cache[key] = (np.ascontiguousarray(g1), np.ascontiguousarray(g2))
    return q._cache[key]


def _check_lambda(lam: np.ndarray) -> None:
    if np.any(np.abs(lam) > LAMBDA_GUARD):
        raise OverflowGuard(f"|lambda| exceeds the {LAMBDA_GUARD:g} guard")


def _propagate(q, lam, y0, dy0, full, refine=1):
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    _check_lambda(lam)
    qg1, qg2 = _gauss_values(q, refine)
    ones = np.ones_like(lam)
    out = kernels.propagate(qg1, qg2, q.grid.spacing / refine, lam,
                            y0 * ones, dy0 * ones, full)
    y, dy, overflowed = out
    if overflowed:
        raise OverflowGuard("solution magnitude exceeded 1e300")
    return y, dy


def endpoint_values(q: Potential, lam, refine: int = 1):
    """(S(a, lam), S'(a, lam)) for a batch of spectral points."""
    y, dy = _propagate(q, lam, 0.0, 1.0, full=False, refine=refine)
    return y, dy


def integrate_forward(q: Potential, lam: complex, init=(0.0, 1.0),
                      refine: int = 1) -> SolutionPath:
    """Full forward trajectory for a single lambda."""
    y, dy = _propagate(q, lam, complex(init[0]), complex(init[1]), full=True,
                       refine=refine)
    xs = np.linspace(0.0, q.grid.endpoint, q.grid.cells * refine + 1)
    return SolutionPath(xs, y[0], dy[0], complex(lam))


def second_solution(q: Potential, lam: complex, refine: int = 1) -> SolutionPath:
    """Solution with y(0) = 1, y'(0) = 0."""
    return integrate_forward(q, lam, init=(1.0, 0.0), refine=refine)


def _reflected(q: Potential) -> Potential:
    if "reflected" not in q._cache:
        f = None
        if q.func is not None:
            a, orig = q.grid.endpoint, q.func
            f = lambda x: orig(a - x)  # noqa: E731
        q._cache["reflected"] = Potential(q.grid, q.values[::-1].copy(),
                                          preset_tag=None, func=f)
    return q._cache["reflected"]


def integrate_backward(q: Potential, lam: complex, refine: int = 1) -> SolutionPath:
    """Full trajectory of the solution with y(a) = 0, y'(a) = -1.

    Computed as y(x) = chi(a - x) where chi is the forward solution for the
    reflected potential; this reuses the forward kernel unchanged.
    """
    chi = integrate_forward(_reflected(q), lam, refine=refine)
    xs = q.grid.endpoint - chi.x[::-1]
    return SolutionPath(xs, chi.y[::-1].copy(), -chi.dy[::-1].copy(),
                        complex(lam))


def omega_of(q: Potential) -> complex:
    """Half the integral of q over its interval (Simpson quadrature)."""
    w = q.grid.simpson_weights()
    return complex(0.5 * np.dot(w, q.values))
