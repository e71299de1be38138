"""Entire-function building blocks.

Provides the oscillator pair s(t, lam) = sqrt(lam) sin(sqrt(lam) t),
c(t, lam) = cos(sqrt(lam) t), their normalized lambda-derivatives

    f^{<j>}(lam) = (1/j!) d^j f / d lam^j,

evaluation handles for user-supplied entire functions (with contour
derivatives), and the boundary-pair presets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import QuadratureDivergence

__all__ = [
    "rho_of", "SpectralPoint", "sc_values", "sc_derivative", "s_over_lambda",
    "AnalyticHandle", "BoundaryPair", "const_handle", "poly_handle",
    "boundary_preset",
]

_SERIES_RADIUS = 0.25
_SERIES_TERMS = 40


def rho_of(lam):
    """Square root of lambda with arg rho in [-pi/2, pi/2)."""
    r = np.sqrt(np.asarray(lam, dtype=complex))
    flip = (r.real == 0) & (r.imag > 0)
    return np.where(flip, -r, r) if r.ndim else (-r if flip else r)


@dataclass(frozen=True)
class SpectralPoint:
    lam: complex
    rho: complex

    @classmethod
    def of(cls, lam: complex) -> "SpectralPoint":
        return cls(complex(lam), complex(rho_of(lam)))

    def __post_init__(self):
        if abs(self.rho * self.rho - self.lam) > 1e-12 * max(1.0, abs(self.lam)):
            raise ValueError("rho^2 does not reproduce lambda")
        # arg rho in [-pi/2, pi/2): right half plane minus the upper axis
        if self.rho.real < 0 or (self.rho.real == 0 and self.rho.imag > 0):
            raise ValueError(f"arg rho = {np.angle(self.rho)} outside branch")


# ---------------------------------------------------------------------------
# s, c and normalized lambda-derivatives
# ---------------------------------------------------------------------------

def _sc_series(t, lam, nu):
    """Taylor-in-lambda evaluation near lambda = 0 (both are entire)."""
    t = np.asarray(t, dtype=float)
    lam = complex(lam)
    s_out = np.zeros(t.shape, dtype=complex)
    c_out = np.zeros(t.shape, dtype=complex)
    t2 = t * t
    # c^{<nu>} = sum_{k>=nu} (-1)^k t^{2k}/(2k)! C(k,nu) lam^{k-nu}
    for k in range(nu, nu + _SERIES_TERMS):
        coef = ((-1) ** k) * math.comb(k, nu) / math.factorial(2 * k)
        term = coef * lam ** (k - nu) * t2 ** k
        c_out += term
        if k > nu + 2 and np.max(np.abs(term)) < 1e-18:
            break
    # s^{<nu>} = sum_{k+1>=nu} (-1)^k t^{2k+1}/(2k+1)! C(k+1,nu) lam^{k+1-nu}
    for k in range(max(0, nu - 1), max(0, nu - 1) + _SERIES_TERMS):
        coef = ((-1) ** k) * math.comb(k + 1, nu) / math.factorial(2 * k + 1)
        term = coef * lam ** (k + 1 - nu) * t * t2 ** k
        s_out += term
        if k > nu + 2 and np.max(np.abs(term)) < 1e-18:
            break
    return s_out, c_out


def _derivative_terms(kind: int, nu: int):
    """nu-fold lambda-derivative of t^0 rho^{-m0} trig(rho t) as a term map.

    Terms are {(kind, j, m): coef} encoding coef * t^j * rho^{-m} * trig(rho t)
    with kind 0 = cos, 1 = sin.  Differentiation rules (d/dlam = d/drho / 2rho):

        sin: (j, m) -> -(m/2) (j, m+2) sin + (1/2) (j+1, m+1) cos
        cos: (j, m) -> -(m/2) (j, m+2) cos - (1/2) (j+1, m+1) sin
    """
    terms = {(kind, 0, -1 if kind == 1 else 0): 1.0}
    for _ in range(nu):
        new: dict = {}
        for (k, j, m), coef in terms.items():
            if m != 0:
                key = (k, j, m + 2)
                new[key] = new.get(key, 0.0) - coef * m / 2.0
            if k == 1:  # sin
                key = (0, j + 1, m + 1)
                new[key] = new.get(key, 0.0) + coef / 2.0
            else:  # cos
                key = (1, j + 1, m + 1)
                new[key] = new.get(key, 0.0) - coef / 2.0
        terms = new
    fact = math.factorial(nu)
    return {k: v / fact for k, v in terms.items()}


def sc_derivative(t, lam, nu: int):
    """(s^{<nu>}(t, lam), c^{<nu>}(t, lam)) on an array of abscissas."""
    if abs(lam) < _SERIES_RADIUS:
        return _sc_series(t, lam, nu)
    t = np.asarray(t, dtype=float)
    rho = complex(rho_of(lam))
    st, ct = np.sin(rho * t), np.cos(rho * t)
    out = []
    for kind in (1, 0):  # s first (sin-type), then c (cos-type)
        acc = np.zeros(t.shape, dtype=complex)
        for (k, j, m), coef in _derivative_terms(kind, nu).items():
            base = st if k == 1 else ct
            acc += coef * t ** j * rho ** (-m) * base
        out.append(acc)
    return out[0], out[1]


def sc_values(t, lam):
    """(s(t, lam), c(t, lam)); series branch keeps lambda = 0 exact."""
    return sc_derivative(t, lam, 0)


def s_over_lambda(t, lam):
    """s(t, lam) / lam, which is entire in lambda."""
    if abs(lam) < _SERIES_RADIUS:
        t = np.asarray(t, dtype=float)
        lam = complex(lam)
        out = np.zeros(t.shape, dtype=complex)
        t2 = t * t
        for k in range(_SERIES_TERMS):
            term = ((-1) ** k) / math.factorial(2 * k + 1) * lam ** k * t * t2 ** k
            out += term
            if k > 2 and np.max(np.abs(term)) < 1e-18:
                break
        return out
    s, _ = sc_values(t, lam)
    return s / lam


# ---------------------------------------------------------------------------
# Analytic handles and boundary pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalyticHandle:
    """Evaluator for an entire function with derivative access.

    ``fn`` must accept complex ndarrays.  ``dfn(lam, j)`` returns the
    normalized j-th derivative in closed form when available; otherwise
    derivatives fall back to a Cauchy-integral contour around lam.
    """

    fn: object
    dfn: object = None
    derivative_mode: str = "contour"
    contour_radius: float = 1e-2
    label: str = field(default="", compare=False)

    def __call__(self, lam):
        return self.fn(np.asarray(lam, dtype=complex))

    def derivative(self, lam: complex, j: int) -> complex:
        """Normalized derivative f^{<j>}(lam)."""
        if j == 0:
            return complex(self.fn(np.asarray([lam], dtype=complex))[0])
        if self.derivative_mode == "closed_form" and self.dfn is not None:
            return complex(self.dfn(complex(lam), j))
        return self._contour_derivative(complex(lam), j)

    def _contour_derivative(self, lam: complex, j: int) -> complex:
        r = self.contour_radius
        v64 = _cauchy_coefficient(self.fn, lam, r, j, 64)
        v128 = _cauchy_coefficient(self.fn, lam, r, j, 128)
        scale = max(abs(v128), abs(lam) ** max(0, 1 - j), 1e-30)
        if abs(v64 - v128) > 1e-6 * scale:
            raise QuadratureDivergence(
                f"contour derivative at {lam}: 64/128-point values differ "
                f"by {abs(v64 - v128):.3e}")
        return v128


def _cauchy_coefficient(fn, lam, r, j, n):
    phase = np.exp(2j * np.pi * np.arange(n) / n)
    vals = fn(lam + r * phase)
    return complex(np.sum(vals * phase ** (-j)) / (n * r ** j))


def const_handle(c: complex) -> AnalyticHandle:
    c = complex(c)
    return AnalyticHandle(
        fn=lambda lam: np.full(np.shape(lam), c, dtype=complex),
        dfn=lambda lam, j: c if j == 0 else 0.0,
        derivative_mode="closed_form",
        label=f"const {c}",
    )


def poly_handle(coeffs) -> AnalyticHandle:
    """Polynomial sum_k coeffs[k] lam^k with exact normalized derivatives."""
    coeffs = [complex(a) for a in coeffs]

    def fn(lam):
        lam = np.asarray(lam, dtype=complex)
        out = np.zeros(lam.shape, dtype=complex)
        for a in reversed(coeffs):
            out = out * lam + a
        return out

    def dfn(lam, j):
        return sum(a * math.comb(k, j) * lam ** (k - j)
                   for k, a in enumerate(coeffs) if k >= j)

    return AnalyticHandle(fn=fn, dfn=dfn, derivative_mode="closed_form",
                          label=f"poly {coeffs}")


@dataclass(frozen=True)
class BoundaryPair:
    """The two entire functions multiplying y'(pi) and y(pi)."""

    f1: AnalyticHandle
    f2: AnalyticHandle
    name: str = ""

    def f_values(self, lams):
        lams = np.asarray(lams, dtype=complex)
        return self.f1(lams), self.f2(lams)


def boundary_preset(name: str, **kwargs) -> BoundaryPair:
    """Named boundary pairs: dirichlet, neumann, robin (h=), poly (c1=, c2=)."""
    key = name.strip().lower()
    if key == "dirichlet":
        return BoundaryPair(const_handle(0.0), const_handle(1.0), "dirichlet")
    if key == "neumann":
        return BoundaryPair(const_handle(1.0), const_handle(0.0), "neumann")
    if key == "robin":
        h = complex(kwargs.get("h", 0.0))
        return BoundaryPair(const_handle(1.0), const_handle(h), f"robin {h}")
    if key == "poly":
        return BoundaryPair(poly_handle(kwargs["c1"]), poly_handle(kwargs["c2"]),
                            "poly")
    if key == "hl":
        raise ValueError(
            "the half-inverse pair is built from a known half potential; "
            "use halfinv.build_boundary_pair")
    raise ValueError(f"unknown boundary preset {name!r}")
