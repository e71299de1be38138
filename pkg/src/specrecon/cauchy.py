"""Cauchy-data map q -> {K, N, omega} and the rebuild of the endpoint
functions eta1 = S(pi, .), eta2 = S'(pi, .) from that data.

K and N are recovered through their cosine/sine coefficients, which the
endpoint representations expose at integer rho:

    int K(t) cos(nt) dt = lam eta1(lam) - s(pi,lam) + omega c(pi,lam),
    int N(t) sin(nt) dt = [lam (eta2(lam) - c(pi,lam)) - omega s(pi,lam)]/n,

both evaluated at lam = n^2.  A hard truncation of the remaining modes
decays too slowly (O(1/n) in the sine channel) for high-accuracy rebuilds,
so the coefficient tails are modeled by their leading algebraic form with
constants fitted from the top retained modes; the modeled tails have closed
forms both on the grid and inside the rebuild overlaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entire import rho_of
from .errors import AliasGuard, NearPole
from .grids import Grid, Potential
from .propagate import endpoint_values, omega_of

__all__ = ["CauchyData", "cauchy_data_of", "rebuild_eta", "weyl"]

PI = math.pi
_NEAR_ZERO = 1e-2
_CIRCLE_R = 4e-2
_TAIL_TERMS = 2500


def _sinc_pi(z):
    """sin(pi z)/(pi z), stable at z = 0, complex-safe."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-8
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 - (PI * z) ** 2 / 6.0,
                    np.sin(PI * zs) / (PI * zs))


@dataclass(frozen=True)
class CauchyData:
    """{K, N, omega} plus the coefficient representation used for rebuilds.

    ``a[k] = int K cos(kt) dt`` for k = 0..n_modes, ``b[k-1] = int N sin(kt)
    dt`` for k = 1..n_modes.  ``k_tail``/``n_tail`` hold the fitted leading
    tail constants (alternating and non-alternating, two orders each).
    """

    grid: Grid
    omega: complex
    a: np.ndarray
    b: np.ndarray
    k_tail: tuple
    n_tail: tuple
    K: np.ndarray = field(repr=False)
    N: np.ndarray = field(repr=False)

    @property
    def n_modes(self) -> int:
        return len(self.a) - 1

    # -- constructors --------------------------------------------------

    @classmethod
    def from_coefficients(cls, a, b, omega, grid: Grid) -> "CauchyData":
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        k_tail = _fit_cos_tail(a)
        n_tail = _fit_sin_tail(b)
        t = grid.x()
        nm = len(a) - 1
        K = _cos_series(t, a) + _cos_tail_grid(t, nm, k_tail)
        N = _sin_series(t, b) + _sin_tail_grid(t, nm, n_tail)
        return cls(grid, complex(omega), a, b, k_tail, n_tail, K, N)

    @classmethod
    def from_samples(cls, K, N, omega, grid: Grid,
                     n_modes: int = 64) -> "CauchyData":
        """Derive the coefficient representation from grid samples."""
        K = np.asarray(K, dtype=complex)
        N = np.asarray(N, dtype=complex)
        w = grid.simpson_weights()
        t = grid.x()
        ks = np.arange(0, n_modes + 1)
        a = (np.cos(np.outer(ks, t)) * (w * K)).sum(axis=1)
        ks = np.arange(1, n_modes + 1)
        b = (np.sin(np.outer(ks, t)) * (w * N)).sum(axis=1)
        return cls(grid, complex(omega), a, b, _fit_cos_tail(a),
                   _fit_sin_tail(b), K.copy(), N.copy())

    # -- serialization: header 'omega <re> <im>', then CSV rows --------

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("omega %.17g %.17g\n" % (self.omega.real, self.omega.imag))
            fh.write("t,K_re,K_im,N_re,N_im\n")
            for t, kv, nv in zip(self.grid.x(), self.K, self.N):
                fh.write("%.17g,%.17g,%.17g,%.17g,%.17g\n"
                         % (t, kv.real, kv.imag, nv.real, nv.imag))

    @classmethod
    def read(cls, path, n_modes: int = 64) -> "CauchyData":
        with open(path) as fh:
            head = fh.readline().split()
            if head[0] != "omega":
                raise ValueError(f"{path}: expected 'omega re im' header")
            omega = complex(float(head[1]), float(head[2]))
            fh.readline()  # column header
            rows = np.loadtxt(fh, delimiter=",")
        t = rows[:, 0]
        grid = Grid(float(t[-1]), len(t) - 1)
        return cls.from_samples(rows[:, 1] + 1j * rows[:, 2],
                                rows[:, 3] + 1j * rows[:, 4], omega, grid,
                                n_modes=n_modes)


# ---------------------------------------------------------------------------
# coefficient tails
# ---------------------------------------------------------------------------

def _fit_window(n_modes: int):
    lo = max(6, n_modes - 24)
    return np.arange(lo, n_modes + 1)


def _fit_cos_tail(a) -> tuple:
    """a_k ~ [A (-1)^k - B]/k^2 + [A2 (-1)^k - B2]/k^4 from the top modes."""
    nm = len(a) - 1
    ks = _fit_window(nm)
    if len(ks) < 6:
        return (0.0, 0.0, 0.0, 0.0)
    sign = (-1.0) ** ks
    design = np.stack([sign, -np.ones_like(ks, dtype=float),
                       sign / ks ** 2, -1.0 / ks ** 2], axis=1)
    sol, *_ = np.linalg.lstsq(design, a[ks] * ks ** 2, rcond=None)
    return tuple(complex(c) for c in sol)


def _fit_sin_tail(b) -> tuple:
    """b_k ~ [c0 - c1 (-1)^k]/k + [c2 - c3 (-1)^k]/k^3."""
    nm = len(b)
    ks = _fit_window(nm)
    ks = ks[ks >= 1]
    if len(ks) < 6:
        return (0.0, 0.0, 0.0, 0.0)
    sign = (-1.0) ** ks
    design = np.stack([np.ones_like(ks, dtype=float), -sign,
                       1.0 / ks ** 2, -sign / ks ** 2], axis=1)
    sol, *_ = np.linalg.lstsq(design, b[ks - 1] * ks, rcond=None)
    return tuple(complex(c) for c in sol)


def _cos_series(t, a):
    ks = np.arange(1, len(a))
    return a[0] / PI + (2.0 / PI) * (np.cos(np.outer(t, ks)) @ a[1:])


def _sin_series(t, b):
    ks = np.arange(1, len(b) + 1)
    return (2.0 / PI) * (np.sin(np.outer(t, ks)) @ b)


def _head(t, ks, kind):
    arg = np.outer(t, ks)
    return np.cos(arg) if kind == "cos" else np.sin(arg)


def _cos_tail_grid(t, nm, tail):
    """Smooth closed form of sum_{k>nm} [(A(-1)^k - B)/k^2 + ...] cos(kt)."""
    A, B, A2, B2 = tail
    ks = np.arange(1, nm + 1)
    c2_full = PI ** 2 / 6 - PI * t / 2 + t ** 2 / 4
    c2a_full = -PI ** 2 / 12 + t ** 2 / 4
    c4_full = PI ** 4 / 90 - PI ** 2 * t ** 2 / 12 + PI * t ** 3 / 12 - t ** 4 / 48
    c4a_full = -7 * PI ** 4 / 720 + PI ** 2 * t ** 2 / 24 - t ** 4 / 48
    hc = _head(t, ks, "cos")
    sign = (-1.0) ** ks
    c2 = c2_full - hc @ (1.0 / ks ** 2)
    c2a = c2a_full - hc @ (sign / ks ** 2)
    c4 = c4_full - hc @ (1.0 / ks ** 4)
    c4a = c4a_full - hc @ (sign / ks ** 4)
    return (2.0 / PI) * (A * c2a - B * c2 + A2 * c4a - B2 * c4)


def _sin_tail_grid(t, nm, tail):
    c0, c1, c2, c3 = tail
    ks = np.arange(1, nm + 1)
    s1_full = (PI - t) / 2
    s1a_full = -t / 2
    s3_full = PI ** 2 * t / 6 - PI * t ** 2 / 4 + t ** 3 / 12
    s3a_full = (t ** 3 - PI ** 2 * t) / 12
    hs = _head(t, ks, "sin")
    sign = (-1.0) ** ks
    s1 = s1_full - hs @ (1.0 / ks)
    s1a = s1a_full - hs @ (sign / ks)
    s3 = s3_full - hs @ (1.0 / ks ** 3)
    s3a = s3a_full - hs @ (sign / ks ** 3)
    return (2.0 / PI) * (c0 * s1 - c1 * s1a + c2 * s3 - c3 * s3a)


def _tail_overlap_sums(rho, nm):
    """T_p = sum_{k>nm} k^{-p}/(k^2-rho^2) and alternating variants,
    p in {0, 2, 4}; direct summation plus integral/averaging remainders."""
    rho = np.atleast_1d(rho)
    ks = np.arange(nm + 1, nm + _TAIL_TERMS + 1, dtype=float)
    inv = 1.0 / (ks[None, :] ** 2 - (rho ** 2)[:, None])
    sign = (-1.0) ** ks
    out = {}
    x0 = nm + _TAIL_TERMS + 0.5
    r2 = rho * rho
    log_rem = np.log((x0 + rho) / (x0 - rho)) / (2 * rho)
    rem = {0: log_rem,
           2: (log_rem - 1.0 / x0) / r2}
    rem[4] = (rem[2] - 1.0 / (3 * x0 ** 3)) / r2
    for p in (0, 2, 4):
        terms = inv / ks[None, :] ** p
        out[("T", p)] = terms.sum(axis=1) + rem[p]
        alt = terms * sign[None, :]
        out[("Talt", p)] = alt.sum(axis=1) - alt[:, -1] / 2.0
    return out


def _tail_overlap_cos(rho, nm, tail):
    """int K_tail(t) cos(rho t) dt for the modeled tail."""
    A, B, A2, B2 = tail
    if A == B == A2 == B2 == 0:
        return np.zeros_like(rho)
    s = _tail_overlap_sums(rho, nm)
    combo = (A * s[("T", 2)] - B * s[("Talt", 2)]
             + A2 * s[("T", 4)] - B2 * s[("Talt", 4)])
    return -(2.0 / PI) * rho * np.sin(PI * rho) * combo


def _tail_overlap_sin(rho, nm, tail):
    """int N_tail(t) sin(rho t) dt for the modeled tail."""
    c0, c1, c2, c3 = tail
    if c0 == c1 == c2 == c3 == 0:
        return np.zeros_like(rho)
    s = _tail_overlap_sums(rho, nm)
    combo = (c0 * s[("Talt", 0)] - c1 * s[("T", 0)]
             + c2 * s[("Talt", 2)] - c3 * s[("T", 2)])
    return -(2.0 / PI) * np.sin(PI * rho) * combo


# ---------------------------------------------------------------------------
# forward map and rebuild
# ---------------------------------------------------------------------------

def cauchy_data_of(q: Potential, n_modes: int = 64) -> CauchyData:
    """Cauchy data of a potential on (0, pi) via integer-rho sampling."""
    if n_modes > q.grid.cells // 4:
        raise AliasGuard(
            f"n_modes = {n_modes} exceeds cells/4 = {q.grid.cells // 4}")
    omega = omega_of(q)
    ks = np.arange(0, n_modes + 1, dtype=float)
    eta1, eta2 = endpoint_values(q, (ks ** 2).astype(complex))
    sign = (-1.0) ** ks
    a = ks ** 2 * eta1 + omega * sign
    a[0] = omega
    b = (ks * (eta2 - sign))[1:]
    return CauchyData.from_coefficients(a, b, omega, q.grid)


def _eta_direct(cd: CauchyData, lams):
    rho = np.asarray(rho_of(lams), dtype=complex)
    nm = cd.n_modes
    ks = np.arange(1, nm + 1, dtype=float)
    sinc = _sinc_pi(rho[:, None] - ks[None, :])
    denom = rho[:, None] + ks[None, :]
    ic_head = (PI * sinc / denom * ks[None, :]) @ cd.b  # sine overlaps
    int_n = rho * ((2.0 / PI) * ic_head + _tail_overlap_sin(rho, nm, cd.n_tail))
    ovc = PI * rho[:, None] * sinc / denom
    sin_pi_rho = np.sin(PI * rho)
    int_k = (cd.a[0] / PI * sin_pi_rho / rho  # constant mode of K is a0/pi
             + (2.0 / PI) * (ovc @ cd.a[1:])
             + _tail_overlap_cos(rho, nm, cd.k_tail))
    s_pi = rho * sin_pi_rho
    c_pi = np.cos(PI * rho)
    eta1 = (s_pi - cd.omega * c_pi + int_k) / lams
    eta2 = c_pi + (cd.omega * s_pi + int_n) / lams
    return eta1, eta2


def rebuild_eta(cd: CauchyData, lams):
    """(eta1, eta2) at a batch of spectral points.

    Near lambda = 0 the removable singularity is evaluated through a small
    Cauchy circle, which also strips any spurious simple-pole residue left
    by coefficient noise.
    """
    lam_in = np.asarray(lams, dtype=complex)
    scalar = lam_in.ndim == 0
    lam = np.atleast_1d(lam_in)
    eta1 = np.empty(lam.shape, dtype=complex)
    eta2 = np.empty(lam.shape, dtype=complex)
    near = np.abs(lam) < _NEAR_ZERO
    far_idx = np.nonzero(~near)[0]
    # chunked: the tail sums hold (batch x _TAIL_TERMS) scratch arrays
    for lo in range(0, len(far_idx), 512):
        sel = far_idx[lo: lo + 512]
        e1, e2 = _eta_direct(cd, lam[sel])
        eta1[sel], eta2[sel] = e1, e2
    if near.any():
        nodes = _CIRCLE_R * np.exp(2j * PI * np.arange(32) / 32)
        f1, f2 = _eta_direct(cd, nodes)
        w = nodes[None, :] / (nodes[None, :] - lam[near][:, None])
        eta1[near] = (w * f1[None, :]).mean(axis=1)
        eta2[near] = (w * f2[None, :]).mean(axis=1)
    if scalar:
        return complex(eta1[0]), complex(eta2[0])
    return eta1, eta2


def weyl(cd: CauchyData, lam: complex) -> complex:
    """Weyl function eta2/eta1, guarded against evaluation at a pole."""
    lam = complex(lam)
    eps = 1e-7 * (1.0 + abs(lam))
    e1, e2 = rebuild_eta(cd, np.array([lam, lam - eps, lam + eps]))
    d_eta1 = (e1[2] - e1[1]) / (2 * eps)
    if d_eta1 != 0 and abs(e1[0] / d_eta1) < 1e-8:
        raise NearPole(f"lambda = {lam} is within 1e-8 of a zero of eta1")
    if e1[0] == 0:
        raise NearPole(f"eta1({lam}) = 0")
    return complex(e2[0] / e1[0])
