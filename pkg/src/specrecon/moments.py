"""Moment-problem machinery of the constructive inverse solver.

From the boundary pair, a subspectrum and omega it builds the vector
system

    v_0 = [0, 1],                w_0 = omega,
    v_{n+nu} = (d/dlam)^{<nu>} [f1 s(t, .), f2 c(t, .)] at lam_n,
    w_{n+nu} = (d/dlam)^{<nu>} w(lam) at lam_n,
    w(lam) = -f1 (lam c + omega s)|_pi - f2 (s - omega c)|_pi,

and solves (u, v_n) = w_n for u in span{v_n} by a regularized Gram
system.  The scalar product is conjugate-linear in the first argument.
The biorthogonal expansion is never formed explicitly; the Gram solve
produces the same element while exposing the conditioning honestly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cauchy import CauchyData
from .entire import BoundaryPair, rho_of, sc_derivative
from .errors import IllConditionedWarning, SeparationViolation
from .grids import Grid
from .spectra import EigenvalueList

__all__ = ["PairFunction", "MomentSystem", "MomentSolution", "build_vsystem",
           "solve_moment", "recovered_cauchy", "condition_report",
           "ConditionReport"]

PI = np.pi


@dataclass(frozen=True)
class PairFunction:
    """Element [h1, h2] of L2(0,pi) (+) L2(0,pi) sampled on a grid."""

    grid: Grid
    h1: np.ndarray
    h2: np.ndarray

    def scalar(self, other: "PairFunction") -> complex:
        """(self, other): conjugate-linear in self."""
        w = self.grid.simpson_weights()
        return complex(np.dot(w, np.conj(self.h1) * other.h1
                              + np.conj(self.h2) * other.h2))

    def norm(self) -> float:
        return float(np.sqrt(abs(self.scalar(self))))


@dataclass(frozen=True)
class MomentSystem:
    """Rows v_n (components stacked as matrices) and targets w_n."""

    grid: Grid
    V1: np.ndarray  # (N+1, nodes)
    V2: np.ndarray
    w: np.ndarray  # (N+1,)
    source: tuple = field(compare=False, default=())

    def __len__(self):
        return self.w.shape[0]

    def v(self, n: int) -> PairFunction:
        return PairFunction(self.grid, self.V1[n], self.V2[n])

    def norms(self) -> np.ndarray:
        ws = self.grid.simpson_weights()
        sq = ((np.abs(self.V1) ** 2 + np.abs(self.V2) ** 2) * ws).sum(axis=1)
        return np.sqrt(np.abs(sq))

    def gram(self, normalized: bool = True) -> np.ndarray:
        """G[n, k] = (v_n, v_k), Hermitian positive semidefinite."""
        ws = self.grid.simpson_weights()
        A1, A2 = self.V1 * ws, self.V2 * ws
        G = np.conj(self.V1) @ A1.T + np.conj(self.V2) @ A2.T
        if normalized:
            nr = self.norms()
            G = G / nr[:, None] / nr[None, :]
        return G


def _product_rule_rows(bp, lam, m, grid_t, omega):
    """Rows (v, w) for one distinct eigenvalue of multiplicity m."""
    f1 = [bp.f1.derivative(lam, j) for j in range(m)]
    f2 = [bp.f2.derivative(lam, j) for j in range(m)]
    s_d, c_d = {}, {}
    pi_arr = np.array([PI])
    for mu in range(m):
        s_d[mu], c_d[mu] = sc_derivative(grid_t, lam, mu)
    s_pi = {mu: complex(sc_derivative(pi_arr, lam, mu)[0][0]) for mu in range(m)}
    c_pi = {mu: complex(sc_derivative(pi_arr, lam, mu)[1][0]) for mu in range(m)}
    rows = []
    for nu in range(m):
        v1 = sum(f1[j] * s_d[nu - j] for j in range(nu + 1))
        v2 = sum(f2[j] * c_d[nu - j] for j in range(nu + 1))
        w_val = 0.0 + 0.0j
        for j in range(nu + 1):
            mu = nu - j
            lam_c = lam * c_pi[mu] + (c_pi[mu - 1] if mu >= 1 else 0.0)
            w_val -= f1[j] * (lam_c + omega * s_pi[mu])
            w_val -= f2[j] * (s_pi[mu] - omega * c_pi[mu])
        rows.append((v1, v2, w_val))
    return rows


def build_vsystem(bp: BoundaryPair, evs: EigenvalueList, omega: complex,
                  n_rows: int, grid: Grid | None = None) -> MomentSystem:
    """Vector system with rows 0..n_rows from the subspectrum.

    Raises SeparationViolation when both boundary functions vanish at a
    used eigenvalue (such an eigenvalue carries no information).
    """
    if len(evs) < n_rows + 1:
        raise ValueError(f"need {n_rows + 1} subspectrum entries, "
                         f"have {len(evs)}")
    if grid is None:
        grid = Grid(PI, 2048)
    return _build_vsystem_on_grid(bp, evs, omega, n_rows, grid)


def _build_vsystem_on_grid(bp, evs, omega, n_rows, grid):
    t = grid.x()
    nodes = grid.nodes
    V1 = np.zeros((n_rows + 1, nodes), dtype=complex)
    V2 = np.zeros((n_rows + 1, nodes), dtype=complex)
    w = np.zeros(n_rows + 1, dtype=complex)

    distinct = [(n, lam, m) for n, lam, m in evs.distinct() if n <= n_rows]
    lams = np.array([lam for _, lam, _ in distinct])
    fv1, fv2 = bp.f_values(lams)
    scale = float(np.max(np.abs(fv1) + np.abs(fv2)))
    if scale == 0.0:
        raise SeparationViolation("f1 and f2 vanish on the whole subspectrum")
    for (n, lam, m), g1, g2 in zip(distinct, fv1, fv2):
        if abs(g1) + abs(g2) < 1e-12 * scale:
            raise SeparationViolation(
                f"f1 and f2 both vanish at lambda_{n} = {lam:.6g}; this "
                "eigenvalue carries no information")
        rows = _product_rule_rows(bp, lam, m, t, omega)
        for nu, (v1, v2, w_val) in enumerate(rows):
            if n + nu > n_rows:
                break
            V1[n + nu], V2[n + nu], w[n + nu] = v1, v2, w_val
    # row 0 is special by definition
    V1[0] = 0.0
    V2[0] = 1.0
    w[0] = omega
    return MomentSystem(grid, V1, V2, w, source=(bp, evs, complex(omega)))


@dataclass(frozen=True)
class MomentSolution:
    u: PairFunction
    coeffs: np.ndarray
    residuals: np.ndarray
    gram_cond: float
    tau: float
    ill_conditioned: bool


def solve_moment(vs: MomentSystem, tau: float | None = None) -> MomentSolution:
    """Least-squares solve of (u, v_n) = w_n over span{v_n}.

    Rows are normalized before forming the Gram matrix; ``tau`` is the
    Tikhonov weight (default 1e-10 ||G||).  Residuals are reported in the
    unnormalized scale.
    """
    nr = vs.norms()
    if np.any(nr == 0):
        raise ValueError("zero row in the moment system")
    G = vs.gram(normalized=True)
    w_hat = vs.w / nr
    norm_G = float(np.linalg.norm(G, 2))
    if tau is None:
        tau = 1e-10 * norm_G
    cond = float(np.linalg.cond(G))
    ill = cond > 1e12
    if ill:
        warnings.warn(f"Gram condition estimate {cond:.2e} exceeds 1e12",
                      IllConditionedWarning)
    # minimize |G^T conj(c) - w_hat|^2 + tau |c|^2; for Hermitian G the
    # conjugated normal equations read (G^2 + tau I) c = G conj(w_hat)
    rhs = G @ np.conj(w_hat)
    c_hat = np.linalg.solve(G @ G + tau * np.eye(len(vs)), rhs)
    # u = sum_k c_k v_hat_k
    u1 = c_hat @ (vs.V1 / nr[:, None])
    u2 = c_hat @ (vs.V2 / nr[:, None])
    u = PairFunction(vs.grid, u1, u2)
    attained = np.conj(G @ c_hat)  # (u, v_hat_n)
    residuals = (attained - w_hat) * nr
    return MomentSolution(u, c_hat, residuals, cond, float(tau), ill)


def recovered_cauchy(u: PairFunction, omega: complex,
                     n_modes: int = 64) -> CauchyData:
    """Read the Cauchy data off u = [conj(N), conj(K)]."""
    return CauchyData.from_samples(np.conj(u.h2), np.conj(u.h1), omega,
                                   u.grid, n_modes=n_modes)


# ---------------------------------------------------------------------------
# sufficient-condition diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    """Measured surrogates for the separation/simpleness/asymptotics/basis
    prerequisites of the constructive algorithm, with pass flags."""

    separation_min: float
    separation_scale: float
    separation_ok: bool
    first_simple_index: int
    simple_ok: bool
    im_rho_max: float
    inv_rho_sq_sum: float
    asymptotics_ok: bool
    kappa_l2: float
    kappa_tail_l2: float
    basis2_ok: bool
    gram_cond: float | None = None

    @property
    def passed(self) -> bool:
        return (self.separation_ok and self.simple_ok
                and self.asymptotics_ok and self.basis2_ok)

    def rows(self):
        yield ("separation_min", self.separation_min)
        yield ("separation_scale", self.separation_scale)
        yield ("separation_ok", int(self.separation_ok))
        yield ("first_simple_index", self.first_simple_index)
        yield ("simple_ok", int(self.simple_ok))
        yield ("im_rho_max", self.im_rho_max)
        yield ("inv_rho_sq_sum", self.inv_rho_sq_sum)
        yield ("asymptotics_ok", int(self.asymptotics_ok))
        yield ("kappa_l2", self.kappa_l2)
        yield ("kappa_tail_l2", self.kappa_tail_l2)
        yield ("basis2_ok", int(self.basis2_ok))
        yield ("gram_cond", self.gram_cond if self.gram_cond is not None else "")
        yield ("passed", int(self.passed))

    def write(self, path):
        with open(path, "w") as fh:
            fh.write("quantity,value\n")
            for key, val in self.rows():
                fh.write(f"{key},{val}\n")


def condition_report(bp: BoundaryPair, evs: EigenvalueList,
                     interval: float = 2 * PI, im_rho_cap: float = 10.0,
                     grid: Grid | None = None) -> ConditionReport:
    """Diagnostics for the four prerequisites at the truncated subspectrum."""
    distinct = list(evs.distinct())
    lams = np.array([lam for _, lam, _ in distinct])
    f1, f2 = bp.f_values(lams)
    sep_each = np.maximum(np.abs(f1), np.abs(f2))
    sep_scale = float(np.max(np.abs(f1) + np.abs(f2)))
    sep_min = float(np.min(sep_each))
    separation_ok = bool(sep_min > 1e-12 * sep_scale)

    # (Simple): all indices past first_simple_index are simple and nonzero
    bad = [n + m - 1 for n, lam, m in distinct if m > 1 or lam == 0]
    first_simple = (max(bad) + 1) if bad else 0
    simple_ok = first_simple <= max(3, len(evs) // 2)

    rhos = evs.rhos()[1:]
    n_idx = np.arange(1, len(evs))
    im_rho_max = float(np.max(np.abs(rhos.imag))) if len(rhos) else 0.0
    tail = n_idx >= max(first_simple, 1)
    with np.errstate(divide="ignore"):
        inv_sq = np.where(np.abs(rhos) > 0, 1.0 / np.abs(rhos) ** 2, np.inf)
    inv_rho_sq_sum = float(np.sum(inv_sq[tail]))
    asymptotics_ok = bool(im_rho_max <= im_rho_cap
                          and np.isfinite(inv_rho_sq_sum))

    kappa = rhos - n_idx * PI / interval
    kappa_l2 = float(np.linalg.norm(kappa))
    half = len(kappa) // 2
    kappa_tail_l2 = float(np.linalg.norm(kappa[half:]))
    basis2_ok = bool(np.max(np.abs(kappa[half:]), initial=0.0) <= 1.0)

    gram_cond = None
    if grid is not None:
        vs = _build_vsystem_on_grid(bp, evs, 0.0, len(evs) - 1, grid)
        gram_cond = float(np.linalg.cond(vs.gram(normalized=True)))

    return ConditionReport(sep_min, sep_scale, separation_ok, first_simple,
                           simple_ok, im_rho_max, inv_rho_sq_sum,
                           asymptotics_ok, kappa_l2, kappa_tail_l2, basis2_ok,
                           gram_cond)
