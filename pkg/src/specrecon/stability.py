"""Perturbation experiments around the Cauchy-data inverse problem.

Measures, for random trigonometric perturbations of {K, N} with omega held
exactly fixed (the zero-mean normalization int (q - q~) = 0), the response
of the reconstructed potential and the pole/residue data:

    Xi           max(||K - K~||, ||N - N~||)
    q_err        ||q - q~|| over (0, pi)
    xi_l2        (sum_{n >= n1} (n xi_n)^2)^{1/2},
                 xi_n = |nu_n - nu_n~| + |M_n - M_n~|/n^2
    M_gamma0_err sup over the gamma_0 circle of |M - M~|

The local-stability statement bounds q_err and both data functionals by
C Xi with C depending only on the base data, so the measured ratios should
stay bounded as the amplitude sweeps down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cauchy import CauchyData, cauchy_data_of, rebuild_eta
from .entire import rho_of
from .errors import PairingAmbiguous, SpecreconError
from .glrecon import reconstruct_q, weyl_data
from .grids import Grid, Potential
from .propagate import omega_of

__all__ = ["NoiseSpec", "PerturbationReport", "perturb_and_measure",
           "lemma53_check", "loglog_slope", "write_reports"]

PI = math.pi


@dataclass(frozen=True)
class NoiseSpec:
    """Amplitude and mode count of the random trigonometric perturbation."""

    delta: float
    modes: int = 8


@dataclass(frozen=True)
class PerturbationReport:
    trial: int
    seed: int
    Xi: float
    q_err: float
    xi_l2: float
    M_gamma0_err: float
    C_est: float
    failed: str | None = None

    def row(self):
        return (self.trial, self.seed, self.Xi, self.q_err, self.xi_l2,
                self.M_gamma0_err, self.C_est,
                self.failed if self.failed else "")


def write_reports(reports, path, header_note="omega held fixed"):
    with open(path, "w") as fh:
        fh.write(f"# {header_note}\n")
        fh.write("trial,seed,Xi,q_err,xi_l2,M_gamma0_err,C_est,failed\n")
        for r in reports:
            fh.write(",".join(str(v) for v in r.row()) + "\n")


def _l2(grid: Grid, vals) -> float:
    return float(np.sqrt(abs(np.dot(grid.simpson_weights(),
                                    np.abs(vals) ** 2))))


def _weyl_on_circle(cd: CauchyData, radius: float, n: int = 128):
    nodes = radius * np.exp(2j * PI * np.arange(n) / n)
    e1, e2 = rebuild_eta(cd, nodes)
    return e2 / e1


def _xi_l2(wd_a, wd_b, n1: int) -> float:
    nu_a = np.asarray(rho_of(wd_a.theta))
    nu_b = np.asarray(rho_of(wd_b.theta))
    n = np.arange(1, len(nu_a) + 1)
    xi = np.abs(nu_a - nu_b) + np.abs(wd_a.residues - wd_b.residues) / n ** 2
    sl = slice(n1, None)
    return float(np.sqrt(np.sum((n[sl] * xi[sl]) ** 2)))


def perturb_and_measure(q: Potential, noise: NoiseSpec, trials: int,
                        seed: int = 0, count: int = 20,
                        internal_cells: int = 192, out_cells: int = 384,
                        n_modes: int = 64):
    """Perturbation sweep around the Cauchy data of q.

    Each trial bumps the leading cosine/sine coefficients of K and N by
    centered complex Gaussians scaled so the expected L2 amplitude is
    ``noise.delta``, re-extracts the Weyl data (Newton from the base
    poles) and reconstructs.  Failed trials are recorded, not fatal.
    """
    cd0 = cauchy_data_of(q, n_modes=n_modes)
    wd0 = weyl_data(cd0, count)
    out_grid = Grid(PI, out_cells)
    q_true = q.at(out_grid.x())
    m0_circle = _weyl_on_circle(cd0, wd0.gamma0_radius)
    scale = math.sqrt(2.0 / (PI * noise.modes))
    reports = []
    for trial in range(trials):
        trial_seed = seed + 7919 * trial
        rng = np.random.default_rng(trial_seed)
        gk = (rng.standard_normal(noise.modes)
              + 1j * rng.standard_normal(noise.modes)) / math.sqrt(2)
        gn = (rng.standard_normal(noise.modes)
              + 1j * rng.standard_normal(noise.modes)) / math.sqrt(2)
        d_k = noise.delta * scale * gk
        d_n = noise.delta * scale * gn
        a = cd0.a.copy()
        b = cd0.b.copy()
        a[1: noise.modes + 1] += d_k * (PI / 2)
        b[: noise.modes] += d_n * (PI / 2)
        xi_amp = math.sqrt(PI / 2) * max(np.linalg.norm(d_k),
                                         np.linalg.norm(d_n))
        try:
            cd1 = CauchyData.from_coefficients(a, b, cd0.omega, cd0.grid)
            wd1 = weyl_data(cd1, count, near=wd0.theta)
            q1 = reconstruct_q(wd1, cd0.omega, out_grid,
                               internal_cells=internal_cells)
            q_err = _l2(out_grid, q1.values - q_true)
            gamma_err = float(np.max(np.abs(
                _weyl_on_circle(cd1, wd0.gamma0_radius) - m0_circle)))
            c_est = q_err / xi_amp if xi_amp > 0 else float("nan")
            reports.append(PerturbationReport(
                trial, trial_seed, xi_amp, q_err,
                _xi_l2(wd0, wd1, wd0.n1), gamma_err, c_est))
        except SpecreconError as exc:
            reports.append(PerturbationReport(
                trial, trial_seed, xi_amp, float("nan"), float("nan"),
                float("nan"), float("nan"), failed=repr(exc)))
    return reports


def lemma53_check(q: Potential, q_tilde: Potential, count: int = 40,
                  n_modes: int = 64) -> PerturbationReport:
    """Both perturbation functionals for a concrete pair of potentials.

    Requires the pole sets to pair off by proximity unambiguously.
    """
    cd_a = cauchy_data_of(q, n_modes=n_modes)
    cd_b = cauchy_data_of(q_tilde, n_modes=n_modes)
    xi_amp = max(_l2(q.grid, cd_a.K - cd_b.K), _l2(q.grid, cd_a.N - cd_b.N))
    wd_a = weyl_data(cd_a, count)
    wd_b = weyl_data(cd_b, count)
    pair = np.array([int(np.argmin(np.abs(wd_b.theta - th)))
                     for th in wd_a.theta])
    if len(set(pair.tolist())) != len(pair):
        raise PairingAmbiguous("nearest-pole pairing is not one-to-one")
    wd_b = type(wd_b)(wd_b.theta[pair], wd_b.residues[pair],
                      wd_b.mult[pair], wd_b.n1, wd_b.gamma0_radius)
    gamma_err = float(np.max(np.abs(
        _weyl_on_circle(cd_a, wd_a.gamma0_radius)
        - _weyl_on_circle(cd_b, wd_a.gamma0_radius))))
    q_err = _l2(q.grid, q.values - q_tilde.values) \
        if q.grid.nodes == q_tilde.grid.nodes else float("nan")
    xi = _xi_l2(wd_a, wd_b, wd_a.n1)
    c_est = q_err / xi_amp if xi_amp > 0 else float("nan")
    return PerturbationReport(0, 0, xi_amp, q_err, xi, gamma_err, c_est)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    good = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if good.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log10(x[good]), np.log10(y[good]), 1)[0])
