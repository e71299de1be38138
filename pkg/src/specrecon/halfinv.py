"""Half-inverse (Hochstadt-Lieberman) driver.

The Dirichlet problem on (0, 2 pi) with the potential known on the upper
half reduces to the entire-function boundary problem on (0, pi) through

    f1(lam) = psi(pi, lam),   f2(lam) = -psi'(pi, lam),

where psi solves the equation on the known half with psi(2 pi) = 0,
psi'(2 pi) = -1.  Both handles are evaluated by one forward propagation
of the reflected known half, so samples on the unknown half are never
touched.  The full pipeline then runs: vector system, moment solve,
recovered Cauchy data, Weyl data, Gelfand-Levitan reconstruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cauchy import CauchyData
from .entire import AnalyticHandle, BoundaryPair
from .errors import ConditionCheckError, FitUnstable
from .glrecon import WeylData, reconstruct_q, weyl_data
from .grids import Grid, Potential
from .moments import (ConditionReport, MomentSolution, build_vsystem,
                      condition_report, recovered_cauchy, solve_moment)
from .propagate import endpoint_values, omega_of
from .spectra import EigenvalueList, default_region, find_zeros

__all__ = ["HalfInverseInstance", "build_boundary_pair", "estimate_Omega",
           "omega_from_instance", "solve_half_inverse", "HalfInverseResult",
           "full_dirichlet_spectrum"]

PI = math.pi


@dataclass(frozen=True)
class HalfInverseInstance:
    """Known upper-half potential, the full Dirichlet spectrum and Omega.

    ``q_known`` lives on a (0, 2 pi) grid; values on the lower half are
    ignored by the reduction (fill them with anything finite).  ``Omega``
    may be None, in which case it is fitted from the spectrum.
    """

    q_known: Potential
    spectrum: EigenvalueList
    Omega: complex | None = None


def _reflected_upper_half(q: Potential) -> Potential:
    cells = q.grid.cells
    if cells % 2:
        raise ValueError("half-inverse reduction needs an even cell count")
    half = Grid(q.grid.endpoint / 2, cells // 2)
    f = None
    if q.func is not None:
        a, orig = q.grid.endpoint, q.func
        f = lambda s: orig(a - s)  # noqa: E731
    return Potential(half, q.values[cells // 2:][::-1].copy(), func=f)


def build_boundary_pair(q_known: Potential) -> BoundaryPair:
    """Entire-function pair (psi(pi, .), -psi'(pi, .)) from the known half.

    psi(pi, lam) equals the endpoint value of the forward solution for the
    reflected upper half, and -psi'(pi, lam) its x-derivative.
    """
    refl = _reflected_upper_half(q_known)
    cache: dict = {}

    def both(lams):
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        key = lams.tobytes()
        if key not in cache:
            if len(cache) > 64:
                cache.clear()
            cache[key] = endpoint_values(refl, lams)
        return cache[key]

    f1 = AnalyticHandle(fn=lambda z: both(z)[0], derivative_mode="contour",
                        label="psi(pi, .)")
    f2 = AnalyticHandle(fn=lambda z: both(z)[1], derivative_mode="contour",
                        label="-psi'(pi, .)")
    return BoundaryPair(f1, f2, name="hl")


def full_dirichlet_spectrum(q: Potential, count: int,
                            im_max: float = 25.0) -> EigenvalueList:
    """Eigenvalues of the Dirichlet problem on the full (0, 2 pi) grid."""

    def F(lams):
        return endpoint_values(q, lams)[0]

    region = default_region(count, interval=q.grid.endpoint, im_max=im_max)
    roots = find_zeros(F, region)
    evs = EigenvalueList.from_roots(roots)
    return evs.truncated(count) if len(evs) > count + 1 else evs


def estimate_Omega(spectrum: EigenvalueList) -> complex:
    """Fit Omega from sqrt(lam_n) = n/2 + Omega/(pi n) + o(1/n).

    Uses the top half of the available indices; raises FitUnstable when
    the fit residual is large compared to the fitted value.
    """
    n_avail = len(spectrum) - 1
    if n_avail < 20:
        raise FitUnstable(f"need at least 20 eigenvalues, have {n_avail}")
    rhos = spectrum.rhos()[1:]
    n_idx = np.arange(1, n_avail + 1)
    lo = n_avail // 2
    samples = (rhos[lo:] - n_idx[lo:] / 2.0) * PI * n_idx[lo:]
    omega_fit = complex(np.mean(samples))
    resid = float(np.sqrt(np.mean(np.abs(samples - omega_fit) ** 2)))
    if resid > 0.1 * (abs(omega_fit) + 0.1):
        raise FitUnstable(
            f"Omega fit residual {resid:.3g} too large for "
            f"|Omega| = {abs(omega_fit):.3g}")
    return omega_fit


def omega_from_instance(inst: HalfInverseInstance) -> complex:
    """omega = Omega - (1/2) integral of q over the known half."""
    Omega = inst.Omega if inst.Omega is not None \
        else estimate_Omega(inst.spectrum)
    return complex(Omega - omega_of(_reflected_upper_half(inst.q_known)))


@dataclass(frozen=True)
class HalfInverseResult:
    q: Potential
    omega: complex
    report: ConditionReport
    moment: MomentSolution = field(repr=False)
    cauchy: CauchyData = field(repr=False)
    weyl: WeylData = field(repr=False)


def solve_half_inverse(inst: HalfInverseInstance, n_rows: int,
                       weyl_count: int | None = None,
                       out_cells: int | None = None,
                       n_modes: int = 64,
                       internal_cells: int = 256,
                       check_conditions: bool = True) -> HalfInverseResult:
    """Recover the potential on (0, pi) from the instance data.

    Chains the boundary-pair reduction, the moment solve, the Cauchy-data
    recovery and the Gelfand-Levitan step.  Aborts with
    ConditionCheckError when the prerequisite diagnostics fail.
    """
    bp = build_boundary_pair(inst.q_known)
    evs = inst.spectrum
    used = evs.truncated(n_rows) if len(evs) > n_rows + 1 else evs
    report = condition_report(bp, used, interval=2 * PI)
    if check_conditions and not report.passed:
        raise ConditionCheckError(
            "prerequisite conditions failed: "
            + ", ".join(k for k, v in report.rows()
                        if k.endswith("_ok") and not v), report)

    omega = omega_from_instance(inst)
    half_cells = inst.q_known.grid.cells // 2
    grid = Grid(PI, half_cells)
    vs = build_vsystem(bp, evs, omega, n_rows, grid=grid)
    sol = solve_moment(vs)
    cd = recovered_cauchy(sol.u, omega, n_modes=min(n_modes, half_cells // 4))
    # n_rows eigenvalues resolve Cauchy-data modes up to about n_rows/2;
    # Weyl poles beyond that band carry recovery drift, while the fitted
    # tail law extrapolates them cleanly inside the reconstruction
    count = weyl_count if weyl_count is not None \
        else max(10, min(n_rows // 2, 30))
    wd = weyl_data(cd, count)
    out_grid = Grid(PI, out_cells if out_cells is not None else half_cells)
    q_rec = reconstruct_q(wd, omega, out_grid, internal_cells=internal_cells)
    return HalfInverseResult(q_rec, omega, report, sol, cd, wd)
