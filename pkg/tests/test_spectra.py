import numpy as np
import pytest

from specrecon.entire import (BoundaryPair, boundary_preset, const_handle,
                              poly_handle)
from specrecon.errors import RootCountMismatch
from specrecon.grids import Potential, grid_pi
from specrecon.spectra import (EigenvalueList, SearchRegion, char_fn,
                               char_fn_batch, default_region, find_eigenvalues,
                               find_zeros)

PI = np.pi


@pytest.fixture(scope="module")
def gpi():
    return grid_pi(2048)


@pytest.fixture(scope="module")
def q0(gpi):
    return Potential.zero(gpi)


def test_char_fn_dirichlet_zero_potential(q0):
    bp = boundary_preset("dirichlet")
    # Delta = sin(rho pi)/rho vanishes at n^2
    assert abs(char_fn(bp, q0, 4.0)) < 1e-12
    assert char_fn(bp, q0, 0.25) == pytest.approx(2.0, rel=1e-12)


def test_char_fn_neumann_zero_potential(q0):
    bp = boundary_preset("neumann")
    # Delta = cos(rho pi) vanishes at (n - 1/2)^2
    assert abs(char_fn(bp, q0, 0.25)) < 1e-12
    assert char_fn(bp, q0, 1.0) == pytest.approx(-1.0, rel=1e-12)


def test_char_fn_double_angle_identity(q0):
    # f1 = sin(rho pi)/rho, f2 = cos(rho pi) gives sin(2 rho pi)/rho;
    # reproduce the identity numerically before trusting the zero at 2.25
    from specrecon.entire import AnalyticHandle, rho_of

    def f1(lams):
        lams = np.asarray(lams, dtype=complex)
        r = rho_of(lams)
        out = np.empty_like(lams)
        small = np.abs(lams) < 1e-8
        out[~small] = np.sin(r[~small] * PI) / r[~small]
        out[small] = PI
        return out

    bp = BoundaryPair(AnalyticHandle(fn=f1),
                      AnalyticHandle(fn=lambda z: np.cos(rho_of(z) * PI)))
    for lam in [0.3, 1.7, 2.0 + 0.5j, 6.2]:
        r = np.sqrt(complex(lam))
        want = np.sin(2 * r * PI) / r
        got = char_fn(bp, q0, lam)
        assert abs(got - want) <= 1e-10 * (1 + abs(want))
    assert abs(char_fn(bp, q0, 2.25)) < 1e-12


def test_find_eigenvalues_dirichlet_zero(q0):
    evs = find_eigenvalues(boundary_preset("dirichlet"), q0,
                           SearchRegion(re_max=110.0))
    want = np.concatenate([[0.0], np.arange(1, 11) ** 2])
    np.testing.assert_allclose(evs.values.real, want, atol=1e-9)
    np.testing.assert_allclose(evs.values.imag, 0.0, atol=1e-9)
    assert all(m == 1 for _, _, m in evs.distinct())


def test_find_eigenvalues_constant_shift(gpi):
    q1 = Potential.constant(1.0, gpi)
    evs = find_eigenvalues(boundary_preset("dirichlet"), q1,
                           SearchRegion(re_max=110.0))
    want = np.concatenate([[0.0], np.arange(1, 11) ** 2 + 1])
    np.testing.assert_allclose(evs.values.real, want, atol=1e-9)


def _bisect_real_roots(f, a, b, n_grid=20000, tol=1e-12):
    xs = np.linspace(a, b, n_grid)
    vals = f(xs.astype(complex)).real
    roots = []
    for i in np.nonzero(np.diff(np.sign(vals)) != 0)[0]:
        lo, hi = xs[i], xs[i + 1]
        flo = vals[i]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            fm = float(f(np.array([mid + 0j])).real[0])
            if np.sign(fm) == np.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return np.array(roots)


def test_find_eigenvalues_cosine_vs_bisection(gpi):
    # real potential, real spectrum: an independent bisection localization
    q = Potential.preset("cosine", gpi)
    bp = boundary_preset("dirichlet")
    evs = find_eigenvalues(bp, q, SearchRegion(re_max=75.0))
    oracle = _bisect_real_roots(lambda z: char_fn_batch(bp, q, z), 0.2, 75.0)
    found = evs.values.real[1:]
    assert len(found) == len(oracle)
    np.testing.assert_allclose(found, oracle, rtol=1e-8)


def test_double_eigenvalue_detected(q0):
    # boundary polynomial tuned so Delta has a double zero at lam = 5.3
    lam_s = 5.3
    r = np.sqrt(lam_s)
    eta1, eta2 = np.sin(r * PI) / r, np.cos(r * PI)
    deta1 = (PI * np.cos(r * PI) / r - np.sin(r * PI) / r ** 2) / (2 * r)
    deta2 = -PI * np.sin(r * PI) / (2 * r)
    A = np.array([[lam_s * eta2, eta2], [eta2 + lam_s * deta2, deta2]])
    a_c, b_c = np.linalg.solve(A, [-eta1, -deta1])
    bp = BoundaryPair(poly_handle([b_c, a_c]), const_handle(1.0))
    evs = find_eigenvalues(bp, q0, SearchRegion(re_max=30.0, im_max=10.0,
                                                max_roots=20))
    doubles = [(lam, m) for _, lam, m in evs.distinct() if m == 2]
    assert len(doubles) == 1
    lam_found, _ = doubles[0]
    assert lam_found == pytest.approx(lam_s, abs=5e-7)
    # repeats are consecutive in the value list
    vals = evs.values
    where = np.nonzero(np.isclose(vals.real, lam_s, atol=1e-5))[0]
    assert list(where) == [where[0], where[0] + 1]


def test_zero_eigenvalue_merges_with_prepended(q0):
    # f1 = 1, f2 = -1/pi makes Delta(0) = eta2(0) - eta1(0)/pi = 1 - 1 = 0
    bp = BoundaryPair(const_handle(1.0), const_handle(-1.0 / PI))
    evs = find_eigenvalues(bp, q0, SearchRegion(re_max=30.0, max_roots=20))
    assert evs.values[0] == 0
    assert evs.mult[0] == 2
    assert evs.values[1] == 0


def test_winding_consistency_is_checked(q0):
    # cap smaller than the actual count must surface, not truncate silently
    bp = boundary_preset("dirichlet")
    with pytest.raises(RootCountMismatch):
        find_zeros(lambda z: char_fn_batch(bp, q0, z),
                   SearchRegion(re_max=110.0, max_roots=3))


def test_default_region_counting_estimate():
    # right edge between asymptotic root positions (half-integer offset)
    reg = default_region(10, interval=PI)
    assert reg.re_max == pytest.approx(15.5 ** 2)
    reg2 = default_region(40, interval=2 * PI)
    assert reg2.re_max == pytest.approx((45.5 / 2) ** 2)


def test_truncated_list(q0):
    evs = find_eigenvalues(boundary_preset("dirichlet"), q0,
                           SearchRegion(re_max=110.0))
    t = evs.truncated(4)
    assert len(t) == 5
    assert t.values[-1] == pytest.approx(16.0)
