import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specrecon.cauchy import cauchy_data_of
from specrecon.entire import (BoundaryPair, boundary_preset, const_handle,
                              poly_handle, sc_derivative)
from specrecon.errors import SeparationViolation
from specrecon.grids import Potential, grid_pi
from specrecon.moments import (MomentSystem, PairFunction, build_vsystem,
                               condition_report, recovered_cauchy,
                               solve_moment)
from specrecon.spectra import EigenvalueList

PI = np.pi


@pytest.fixture(scope="module")
def gpi():
    return grid_pi(2048)


@pytest.fixture(scope="module")
def dirichlet_evs():
    return EigenvalueList.from_roots([(float(n * n), 1) for n in range(1, 15)])


def test_row_zero_definition(gpi, dirichlet_evs):
    omega = 0.7 + 0.2j
    vs = build_vsystem(boundary_preset("dirichlet"), dirichlet_evs, omega, 10,
                       grid=gpi)
    assert np.all(vs.V1[0] == 0)
    assert np.all(vs.V2[0] == 1)
    assert vs.w[0] == omega


def test_dirichlet_rows_are_cosines(gpi, dirichlet_evs):
    # with f1 = 0, f2 = 1 and lam_n = n^2: v_n = [0, cos(nt)], w_n = w(n^2)
    omega = 0.7 + 0.2j
    vs = build_vsystem(boundary_preset("dirichlet"), dirichlet_evs, omega, 10,
                       grid=gpi)
    t = gpi.x()
    for n in (1, 2, 7):
        assert np.max(np.abs(vs.V1[n])) == 0
        np.testing.assert_allclose(vs.V2[n], np.cos(n * t), atol=1e-12)
        assert vs.w[n] == pytest.approx(omega * (-1) ** n, abs=1e-13)


def test_double_eigenvalue_rows_match_finite_differences(gpi):
    bp = BoundaryPair(poly_handle([3.72, -0.81]), const_handle(1.0))
    mu = 5.3
    evs = EigenvalueList.from_roots([(2.0, 1), (mu, 2), (9.7, 1)])
    omega = 0.4 - 0.1j
    vs = build_vsystem(bp, evs, omega, 4, grid=gpi)
    t = gpi.x()

    def v_of(lam):
        s, c = sc_derivative(t, lam, 0)
        return (complex(bp.f1(np.array([lam]))[0]) * s,
                complex(bp.f2(np.array([lam]))[0]) * c)

    h = 1e-5
    va1, va2 = v_of(mu + h)
    vb1, vb2 = v_of(mu - h)
    fd1, fd2 = (va1 - vb1) / (2 * h), (va2 - vb2) / (2 * h)
    # rows: 0 special, 1 -> lam=2, 2 -> mu (nu=0), 3 -> mu (nu=1), 4 -> 9.7
    np.testing.assert_allclose(vs.V1[3], fd1, atol=1e-6)
    np.testing.assert_allclose(vs.V2[3], fd2, atol=1e-6)


def test_separation_violation_raised(gpi):
    # f1 and f2 share the zero lam = 9, and 9 is in the subspectrum
    bp = BoundaryPair(poly_handle([-9.0, 1.0]), poly_handle([-18.0, 2.0]))
    evs = EigenvalueList.from_roots([(4.0, 1), (9.0, 1), (16.0, 1)])
    with pytest.raises(SeparationViolation):
        build_vsystem(bp, evs, 0.0, 3, grid=gpi)


def test_zero_data_gives_zero_element(gpi, dirichlet_evs):
    vs = build_vsystem(boundary_preset("dirichlet"), dirichlet_evs, 0.0, 10,
                       grid=gpi)
    # w_n = -(s - omega c)(n^2) = 0 for omega = 0: u must vanish
    np.testing.assert_allclose(vs.w, 0.0, atol=1e-12)
    sol = solve_moment(vs)
    assert sol.u.norm() < 1e-9
    assert np.max(np.abs(sol.residuals)) < 1e-9


def test_orthonormal_moment_problem(gpi):
    t = gpi.x()
    V1 = np.zeros((5, gpi.nodes), dtype=complex)
    V2 = np.zeros((5, gpi.nodes), dtype=complex)
    for n in range(5):
        V1[n] = np.sqrt(2 / PI) * np.sin((n + 1) * t)
    w = np.zeros(5, dtype=complex)
    w[3] = 1.0
    sol = solve_moment(MomentSystem(gpi, V1, V2, w))
    np.testing.assert_allclose(sol.u.h1, V1[3], atol=1e-8)
    assert np.max(np.abs(sol.residuals)) < 1e-8


def test_constant_potential_forward_map_recovery(gpi):
    # a single Dirichlet spectrum drives only the second (K) channel;
    # its recovery error is the best-approximation distance, decreasing in N
    q1 = Potential.constant(1.0, gpi)
    cd = cauchy_data_of(q1)
    wq = gpi.simpson_weights()
    errs = []
    for n_rows in (10, 20, 40):
        evs = EigenvalueList.from_roots(
            [(float(n * n + 1), 1) for n in range(1, n_rows + 5)])
        vs = build_vsystem(boundary_preset("dirichlet"), evs, PI / 2, n_rows,
                           grid=gpi)
        sol = solve_moment(vs)
        err = np.sqrt(abs(np.dot(wq, np.abs(np.conj(sol.u.h2) - cd.K) ** 2)))
        errs.append(err)
        assert np.max(np.abs(sol.residuals)) < 1e-6
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-2


def test_recovered_cauchy_conjugation(gpi):
    u = PairFunction(gpi, np.zeros(gpi.nodes, dtype=complex),
                     np.full(gpi.nodes, 1 + 1j, dtype=complex))
    cd = recovered_cauchy(u, omega=2.0)
    np.testing.assert_allclose(cd.K, 1 - 1j, atol=1e-12)
    np.testing.assert_allclose(cd.N, 0.0, atol=1e-12)
    assert cd.omega == 2.0


def test_trivial_recovered_cauchy(gpi):
    u = PairFunction(gpi, np.zeros(gpi.nodes, dtype=complex),
                     np.zeros(gpi.nodes, dtype=complex))
    cd = recovered_cauchy(u, omega=0.0)
    assert np.max(np.abs(cd.K)) == 0 and np.max(np.abs(cd.N)) == 0


@settings(max_examples=20, deadline=None)
@given(st.complex_numbers(max_magnitude=5.0, allow_nan=False,
                          allow_infinity=False))
def test_scalar_product_conjugate_linear_first(alpha):
    g = grid_pi(64)
    t = g.x()
    f = PairFunction(g, np.sin(t).astype(complex), np.cos(t).astype(complex))
    h = PairFunction(g, (t ** 2).astype(complex), np.exp(1j * t))
    lhs = PairFunction(g, alpha * f.h1, alpha * f.h2).scalar(h)
    assert lhs == pytest.approx(np.conj(alpha) * f.scalar(h), abs=1e-9)


def test_distinct_potentials_distinct_w(gpi):
    # discrete uniqueness surrogate: different potentials -> different data
    from specrecon.spectra import SearchRegion, find_eigenvalues

    bp = boundary_preset("dirichlet")
    q_a = Potential.zero(gpi)
    q_b = Potential.preset("cosine", gpi)
    evs_a = find_eigenvalues(bp, q_a, SearchRegion(re_max=120.0))
    evs_b = find_eigenvalues(bp, q_b, SearchRegion(re_max=120.0))
    vs_a = build_vsystem(bp, evs_a, 0.0, 8, grid=gpi)
    vs_b = build_vsystem(bp, evs_b, 0.0, 8, grid=gpi)
    assert np.max(np.abs(vs_a.w - vs_b.w)) > 1e-3


def test_condition_report_clean_half_inverse_data(gpi):
    # lam_n = (n/2)^2: the zero-known-half reduction of the half problem
    from specrecon.halfinv import build_boundary_pair
    from specrecon.grids import grid_2pi

    q2 = Potential.zero(grid_2pi(4096))
    bp = build_boundary_pair(q2)
    evs = EigenvalueList.from_roots(
        [((n / 2) ** 2, 1) for n in range(1, 30)])
    rep = condition_report(bp, evs, interval=2 * PI)
    assert rep.separation_ok and rep.simple_ok
    assert rep.asymptotics_ok and rep.basis2_ok
    assert rep.passed
    assert rep.kappa_l2 < 1e-6  # exact (n/2)^2 spectrum: kappa vanishes


def test_ill_conditioned_warning(gpi):
    from specrecon.errors import IllConditionedWarning

    t = gpi.x()
    base = np.sin(t).astype(complex)
    V1 = np.stack([base, base * (1 + 1e-14), np.sin(2 * t).astype(complex)])
    V2 = np.zeros_like(V1)
    vs = MomentSystem(gpi, V1, V2, np.array([1.0, 1.0, 0.0], dtype=complex))
    with pytest.warns(IllConditionedWarning):
        sol = solve_moment(vs)
    assert sol.ill_conditioned
    assert sol.gram_cond > 1e12
    assert sol.residuals is not None  # residuals reported regardless


def test_condition_report_separation_violation(gpi):
    bp = BoundaryPair(poly_handle([-9.0, 1.0]), poly_handle([-18.0, 2.0]))
    evs = EigenvalueList.from_roots([(4.0, 1), (9.0, 1), (16.0, 1)])
    rep = condition_report(bp, evs)
    assert not rep.separation_ok
    assert not rep.passed


def test_condition_report_asymptotics_violation(gpi):
    bp = boundary_preset("dirichlet")
    vals = [((n / 2 + 1j * n) ** 2, 1) for n in range(1, 25)]
    evs = EigenvalueList.from_roots(vals)
    rep = condition_report(bp, evs)
    assert not rep.asymptotics_ok
    assert not rep.passed
