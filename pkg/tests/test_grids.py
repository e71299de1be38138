import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from specrecon.errors import InvalidGrid
from specrecon.grids import Grid, Potential, grid_pi


def test_grid_basics():
    g = Grid(math.pi, 8)
    assert g.nodes == 9
    assert g.spacing == pytest.approx(math.pi / 8)
    x = g.x()
    assert x[0] == 0.0 and x[-1] == pytest.approx(math.pi)
    assert np.all((x >= 0) & (x <= math.pi + 1e-15))


@given(st.integers(min_value=1, max_value=4096),
       st.floats(min_value=0.1, max_value=10.0))
def test_grid_spacing_positive(cells, endpoint):
    g = Grid(endpoint, cells)
    assert g.spacing > 0
    assert len(g.x()) == cells + 1


@pytest.mark.parametrize("cells,endpoint", [(0, math.pi), (4, 0.0), (4, -1.0)])
def test_grid_rejects_malformed(cells, endpoint):
    with pytest.raises(InvalidGrid):
        Grid(endpoint, cells)


def test_simpson_weights_integrate_polynomials():
    g = Grid(math.pi, 64)
    w = g.simpson_weights()
    x = g.x()
    assert np.dot(w, np.ones_like(x)) == pytest.approx(math.pi, rel=1e-12)
    assert np.dot(w, x ** 3) == pytest.approx(math.pi ** 4 / 4, rel=1e-12)
    assert np.dot(w, np.cos(x)) == pytest.approx(0.0, abs=1e-9)


def test_potential_value_length_checked():
    g = grid_pi(16)
    with pytest.raises(InvalidGrid):
        Potential(g, np.zeros(5, dtype=complex))
    with pytest.raises(InvalidGrid):
        Potential(g, np.full(17, np.nan + 0j))


def test_presets():
    g = grid_pi(32)
    assert np.all(Potential.preset("zero", g).values == 0)
    qc = Potential.preset("constant:2-1j", g)
    assert np.all(qc.values == 2 - 1j)
    qcos = Potential.preset("cosine", g)
    assert qcos.values[0] == pytest.approx(1.0)
    ramp = Potential.preset("ramp:1+1j", g)
    assert ramp.values[-1] == pytest.approx(1 + 1j)
    with pytest.raises(InvalidGrid):
        Potential.preset("nope", g)


def test_file_roundtrip(tmp_path):
    g = grid_pi(32)
    q = Potential.from_callable(lambda x: np.cos(x) + 0.5j * x, g)
    path = tmp_path / "q.dat"
    q.write(path)
    q2 = Potential.read(path)
    assert q2.grid.nodes == q.grid.nodes
    np.testing.assert_allclose(q2.values, q.values, rtol=0, atol=1e-15)


def test_file_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.dat"
    path.write_text("0.0 1.0 0.0\n")
    with pytest.raises(InvalidGrid):
        Potential.read(path)


def test_interpolated_values_match_callable():
    g = grid_pi(256)
    q = Potential(g, np.cos(g.x()).astype(complex))
    xs = np.linspace(0.3, 3.0, 7)
    np.testing.assert_allclose(q.at(xs), np.cos(xs), atol=2e-9)
