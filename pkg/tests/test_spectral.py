import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from frontlab import front as fr
from frontlab import sim
from frontlab import spectral as sp
from frontlab.errors import InsufficientDecay, ValidationError


def test_operator_is_symmetric(a4_coarse):
    op = sp.build_operator(a4_coarse)
    A = op.dense()
    assert np.array_equal(A, A.T)
    w = np.random.default_rng(0).standard_normal(len(op.x))
    assert np.allclose(op.matvec(w), A @ w, rtol=0, atol=1e-9)


def test_potential_limits(a4, bistable):
    for f, right, left in ((a4, 0.125, 1.125 + 2.0), (bistable, 0.03125 + 0.25, 0.03125 + 0.75)):
        q = sp.build_operator(f).potential
        c2 = f.speed**2 / 4
        # g(0) = f'(0), g(1) = lim f(u)/u at u -> 1 is 0 but g(U)=f(U)/U -> 0 at U=1
        assert q[-1] == pytest.approx(c2 - f.term.fprime0, abs=1e-6)
        assert q[0] == pytest.approx(c2 - f.term.g(1.0), abs=1e-6)


def test_free_operator_spectrum():
    # zero potential on [0, (n+1)dx]: eigenvalues (4/dx^2) sin^2(k pi / (2(n+1)))
    n, dx = 200, 0.05
    op = sp.SchrodingerOperator(np.arange(n) * dx, dx, np.zeros(n), 0.0, 0.0)
    k = np.arange(1, 5)
    exact = 4 / dx**2 * np.sin(k * np.pi / (2 * (n + 1))) ** 2
    assert np.allclose(sp.lowest_eigenvalues(op, 4), exact, rtol=1e-10)
    lam, phi = sp.ground_state(op)
    assert lam == pytest.approx(exact[0], rel=1e-10)
    assert dx * phi @ phi == pytest.approx(1.0)


@pytest.mark.parametrize("which", ["a4", "bistable"])
def test_ground_state_is_the_front(which, request):
    f = request.getfixturevalue(which)
    res = sp.spectrum(f)
    assert abs(res.lambda0) < 1e-5
    assert sp.cosine_similarity(res.ground_state, sp.kernel_reference(f)) > 1 - 1e-8
    assert np.all(res.ground_state > -1e-12)


def test_lambda0_is_second_order():
    lam = []
    for dx in (0.04, 0.02):
        f = fr.analytic_front_monostable(4.0, fr.Grid(-40.0, 40.0, dx))
        lam.append(abs(sp.spectrum(f).lambda0))
    assert 3.0 < lam[0] / lam[1] < 5.0


def test_rayleigh_and_projection(a4_coarse):
    op = sp.build_operator(a4_coarse)
    lam, phi = sp.ground_state(op)
    assert op.dx * phi @ op.matvec(phi) / (op.dx * phi @ phi) == pytest.approx(lam, abs=1e-10)
    w = np.random.default_rng(1).standard_normal(len(phi))
    P1 = sp.project(phi, w, op.dx)
    assert np.allclose(sp.project(phi, P1, op.dx), P1, atol=1e-12)


def test_edges(a4, bistable, kpp_front):
    assert sp.essential_edge(a4) == pytest.approx(0.125)
    assert sp.essential_edge(bistable) == pytest.approx(0.03125)
    assert sp.essential_edge(kpp_front) == pytest.approx(0.0, abs=1e-7)
    r = sp.spectrum(kpp_front)
    assert r.gap == 0.0 and r.gap_unreliable


def test_gap_bounds(a4, bistable):
    for f in (a4, bistable):
        r = sp.spectrum(f)
        assert 0 < r.gap <= 0.95 * r.essential_edge + 1e-15
        assert r.gap == sp.spectral_gap(r)
        assert np.all(np.diff(r.eigenvalues) >= 0)
        assert len(r.point_spectrum) >= 1


def _synthetic(rate, times, floor=0.0):
    # a discretization floor stops the decay: the record flattens and wobbles there
    ts = sim.TimeSeries()
    for t in times:
        ts.append(t, {"p_error": max(math.exp(-rate * t) * 1e-2, floor * (1 + 0.1 * math.sin(t)))})
    return ts


@given(rate=st.floats(0.05, 2.0))
def test_decay_fit_recovers_rate(rate):
    times = np.linspace(0.1, 20 / rate, 60)
    assert sp.semigroup_decay_fit(_synthetic(rate, times)) == pytest.approx(rate, rel=1e-6)


def test_decay_fit_stops_at_floor():
    ts = _synthetic(0.5, np.linspace(0.1, 80, 200), floor=1e-7)
    assert sp.semigroup_decay_fit(ts) == pytest.approx(0.5, rel=1e-2)


def test_insufficient_decay():
    with pytest.raises(InsufficientDecay):
        sp.semigroup_decay_fit(_synthetic(0.01, np.linspace(0.1, 10, 20)))
    with pytest.raises(InsufficientDecay):
        sp.semigroup_decay_fit(sim.TimeSeries())


def test_orthogonal_part_decays_at_gap():
    f = fr.analytic_front_monostable(4.0, fr.Grid(-20.0, 20.0, 0.1))
    op = sp.build_operator(f)
    lam0, phi = sp.ground_state(op)
    lam = sp.lowest_eigenvalues(op, 2)
    w = np.exp(-(op.x**2))
    w = w - sp.project(phi, w, op.dx)
    S = expm(-5.0 * op.dense())
    n0 = math.sqrt(op.dx * w @ w)
    n1 = math.sqrt(op.dx * (S @ w) @ (S @ w))
    assert n1 <= math.exp(-lam[1] * 5.0) * n0 * (1 + 1e-8)


def test_weighted_space(a4, kpp_front):
    assert sp.in_weighted_space(a4)
    assert not sp.in_weighted_space(kpp_front)
    with pytest.raises(ValidationError):
        sp.in_weighted_space(a4, a4.U[:-3])


def test_csv_outputs(a4_coarse, tmp_path):
    r = sp.spectrum(a4_coarse, m=4)
    sp.write_spectrum_csv(r, tmp_path / "s.csv")
    sp.write_ground_state_csv(r, a4_coarse, tmp_path / "g.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "index,eigenvalue,below_edge"
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 5
    assert len((tmp_path / "g.csv").read_text().splitlines()) == a4_coarse.grid.n + 1
