import dataclasses
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frontlab import front as fr
from frontlab import reaction as rx
from frontlab.errors import AmbiguousClassification, DomainError, GridTooNarrow, InsufficientTail, NoConvergence, ValidationError
from frontlab.front import FrontClass, Grid, Side


def assert_decreasing(U):
    """Strictly decreasing wherever 1 - U is representable; U saturates at 1.0 far left."""
    d = np.diff(U)
    assert np.all(d <= 0)
    assert np.all(d[U[1:] < 1 - 1e-12] < 0)


def test_grid_must_contain_zero():
    with pytest.raises(ValidationError):
        Grid(1.0, 5.0, 0.1)
    with pytest.raises(ValidationError):
        Grid(-1.005, 1.0, 0.01)
    g = Grid(-2.0, 3.0, 0.5)
    assert g.n == 11 and g.x[g.zero_index] == 0.0


def test_analytic_monostable_examples(a4):
    assert fr.analytic_front_monostable(2.0).speed == 2.0
    assert fr.analytic_front_monostable(8.0).speed == pytest.approx(2.5, abs=1e-15)
    assert a4.U[a4.grid.zero_index] == 0.5
    assert a4.classification is FrontClass.PUSHED
    assert fr.analytic_front_monostable(2.0).classification is FrontClass.PULLED
    with pytest.raises(DomainError):
        fr.analytic_front_monostable(1.5)


def test_analytic_bistable_examples(bistable):
    assert bistable.speed == pytest.approx(0.353553, abs=1e-6)
    assert bistable.U[bistable.grid.zero_index] == 0.5
    assert fr.analytic_front_bistable(0.4999).speed < 1e-3
    with pytest.raises(DomainError):
        fr.analytic_front_bistable(0.5)


def test_decay_rate_examples():
    r = fr.decay_rates(rx.monostable_kpp(0), 2.5)
    assert (r.lambda_plus, r.lambda_minus) == pytest.approx((2.0, 0.5))
    r = fr.decay_rates(rx.monostable_kpp(0), 2.0)
    assert r.lambda_plus == r.lambda_minus == 1.0
    assert fr.decay_rates(rx.monostable_kpp(0), 2.0).nu == pytest.approx((-2 + math.sqrt(8)) / 2)  # f'(1) = -1
    assert r.mu is None
    with pytest.raises(DomainError):
        fr.decay_rates(rx.monostable_kpp(0), 1.9)
    with pytest.raises(DomainError):
        fr.decay_rates(rx.monostable_kpp(0), 0.0)


@given(st.floats(2.0, 12.0))
def test_kappa_equals_lambda_plus(a):
    c = math.sqrt(2 / a) + math.sqrt(a / 2)
    assert fr.decay_rates(rx.monostable_kpp(a), c).lambda_plus == pytest.approx(math.sqrt(a / 2), rel=1e-6)


@given(st.floats(0.01, 0.49), st.floats(0.05, 3.0))
def test_rate_invariants(rho, c):
    r = fr.decay_rates(rx.bistable_cubic(rho), c)
    assert r.mu > c > 0 and r.nu > 0


@given(st.floats(0.0, 6.0), st.floats(0.0, 2.0))
def test_supercritical_lambda_minus_below_half_speed(a, extra):
    c = 2.0 + extra + 1e-6
    r = fr.decay_rates(rx.monostable_kpp(a), c)
    assert r.lambda_minus < c / 2 < r.lambda_plus


def test_fit_tail_examples(a4, bistable):
    rate, (A, B) = fr.fit_tail(a4, Side.RIGHT)
    assert rate == pytest.approx(math.sqrt(2), rel=1e-3)
    assert rate == pytest.approx(a4.decay.lambda_plus, rel=0.02)
    assert B == 0.0 and A == pytest.approx(1.0, rel=1e-2)
    nu_rate, _ = fr.fit_tail(bistable, Side.LEFT)
    assert nu_rate == pytest.approx(bistable.decay.nu, rel=0.02)


def test_fit_tail_needs_samples():
    with pytest.raises(InsufficientTail):
        fr.fit_tail(fr.analytic_front_monostable(4.0, Grid(-60, 60, 0.5)), Side.RIGHT)
    with pytest.raises(InsufficientTail):
        fr.fit_tail(fr.analytic_front_monostable(4.0, Grid(-4, 4, 0.01)), Side.RIGHT)


def test_residual_examples(a4, bistable):
    assert fr.residual(a4) <= 1e-3
    assert fr.residual(bistable, rx.bistable_cubic(0.25)) <= 1e-3
    assert fr.ode_residual(np.full(50, 0.5), 1.0, 0.1, rx.monostable_kpp(0)) == pytest.approx(0.25)


def test_classification(a4, bistable, kpp_front):
    assert fr.classify_front(a4, a4.term) is FrontClass.PUSHED
    assert fr.classify_front(bistable) is FrontClass.PUSHED
    assert kpp_front.classification is FrontClass.PULLED
    # a tail rate of sqrt 2 at speed 2 sqrt 2 sits exactly on c/2
    fake = dataclasses.replace(a4, speed=2 * math.sqrt(2))
    with pytest.raises(AmbiguousClassification):
        fr.classify_front(fake)


def test_degenerate_pulled_tail(kpp_front):
    rate, (A, B) = fr.fit_tail(kpp_front, Side.RIGHT)
    assert rate == pytest.approx(1.0, abs=2e-3)
    assert A > 0  # linear prefactor (A y + B) e^{-y}


@pytest.mark.parametrize(
    "term, c, tol",
    [
        (rx.bistable_cubic(0.25), 0.5 / math.sqrt(2), 1e-4),
        (rx.monostable_kpp(8.0), 2.5, 1e-3),
        (rx.monostable_kpp(0.0), 2.0, 1e-2),
    ],
)
def test_solve_front_speeds(term, c, tol):
    assert fr.front_speed(term)[1] == pytest.approx(c, abs=tol)


@pytest.mark.parametrize("a", [2.0, 3.0, 8.0])
def test_shooting_reproduces_closed_form(a):
    shot = fr.solve_front(rx.monostable_kpp(a))
    exact = fr.analytic_front_monostable(a)
    assert abs(shot.speed - exact.speed) <= 1e-3
    assert np.max(np.abs(shot.U - exact.U)) <= 5e-3
    assert_decreasing(shot.U)
    assert shot.U[0] > 1 - 1e-6 and shot.U[-1] < 1e-6
    if a > 2:
        assert shot.decay.fitted_right_rate == pytest.approx(shot.decay.lambda_plus, rel=0.02)


def test_shooting_bistable_and_ignition(bistable):
    shot = fr.solve_front(rx.bistable_cubic(0.25))
    assert np.max(np.abs(shot.U - bistable.U)) < 1e-6
    ign = fr.solve_front(rx.ignition(0.3))
    assert ign.classification is FrontClass.PUSHED
    # right tail of an ignition front is A e^{-c y}
    assert ign.decay.mu == pytest.approx(ign.speed, rel=1e-12)
    assert ign.decay.fitted_right_rate == pytest.approx(ign.speed, rel=1e-3)
    assert fr.residual(ign) < 1e-3


def test_translation_gauge():
    term = rx.monostable_kpp(4.0)
    a = fr.solve_front(term, Grid(-60, 60, 0.01))
    b = fr.solve_front(term, Grid(-50, 70, 0.01))
    ia, ib = a.x >= -50, b.x <= 60
    assert np.max(np.abs(a.U[ia] - b.U[ib])) < 1e-8


def test_solver_errors():
    with pytest.raises(NoConvergence):
        fr.solve_front(rx.monostable_kpp(8.0), opts=fr.ShootingOptions(c_range=(1e-6, 2.2)))
    with pytest.raises(GridTooNarrow):
        fr.solve_front(rx.bistable_cubic(0.25), Grid(-5, 5, 0.01))


@given(st.floats(2.0, 10.0))
def test_analytic_front_properties(a):
    f = fr.analytic_front_monostable(a, Grid(-40, 40, 0.02))
    assert_decreasing(f.U)
    assert np.all(f.U > 0) and np.all(f.U <= 1)
    assert fr.residual(f) < 5e-3


def test_export(tmp_path, a4):
    fr.write_front_csv(a4, tmp_path / "front.csv")
    fr.write_front_json(a4, tmp_path / "front.json")
    data = np.loadtxt(tmp_path / "front.csv", delimiter=",", skiprows=1)
    assert data.shape == (a4.grid.n, 3)
    assert np.array_equal(data[:, 1], a4.U)
    summary = json.loads((tmp_path / "front.json").read_text())
    assert {"speed", "classification", "rates", "amplitudes", "residual"} <= set(summary)
    assert summary["classification"] == "pushed"


def test_profile_is_immutable(a4):
    with pytest.raises(ValueError):
        a4.U[0] = 0.3
