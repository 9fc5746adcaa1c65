import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frontlab import reaction as rx
from frontlab.errors import DomainError, ValidationError
from frontlab.reaction import ReactionClass


def test_builtin_classes_and_endpoints():
    assert rx.classify_reaction(rx.monostable_kpp(4)) is ReactionClass.MONOSTABLE
    assert rx.classify_reaction(rx.bistable_cubic(0.25)) is ReactionClass.BISTABLE
    assert rx.classify_reaction(rx.ignition(0.3)) is ReactionClass.IGNITION
    assert rx.endpoint_derivatives(rx.monostable_kpp(4)) == (1.0, -5.0)
    assert rx.endpoint_derivatives(rx.bistable_cubic(0.25)) == (-0.25, -0.75)
    f0, f1 = rx.endpoint_derivatives(rx.ignition(0.3))
    assert f0 == 0 and f1 == pytest.approx(-0.49)


@pytest.mark.parametrize(
    "term, exact",
    [
        (rx.monostable_kpp(4), 1 / 6 + 4 / 12),
        (rx.monostable_kpp(0), 1 / 6),
        (rx.bistable_cubic(0.25), 1 / 12 - 0.25 / 6),
        (rx.ignition(0.3), 0.7**4 / 12),
    ],
)
def test_integral_closed_forms(term, exact):
    assert rx.integral(term) == pytest.approx(exact, rel=1e-10)


def test_invalid_terms():
    with pytest.raises(ValidationError, match="integral"):
        rx.bistable_cubic(0.7)
    with pytest.raises(ValidationError):
        rx.monostable_kpp(-1)
    with pytest.raises(ValidationError):
        rx.ignition(0.3, scale=0)
    u = np.linspace(0, 1, 11)
    with pytest.raises(ValidationError):  # f(1) != 0
        rx.tabulated(u, u)
    with pytest.raises(ValidationError):  # two sign changes
        rx.tabulated(u, np.sin(3 * np.pi * u) * (1 - u))


def test_domain_and_g_at_zero():
    t = rx.monostable_kpp(4)
    with pytest.raises(DomainError):
        rx.eval_f(t, 1.1)
    assert rx.eval_g(t, 0.0) == t.fprime0
    assert rx.eval_g(rx.bistable_cubic(0.25), 0.0) == -0.25
    assert rx.eval_g(rx.ignition(0.3), 0.2) == 0.0


@given(st.floats(0, 10), st.floats(0.0, 1.0))
def test_g_times_u_is_f(a, u):
    t = rx.monostable_kpp(a)
    assert rx.eval_g(t, u) * u == pytest.approx(rx.eval_f(t, u), abs=1e-14)


@given(st.floats(0.01, 0.49), st.floats(1e-3, 1.0))
def test_bistable_g_times_u_is_f(rho, u):
    t = rx.bistable_cubic(rho)
    assert rx.eval_g(t, u) * u == pytest.approx(rx.eval_f(t, u), abs=1e-14)


@given(st.floats(0, 10))
def test_tabulation_keeps_class_monostable(a):
    tab = rx.tabulate(rx.monostable_kpp(a), 401)
    assert rx.classify_reaction(tab) is ReactionClass.MONOSTABLE
    u = np.linspace(0, 1, 97)
    assert np.max(np.abs(tab.f(u) - rx.eval_f(rx.monostable_kpp(a), u))) < 1e-4 * (1 + a)


@given(st.floats(0.02, 0.48))
def test_tabulation_keeps_class_bistable(rho):
    assert rx.classify_reaction(rx.tabulate(rx.bistable_cubic(rho), 401)) is ReactionClass.BISTABLE


@given(st.floats(0.05, 0.9))
def test_tabulation_keeps_class_ignition(rho):
    assert rx.classify_reaction(rx.tabulate(rx.ignition(rho), 401)) is ReactionClass.IGNITION


def test_estimated_endpoint_derivatives():
    u = np.linspace(0, 1, 201)
    tab = rx.tabulated(u, rx.eval_f(rx.monostable_kpp(4), u))
    # second-order one-sided differences: error h^2 |f'''| / 3 with f''' = -24
    h = u[1]
    assert tab.fprime0 == pytest.approx(1.0, abs=1.01 * 8 * h**2)
    assert tab.fprime1 == pytest.approx(-5.0, abs=1.01 * 8 * h**2)
