"""Diagnostics of components inside a front.

Everything weighted by e^{cx} is evaluated through the bounded variable
w = U e^{cx/2} (or through logs), never by forming e^{cx} and U^2 apart.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from . import front as fr
from .errors import (
    DivergentEnergy,
    DomainError,
    OverflowGuard,
    PreconditionFailed,
    PulledFrontError,
    ValidationError,
)
from .front import FrontClass, FrontProfile
from .sim import ComponentState, Observer, TimeSeries, init_component, sum_check

R_FLOOR = 1e-12
LOG_MAX = 700.0


class RaySide(str, enum.Enum):
    RIGHT = "right"  # {x >= alpha sqrt t}
    LEFT = "left"  # {x <= alpha sqrt t}


# ---------------------------------------------------------------- weighted fields


@dataclass(frozen=True, eq=False)
class WeightedFields:
    psi: np.ndarray
    sigma: np.ndarray
    r: np.ndarray | None
    psi_bound: float
    psi2_max: float

    @property
    def K(self) -> float:
        return energy_constant(self)


def weighted_fields(front: FrontProfile, v=None) -> WeightedFields:
    """psi = cx + 2 ln U, sigma = e^psi, r = v/U (NaN where U < 1e-12)."""
    x, U, dx = front.x, front.U, front.grid.dx
    psi = front.speed * x + 2 * np.log(U)
    if psi.max() > LOG_MAX:
        raise OverflowGuard("U^2 e^{cx} overflows on this grid")
    sigma = np.exp(psi)
    d1 = np.gradient(psi, dx)
    d2 = np.zeros_like(psi)
    d2[1:-1] = (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / dx**2
    r = None
    if v is not None:
        r = np.where(U >= R_FLOOR, np.asarray(v) / np.where(U >= R_FLOOR, U, 1.0), np.nan)
    return WeightedFields(psi, sigma, r, float(np.max(np.abs(d1) + np.abs(d2))), float(np.max(np.abs(d2))))


def energy_constant(wf: WeightedFields) -> float:
    """K = 1.1 max|psi''| + 1 (grid estimate inflated by 10%)."""
    return 1.1 * wf.psi2_max + 1.0


def sigma_identity_defect(front: FrontProfile, wf: WeightedFields | None = None) -> float:
    """max interior |D1 sigma - psi' sigma| with psi' = c + 2U'/U."""
    wf = wf or weighted_fields(front)
    dx = front.grid.dx
    d1 = (wf.sigma[2:] - wf.sigma[:-2]) / (2 * dx)
    dpsi = front.speed + 2 * front.log_slope[1:-1]
    return float(np.max(np.abs(d1 - dpsi * wf.sigma[1:-1])))


# ---------------------------------------------------------------- proportion


def _log_w(front: FrontProfile):
    lw = 0.5 * front.speed * front.x + np.log(front.U)
    if lw.max() > LOG_MAX / 2:
        raise OverflowGuard("U e^{cx/2} exceeds the representable range")
    return lw


def _right_gap(front: FrontProfile) -> float:
    """Decay rate of w = U e^{cx/2} on the right, used for tail corrections."""
    rate = fr.expected_right_rate(front)
    if rate is None:
        rate = front.decay.fitted_right_rate
    if rate is None:
        rate, _ = fr.fit_tail(front, fr.Side.RIGHT)
    return rate - front.speed / 2


def proportion(v0, front: FrontProfile, pulled_convention: bool = False) -> float:
    """Share p(v0) of the front carried by the component v0.

    p = int (v0/U) w^2 / int w^2 with w = U e^{cx/2}; trapezoid on the grid
    plus exponential tail corrections beyond both ends. Pulled fronts have
    int w^2 = inf; they raise unless ``pulled_convention`` asks for p = 0.
    """
    if front.classification is FrontClass.PULLED:
        if pulled_convention:
            return 0.0
        raise PulledFrontError("p is only defined for pushed fronts (U e^{cx/2} not square integrable)")
    v0 = np.asarray(v0, dtype=float)
    U = front.U
    if v0.shape != U.shape:
        raise ValidationError("v0 must be sampled on the front grid")
    if np.any(v0 < -1e-9) or np.any(v0 > U + 1e-9):
        raise ValidationError("v0 must satisfy 0 <= v0 <= U")
    w2 = np.exp(2 * _log_w(front))
    r = v0 / U
    dx = front.grid.dx
    gap = _right_gap(front)
    if not gap > 0:
        raise PulledFrontError(f"w does not decay on the right (rate gap {gap:.3g})")
    c = front.speed
    # beyond x_max: w^2 ~ w2[-1] e^{-2 gap (x - x_max)}; beyond x_min: w^2 ~ w2[0] e^{c (x - x_min)}
    den = np.trapezoid(w2, dx=dx) + w2[-1] / (2 * gap) + w2[0] / c
    num = np.trapezoid(r * w2, dx=dx) + r[-1] * w2[-1] / (2 * gap) + r[0] * w2[0] / c
    return float(num / den)


def proportion_sweep(a_values, v0_spec, grid: fr.Grid = fr.Grid()) -> np.ndarray:
    """Rows (a, p) for the closed-form fronts of u(1-u)(1+au), a > 2."""
    rows = []
    for a in a_values:
        if not a > 2:
            raise DomainError(f"proportion sweep needs a > 2 (pushed), got {a}")
        front = fr.analytic_front_monostable(a, grid)
        rows.append((float(a), proportion(init_component(front, v0_spec).v, front)))
    return np.array(rows, dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------- energies


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    W: float
    Z: float
    K: float
    D: float  # ||d_x r||^2_sigma


def _weighted_square(front: FrontProfile, q):
    """int e^{cx} q^2 dx, with a right-tail convergence check."""
    cx = front.speed * front.x
    with np.errstate(divide="ignore"):
        lq = np.where(q != 0, cx + 2 * np.log(np.abs(q)), -np.inf)
    if lq.max() > LOG_MAX:
        raise OverflowGuard("e^{cx} q^2 overflows")
    dens = np.exp(lq)
    total = np.trapezoid(dens, dx=front.grid.dx)
    # still growing at the right end with non-negligible weight: the partial sums do not settle
    tail = dens[-max(len(dens) // 20, 2) : -1]
    if total > 0 and tail.size > 1 and tail[-1] > tail[0] and tail[-1] * (front.x[-1] - front.x[0]) > 1e-6 * total:
        raise DivergentEnergy("e^{cx}-weighted integral has not converged at x_max")
    return float(total)


def energies(state: ComponentState, wf: WeightedFields | None = None, K: float | None = None) -> EnergyRecord:
    """W = 1/2 int e^{cx} v^2 and Z = K W + 1/2 int e^{cx} (v_x - v U'/U)^2."""
    front = state.front
    if K is None:
        K = energy_constant(wf or weighted_fields(front))
    v = state.v
    W = 0.5 * _weighted_square(front, v)
    vx = np.gradient(v, front.grid.dx)
    D = _weighted_square(front, vx - v * front.log_slope)
    return EnergyRecord(state.t, W, K * W + 0.5 * D, K, D)


def initial_energy_finite(front: FrontProfile, v0) -> bool:
    """Whether int_0^inf e^{cx} v0^2 dx has converged on the grid."""
    try:
        _weighted_square(front, np.where(front.x >= 0, v0, 0.0))
    except DivergentEnergy:
        return False
    return True


# ---------------------------------------------------------------- errors and extrema


def _window_mask(front, window):
    lo, hi = window
    if lo < front.grid.x_min or hi > front.grid.x_max:
        raise ValidationError(f"window {window} not inside the grid")
    return (front.x >= lo) & (front.x <= hi)


def moving_frame_error(state: ComponentState, front: FrontProfile, p: float, window=(-10.0, 10.0)) -> float:
    m = _window_mask(front, window)
    return float(np.max(np.abs(state.v[m] - p * front.U[m])))


@dataclass(frozen=True)
class RayResult:
    value: float
    clamped: bool


def ray_extremum(state: ComponentState, front: FrontProfile, alpha: float, side=RaySide.RIGHT) -> RayResult:
    """max of v over the static region {x >= alpha sqrt t} (or <=), seen in the moving window."""
    side = RaySide(side)
    t = state.t
    if t < 0:
        raise ValidationError("ray extrema need t >= 0")
    thr = alpha * math.sqrt(t) - front.speed * t
    x, v = front.x, state.v
    clamped = not (x[0] <= thr <= x[-1])
    m = x >= thr if side is RaySide.RIGHT else x <= thr
    if not m.any():
        return RayResult(float(v[-1] if side is RaySide.RIGHT else v[0]), True)
    return RayResult(float(v[m].max()), clamped)


def value_at_static(state: ComponentState, front: FrontProfile, x_static: float) -> tuple[float, bool]:
    xm = x_static - front.speed * state.t
    x = front.x
    return float(np.interp(xm, x, state.v)), not (x[0] <= xm <= x[-1])


# ---------------------------------------------------------------- barriers


def heat_step_solution(left_level, right_level, t, x):
    """Heat-equation solution from left_level 1_{x<0} + right_level 1_{x>0}."""
    if not np.all(np.asarray(t) > 0):
        raise DomainError("heat step needs t > 0")
    return right_level + (left_level - right_level) * 0.5 * erfc(np.asarray(x) / np.sqrt(4 * np.asarray(t)))


def _check_negative(y):
    y = np.asarray(y, dtype=float)
    if np.any(y >= 0):
        raise DomainError("barrier is defined for y < 0 only")
    return y


def barrier_j(eps, y):
    y = _check_negative(y)
    return eps * (1 - 1 / (1 - y))


def barrier_dj(eps, y):
    y = _check_negative(y)
    return -eps / (1 - y) ** 2


def barrier_d2j(eps, y):
    y = _check_negative(y)
    return -2 * eps / (1 - y) ** 3


def barrier_drive(eps, c, y):
    """-j'' - c j', positive on y < 0 and ~ eps c / y^2 far left."""
    return -barrier_d2j(eps, y) - c * barrier_dj(eps, y)


def admissible_barrier_shift(front: FrontProfile, eps: float, A: float = 0.0, factor: float | None = None) -> float:
    """Largest grid point A' <= A (A' < 0) with 0 <= g(U) <= drive/(factor) on (-inf, A'].

    ``factor`` defaults to 2 + eps. Raises PreconditionFailed if no grid
    point qualifies.
    """
    if not 0 < eps < 1:
        raise DomainError("need 0 < eps < 1")
    factor = 2 + eps if factor is None else factor
    x = front.x
    g = front.term.g(front.U)
    y = np.minimum(x, -1e-300)
    ok = (x < 0) & (g >= 0) & (g <= barrier_drive(eps, front.speed, y) / factor)
    # prefix of the grid where the inequality holds for every node to the left
    bad = np.flatnonzero(~ok)
    last_ok = (bad[0] - 1) if bad.size else len(x) - 1
    cand = np.flatnonzero((x <= A) & (np.arange(len(x)) <= last_ok))
    if not cand.size:
        raise PreconditionFailed(f"no admissible barrier shift A <= {A} on the grid for eps = {eps}")
    return float(x[cand[-1]])


def supersolution_check(series: TimeSeries, front: FrontProfile, eps: float, A: float, t0: float, component: int = 0, mu=None):
    """Replay snapshots against the heat-step + barrier supersolution.

    In the moving frame the comparison domain [A + c t0, A + c t] is
    x_m in [A - c (t - t0), A]. The barrier is

        vbar = h(t - t0, x_m + c (t - t0) - A) + j_eps(x_m)

    with h the heat solution from 2 on the left and mu + eps on the right,
    mu = max over recorded t >= t0 of v at x_m = A unless given. A is first
    moved left until the growth-vs-barrier inequality holds. Returns
    ``(margin, A_used, mu)`` where margin = min (vbar - v) over the replay.
    """
    A = admissible_barrier_shift(front, eps, A)
    x, c = front.x, front.speed
    snaps = sorted((t, V) for (t, V) in series.snapshots.values() if t >= t0 - 1e-12)
    if not snaps:
        raise ValidationError("no snapshots at or after t0")
    ia = int(np.argmin(np.abs(x - A)))
    if mu is None:
        mu = max(float(V[ia, component]) for _, V in snaps)
    margin = math.inf
    for t, V in snaps:
        m = (x >= A - c * (t - t0)) & (x <= A)
        xm = x[m]
        s = xm + c * (t - t0) - A
        if t - t0 > 1e-12:
            h = heat_step_solution(2.0, mu + eps, t - t0, s)
        else:
            h = np.where(s < 0, 2.0, np.where(s > 0, mu + eps, 1 + 0.5 * (mu + eps)))
        vbar = h + barrier_j(eps, np.minimum(xm, -1e-300))
        margin = min(margin, float(np.min(vbar - V[m, component])))
    return margin, A, mu


@dataclass(frozen=True)
class HalflineResult:
    deviation: float
    applicable: bool
    clamped: bool
    value: float


def halfline_limit_check(state: ComponentState, front: FrontProfile, p: float, x_static: float = 0.0, v0=None) -> HalflineResult:
    """|v(t, x_static) - p/2| in the static frame.

    Only meaningful when v0 vanishes at -inf; with v0 = U (or any v0 that
    stays near U at the left end) the flag ``applicable`` is False.
    """
    v0 = state.v if v0 is None else np.asarray(v0)
    applicable = bool(v0[0] <= 1e-6 * max(v0.max(), 1e-300))
    val, clamped = value_at_static(state, front, x_static)
    return HalflineResult(abs(val - p / 2), applicable, clamped, val)


# ---------------------------------------------------------------- observers


def observe_W(front, component=0, name="W"):
    return Observer(name, lambda st: energies(st[component], K=1.0).W)


def observe_Z(front, K=None, component=0, name="Z"):
    K = energy_constant(weighted_fields(front)) if K is None else K
    return Observer(name, lambda st: energies(st[component], K=K).Z)


def observe_dissipation(front, component=0, name="D"):
    return Observer(name, lambda st: energies(st[component], K=1.0).D)


def observe_p_error(front, p, window=(-10.0, 10.0), component=0, name="p_error"):
    m = _window_mask(front, window)
    pU = p * front.U[m]
    return Observer(name, lambda st: np.max(np.abs(st[component].v[m] - pU)))


def observe_window_max(front, window=(-10.0, 10.0), component=0, name="window_max"):
    m = _window_mask(front, window)
    return Observer(name, lambda st: np.max(st[component].v[m]))


def observe_ray_max(front, alpha, side=RaySide.RIGHT, component=0):
    side = RaySide(side)
    return Observer(f"ray_max({alpha!r},{side.value})", lambda st: ray_extremum(st[component], front, alpha, side).value)


def observe_sup_global(front, component=0, name="sup_global"):
    return Observer(name, lambda st: np.max(st[component].v))


def observe_point(front, x_static, component=0):
    return Observer(f"point({x_static!r})", lambda st: value_at_static(st[component], front, x_static)[0])


def observe_sum_check(front, name="sum_check"):
    return Observer(name, sum_check)


def observe_min(front, name="min_v"):
    return Observer(name, lambda st: min(float(s.v.min()) for s in st))


def observe_excess(front, name="max_excess"):
    """max over components of max(v - U): comparison with the whole front."""
    return Observer(name, lambda st: max(float(np.max(s.v - front.U)) for s in st))
