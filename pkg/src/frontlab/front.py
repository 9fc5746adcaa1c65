"""Traveling fronts U'' + c U' + f(U) = 0 with U(-inf) = 1, U(+inf) = 0.

Shooting works in the variables (L, z) = (ln U, U'/U), which turns the
phase-plane system into

    L' = z,    z' = -z**2 - c z - g(exp(L))

and keeps the leading edge representable down to U ~ 1e-300. Near U = 0 the
z-equation is an autonomous Riccati equation whose fixed points are the
roots of z**2 + c z + f'(0) = 0; the front is the trajectory that lands on
the fast root ``-(c + sqrt(c**2 - 4 f'(0)))/2``. Trajectories below that
root blow up (U crosses zero: the speed is too small), trajectories above
it relax to the slow root or turn around (too fast, or admissible for a
monostable term). Bisection on that dichotomy gives the bistable/ignition
speed and the monostable minimal speed alike.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares
from scipy.special import expit

from . import reaction as rx
from .errors import (
    AmbiguousClassification,
    DomainError,
    GridTooNarrow,
    InsufficientTail,
    NoConvergence,
    OracleError,
    ValidationError,
)
from .reaction import ReactionClass, ReactionTerm

TAIL_BAND = (1e-10, 1e-3)
MIN_TAIL_SAMPLES = 50
DEGENERATE_TOL = 1e-6
PUSHED_MARGIN = 0.05


class FrontClass(str, enum.Enum):
    PULLED = "pulled"
    PUSHED = "pushed"


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class Grid:
    x_min: float = -60.0
    x_max: float = 60.0
    dx: float = 0.01

    def __post_init__(self):
        if not self.dx > 0 or not self.x_max > self.x_min:
            raise ValidationError(f"bad grid {self}")
        k = -self.x_min / self.dx
        if not (self.x_min <= 0 <= self.x_max) or abs(k - round(k)) > 1e-6:
            raise ValidationError(f"grid {self} must contain x = 0 as a node")

    @property
    def n(self) -> int:
        return int(round((self.x_max - self.x_min) / self.dx)) + 1

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @property
    def zero_index(self) -> int:
        return int(round(-self.x_min / self.dx))


@dataclass(frozen=True)
class DecayRates:
    lambda_plus: float | None = None
    lambda_minus: float | None = None
    mu: float | None = None
    nu: float | None = None
    fitted_right_rate: float | None = None
    fitted_amplitudes: tuple[float, float] | None = None

    def as_dict(self):
        return {
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "mu": self.mu,
            "nu": self.nu,
            "fitted_right_rate": self.fitted_right_rate,
        }


@dataclass(frozen=True, eq=False)
class FrontProfile:
    speed: float
    grid: Grid
    U: np.ndarray = field(repr=False)
    Uprime: np.ndarray = field(repr=False)
    decay: DecayRates
    classification: FrontClass
    source: tuple
    term: ReactionTerm = field(repr=False)

    def __post_init__(self):
        for arr in (self.U, self.Uprime):
            arr.setflags(write=False)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def log_slope(self) -> np.ndarray:
        """U'/U on the grid."""
        return self.Uprime / self.U

    def summary(self) -> dict:
        return front_summary(self)


@dataclass(frozen=True)
class ShootingOptions:
    c_tol: float = 1e-8
    c_range: tuple[float, float] = (1e-6, 50.0)
    delta: float = 1e-8
    rtol: float = 1e-10
    atol: float = 1e-13
    l_cut: float = 40.0
    max_bisections: int = 200


# ---------------------------------------------------------------- rates


def decay_rates(term: ReactionTerm, c: float) -> DecayRates:
    """Closed-form exponential rates of a front of speed ``c``."""
    if not c > 0:
        raise DomainError("front speed must be positive")
    f0, f1 = rx.endpoint_derivatives(term)
    nu = (-c + math.sqrt(c * c - 4 * f1)) / 2
    disc = c * c - 4 * f0
    cls = rx.classify_reaction(term)
    if cls is ReactionClass.MONOSTABLE:
        if disc < 0:
            raise DomainError(f"no monostable front with c = {c} < 2 sqrt(f'(0))")
        root = math.sqrt(disc)
        return DecayRates(lambda_plus=(c + root) / 2, lambda_minus=(c - root) / 2, nu=nu)
    # bistable: f'(0) < 0; ignition: f'(0) = 0 gives the rate c
    return DecayRates(mu=(c + math.sqrt(disc)) / 2, nu=nu)


def expected_right_rate(front: FrontProfile) -> float | None:
    """Closed-form right-tail rate of a critical front, None if not exponential-pure."""
    d = front.decay
    if d.mu is not None:
        return d.mu
    if front.classification is FrontClass.PUSHED:
        return d.lambda_plus
    return None


def _is_degenerate(term: ReactionTerm, c: float) -> bool:
    f0 = term.fprime0
    return f0 > 0 and abs(c - 2 * math.sqrt(f0)) < DEGENERATE_TOL


# ---------------------------------------------------------------- analytic oracles


def _logistic_front(k: float, x: np.ndarray):
    U = expit(-k * x)
    Up = -k * U * (1 - U)
    Upp = k * k * U * (1 - U) * (1 - 2 * U)
    return U, Up, Upp


def _exact_residual(term, c, U, Up, Upp):
    return float(np.max(np.abs(Upp + c * Up + rx.eval_f(term, U))))


def analytic_front_monostable(a: float, grid: Grid = Grid()) -> FrontProfile:
    """Critical front of u(1-u)(1+au) for a >= 2: U = 1/(1+exp(kx)), k = sqrt(a/2)."""
    if not a >= 2:
        raise DomainError("closed-form critical front only exists for a >= 2")
    term = rx.monostable_kpp(a)
    k = math.sqrt(a / 2)
    c = math.sqrt(2 / a) + k
    U, Up, Upp = _logistic_front(k, grid.x)
    if _exact_residual(term, c, U, Up, Upp) > 1e-10:
        raise OracleError("monostable closed form fails its ODE")
    cls = FrontClass.PUSHED if a > 2 else FrontClass.PULLED
    return _finish(FrontProfile(c, grid, U, Up, decay_rates(term, c), cls, ("analytic_monostable", a), term))


def analytic_front_bistable(rho: float, grid: Grid = Grid()) -> FrontProfile:
    """Front of u(1-u)(u-rho): U = 1/(1+exp(x/sqrt 2)), c = (1-2 rho)/sqrt 2."""
    if not 0 < rho < 0.5:
        raise DomainError("closed-form bistable front needs 0 < rho < 1/2")
    term = rx.bistable_cubic(rho)
    c = (1 - 2 * rho) / math.sqrt(2)
    U, Up, Upp = _logistic_front(1 / math.sqrt(2), grid.x)
    if _exact_residual(term, c, U, Up, Upp) > 1e-10:
        raise OracleError("bistable closed form fails its ODE")
    return _finish(FrontProfile(c, grid, U, Up, decay_rates(term, c), FrontClass.PUSHED, ("analytic_bistable", rho), term))


def _finish(front: FrontProfile) -> FrontProfile:
    """Attach the fitted right-tail rate when the grid resolves the tail band."""
    try:
        rate, amps = fit_tail(front, Side.RIGHT)
    except InsufficientTail:
        return front
    return replace(front, decay=replace(front.decay, fitted_right_rate=rate, fitted_amplitudes=amps))


# ---------------------------------------------------------------- shooting


def _fast_root(term, c):
    disc = c * c - 4 * term.fprime0
    if disc < 0:
        return None
    return -(c + math.sqrt(disc)) / 2


def _trajectory(term: ReactionTerm, c: float, opts: ShootingOptions, l_cut: float, dense=False):
    f1 = term.fprime1
    nu = (-c + math.sqrt(c * c - 4 * f1)) / 2
    d = opts.delta
    y0 = [math.log1p(-d), -d * nu / (1 - d)]
    g = term.g

    def rhs(_, s):
        L, z = s
        return [z, -z * z - c * z - g(min(math.exp(L), 1.0))]

    z_blow = -(abs(c) + 60.0)

    def blowup(_, s):
        return s[1] - z_blow

    blowup.terminal = True

    def bottom(_, s):
        return s[0] + l_cut

    bottom.terminal = True

    def half(_, s):
        return s[0] - math.log(0.5)

    # span long enough for the slowest admissible decay to reach l_cut
    span = 10.0 * l_cut / max(c / 2, 1e-3) + 200.0
    sol = solve_ivp(
        rhs,
        (0.0, span),
        y0,
        method="DOP853",
        rtol=opts.rtol,
        atol=opts.atol,
        events=[blowup, bottom, half],
        dense_output=dense,
    )
    return sol, nu


def _too_slow(term, c, opts) -> bool:
    sol, _ = _trajectory(term, c, opts, opts.l_cut)
    if sol.t_events[0].size:
        return True
    zf = _fast_root(term, c)
    if zf is None:
        return True
    if not sol.t_events[1].size:
        # neither blew up nor reached the floor: z sat at a positive root (turned around)
        return False
    return sol.y[1, -1] < zf


def front_speed(term: ReactionTerm, opts: ShootingOptions = ShootingOptions()) -> tuple[float, float]:
    """Bracket ``(lo, hi)`` of width <= c_tol around the front speed.

    For monostable terms this is the minimal speed c*; ``lo == hi`` when
    the KPP bound 2 sqrt(f'(0)) is itself admissible.
    """
    rx.check_invariants(term)
    cmin, cmax = opts.c_range
    if term.fprime0 > 0:
        lo = 2 * math.sqrt(term.fprime0)
        if not _too_slow(term, lo, opts):
            return lo, lo
    else:
        lo = cmin
        if not _too_slow(term, lo, opts):
            raise NoConvergence(f"lower bracket c = {lo} is already admissible")
    hi = min(max(2 * lo, lo + 0.1), cmax)
    while _too_slow(term, hi, opts):
        if hi >= cmax:
            raise NoConvergence(f"no admissible speed below {cmax}")
        lo, hi = hi, min(2 * hi, cmax)
    for _ in range(opts.max_bisections):
        if hi - lo <= opts.c_tol:
            break
        mid = 0.5 * (lo + hi)
        if _too_slow(term, mid, opts):
            lo = mid
        else:
            hi = mid
    else:
        raise NoConvergence("bisection did not reach c_tol")
    return lo, hi


def solve_front(term: ReactionTerm, grid: Grid = Grid(), opts: ShootingOptions = ShootingOptions()) -> FrontProfile:
    """Shoot for the front of ``term`` and sample it on ``grid`` with U(0) = 1/2."""
    lo, hi = front_speed(term, opts)
    c = hi
    zf = _fast_root(term, c)
    pushed_edge = term.fprime0 <= 0 or not _is_degenerate(term, c)
    # integrate far enough to cover the grid when the edge is followed to the end
    l_cut = min(700.0, max(opts.l_cut, (c + 1.0) * (grid.x_max + 10.0)))
    sol, nu = _trajectory(term, c, opts, l_cut, dense=True)
    if not sol.t_events[2].size:
        raise NoConvergence("trajectory never crossed U = 1/2")
    y_half = sol.t_events[2][0]
    y_end = sol.t[-1]

    ys = np.arange(y_half, y_end, 0.01)
    Lz = sol.sol(ys)
    if zf is not None and pushed_edge:
        # the front is unstable at the fast root: trust the trajectory up to
        # its closest approach, then continue along the exact exponential
        k = int(np.argmin(np.abs(Lz[1] - zf)))
        y_t, L_t, slope = ys[k], Lz[0, k], zf
    else:
        y_t, L_t, slope = y_end, sol.y[0, -1], sol.y[1, -1]

    y = grid.x + y_half
    U = np.empty_like(y)
    Up = np.empty_like(y)
    left = y < 0
    mid = (~left) & (y <= y_t)
    right = y > y_t
    e = opts.delta * np.exp(nu * y[left])
    U[left], Up[left] = 1 - e, -nu * e
    L, z = sol.sol(y[mid])
    U[mid], Up[mid] = np.exp(L), z * np.exp(L)
    Lr = L_t + slope * (y[right] - y_t)
    U[right], Up[right] = np.exp(Lr), slope * np.exp(Lr)

    if not (U[0] > 1 - 1e-6 and U[-1] < 1e-6):
        raise GridTooNarrow(f"tails not flat on [{grid.x_min}, {grid.x_max}]: U = {U[0]:.3g} .. {U[-1]:.3g}")
    front = FrontProfile(c, grid, U, Up, decay_rates(term, c), FrontClass.PUSHED, ("shooting", lo, hi), term)
    front = _finish(front)
    return replace(front, classification=classify_front(front, term))


# ---------------------------------------------------------------- diagnostics


def fit_tail(front: FrontProfile, side: Side = Side.RIGHT):
    """Fit the exponential tail rate on one side of ``front``.

    Right: log U against y. Left: log(1 - U). For a pulled critical front
    the right tail is fitted as (A y + B) exp(-s y); otherwise A exp(-s y)
    and B is reported as 0. Returns ``(rate, (A, B))`` with rate > 0.
    """
    side = Side(side)
    x = front.x
    vals = front.U if side is Side.RIGHT else 1.0 - front.U
    lo, hi = TAIL_BAND
    band = (vals >= lo) & (vals <= hi)
    if side is Side.RIGHT:
        band &= x > 0
    else:
        band &= x < 0
    if band.sum() < MIN_TAIL_SAMPLES:
        raise InsufficientTail(f"{band.sum()} samples in the {side.value} tail band")
    y, logv = x[band], np.log(vals[band])
    slope, icpt = np.polyfit(y, logv, 1)
    if side is Side.LEFT:
        return float(slope), (float(np.exp(icpt)), 0.0)
    if not _is_degenerate(front.term, front.speed):
        return float(-slope), (float(np.exp(icpt)), 0.0)

    # pulled critical: log U = log(A y + B) - s y
    def resid(p):
        s, A, B = p
        lin = np.maximum(A * y + B, 1e-300)
        return np.log(lin) - s * y - logv

    s0 = front.speed / 2
    w = vals[band] * np.exp(s0 * y)
    A0, B0 = np.polyfit(y, w, 1)
    fit = least_squares(resid, [s0, A0, max(B0, 1e-12) if A0 <= 0 else B0], x_scale="jac")
    s, A, B = fit.x
    return float(s), (float(A), float(B))


def ode_residual(U, c, dx, term):
    """max over interior nodes of |D2 U + c D1 U + f(U)| (centered differences)."""
    U = np.asarray(U, dtype=float)
    d2 = (U[2:] - 2 * U[1:-1] + U[:-2]) / dx**2
    d1 = (U[2:] - U[:-2]) / (2 * dx)
    return float(np.max(np.abs(d2 + c * d1 + rx.eval_f(term, U[1:-1]))))


def residual(front: FrontProfile, term: ReactionTerm | None = None) -> float:
    return ode_residual(front.U, front.speed, front.grid.dx, term or front.term)


def classify_front(front: FrontProfile, term: ReactionTerm | None = None) -> FrontClass:
    """Pulled/pushed label of a critical front from its tail and its speed.

    Bistable and ignition fronts are always pushed. For monostable terms the
    speed test c > 2 sqrt(f'(0)) must agree with the fitted right rate lying
    above c/2 + 5% c; a rate inside the +-5% band is reported as ambiguous.
    A pulled critical front (c = 2 sqrt(f'(0))) has the degenerate tail
    (A y + B) exp(-c y / 2) and is classified by the speed alone.
    """
    term = term or front.term
    cls = rx.classify_reaction(term)
    if cls is not ReactionClass.MONOSTABLE:
        return FrontClass.PUSHED
    c = front.speed
    c_kpp = 2 * math.sqrt(term.fprime0)
    if _is_degenerate(term, c):
        return FrontClass.PULLED
    by_speed = FrontClass.PUSHED if c > c_kpp + DEGENERATE_TOL else FrontClass.PULLED
    rate = front.decay.fitted_right_rate
    if rate is None:
        rate, _ = fit_tail(front, Side.RIGHT)
    margin = PUSHED_MARGIN * c
    if rate > c / 2 + margin:
        by_rate = FrontClass.PUSHED
    elif rate < c / 2 - margin:
        by_rate = FrontClass.PULLED
    else:
        raise AmbiguousClassification(f"fitted rate {rate:.4g} within {margin:.3g} of c/2 = {c / 2:.4g}")
    if by_rate is not by_speed:
        raise AmbiguousClassification(f"speed says {by_speed.value}, tail rate says {by_rate.value}")
    return by_rate


# ---------------------------------------------------------------- export


def front_summary(front: FrontProfile) -> dict:
    amps = front.decay.fitted_amplitudes
    return {
        "speed": front.speed,
        "classification": front.classification.value,
        "rates": front.decay.as_dict(),
        "amplitudes": list(amps) if amps is not None else None,
        "residual": residual(front),
        "source": [str(s) for s in front.source],
        "reaction": front.term.describe(),
    }


def write_front_csv(front: FrontProfile, path) -> None:
    with open(path, "w") as fh:
        fh.write("x,U,Uprime\n")
        for row in zip(front.x, front.U, front.Uprime):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def write_front_json(front: FrontProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(front_summary(front), fh, sort_keys=True, indent=1)
        fh.write("\n")
