"""Reaction terms f on [0, 1] and their per-capita growth rates g = f/u.

Three built-in families are provided,

    monostable_kpp(a)      f(u) = u (1 - u) (1 + a u)
    bistable_cubic(rho)    f(u) = u (1 - u) (u - rho)
    ignition(rho, scale)   f(u) = scale (u - rho)^2 (1 - u) for u > rho, 0 below

plus ``tabulated`` terms built from samples of f, interpolated with a
monotone cubic (PCHIP) so the sign pattern of the samples is preserved.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, ValidationError

U_SLACK = 1e-12
TAB_ENDPOINT_TOL = 1e-12
INTEGRAL_FLOOR = 1e-10
N_QUAD = 2001


class ReactionClass(str, enum.Enum):
    MONOSTABLE = "monostable"
    BISTABLE = "bistable"
    IGNITION = "ignition"


@dataclass(frozen=True, eq=False)
class ReactionTerm:
    """An immutable nonlinearity f together with its endpoint data.

    ``kind`` is one of ``monostable_kpp``, ``bistable_cubic``, ``ignition``
    or ``tabulated``. Use the module-level constructors rather than building
    instances by hand; they run the invariant checks.
    """

    kind: str
    fprime0: float
    fprime1: float
    a: float | None = None
    rho: float | None = None
    scale: float = 1.0
    allee_threshold: float | None = None
    u_samples: np.ndarray | None = field(default=None, repr=False)
    f_samples: np.ndarray | None = field(default=None, repr=False)
    _interp: PchipInterpolator | None = field(default=None, repr=False)

    def f(self, u):
        return eval_f(self, u)

    def g(self, u):
        return eval_g(self, u)

    @property
    def reaction_class(self) -> ReactionClass:
        return classify_reaction(self)

    def describe(self) -> str:
        if self.kind == "monostable_kpp":
            return f"monostable_kpp(a={self.a!r})"
        if self.kind == "bistable_cubic":
            return f"bistable_cubic(rho={self.rho!r})"
        if self.kind == "ignition":
            return f"ignition(rho={self.rho!r}, scale={self.scale!r})"
        return f"tabulated(n={len(self.u_samples)})"


def monostable_kpp(a: float = 0.0) -> ReactionTerm:
    if not a >= 0:
        raise ValidationError(f"monostable_kpp needs a >= 0, got {a}")
    term = ReactionTerm("monostable_kpp", fprime0=1.0, fprime1=-(1.0 + a), a=float(a))
    check_invariants(term)
    return term


def bistable_cubic(rho: float = 0.25) -> ReactionTerm:
    # rho in [1/2, 1) is a valid cubic but violates the positive-integral hypothesis;
    # check_invariants reports that case explicitly.
    if not 0 < rho < 1:
        raise ValidationError(f"bistable_cubic needs 0 < rho < 1, got {rho}")
    term = ReactionTerm(
        "bistable_cubic",
        fprime0=-float(rho),
        fprime1=-(1.0 - rho),
        rho=float(rho),
        allee_threshold=float(rho),
    )
    check_invariants(term)
    return term


def ignition(rho: float = 0.3, scale: float = 1.0) -> ReactionTerm:
    if not 0 < rho < 1:
        raise ValidationError(f"ignition needs 0 < rho < 1, got {rho}")
    if not scale > 0:
        raise ValidationError(f"ignition needs scale > 0, got {scale}")
    term = ReactionTerm(
        "ignition",
        fprime0=0.0,
        fprime1=-scale * (1.0 - rho) ** 2,
        rho=float(rho),
        scale=float(scale),
        allee_threshold=float(rho),
    )
    check_invariants(term)
    return term


def tabulated(u, f, fprime0=None, fprime1=None, allee_threshold=None) -> ReactionTerm:
    """Build a term from samples ``f(u)`` on a grid covering [0, 1].

    Missing endpoint derivatives are estimated with second-order one-sided
    differences.
    """
    u = np.asarray(u, dtype=float)
    f = np.asarray(f, dtype=float)
    if u.ndim != 1 or u.shape != f.shape or len(u) < 5:
        raise ValidationError("tabulated term needs matching 1-d arrays with >= 5 samples")
    if abs(u[0]) > TAB_ENDPOINT_TOL or abs(u[-1] - 1) > TAB_ENDPOINT_TOL or np.any(np.diff(u) <= 0):
        raise ValidationError("tabulated samples must increase strictly from 0 to 1")
    if abs(f[0]) > TAB_ENDPOINT_TOL or abs(f[-1]) > TAB_ENDPOINT_TOL:
        raise ValidationError("tabulated f must vanish at u = 0 and u = 1 (within 1e-12)")
    if fprime0 is None:
        fprime0 = _one_sided(u[:3], f[:3])
    if fprime1 is None:
        fprime1 = _one_sided(u[-3:][::-1], f[-3:][::-1])
    term = ReactionTerm(
        "tabulated",
        fprime0=float(fprime0),
        fprime1=float(fprime1),
        allee_threshold=allee_threshold,
        u_samples=u,
        f_samples=f,
        _interp=PchipInterpolator(u, f, extrapolate=False),
    )
    check_invariants(term)
    return term


def _one_sided(u, f):
    # second-order one-sided difference on possibly nonuniform nodes u0, u1, u2
    h1, h2 = u[1] - u[0], u[2] - u[0]
    return (f[1] * h2**2 - f[2] * h1**2 - f[0] * (h2**2 - h1**2)) / (h1 * h2 * (h2 - h1))


def tabulate(term: ReactionTerm, n: int = 1001) -> ReactionTerm:
    u = np.linspace(0.0, 1.0, n)
    return tabulated(u, eval_f(term, u), term.fprime0, term.fprime1, term.allee_threshold)


def _check_domain(u):
    u = np.asarray(u, dtype=float)
    if np.any(u < -U_SLACK) or np.any(u > 1 + U_SLACK):
        raise DomainError("u must lie in [0, 1]")
    return np.clip(u, 0.0, 1.0)


def eval_f(term: ReactionTerm, u):
    """Evaluate f(u). Accepts scalars or arrays; u must lie in [0, 1]."""
    scalar = np.ndim(u) == 0
    u = _check_domain(u)
    if term.kind == "monostable_kpp":
        out = u * (1 - u) * (1 + term.a * u)
    elif term.kind == "bistable_cubic":
        out = u * (1 - u) * (u - term.rho)
    elif term.kind == "ignition":
        out = np.where(u > term.rho, term.scale * (u - term.rho) ** 2 * (1 - u), 0.0)
    else:
        out = term._interp(u)
    return float(out) if scalar else out


def eval_g(term: ReactionTerm, u):
    """Per-capita growth rate f(u)/u, extended by f'(0) at u = 0."""
    scalar = np.ndim(u) == 0
    u = _check_domain(u)
    if term.kind == "monostable_kpp":
        out = (1 - u) * (1 + term.a * u)
    elif term.kind == "bistable_cubic":
        out = (1 - u) * (u - term.rho)
    elif term.kind == "ignition":
        safe = np.where(u > term.rho, u, 1.0)
        out = np.where(u > term.rho, term.scale * (u - term.rho) ** 2 * (1 - u) / safe, 0.0)
    else:
        f = term._interp(u)
        safe = np.where(u > 0, u, 1.0)
        out = np.where(u > 0, f / safe, term.fprime0)
    return float(out) if scalar else out


def endpoint_derivatives(term: ReactionTerm) -> tuple[float, float]:
    return term.fprime0, term.fprime1


def integral(term: ReactionTerm) -> float:
    u = np.linspace(0.0, 1.0, N_QUAD)
    return float(simpson(eval_f(term, u), x=u))


def _sign_class(term: ReactionTerm):
    if term.kind == "monostable_kpp":
        return ReactionClass.MONOSTABLE
    if term.kind == "bistable_cubic":
        return ReactionClass.BISTABLE
    if term.kind == "ignition":
        return ReactionClass.IGNITION
    u, f = term.u_samples[1:-1], term.f_samples[1:-1]
    tol = 1e-12 * max(1.0, np.abs(f).max())
    pos, neg, zero = f > tol, f < -tol, np.abs(f) <= tol
    if pos.all():
        return ReactionClass.MONOSTABLE
    # a single switch from the lower pattern to strictly positive values
    first_pos = np.argmax(pos)
    if not pos[first_pos] or not pos[first_pos:].all():
        return None
    if zero[:first_pos].all():
        return ReactionClass.IGNITION
    # a sample landing exactly on the threshold reads as zero
    end = first_pos
    while end > 0 and zero[end - 1] and first_pos - end < 2:
        end -= 1
    if end > 0 and neg[:end].all():
        return ReactionClass.BISTABLE
    return None


def classify_reaction(term: ReactionTerm) -> ReactionClass:
    cls = _sign_class(term)
    if cls is None:
        raise ValidationError("samples match none of the monostable/bistable/ignition sign patterns")
    if integral(term) <= INTEGRAL_FLOOR:
        raise ValidationError("integral of f over [0,1] must be positive")
    return cls


def check_invariants(term: ReactionTerm) -> ReactionClass:
    """Raise ValidationError unless ``term`` satisfies its class invariants."""
    cls = classify_reaction(term)
    f0, f1 = term.fprime0, term.fprime1
    if not f1 < 0:
        raise ValidationError(f"f'(1) must be negative, got {f1}")
    if cls is ReactionClass.MONOSTABLE and not f0 > 0:
        raise ValidationError(f"monostable term needs f'(0) > 0, got {f0}")
    if cls is ReactionClass.BISTABLE and not f0 < 0:
        raise ValidationError(f"bistable term needs f'(0) < 0, got {f0}")
    return cls
