"""The Schrodinger operator L = -d^2/dx^2 + c^2/4 - g(U(x)) of a front.

Conjugating the moving-frame component equation by e^{cx/2} gives
w_t = -L w, so the spectrum of L controls how fast components settle. The
front itself supplies the kernel: phi = U e^{cx/2} solves L phi = 0, and
for pushed fronts phi is square integrable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, lapack

from .errors import InsufficientDecay, NoConvergence, ValidationError
from .front import FrontProfile
from .sim import TimeSeries

EDGE_EXCLUSION = 0.02
GAP_SAFETY = 0.05
DECAY_WINDOW = (1e-8, 1e-2)


@dataclass(frozen=True, eq=False)
class SchrodingerOperator:
    """Symmetric tridiagonal L on all grid nodes, zero Dirichlet data one step outside."""

    x: np.ndarray
    dx: float
    potential: np.ndarray
    speed: float
    fprime0: float

    @property
    def diag(self):
        return 2 / self.dx**2 + self.potential

    @property
    def offdiag(self):
        return np.full(len(self.x) - 1, -1 / self.dx**2)

    def matvec(self, w):
        out = self.diag * w
        out[:-1] += self.offdiag * w[1:]
        out[1:] += self.offdiag * w[:-1]
        return out

    def dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def build_operator(front: FrontProfile, term=None) -> SchrodingerOperator:
    term = term or front.term
    c = front.speed
    q = c * c / 4 - term.g(front.U)
    return SchrodingerOperator(front.x.copy(), front.grid.dx, q, c, term.fprime0)


def kernel_reference(front: FrontProfile) -> np.ndarray:
    """U e^{cx/2} on the grid, unit norm in the dx-weighted inner product."""
    phi = np.exp(0.5 * front.speed * front.x + np.log(front.U))
    return phi / math.sqrt(front.grid.dx * np.dot(phi, phi))


def ground_state(op: SchrodingerOperator, tol: float = 1e-13, maxiter: int = 100):
    """Lowest eigenpair by inverse iteration at shift 0."""
    n = len(op.x)
    d = op.diag.copy()
    e = op.offdiag
    dl, dd, du, du2, ipiv, info = lapack.dgttrf(e.copy(), d, e.copy())
    if info != 0:
        # exactly singular at 0: nudge the shift below the spectrum
        d = d + 1e-12
        dl, dd, du, du2, ipiv, info = lapack.dgttrf(e.copy(), d, e.copy())
        if info != 0:
            raise NoConvergence("operator is singular at shift 0")
    w = np.ones(n)
    lam_old = math.inf
    for _ in range(maxiter):
        w, info = lapack.dgttrs(dl, dd, du, du2, ipiv, w)
        w /= np.linalg.norm(w)
        Lw = op.matvec(w)
        lam = float(np.dot(w, Lw))
        res = np.linalg.norm(Lw - lam * w)
        if abs(lam - lam_old) <= tol * max(1.0, abs(lam)) and res <= 1e-8 * np.linalg.norm(op.diag, np.inf):
            break
        lam_old = lam
    else:
        raise NoConvergence("inverse iteration did not settle")
    if w.sum() < 0:
        w = -w
    return lam, w / math.sqrt(op.dx)


def lowest_eigenvalues(op: SchrodingerOperator, m: int = 6) -> np.ndarray:
    m = min(m, len(op.x))
    return eigh_tridiagonal(op.diag, op.offdiag, eigvals_only=True, select="i", select_range=(0, m - 1))


def essential_edge(front: FrontProfile, term=None) -> float:
    term = term or front.term
    return front.speed**2 / 4 - max(term.fprime0, 0.0)


@dataclass(frozen=True, eq=False)
class SpectralResult:
    x: np.ndarray
    eigenvalues: np.ndarray
    ground_state: np.ndarray
    essential_edge: float
    gap: float
    gap_unreliable: bool

    @property
    def lambda0(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def point_spectrum(self) -> np.ndarray:
        """Eigenvalues clearly below the edge (the 2% band under it is dropped)."""
        ev = self.eigenvalues
        return ev[ev < (1 - EDGE_EXCLUSION) * self.essential_edge]


def _gap(eigenvalues, edge):
    if edge <= 0:
        return 0.0, True
    lam1 = eigenvalues[1] if len(eigenvalues) > 1 else math.inf
    unreliable = not lam1 < edge
    if lam1 >= (1 - EDGE_EXCLUSION) * edge:
        lam1 = edge
    return (1 - GAP_SAFETY) * min(lam1, edge), unreliable


def spectrum(front: FrontProfile, term=None, m: int = 6) -> SpectralResult:
    op = build_operator(front, term)
    lam0, phi = ground_state(op)
    ev = lowest_eigenvalues(op, m)
    ev[0] = lam0
    edge = essential_edge(front, term)
    eta, unreliable = _gap(ev, edge)
    return SpectralResult(op.x, ev, phi, edge, eta, unreliable)


def spectral_gap(result: SpectralResult) -> float:
    """eta = 0.95 min(lambda_1, edge); 0 when the edge is not positive."""
    return _gap(result.eigenvalues, result.essential_edge)[0]


def cosine_similarity(a, b) -> float:
    return float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))


def project(phi, w, dx):
    """P w = <phi, w> phi in the dx-weighted inner product (phi unit norm)."""
    return dx * np.dot(phi, w) * phi


def semigroup_decay_fit(series: TimeSeries, eta_predicted=None, name: str = "p_error") -> float:
    """Exponential rate of ``name`` over its decaying stretch inside [1e-8, 1e-2].

    Points are kept while the record keeps falling, so the fit stops at the
    discretization floor where the error flattens. At least three points
    spanning a decade are required.
    """
    t = np.asarray(series.times)
    y = series.column(name) if series.records else np.array([])
    lo, hi = DECAY_WINDOW
    idx = np.flatnonzero((y >= lo) & (y <= hi))
    if idx.size:
        keep = [idx[0]]
        for i in idx[1:]:
            if i != keep[-1] + 1 or not y[i] < y[keep[-1]]:
                break
            keep.append(i)
        idx = np.array(keep)
    if idx.size < 3 or math.log(y[idx[0]] / y[idx[-1]]) < math.log(10):
        raise InsufficientDecay(f"no decade of exponential decay of {name} inside {DECAY_WINDOW}")
    slope, _ = np.polyfit(t[idx], np.log(y[idx]), 1)
    return float(-slope)


def in_weighted_space(front: FrontProfile, v=None, rel_tol: float = 1e-2) -> bool:
    """Partial-sum test for int v^2 e^{cx} dx < inf (v defaults to U).

    Converged when the integrand is falling over the last quarter of the
    grid and that quarter adds less than rel_tol of the total.
    """
    v = front.U if v is None else np.asarray(v, dtype=float)
    if v.shape != front.U.shape:
        raise ValidationError("v must be sampled on the front grid")
    with np.errstate(divide="ignore"):
        dens = np.exp(front.speed * front.x + 2 * np.log(np.abs(v)))
    S = np.cumsum(dens) * front.grid.dx
    k = int(0.75 * len(S))
    falling = dens[-1] < dens[k]
    return bool(falling and S[-1] - S[k] <= rel_tol * S[-1])


def write_spectrum_csv(result: SpectralResult, path):
    with open(path, "w") as fh:
        fh.write("index,eigenvalue,below_edge\n")
        for i, lam in enumerate(result.eigenvalues):
            fh.write(f"{i},{float(lam)!r},{int(lam < result.essential_edge)}\n")


def write_ground_state_csv(result: SpectralResult, front: FrontProfile, path):
    ref = kernel_reference(front)
    with open(path, "w") as fh:
        fh.write("x,phi,reference\n")
        for row in zip(result.x, result.ground_state, ref):
            fh.write(",".join(repr(float(a)) for a in row) + "\n")
