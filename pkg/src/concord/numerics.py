"""Numerical kernels: quadrature, bivariate normal CDF, eigenvalue bounds,
a dense feasibility LP and seeded random streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from .errors import DomainError, NumericalError

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "integrate",
    "bivariate_normal_cdf",
    "min_eigenvalue",
    "LpFeasibilityProblem",
    "Infeasible",
    "solve_feasibility",
    "RandomSource",
]


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre rule.

    ``order`` nodes on each of ``panels`` uniform panels. When ``abs_tol`` is
    positive the integral is recomputed on twice as many panels and a
    disagreement larger than ``abs_tol`` raises :class:`NumericalError`.
    """

    order: int = 64
    panels: int = 8
    abs_tol: float = 0.0

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 2:
            raise DomainError(f"quadrature order must be an integer >= 2, got {self.order}")
        if int(self.panels) != self.panels or self.panels < 1:
            raise DomainError(f"quadrature panels must be an integer >= 1, got {self.panels}")
        if not (self.abs_tol >= 0):
            raise DomainError(f"abs_tol must be >= 0, got {self.abs_tol}")


DEFAULT_QUADRATURE = QuadratureSpec()


@lru_cache(maxsize=None)
def _gl_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _panel_edges(a: float, b: float, panels: int, breakpoints: Sequence[float]) -> np.ndarray:
    # every segment between consecutive breakpoints gets `panels` uniform panels
    cuts = sorted({a, b} | {float(t) for t in breakpoints if a < t < b})
    edges = [np.linspace(lo, hi, panels + 1)[:-1] for lo, hi in zip(cuts[:-1], cuts[1:])]
    return np.append(np.concatenate(edges), b)


def quadrature_nodes(
    a: float, b: float, spec: QuadratureSpec = DEFAULT_QUADRATURE, breakpoints: Sequence[float] = ()
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite rule on ``[a, b]``."""
    if not (math.isfinite(a) and math.isfinite(b)) or a > b:
        raise DomainError(f"integration interval must be finite with a <= b, got [{a}, {b}]")
    x, w = _gl_rule(spec.order)
    edges = _panel_edges(a, b, spec.panels, breakpoints)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    breakpoints: Sequence[float] = (),
) -> float:
    """Integrate ``f`` over ``[a, b]`` with a composite Gauss-Legendre rule.

    ``f`` is called once with the array of all abscissae and must return an
    array of the same shape. ``breakpoints`` inside ``(a, b)`` become forced
    panel boundaries, which keeps kinked integrands at full accuracy.
    """
    value = _integrate_once(f, a, b, spec, breakpoints)
    if spec.abs_tol > 0 and a < b:
        finer = QuadratureSpec(spec.order, 2 * spec.panels, 0.0)
        refined = _integrate_once(f, a, b, finer, breakpoints)
        if abs(refined - value) > spec.abs_tol:
            raise NumericalError(
                f"quadrature did not converge on [{a}, {b}]: "
                f"|{refined!r} - {value!r}| > abs_tol={spec.abs_tol}"
            )
        value = refined
    return value


def _integrate_once(f, a, b, spec, breakpoints) -> float:
    if a == b:
        return 0.0
    nodes, weights = quadrature_nodes(a, b, spec, breakpoints)
    values = np.asarray(f(nodes), dtype=float)
    if values.shape != nodes.shape:
        values = np.broadcast_to(values, nodes.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        x0 = nodes[np.argmax(bad)]
        raise NumericalError(f"integrand is not finite at abscissa {x0!r} (value {values[bad][0]!r})")
    return float(np.dot(weights, values))


# ---------------------------------------------------------------------------
# Bivariate normal CDF (Drezner-Wesolowsky with Genz's refinements)
# ---------------------------------------------------------------------------

_TWOPI = 2.0 * math.pi


@lru_cache(maxsize=None)
def _half_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    # negative half of an n-point Gauss-Legendre rule; the other half is
    # recovered through the reflection x -> -x inside the sums below
    x, w = leggauss(n)
    keep = x < 0
    return x[keep], w[keep]


def _bvnu(h: np.ndarray, k: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Upper orthant probability P(X > h, Y > k) for finite h, k."""
    out = np.empty_like(h)
    absr = np.abs(r)
    for lo, hi, npts in ((0.0, 0.3, 6), (0.3, 0.75, 12), (0.75, 0.925, 20)):
        m = (absr >= lo) & (absr < hi)
        if m.any():
            out[m] = _bvnu_moderate(h[m], k[m], r[m], *_half_rule(npts))
    m = absr >= 0.925
    if m.any():
        out[m] = _bvnu_strong(h[m], k[m], r[m], *_half_rule(20))
    return out


def _bvnu_moderate(h, k, r, x, w):
    hk = h * k
    hs = 0.5 * (h * h + k * k)
    asr = np.arcsin(r)
    total = np.zeros_like(h)
    for xi, wi in zip(x, w):
        for t in (1.0 + xi, 1.0 - xi):
            sn = np.sin(asr * t * 0.5)
            total += wi * np.exp((sn * hk - hs) / (1.0 - sn * sn))
    return total * asr / (2.0 * _TWOPI) + ndtr(-h) * ndtr(-k)


def _bvnu_strong(h, k, r, x, w):
    neg = r < 0
    k = np.where(neg, -k, k)
    hk = h * k
    bvn = np.zeros_like(h)
    inner = np.abs(r) < 1.0
    if inner.any():
        hi, ki, hki, ri = h[inner], k[inner], hk[inner], r[inner]
        a_s = (1.0 - ri) * (1.0 + ri)
        a = np.sqrt(a_s)
        bs = (hi - ki) ** 2
        c = (4.0 - hki) / 8.0
        d = (12.0 - hki) / 16.0
        val = a * np.exp(-(bs / a_s + hki) / 2.0) * (
            1.0 - c * (bs - a_s) * (1.0 - d * bs / 5.0) / 3.0 + c * d * a_s * a_s / 5.0
        )
        b = np.sqrt(bs)
        corr = np.exp(-hki / 2.0) * math.sqrt(_TWOPI) * ndtr(-b / a) * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0)
        val = val - np.where(hki > -160.0, corr, 0.0)
        a = a / 2.0
        for xi, wi in zip(x, w):
            xs = (a * (xi + 1.0)) ** 2
            rs = np.sqrt(1.0 - xs)
            val += a * wi * (
                np.exp(-bs / (2.0 * xs) - hki / (1.0 + rs)) / rs
                - np.exp(-(bs / xs + hki) / 2.0) * (1.0 + c * xs * (1.0 + d * xs))
            )
            xs = a_s * (1.0 - xi) ** 2 / 4.0
            rs = np.sqrt(1.0 - xs)
            val += a * wi * np.exp(-(bs / xs + hki) / 2.0) * (
                np.exp(-hki * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs))
            )
        bvn[inner] = -val / _TWOPI
    pos_out = bvn + ndtr(-np.maximum(h, k))
    neg_out = -bvn + np.where(k > h, ndtr(k) - ndtr(h), 0.0)
    return np.where(neg, neg_out, pos_out)


def bivariate_normal_cdf(x, y, rho):
    """P(X <= x, Y <= y) for a standard bivariate normal with correlation ``rho``.

    Accepts scalars or broadcastable arrays; infinite limits are allowed.
    Absolute error is below 1e-10 everywhere (the algorithm is accurate to
    roughly 1e-15).
    """
    x, y, r = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in (x, y, rho)))
    if np.isnan(r).any() or (np.abs(r) > 1.0).any():
        raise DomainError(f"correlation must lie in [-1, 1], got {rho!r}")
    if np.isnan(x).any() or np.isnan(y).any():
        raise DomainError("bivariate_normal_cdf arguments must not be NaN")
    scalar = x.ndim == 0
    shape = x.shape
    x, y, r = (np.atleast_1d(t).astype(float).ravel() for t in (x, y, r))
    # order the arguments so that swapping x and y gives bit-identical results
    x, y = np.minimum(x, y), np.maximum(x, y)
    out = np.empty_like(x)

    lo = (x == -np.inf) | (y == -np.inf)
    out[lo] = 0.0
    xinf = (x == np.inf) & ~lo
    out[xinf] = ndtr(y[xinf])
    yinf = (y == np.inf) & ~lo & ~xinf
    out[yinf] = ndtr(x[yinf])
    fin = ~(lo | xinf | yinf)
    if fin.any():
        out[fin] = _bvnu(-x[fin], -y[fin], r[fin])
    np.clip(out, 0.0, 1.0, out=out)
    if scalar:
        return float(out[0])
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Symmetric eigenvalues
# ---------------------------------------------------------------------------


def min_eigenvalue(S, sym_tol: float = 1e-12) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {S.shape}")
    if not np.isfinite(S).all():
        raise DomainError("matrix has non-finite entries")
    asym = np.max(np.abs(S - S.T)) if S.size else 0.0
    if asym > sym_tol:
        raise DomainError(f"matrix is not symmetric (max |S - S^T| = {asym:.3g} > {sym_tol:g})")
    # LAPACK syevd: tridiagonal reduction followed by an implicit QL/QR sweep
    return float(np.linalg.eigvalsh(0.5 * (S + S.T))[0])


# ---------------------------------------------------------------------------
# Dense feasibility LP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LpFeasibilityProblem:
    """Find ``w >= 0`` with ``sum(w) == 1`` and ``columns @ w == rhs``."""

    columns: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        cols = np.atleast_2d(np.asarray(self.columns, dtype=float))
        rhs = np.atleast_1d(np.asarray(self.rhs, dtype=float))
        if cols.ndim != 2 or rhs.ndim != 1:
            raise DomainError("columns must be a matrix and rhs a vector")
        if cols.shape[0] != rhs.shape[0]:
            raise DomainError(f"dimension mismatch: columns has {cols.shape[0]} rows, rhs has {rhs.shape[0]}")
        if cols.shape[0] < 1 or cols.shape[1] < 1:
            raise DomainError("need at least one constraint row and one column")
        if not (np.isfinite(cols).all() and np.isfinite(rhs).all()):
            raise DomainError("LP data must be finite")
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "rhs", rhs)


@dataclass(frozen=True)
class Infeasible:
    """No convex certificate exists. ``residual`` is the optimal phase-one
    objective, i.e. the smallest attainable L1 constraint violation."""

    residual: float

    def __bool__(self):
        return False


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factor = T[:, col].copy()
    factor[row] = 0.0
    T -= np.outer(factor, T[row])


PIVOT_TOL = 1e-9
REFRESH_EVERY = 64
PROGRESS_TOL = 1e-10
STALL_LIMIT = 5000


def _refresh(T: np.ndarray, T0: np.ndarray, basis: list[int]) -> None:
    """Recompute tableau ``T`` from the original tableau ``T0`` and the basis.

    Rows become ``B^-1 T0`` and the cost row is re-reduced against them, which
    discards rounding drift accumulated by successive pivots.
    """
    m = T.shape[0] - 1
    B = T0[:m, basis]
    T[:m] = np.linalg.solve(B, T0[:m])
    T[-1] = T0[-1] - T0[-1, basis] @ T[:m]
    T[:m, basis] = np.eye(m)
    T[-1, basis] = 0.0


def _lex_row(T: np.ndarray, ties: np.ndarray, col: int, inv: slice, tol: float) -> int:
    """Break a ratio tie lexicographically on the rows of ``B^-1 / pivot``."""
    block = T[ties, inv] / T[ties, col][:, None]
    alive = np.arange(ties.size)
    for j in range(block.shape[1]):
        vals = block[alive, j]
        alive = alive[vals <= vals.min() + tol]
        if alive.size == 1:
            break
    return int(ties[alive[0]])


def _simplex(T: np.ndarray, T0: np.ndarray, basis: list[int], allowed: np.ndarray, inv: slice, eps: float, max_iter: int) -> None:
    """Minimise the objective held in the last row of tableau ``T`` in place.

    The last row stores reduced costs with the negated objective value in the
    last column; ``inv`` locates the identity block, which holds ``B^-1``.
    Columns are priced by steepest reduced cost and ratio ties are broken by
    the lexicographic rule, which cannot cycle. Should rounding make the
    objective stall anyway, pricing falls back to Bland's rule (lowest
    improving index, lowest basic index among ties) until it moves again.
    Pivot elements below ``PIVOT_TOL`` are never used.
    """
    m = T.shape[0] - 1
    bland = False
    anchor, stalled = T[-1, -1], 0
    for it in range(1, max_iter + 1):
        cost = T[-1, :-1]
        improving = (cost < -eps) & allowed
        if not improving.any():
            return
        if bland:
            col = int(np.flatnonzero(improving)[0])
        else:
            col = int(np.argmin(np.where(improving, cost, 0.0)))
        column = T[:m, col]
        positive = column > PIVOT_TOL
        if not positive.any():
            # only tiny entries: the reduced cost is rounding noise for this column
            allowed = allowed.copy()
            allowed[col] = False
            continue
        ratios = np.full(m, np.inf)
        rhs = np.maximum(T[:m, -1], 0.0)
        ratios[positive] = rhs[positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + eps * max(1.0, abs(best)))
        if ties.size == 1:
            row = int(ties[0])
        elif bland:
            row = int(min(ties, key=lambda i: basis[i]))
        else:
            row = _lex_row(T, ties, col, inv, eps)
        _pivot(T, row, col)
        basis[row] = col
        if it % REFRESH_EVERY == 0:
            _refresh(T, T0, basis)
        # the last cell holds minus the objective, so progress raises it
        if T[-1, -1] > anchor + PROGRESS_TOL * max(1.0, abs(anchor)):
            anchor, stalled, bland = T[-1, -1], 0, False
        else:
            stalled += 1
            bland = stalled > STALL_LIMIT
    raise NumericalError(f"simplex did not terminate within {max_iter} pivots")


def _two_phase(A: np.ndarray, b: np.ndarray, c: np.ndarray | None, eps: float):
    m, k = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    # tableau [A | I | b] with artificial slacks as the starting basis
    T = np.zeros((m + 1, k + m + 1))
    T[:m, :k] = A
    T[:m, k : k + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :k] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    T0 = T.copy()
    inv = slice(k, k + m)
    basis = list(range(k, k + m))
    allowed = np.ones(k + m, dtype=bool)
    max_iter = 50 * (k + m) + 1000

    _simplex(T, T0, basis, allowed, inv, eps, max_iter)
    _refresh(T, T0, basis)
    residual = max(-T[-1, -1], 0.0)

    # drive zero-valued artificials out of the basis where possible
    for i, j in enumerate(basis):
        if j >= k:
            row = T[i, :k]
            nz = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            if nz.size:
                col = int(nz[np.argmax(np.abs(row[nz]))])
                _pivot(T, i, col)
                basis[i] = col

    if c is not None:
        allowed[k:] = False
        T0[-1, :] = 0.0
        T0[-1, :k] = c
        _refresh(T, T0, basis)
        _simplex(T, T0, basis, allowed, inv, eps, max_iter)
        _refresh(T, T0, basis)

    x = np.zeros(k)
    for i, j in enumerate(basis):
        if j < k:
            x[j] = T[i, -1]
    return x, residual


def solve_feasibility(problem: LpFeasibilityProblem, tol: float = 1e-9, objective=None):
    """Find convex weights reproducing ``rhs`` from the problem's columns.

    Returns the weight vector, or an :class:`Infeasible` marker carrying the
    phase-one residual. Returned weights are re-substituted and are
    guaranteed to satisfy ``w >= -tol``, ``|sum(w) - 1| <= tol`` and
    ``max|columns @ w - rhs| <= tol``; a certificate that fails this check
    raises :class:`NumericalError` instead of being returned.

    ``objective`` (optional, length ``k``) is minimised in phase two over the
    feasible set; without it phase two is skipped.
    """
    if not (tol > 0):
        raise DomainError(f"tol must be positive, got {tol}")
    cols, rhs = problem.columns, problem.rhs
    k = cols.shape[1]
    A = np.vstack([cols, np.ones((1, k))])
    b = np.append(rhs, 1.0)
    c = None if objective is None else np.asarray(objective, dtype=float)
    if c is not None and c.shape != (k,):
        raise DomainError(f"objective must have length {k}")
    eps = min(1e-12, tol * 1e-3)
    w, residual = _two_phase(A, b, c, eps)
    if residual > tol:
        return Infeasible(residual)

    if (w < -tol).any():
        raise NumericalError(f"certificate has a negative weight {w.min()!r}")
    w = np.where(w < 0, 0.0, w)
    if abs(w.sum() - 1.0) > tol:
        raise NumericalError(f"certificate weights sum to {w.sum()!r}")
    err = np.max(np.abs(cols @ w - rhs))
    if err > tol:
        # phase one accepted an L1 residual <= tol, so this cannot fire unless
        # the tableau lost accuracy
        raise NumericalError(f"certificate re-substitution error {err:.3g} exceeds tol {tol:g}")
    return w


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RandomSource:
    """A reproducible random stream identified by ``(seed, stream)``.

    Every call to :meth:`generator` returns a fresh Philox generator in the
    same initial state, so a source is a value, not a mutable object. Use
    :meth:`spawn` to derive independent child streams; a child's stream is
    the parent's stream path extended by the child index.
    """

    seed: int
    stream: int | tuple[int, ...] = 0

    def __post_init__(self):
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        key = self.stream if isinstance(self.stream, tuple) else (self.stream,)
        if not key or any(int(s) != s or s < 0 for s in key):
            raise DomainError(f"stream must be a non-negative integer or a path of them, got {self.stream!r}")

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(int(s) for s in self.stream) if isinstance(self.stream, tuple) else (int(self.stream),)

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "RandomSource":
        return RandomSource(self.seed, (*self.key, int(index)))

    def spawn(self, n: int) -> list["RandomSource"]:
        return [self.child(i) for i in range(n)]
