"""Measures of concordance of degree one.

Population values are computed from copula evaluations (closed forms and
Gauss-Legendre quadrature); sample values come from rank-transformed data
through :func:`estimate`.

Generalized Gini's gamma with mixing measure ``nu`` on (0, 1/2] is the
``nu``-average of generalized Blomqvist's betas

    beta_p(C) = [C(p, p) + C(p, 1-p) + C(1-p, p) + C(1-p, 1-p) - 1] / (2p),

each of which is the Pearson correlation of three-point transformed ranks.
Gini's gamma itself corresponds to the density ``8p``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .copulas import Copula, Empirical
from .distributions import (
    JUMP_EPS,
    ConcordanceInducingDistribution,
    StandardGaussian,
    Tabulated,
    ThreePoint,
    Uniform01,
    validate,
)
from .errors import DomainError, NumericalError
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, RandomSource, integrate, quadrature_nodes

__all__ = [
    "Method",
    "Estimate",
    "NuMeasure",
    "Atoms",
    "Density",
    "GINI_DENSITY",
    "Spearman",
    "Blomqvist",
    "BetaP",
    "Gini",
    "GeneralizedGini",
    "GTransformed",
    "MeasureSpec",
    "beta_p",
    "spearman_rho",
    "g_transformed_rho",
    "gini_gamma",
    "generalized_gini_gamma",
    "gaussian_gini_closed_form",
    "kappa",
    "estimate",
    "pearson_with_se",
    "PLANE_QUADRATURE",
]

RANGE_TOL = 1e-9


class Method(enum.Enum):
    CLOSED_FORM = "ClosedForm"
    QUADRATURE = "Quadrature"
    PLUG_IN = "PlugIn"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float | None = None
    n: int | None = None
    method: Method = Method.CLOSED_FORM

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v):
            raise NumericalError(f"non-finite measure value {v!r}")
        if abs(v) > 1.0 + RANGE_TOL:
            raise NumericalError(f"measure value {v!r} outside [-1, 1]")
        object.__setattr__(self, "value", min(1.0, max(-1.0, v)))

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# Mixing measures on (0, 1/2]
# ---------------------------------------------------------------------------


class NuMeasure:
    """Probability measure on (0, 1/2]."""

    def discretize(self, k: int = 64) -> "Atoms":
        raise NotImplementedError


@dataclass(frozen=True)
class Atoms(NuMeasure):
    """Finitely many atoms ``(p_k, w_k)`` with ``sum(w_k) == 1``."""

    atoms: tuple[tuple[float, float], ...]

    def __post_init__(self):
        atoms = tuple((float(p), float(w)) for p, w in self.atoms)
        if not atoms:
            raise DomainError("an atomic nu-measure needs at least one atom")
        for p, w in atoms:
            if not 0.0 < p <= 0.5:
                raise DomainError(f"atom location {p!r} outside (0, 1/2]")
            if not (w >= 0 and math.isfinite(w)):
                raise DomainError(f"atom weight {w!r} must be non-negative")
        total = sum(w for _, w in atoms)
        if abs(total - 1.0) > 1e-10:
            raise DomainError(f"atom weights must sum to 1, got {total!r}")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def point(cls, p: float) -> "Atoms":
        return cls(((p, 1.0),))

    def discretize(self, k: int = 64) -> "Atoms":
        return self


@dataclass(frozen=True, eq=False)
class Density(NuMeasure):
    """Absolutely continuous mixing measure with density ``pdf`` on (0, 1/2].

    ``breakpoints`` lists points where ``pdf`` is not smooth; quadrature
    panels are aligned with them.
    """

    pdf: Callable[[np.ndarray], np.ndarray]
    name: str = "density"
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        mass = integrate(self.pdf, 0.0, 0.5, self.quadrature, self.breakpoints)
        if abs(mass - 1.0) > 1e-10:
            raise DomainError(f"density {self.name!r} integrates to {mass!r}, not 1")
        probe = np.asarray(self.pdf(quadrature_nodes(0.0, 0.5, self.quadrature, self.breakpoints)[0]))
        if (probe < 0).any():
            raise DomainError(f"density {self.name!r} takes negative values")

    @property
    def quadrature(self) -> QuadratureSpec:
        if len(self.breakpoints) > 8:
            return QuadratureSpec(order=16, panels=1)
        return DEFAULT_QUADRATURE

    @classmethod
    def from_table(cls, nodes, values, name: str = "table", normalize: bool = True) -> "Density":
        """Piecewise-linear density through ``(nodes, values)``, zero outside the table."""
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise DomainError("density table needs at least two (p, f) rows")
        if (np.diff(nodes) <= 0).any() or nodes[0] < 0 or nodes[-1] > 0.5:
            raise DomainError("density table nodes must increase within [0, 1/2]")
        if (values < 0).any() or not np.isfinite(values).all():
            raise DomainError("density table values must be finite and non-negative")
        if normalize:
            values = values / np.trapezoid(values, nodes)

        def pdf(p, _x=nodes, _y=values):
            return np.interp(p, _x, _y, left=0.0, right=0.0)

        inner = tuple(float(t) for t in nodes if 0.0 < t < 0.5)
        return cls(pdf, name, inner)

    @cached_property
    def atoms64(self) -> Atoms:
        return self.discretize(64)

    def discretize(self, k: int = 64) -> Atoms:
        """``k`` equal-mass slices, each replaced by an atom at its conditional mean."""
        grid = np.linspace(0.0, 0.5, 4097)
        cells = [integrate(self.pdf, a, b, QuadratureSpec(8, 1), self.breakpoints) for a, b in zip(grid[:-1], grid[1:])]
        cdf = np.concatenate([[0.0], np.cumsum(cells)])
        cdf /= cdf[-1]
        targets = np.linspace(0.0, 1.0, k + 1)
        # invert the cumulative mass on the fine grid (flat stretches resolved to their left end)
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        edges = np.interp(targets, cdf[keep], grid[keep])
        edges[0], edges[-1] = 0.0, 0.5
        atoms = []
        for a, b in zip(edges[:-1], edges[1:]):
            if b <= a:
                continue
            spec = QuadratureSpec(16, 2)
            bp = [t for t in self.breakpoints if a < t < b]
            mass = integrate(self.pdf, a, b, spec, bp)
            if mass <= 0:
                continue
            first = integrate(lambda p: p * self.pdf(p), a, b, spec, bp)
            atoms.append((min(max(first / mass, a), b), mass))
        total = sum(w for _, w in atoms)
        return Atoms(tuple((p, w / total) for p, w in atoms))


def _gini_pdf(p):
    return 8.0 * np.asarray(p, dtype=float)


GINI_DENSITY = Density(_gini_pdf, "gini")


# ---------------------------------------------------------------------------
# Measure specifications
# ---------------------------------------------------------------------------


class MeasureSpec:
    label = "measure"


@dataclass(frozen=True)
class Spearman(MeasureSpec):
    label = "spearman"


@dataclass(frozen=True)
class Blomqvist(MeasureSpec):
    label = "blomqvist"


@dataclass(frozen=True)
class BetaP(MeasureSpec):
    p: float
    label = "beta_p"

    def __post_init__(self):
        if not 0.0 < self.p <= 0.5:
            raise DomainError(f"beta_p needs p in (0, 1/2], got {self.p!r}")


@dataclass(frozen=True)
class Gini(MeasureSpec):
    label = "gini"


@dataclass(frozen=True)
class GeneralizedGini(MeasureSpec):
    nu: NuMeasure
    label = "generalized_gini"


@dataclass(frozen=True)
class GTransformed(MeasureSpec):
    G: ConcordanceInducingDistribution
    label = "g_transformed"

    def __post_init__(self):
        problems = validate(self.G)
        if problems:
            raise DomainError(
                "distribution is not concordance-inducing: " + "; ".join(f"{v.condition} ({v.detail})" for v in problems)
            )


# ---------------------------------------------------------------------------
# Population values
# ---------------------------------------------------------------------------


def _check_p(p):
    if not 0.0 < p <= 0.5:
        raise DomainError(f"p must lie in (0, 1/2], got {p!r}")


def _four_point_sum(C: Copula, p) -> np.ndarray:
    """sum over the D4 images of (C - Pi) at (p, p); the Pi part sums to 1."""
    p = np.asarray(p, dtype=float)
    q = 1.0 - p
    return C.cdf(p, p) + C.cdf(p, q) + C.cdf(q, p) + C.cdf(q, q) - 1.0


def beta_p(C: Copula, p: float) -> float:
    """Generalized Blomqvist's beta; ``p = 1/2`` is Blomqvist's beta."""
    _check_p(p)
    if isinstance(C, Empirical):
        return estimate(C, BetaP(p)).value
    return float(_four_point_sum(C, p)) / (2.0 * p)


# truncation of the real line in normal-score coordinates; Phi(-9) ~ 1e-19
_HALF_WIDTH = 9.0


def _graded_unit_rule(order: int, levels: int) -> tuple[np.ndarray, np.ndarray]:
    # panel edges 0, 2^-levels, ..., 1/4, 1/2 and the mirror image on [1/2, 1]
    half = [0.0] + [0.5 * 2.0**-k for k in range(levels - 1, 0, -1)] + [0.5]
    edges = np.array(half + [1.0 - h for h in half[-2::-1]])
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    return ((lo + hi) / 2 + (hi - lo) / 2 * x).ravel(), ((hi - lo) / 2 * w).ravel()


def _hoeffding_rho(C: Copula, weight, variance: float, spec: QuadratureSpec) -> float:
    """Cov(g(U), g(V)) / Var(g(U)) through Hoeffding's identity.

    The covariance is the integral of (C - Pi)(u, v) dg(u) dg(v). It is
    evaluated in normal-score coordinates u = Phi(x), where a Gaussian copula
    is smooth up to the edges of the square; ``weight(x)`` is
    ``g'(Phi(x)) phi(x)``. Inner segments break at y = x and y = -x, the kink
    lines of comonotone and countermonotone components, and their panels
    shrink geometrically toward those lines, where a near-singular Gaussian
    copula has a narrow ridge.
    """
    L = _HALF_WIDTH
    xs, wx = quadrature_nodes(-L, L, spec, (0.0,))
    # three x-dependent segments per row: [-L, -|x|], [-|x|, |x|], [|x|, L]
    a = -np.abs(xs)
    seg_lo = np.stack([np.full_like(xs, -L), a, -a], axis=1)
    seg_hi = np.stack([a, -a, np.full_like(xs, L)], axis=1)
    t, wt = _graded_unit_rule(max(2, spec.order // 2), spec.panels // 2 + 2)
    width = seg_hi - seg_lo
    ys = seg_lo[:, :, None] + width[:, :, None] * t[None, None, :]
    wy = width[:, :, None] * wt[None, None, :] * weight(ys)
    Fx = ndtr(xs)[:, None, None]
    Fy = ndtr(ys)
    vals = C.cdf(np.broadcast_to(Fx, Fy.shape), Fy) - Fx * Fy
    total = float(np.sum((wx * weight(xs))[:, None, None] * wy * vals))
    if not math.isfinite(total):
        raise NumericalError("Hoeffding quadrature produced a non-finite value")
    return total / variance


def _normal_pdf(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


# outer rule for the plane integrals; the inner rule uses half the order
PLANE_QUADRATURE = QuadratureSpec(24, 8)


def spearman_rho(C: Copula, spec: QuadratureSpec = PLANE_QUADRATURE) -> float:
    """Spearman's rho as ``12 * integral of (C - Pi)`` over the unit square."""
    if isinstance(C, Empirical):
        return estimate(C, Spearman()).value
    return _hoeffding_rho(C, _normal_pdf, 1.0 / 12.0, spec)


def _normal_scores_rho(C: Copula, spec: QuadratureSpec) -> float:
    return _hoeffding_rho(C, np.ones_like, 1.0, spec)


def _jump_rho(C: Copula, jumps: Sequence[tuple[float, float]]) -> float:
    """Exact correlation for a step quantile with the given jumps."""
    loc = np.array([a for a, _ in jumps])
    h = np.array([b for _, b in jumps])
    U, V = np.meshgrid(loc, loc, indexing="ij")
    hh = np.outer(h, h)
    cov = float(np.sum(hh * (C.cdf(U, V) - U * V)))
    var = float(np.sum(hh * (np.minimum(U, V) - U * V)))
    if var <= 0:
        raise NumericalError("transformed variable has zero variance")
    return cov / var


def pearson_with_se(x: np.ndarray, y: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Sample Pearson correlation, its delta-method standard error and the
    per-observation influence values ``x~ y~ - r (x~^2 + y~^2) / 2``."""
    n = x.size
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(np.dot(xc, xc)) / n)
    sy = math.sqrt(float(np.dot(yc, yc)) / n)
    if sx == 0 or sy == 0 or not (math.isfinite(sx) and math.isfinite(sy)):
        raise NumericalError(
            f"transformed sample has zero or non-finite variance (sd_x={sx:.3g}, sd_y={sy:.3g}); "
            "the measure is undefined for this data"
        )
    xs = xc / sx
    ys = yc / sy
    r = float(np.dot(xs, ys)) / n
    infl = xs * ys - 0.5 * r * (xs * xs + ys * ys)
    se = float(np.std(infl)) / math.sqrt(n)
    return r, se, infl


def g_transformed_rho(
    C: Copula,
    G: ConcordanceInducingDistribution,
    n_mc: int = 100_000,
    rng: RandomSource | None = None,
    *,
    method: str = "auto",
    spec: QuadratureSpec = PLANE_QUADRATURE,
) -> Estimate:
    """Correlation of ``(G^-(U), G^-(V))`` for ``(U, V) ~ C``.

    ``method="auto"`` uses the exact route available for ``G``: the closed
    form for three-point laws, an exact finite sum over quantile jumps for
    tabulated laws, and Hoeffding-identity quadrature for the uniform and
    Gaussian laws. ``method="monte_carlo"`` samples ``n_mc`` pairs from
    ``rng`` instead and reports a standard error. Empirical copulas are
    always handled by the plug-in estimator.
    """
    problems = validate(G)
    if problems:
        raise DomainError("distribution is not concordance-inducing: " + "; ".join(v.condition for v in problems))
    if isinstance(C, Empirical):
        return estimate(C, GTransformed(G))
    if method == "monte_carlo":
        if rng is None:
            raise DomainError("Monte Carlo evaluation needs an explicit RandomSource")
        if n_mc < 1000:
            raise DomainError(f"n_mc must be >= 1000, got {n_mc}")
        uv = C.sample(n_mc, rng)
        tiny = np.finfo(float).tiny
        uv = np.clip(uv, tiny, 1.0 - np.finfo(float).epsneg)
        x = G.quantile(uv[:, 0])
        y = G.quantile(uv[:, 1])
        r, se, _ = pearson_with_se(np.asarray(x), np.asarray(y))
        return Estimate(r, se, n_mc, Method.MONTE_CARLO)
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    if isinstance(G, ThreePoint):
        return Estimate(beta_p(C, G.p), method=Method.CLOSED_FORM)
    if isinstance(G, Uniform01):
        return Estimate(spearman_rho(C, spec), method=Method.QUADRATURE)
    if isinstance(G, StandardGaussian):
        return Estimate(_normal_scores_rho(C, spec), method=Method.QUADRATURE)
    jumps = G.jumps()
    if jumps:
        return Estimate(_jump_rho(C, jumps), method=Method.CLOSED_FORM)
    if rng is None:
        raise DomainError(f"no exact route for {type(G).__name__}; pass rng for Monte Carlo")
    return g_transformed_rho(C, G, n_mc, rng, method="monte_carlo")


def gini_gamma(C: Copula, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Gini's gamma ``4 int C(u,u) du + 4 int C(u,1-u) du - 2``."""
    if isinstance(C, Empirical):
        return estimate(C, Gini()).value
    diag = integrate(lambda u: C.cdf(u, u), 0.0, 1.0, spec, (0.5,))
    anti = integrate(lambda u: C.cdf(u, 1.0 - u), 0.0, 1.0, spec, (0.5,))
    return 4.0 * diag + 4.0 * anti - 2.0


def generalized_gini_gamma(C: Copula, nu: NuMeasure, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """``nu``-mixture of generalized Blomqvist's betas."""
    if isinstance(C, Empirical):
        return estimate(C, GeneralizedGini(nu)).value
    if isinstance(nu, Atoms):
        return float(sum(w * beta_p(C, p) for p, w in nu.atoms))
    if isinstance(nu, Density):
        # beta_p is not smooth at p = 0 under tail dependence: grade the panels there
        graded = {0.5 * 2.0**-k for k in range(1, 13)}
        cuts = tuple(sorted(graded | set(nu.breakpoints)))
        quad = QuadratureSpec(max(2, spec.order // 2), 1)
        # beta_p(C) f(p) with beta_p's 1/(2p) kept inside; GL nodes never touch p = 0
        return integrate(lambda p: _four_point_sum(C, p) / (2.0 * p) * nu.pdf(p), 0.0, 0.5, quad, cuts)
    raise DomainError(f"unsupported nu-measure {nu!r}")


def gaussian_gini_closed_form(rho: float) -> float:
    """Gini's gamma of the Gaussian copula with correlation ``rho``."""
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [-1, 1], got {rho!r}")
    root = math.sqrt((1 + rho) * (3 + rho)) - math.sqrt((1 - rho) * (3 - rho))
    return 4.0 / math.pi * math.asin(max(-1.0, min(1.0, root / 4.0)))


def kappa(
    C: Copula,
    spec: MeasureSpec,
    quad: QuadratureSpec | None = None,
    n_mc: int = 100_000,
    rng: RandomSource | None = None,
) -> float:
    """Population value of ``spec`` at copula ``C`` (plug-in for empirical copulas).

    ``quad`` overrides the default rule of the underlying routine: the
    line-integral rule for Gini-type measures, the outer plane rule for
    Spearman and normal-scores correlations.
    """
    if isinstance(C, Empirical):
        return estimate(C, spec).value
    plane = quad or PLANE_QUADRATURE
    quad = quad or DEFAULT_QUADRATURE
    if isinstance(spec, Spearman):
        value = spearman_rho(C, plane)
    elif isinstance(spec, Blomqvist):
        value = beta_p(C, 0.5)
    elif isinstance(spec, BetaP):
        value = beta_p(C, spec.p)
    elif isinstance(spec, Gini):
        value = gini_gamma(C, quad)
    elif isinstance(spec, GeneralizedGini):
        value = generalized_gini_gamma(C, spec.nu, quad)
    elif isinstance(spec, GTransformed):
        value = g_transformed_rho(C, spec.G, n_mc, rng, spec=plane).value
    else:
        raise DomainError(f"unknown measure specification {spec!r}")
    return Estimate(value).value


# ---------------------------------------------------------------------------
# Sample estimators
# ---------------------------------------------------------------------------


def _components(spec: MeasureSpec) -> list[tuple[float, ConcordanceInducingDistribution]]:
    if isinstance(spec, Spearman):
        return [(1.0, Uniform01())]
    if isinstance(spec, Blomqvist):
        return [(1.0, ThreePoint(0.5))]
    if isinstance(spec, BetaP):
        return [(1.0, ThreePoint(spec.p))]
    if isinstance(spec, GTransformed):
        return [(1.0, spec.G)]
    if isinstance(spec, Gini):
        return _components(GeneralizedGini(GINI_DENSITY))
    if isinstance(spec, GeneralizedGini):
        atoms = _discretized(spec.nu)
        return [(w, ThreePoint(p)) for p, w in atoms.atoms if w > 0]
    raise DomainError(f"unknown measure specification {spec!r}")


def _discretized(nu: NuMeasure) -> Atoms:
    if isinstance(nu, Density):
        return nu.atoms64
    return nu.discretize(64)


def _step_cells(jump_locs: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Cell index of each ``t``: ``2j`` strictly between the j-th and
    (j+1)-th jump, ``2j + 1`` at the (j+1)-th jump itself."""
    below = np.searchsorted(jump_locs - JUMP_EPS, t, side="right")
    past = np.searchsorted(jump_locs + JUMP_EPS, t, side="left")
    return below + past


def _step_estimate(u, v, comps) -> tuple[float, float] | None:
    """Plug-in value and standard error when every component quantile is a
    step function. Transformed values then depend only on the cell between
    jumps, so all components share one 2-D histogram of cell pairs."""
    locs = np.unique(np.concatenate([[loc for loc, _ in G.jumps()] for _, G in comps]))
    if locs.size > 1 and np.diff(locs).min() <= 4 * JUMP_EPS:
        return None
    n = u.size
    edges = np.concatenate([[0.0], locs, [1.0]])
    B = 2 * locs.size + 1
    rep = np.empty(B)
    rep[0::2] = 0.5 * (edges[:-1] + edges[1:])
    rep[1::2] = locs
    cu = _step_cells(locs, u)
    cv = _step_cells(locs, v)
    H = np.bincount(cu * B + cv, minlength=B * B).reshape(B, B).astype(float)
    hu, hv = H.sum(axis=1), H.sum(axis=0)
    value = 0.0
    F = np.zeros((B, B))
    for w, G in comps:
        t = np.asarray(G.quantile_mid(rep), dtype=float)
        xc = t - hu @ t / n
        yc = t - hv @ t / n
        sx = math.sqrt(hu @ (xc * xc) / n)
        sy = math.sqrt(hv @ (yc * yc) / n)
        if sx == 0 or sy == 0:
            raise NumericalError(
                f"{G.name} component: transformed sample has zero variance (sd_x={sx:.3g}, sd_y={sy:.3g}); "
                "the measure is undefined for this data"
            )
        xs, ys = xc / sx, yc / sy
        r = float(xs @ H @ ys) / n
        value += w * r
        F += w * (np.outer(xs, ys) - 0.5 * r * (xs[:, None] ** 2 + ys[None, :] ** 2))
    mean = float(np.sum(H * F)) / n
    var = float(np.sum(H * (F - mean) ** 2)) / n
    return value, math.sqrt(max(var, 0.0) / n)


def estimate(data: Empirical, spec: MeasureSpec) -> Estimate:
    """Plug-in estimate from pseudo-observations.

    Each G-transformed component is the sample Pearson correlation of the
    transformed pseudo-observations; Gini-type measures average
    three-point components with their mixing weights (densities are
    discretised into 64 equal-mass atoms). The standard error is the
    delta-method standard deviation of the averaged influence values.
    """
    if not isinstance(data, Empirical):
        raise DomainError("estimate expects an Empirical copula; use pseudo_observations(data)")
    n = data.n
    if n < 10:
        raise DomainError(f"estimation needs at least 10 observations, got {n}")
    u, v = data.u, data.v
    comps = _components(spec)
    if all(G.jumps() for _, G in comps):
        binned = _step_estimate(u, v, comps)
        if binned is not None:
            return Estimate(binned[0], binned[1], n, Method.PLUG_IN)
    value = 0.0
    infl = np.zeros(n)
    for w, G in comps:
        x = np.asarray(G.quantile_mid(u), dtype=float)
        y = np.asarray(G.quantile_mid(v), dtype=float)
        try:
            r, _, ifl = pearson_with_se(x, y)
        except NumericalError as exc:
            raise NumericalError(f"{G.name} component: {exc}") from None
        value += w * r
        infl += w * ifl
    se = float(np.std(infl)) / math.sqrt(n)
    return Estimate(value, se, n, Method.PLUG_IN)
