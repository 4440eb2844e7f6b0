"""Concordance-inducing distributions and the transform-pair check.

A distribution is represented by its quantile function (generalized
inverse). Discrete variants also expose their jumps, which lets the
concordance module evaluate transformed rank correlations exactly.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import ndtri

from .errors import DomainError
from .numerics import QuadratureSpec, integrate

__all__ = [
    "ConcordanceInducingDistribution",
    "Uniform01",
    "StandardGaussian",
    "ThreePoint",
    "Tabulated",
    "quantile",
    "Violation",
    "validate",
    "TransformPair",
    "Verdict",
    "TransformVerdict",
    "check_transform_pair",
    "load_table",
    "wrapping_function",
]

# half-width of the band around a jump treated as "at the jump"
JUMP_EPS = 1e-12


def _unit(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.isnan(u).any() or (u < 0).any() or (u > 1).any():
        raise DomainError("quantile argument must lie in [0, 1]")
    return u


class ConcordanceInducingDistribution:
    """Base class: a distribution given through its quantile function."""

    name: str = "distribution"

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        raise NotImplementedError

    def _quantile(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def quantile(self, u):
        """Generalized inverse ``inf{x : G(x) >= u}`` (vectorised)."""
        u = _unit(u)
        out = self._quantile(u)
        return float(out) if u.ndim == 0 else out

    def jumps(self) -> list[tuple[float, float]] | None:
        """``(location, height)`` of each quantile jump, or ``None`` when the
        quantile is continuous."""
        return None

    def quantile_mid(self, u) -> np.ndarray:
        """Quantile with jumps replaced by the midpoint of the two one-sided
        limits. Used by rank estimators so that ``u -> 1 - u`` negates the
        centred transform exactly."""
        u = _unit(u)
        out = np.asarray(self._quantile(u), dtype=float)
        jumps = self.jumps()
        if jumps:
            for loc, height in jumps:
                at = np.abs(u - loc) <= JUMP_EPS
                if at.any():
                    left = self._quantile(np.full(1, loc))[0]
                    out = np.where(at, left + 0.5 * height, out)
        return out


@dataclass(frozen=True)
class Uniform01(ConcordanceInducingDistribution):
    """Standard uniform; induces Spearman's rho."""

    name = "uniform"

    @property
    def mean(self):
        return 0.5

    @property
    def variance(self):
        return 1.0 / 12.0

    def _quantile(self, u):
        return u.astype(float)


@dataclass(frozen=True)
class StandardGaussian(ConcordanceInducingDistribution):
    """Standard normal; induces the normal-scores (van der Waerden) correlation."""

    name = "gaussian"

    @property
    def mean(self):
        return 0.0

    @property
    def variance(self):
        return 1.0

    def _quantile(self, u):
        return ndtri(u)


@dataclass(frozen=True)
class ThreePoint(ConcordanceInducingDistribution):
    """Mass ``p`` at -1 and +1 and ``1 - 2p`` at 0, for ``0 < p <= 1/2``.

    ``p = 1/2`` is the symmetric Bernoulli law on {-1, +1}, which induces
    Blomqvist's beta.
    """

    p: float
    name = "threepoint"

    def __post_init__(self):
        if not 0.0 < self.p <= 0.5:
            raise DomainError(f"three-point parameter must lie in (0, 1/2], got {self.p!r}")
        object.__setattr__(self, "p", float(self.p))

    @property
    def mean(self):
        return 0.0

    @property
    def variance(self):
        return 2.0 * self.p

    def _quantile(self, u):
        p = self.p
        return np.where(u <= p, -1.0, np.where(u <= 1.0 - p, 0.0, 1.0))

    def jumps(self):
        if self.p == 0.5:
            return [(0.5, 2.0)]
        return [(self.p, 1.0), (1.0 - self.p, 1.0)]


def _cell_edges(nodes: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], 0.5 * (nodes[1:] + nodes[:-1]), [1.0]])


@dataclass(frozen=True, eq=False)
class Tabulated(ConcordanceInducingDistribution):
    """Quantile function tabulated at probability nodes.

    Between nodes the function is a left-continuous step that takes the
    value of the nearest node; jumps sit at the midpoints between
    consecutive nodes. Each node therefore owns the cell of probabilities
    closer to it than to any other node, and moments are exact sums over
    those cells.
    """

    nodes: np.ndarray
    values: np.ndarray
    name = "tabulated"

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).ravel()
        values = np.array(self.values, dtype=float).ravel()
        if nodes.shape != values.shape or nodes.size < 1:
            raise DomainError("tabulated nodes and values must be non-empty and of equal length")
        if not (np.isfinite(nodes).all() and np.isfinite(values).all()):
            raise DomainError("tabulated nodes and values must be finite")
        if (nodes < 0).any() or (nodes > 1).any() or (np.diff(nodes) <= 0).any():
            raise DomainError("tabulated probability nodes must be strictly increasing in [0, 1]")
        if (np.diff(values) < 0).any():
            raise DomainError("tabulated quantile values must be nondecreasing")
        for a in (nodes, values):
            a.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = object.__hash__

    @property
    def cell_weights(self) -> np.ndarray:
        return np.diff(_cell_edges(self.nodes))

    @property
    def mean(self):
        return float(np.dot(self.cell_weights, self.values))

    @property
    def variance(self):
        w = self.cell_weights
        return float(np.dot(w, (self.values - self.mean) ** 2))

    def _quantile(self, u):
        edges = _cell_edges(self.nodes)
        idx = np.searchsorted(edges[1:-1], u, side="left")
        return self.values[idx]

    def jumps(self):
        edges = _cell_edges(self.nodes)[1:-1]
        heights = np.diff(self.values)
        return [(float(e), float(h)) for e, h in zip(edges, heights) if h > 0]


def quantile(G: ConcordanceInducingDistribution, u):
    """Functional spelling of ``G.quantile(u)``."""
    return G.quantile(u)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


class Violation(NamedTuple):
    condition: str  # "nondegenerate" | "symmetric" | "finite second moment"
    detail: str


def _probe_grid(G, n: int = 4096) -> np.ndarray:
    u = (np.arange(n) + 0.5) / n
    jumps = G.jumps() or []
    for loc, _ in jumps:
        u = u[(np.abs(u - loc) > 1e-9) & (np.abs(1.0 - u - loc) > 1e-9)]
    return u


def validate(G: ConcordanceInducingDistribution, sym_tol: float = 1e-9) -> list[Violation]:
    """Check membership in the class of concordance-inducing distributions.

    Returns an empty list when ``G`` is nondegenerate, symmetric and has a
    finite second moment; otherwise one :class:`Violation` per failed
    condition.
    """
    problems: list[Violation] = []
    u = _probe_grid(G)
    if isinstance(G, Tabulated):
        u = np.union1d(u, G.nodes[(G.nodes > 0) & (G.nodes < 1)])
        for loc, _ in G.jumps():
            u = u[(np.abs(u - loc) > 1e-9) & (np.abs(1.0 - u - loc) > 1e-9)]
    q = np.asarray(G._quantile(u), dtype=float)

    second = integrate(lambda t: np.asarray(G._quantile(t), dtype=float) ** 2, 0.0, 1.0, QuadratureSpec(32, 16))
    if not math.isfinite(second) or not math.isfinite(G.variance):
        problems.append(Violation("finite second moment", "quantile is not square integrable"))

    spread = float(np.max(q) - np.min(q)) if q.size else 0.0
    if not (G.variance > 0) or spread == 0.0:
        problems.append(Violation("nondegenerate", "quantile function is constant on (0, 1)"))

    mean = G.mean
    scale = max(1.0, math.sqrt(G.variance)) if math.isfinite(G.variance) else 1.0
    resid = q + np.asarray(G._quantile(1.0 - u), dtype=float) - 2.0 * mean
    finite = np.isfinite(resid)
    if finite.any():
        worst = int(np.argmax(np.where(finite, np.abs(resid), -1.0)))
        if abs(resid[worst]) > sym_tol * scale:
            problems.append(
                Violation(
                    "symmetric",
                    f"G^-({u[worst]:.6g}) + G^-({1 - u[worst]:.6g}) - 2*mean = {resid[worst]:.3g}",
                )
            )
    return problems


# ---------------------------------------------------------------------------
# Transform pairs
# ---------------------------------------------------------------------------


def load_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``probability,value`` CSV (an optional header row is skipped)."""
    nodes, values = [], []
    with open(Path(path), newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DomainError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                a, b = float(row[0]), float(row[1])
            except ValueError:
                if lineno == 1 and not nodes:
                    continue
                raise DomainError(f"{path}:{lineno}: non-numeric entry {row!r}") from None
            nodes.append(a)
            values.append(b)
    if not nodes:
        raise DomainError(f"{path}: no data rows")
    return np.array(nodes), np.array(values)


@dataclass(frozen=True, eq=False)
class TransformPair:
    """Two functions on (0, 1) tabulated on a common strictly increasing grid."""

    grid: np.ndarray
    g1: np.ndarray
    g2: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float).ravel()
        g1 = np.array(self.g1, dtype=float).ravel()
        g2 = np.array(self.g2, dtype=float).ravel()
        if not (grid.shape == g1.shape == g2.shape):
            raise DomainError("grid, g1 and g2 must have equal length")
        if grid.size < 3:
            raise DomainError(f"need at least 3 interior grid points, got {grid.size}")
        if (grid <= 0).any() or (grid >= 1).any() or (np.diff(grid) <= 0).any():
            raise DomainError("grid must be strictly increasing inside (0, 1)")
        if not (np.isfinite(g1).all() and np.isfinite(g2).all()):
            raise DomainError("tabulated values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "g1", g1)
        object.__setattr__(self, "g2", g2)

    @classmethod
    def from_functions(cls, g1, g2, grid) -> "TransformPair":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, g1(grid), g2(grid))

    @classmethod
    def from_csv(cls, path1, path2) -> "TransformPair":
        n1, v1 = load_table(path1)
        n2, v2 = load_table(path2)
        if n1.shape != n2.shape or not np.allclose(n1, n2, rtol=0, atol=1e-15):
            raise DomainError("the two tables must share the same probability grid")
        return cls(n1, v1, v2)


class Verdict(enum.Enum):
    IS_MEASURE_OF_CONCORDANCE = "IsMeasureOfConcordance"
    NOT_MONOTONE = "NotMonotone"
    DISTRIBUTIONS_DIFFER = "DistributionsDiffer"
    NOT_SYMMETRIC = "NotSymmetric"


@dataclass(frozen=True)
class TransformVerdict:
    verdict: Verdict
    distribution: ConcordanceInducingDistribution | None = None
    detail: str = ""
    flipped: bool = field(default=False)

    @property
    def ok(self) -> bool:
        return self.verdict is Verdict.IS_MEASURE_OF_CONCORDANCE


def _standardize(values, weights):
    mean = np.dot(weights, values)
    sd = math.sqrt(max(np.dot(weights, (values - mean) ** 2), 0.0))
    return (values - mean) / sd if sd > 0 else None


def _monotone(d: np.ndarray, scale: float) -> tuple[bool, bool]:
    tol = 1e-12 * max(1.0, scale)
    return bool((d >= -tol).all()), bool((d <= tol).all())


def check_transform_pair(t: TransformPair, tol: float = 1e-6) -> TransformVerdict:
    """Decide whether ``C -> corr(g1(U), g2(V))`` is a measure of concordance.

    The checks run in order: joint monotonicity, equality of the two
    induced distributions up to location and scale (max deviation of the
    standardised tables <= ``tol``), then symmetry of the common standardised
    quantile. On success the verdict carries the inducing distribution,
    identified with a built-in variant where possible.
    """
    g1, g2, grid = t.g1, t.g2, t.grid
    scale = float(max(np.ptp(g1), np.ptp(g2)))
    up1, down1 = _monotone(np.diff(g1), scale)
    up2, down2 = _monotone(np.diff(g2), scale)
    flipped = False
    if not (up1 and up2):
        if down1 and down2:
            g1, g2, flipped = -g1, -g2, True
        else:
            which = "g1" if not (up1 or down1) else "g2" if not (up2 or down2) else "g1 and g2"
            why = "is not monotone" if which != "g1 and g2" else "are monotone in opposite directions"
            return TransformVerdict(Verdict.NOT_MONOTONE, detail=f"{which} {why}")

    weights = np.diff(_cell_edges(grid))
    z1 = _standardize(g1, weights)
    z2 = _standardize(g2, weights)
    if z1 is None or z2 is None:
        return TransformVerdict(Verdict.DISTRIBUTIONS_DIFFER, detail="a transform is constant (degenerate)", flipped=flipped)
    dev = float(np.max(np.abs(z1 - z2)))
    if dev > tol:
        return TransformVerdict(
            Verdict.DISTRIBUTIONS_DIFFER,
            detail=f"standardised tables differ by up to {dev:.3g}",
            flipped=flipped,
        )

    common = Tabulated(grid, z1)
    reflected = common._quantile(1.0 - grid)
    asym = float(np.max(np.abs(z1 + reflected)))
    if asym > tol:
        return TransformVerdict(
            Verdict.NOT_SYMMETRIC,
            detail=f"standardised quantile violates symmetry by {asym:.3g}",
            flipped=flipped,
        )
    G = _identify(grid, z1, weights, tol) or Tabulated(grid, g1)
    return TransformVerdict(Verdict.IS_MEASURE_OF_CONCORDANCE, G, flipped=flipped)


def _identify(grid, z, weights, tol):
    candidates: list[ConcordanceInducingDistribution] = [Uniform01(), StandardGaussian()]
    levels = np.unique(z)
    if levels.size in (2, 3):
        p = float(weights[z == levels[0]].sum())
        if 0 < p <= 0.5 + 1e-12:
            candidates.append(ThreePoint(min(p, 0.5)))
    for G in candidates:
        ref = _standardize(np.asarray(G._quantile(grid), dtype=float), weights)
        if ref is not None and np.max(np.abs(ref - z)) <= tol:
            return G
    return None


def wrapping_function(z, b: float = 1.5, c: float = 4.0, q1: float = 1.540793, q2: float = 0.8622731):
    """Bounded, redescending wrapping transform of a standardised variable.

    Identity on ``|z| <= b``, a hyperbolic-tangent descent to 0 on
    ``b < |z| <= c`` and 0 beyond ``c``. The default constants make the
    function continuous at ``b``.
    """
    z = np.asarray(z, dtype=float)
    a = np.abs(z)
    mid = q1 * np.tanh(q2 * (c - a)) * np.sign(z)
    return np.where(a <= b, z, np.where(a <= c, mid, 0.0))
