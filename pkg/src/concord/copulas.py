"""Bivariate copulas: evaluation, sampling and rank-based pseudo-observations.

Every copula is an immutable value. ``cdf`` is vectorised over ``u`` and
``v``; ``sample`` draws from an explicit :class:`~concord.numerics.RandomSource`
so that repeated calls with the same source give identical draws.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from .errors import DomainError
from .numerics import RandomSource, bivariate_normal_cdf

__all__ = [
    "Copula",
    "Independence",
    "Comonotone",
    "Countermonotone",
    "Gaussian",
    "ConvexMixture",
    "Empirical",
    "evaluate",
    "pseudo_observations",
    "rank_transform",
    "BVector",
    "enumerate_bvectors",
    "witness_component_sample",
]


def _unit_args(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    for name, a in (("u", u), ("v", v)):
        if np.isnan(a).any() or (a < 0).any() or (a > 1).any():
            raise DomainError(f"copula argument {name} must lie in [0, 1]")
    return np.broadcast_arrays(u, v)


def _as_output(values, like):
    values = np.asarray(values, dtype=float)
    return float(values) if like.ndim == 0 else values


class Copula:
    """Base class. Subclasses implement ``_cdf`` and ``sample``."""

    def cdf(self, u, v):
        """Evaluate the copula at ``(u, v)``; arguments must lie in [0, 1]."""
        u, v = _unit_args(u, v)
        return _as_output(self._cdf(u, v), u)

    __call__ = cdf

    def _cdf(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, n: int, rng: RandomSource) -> np.ndarray:
        """Draw ``n`` independent pairs, returned as an ``(n, 2)`` array."""
        raise NotImplementedError


def evaluate(C: Copula, u, v):
    """Functional spelling of ``C.cdf(u, v)``."""
    return C.cdf(u, v)


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class Independence(Copula):
    def _cdf(self, u, v):
        return u * v

    def sample(self, n, rng):
        return rng.generator().random((_check_n(n), 2))


@dataclass(frozen=True)
class Comonotone(Copula):
    def _cdf(self, u, v):
        return np.minimum(u, v)

    def sample(self, n, rng):
        u = rng.generator().random(_check_n(n))
        return np.column_stack([u, u])


@dataclass(frozen=True)
class Countermonotone(Copula):
    def _cdf(self, u, v):
        return np.maximum(u + v - 1.0, 0.0)

    def sample(self, n, rng):
        u = rng.generator().random(_check_n(n))
        return np.column_stack([u, 1.0 - u])


@dataclass(frozen=True)
class Gaussian(Copula):
    """Gaussian copula with correlation parameter ``rho``."""

    rho: float

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"Gaussian copula needs rho in [-1, 1], got {self.rho!r}")
        object.__setattr__(self, "rho", float(self.rho))

    def _cdf(self, u, v):
        if self.rho == 1.0:
            return np.minimum(u, v)
        if self.rho == -1.0:
            return np.maximum(u + v - 1.0, 0.0)
        out = np.where(u == 1.0, v, np.where(v == 1.0, u, 0.0))
        inner = (u > 0) & (u < 1) & (v > 0) & (v < 1)
        if inner.any():
            out = np.array(out, dtype=float)
            out[inner] = bivariate_normal_cdf(ndtri(u[inner]), ndtri(v[inner]), self.rho)
        return out

    def sample(self, n, rng):
        n = _check_n(n)
        z = rng.generator().standard_normal((n, 2))
        x = z[:, 0]
        y = self.rho * x + np.sqrt(1.0 - self.rho**2) * z[:, 1]
        if self.rho == 1.0:
            y = x
        elif self.rho == -1.0:
            y = -x
        return np.column_stack([ndtr(x), ndtr(y)])


@dataclass(frozen=True)
class ConvexMixture(Copula):
    """Finite convex combination ``sum_i w_i C_i``.

    ``components`` is a sequence of ``(weight, copula)`` pairs; weights must
    be non-negative and sum to one within 1e-12.
    """

    components: tuple[tuple[float, Copula], ...]

    def __post_init__(self):
        comps = tuple((float(w), c) for w, c in self.components)
        if not comps:
            raise DomainError("a mixture needs at least one component")
        weights = np.array([w for w, _ in comps])
        if (weights < 0).any() or not np.isfinite(weights).all():
            raise DomainError("mixture weights must be non-negative and finite")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise DomainError(f"mixture weights must sum to 1, got {weights.sum()!r}")
        for _, c in comps:
            if not isinstance(c, Copula):
                raise DomainError(f"mixture component {c!r} is not a copula")
        object.__setattr__(self, "components", comps)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    def _cdf(self, u, v):
        return sum(w * c._cdf(u, v) for w, c in self.components)

    def sample(self, n, rng):
        n = _check_n(n)
        label = rng.child(0).generator().choice(len(self.components), size=n, p=self.weights / self.weights.sum())
        out = np.empty((n, 2))
        for i, (_, comp) in enumerate(self.components):
            idx = np.flatnonzero(label == i)
            if idx.size:
                out[idx] = comp.sample(idx.size, rng.child(i + 1))
        return out


@dataclass(frozen=True, eq=False)
class Empirical(Copula):
    """Point cloud of pseudo-observations strictly inside the unit square.

    ``cdf`` is the empirical distribution function of the points; it is not
    an exact copula (its margins are step functions). Concordance measures
    of an empirical copula are estimated from the points directly, see
    :func:`concord.measures.estimate`.
    """

    pseudo_obs: np.ndarray

    def __post_init__(self):
        pts = np.array(self.pseudo_obs, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise DomainError(f"pseudo-observations must be an (n, 2) array, got shape {pts.shape}")
        if not ((pts > 0) & (pts < 1)).all():
            raise DomainError("pseudo-observations must lie strictly inside the open unit square")
        pts.setflags(write=False)
        object.__setattr__(self, "pseudo_obs", pts)

    @property
    def n(self) -> int:
        return self.pseudo_obs.shape[0]

    @property
    def u(self) -> np.ndarray:
        return self.pseudo_obs[:, 0]

    @property
    def v(self) -> np.ndarray:
        return self.pseudo_obs[:, 1]

    def swapped(self) -> "Empirical":
        return Empirical(self.pseudo_obs[:, ::-1])

    def reflected(self) -> "Empirical":
        """Points under ``(u, v) -> (u, 1 - v)``."""
        return Empirical(np.column_stack([self.u, 1.0 - self.v]))

    def _cdf(self, u, v):
        shape = u.shape
        uf, vf = u.ravel(), v.ravel()
        out = np.empty(uf.size)
        step = max(1, 2_000_000 // max(self.n, 1))
        for s in range(0, uf.size, step):
            below = (self.u[None, :] <= uf[s : s + step, None]) & (self.v[None, :] <= vf[s : s + step, None])
            out[s : s + step] = below.mean(axis=1)
        return out.reshape(shape)

    def sample(self, n, rng):
        idx = rng.generator().integers(0, self.n, size=_check_n(n))
        return self.pseudo_obs[idx]


def rank_transform(data) -> np.ndarray:
    """Column-wise ``rank / (n + 1)`` with average ranks for ties."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise DomainError(f"data must be two-dimensional, got shape {X.shape}")
    n = X.shape[0]
    if n < 2:
        raise DomainError(f"need at least 2 observations, got {n}")
    if not np.isfinite(X).all():
        raise DomainError("data contain non-finite values")
    return rankdata(X, axis=0, method="average") / (n + 1.0)


def pseudo_observations(data) -> Empirical:
    """Rank-transform bivariate data into an :class:`Empirical` copula."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[1] != 2:
        raise DomainError(f"bivariate data must have shape (n, 2), got {X.shape}")
    return Empirical(rank_transform(X))


# ---------------------------------------------------------------------------
# Witness constructions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BVector:
    """Binary vector with first entry 1, indexing a sign-matrix vertex."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 2:
            raise DomainError("a b-vector needs length >= 2")
        if any(b not in (0, 1) for b in bits):
            raise DomainError(f"b-vector entries must be 0 or 1, got {self.bits!r}")
        if bits[0] != 1:
            raise DomainError("b-vectors are canonicalised with first entry 1")
        object.__setattr__(self, "bits", bits)

    @property
    def d(self) -> int:
        return len(self.bits)

    @property
    def signs(self) -> np.ndarray:
        return 2.0 * np.array(self.bits, dtype=float) - 1.0

    def matrix(self) -> np.ndarray:
        """The vertex ``(2b - 1)(2b - 1)^T``."""
        s = self.signs
        return np.outer(s, s)

    def __str__(self):
        return "".join(map(str, self.bits))


def enumerate_bvectors(d: int) -> list[BVector]:
    """All ``2**(d-1)`` canonical b-vectors of length ``d``, in lexicographic order."""
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d!r}")
    return [BVector((1, *rest)) for rest in itertools.product((1, 0), repeat=int(d) - 1)]


def witness_component_sample(b: BVector | Sequence[int], n: int, rng: RandomSource) -> np.ndarray:
    """Draw rows ``U b + (1 - U)(1 - b)`` with ``U`` standard uniform."""
    if not isinstance(b, BVector):
        b = BVector(tuple(b))
    bits = np.array(b.bits, dtype=float)
    U = rng.generator().random(_check_n(n))[:, None]
    return U * bits + (1.0 - U) * (1.0 - bits)
