"""Compatibility of pairwise concordance matrices.

A kappa-matrix of a degree-one measure is certainly attainable when it lies
in the cut polytope (convex hull of the sign matrices ``(2b-1)(2b-1)^T``),
and for generalized Gini's gammas it is certainly unattainable when it
leaves the elliptope of correlation matrices. Between the two sets the
bounds do not decide.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .copulas import BVector, Empirical, enumerate_bvectors, rank_transform, witness_component_sample
from .errors import CapacityError, DomainError
from .measures import MeasureSpec, estimate
from .numerics import Infeasible, LpFeasibilityProblem, RandomSource, min_eigenvalue, solve_feasibility

__all__ = [
    "KappaMatrix",
    "equicorrelation",
    "Status",
    "ElliptopeVerdict",
    "CutPolytopeVerdict",
    "GammaClass",
    "CompatibilityVerdict",
    "in_elliptope",
    "in_cut_polytope",
    "classify_gamma_matrix",
    "MatrixEstimate",
    "estimate_matrix",
    "witness_sample",
    "witness_matrix_roundtrip",
    "certificate_matrix",
    "equicorrelation_thresholds",
    "MAX_CUT_DIMENSION",
]

DEFAULT_TOL = 1e-9
MAX_CUT_DIMENSION = 16

INDETERMINATE_NOTE = (
    "the matrix is a correlation matrix outside the cut polytope; the two bounds do not "
    "decide attainability here and the compatible set is in general strictly larger than "
    "the cut polytope, so this is not evidence of incompatibility"
)


@dataclass(frozen=True, eq=False)
class KappaMatrix:
    """Symmetric matrix with unit diagonal and off-diagonal entries in [-1, 1]."""

    entries: np.ndarray

    def __post_init__(self):
        P = np.array(self.entries, dtype=float)
        problems = []
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise DomainError(f"kappa-matrix must be square with d >= 2, got shape {P.shape}")
        if not np.isfinite(P).all():
            raise DomainError("kappa-matrix has non-finite entries")
        if np.max(np.abs(P - P.T)) > 1e-12:
            problems.append("symmetric within 1e-12")
        if np.max(np.abs(np.diag(P) - 1.0)) > 1e-12:
            problems.append("unit diagonal within 1e-12")
        if (np.abs(P) > 1.0 + 1e-12).any():
            problems.append("off-diagonal entries in [-1, 1]")
        if problems:
            raise DomainError("kappa-matrix invariant violated: " + ", ".join(problems))
        # rounding slack from weighted sums of sign matrices is clipped away
        P = np.clip(0.5 * (P + P.T), -1.0, 1.0)
        np.fill_diagonal(P, 1.0)
        P.setflags(write=False)
        object.__setattr__(self, "entries", P)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    def upper(self) -> np.ndarray:
        return self.entries[np.triu_indices(self.d, 1)]

    def permuted(self, perm) -> "KappaMatrix":
        perm = np.asarray(perm)
        return KappaMatrix(self.entries[np.ix_(perm, perm)])

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


def equicorrelation(d: int, rho: float) -> KappaMatrix:
    P = np.full((d, d), float(rho))
    np.fill_diagonal(P, 1.0)
    return KappaMatrix(P)


class Status(enum.Enum):
    MEMBER = "Member"
    NON_MEMBER = "NonMember"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class ElliptopeVerdict:
    status: Status
    min_eigenvalue: float


@dataclass(frozen=True)
class CutPolytopeVerdict:
    status: Status
    certificate: dict[BVector, float] | None = None
    residual: float = 0.0

    def reconstruct(self) -> np.ndarray | None:
        """The matrix ``sum_b w_b P^(b)`` of the certificate."""
        if not self.certificate:
            return None
        return sum(w * b.matrix() for b, w in self.certificate.items())


class GammaClass(enum.Enum):
    COMPATIBLE = "Compatible"
    INCOMPATIBLE = "Incompatible"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class CompatibilityVerdict:
    elliptope: ElliptopeVerdict
    cut_polytope: CutPolytopeVerdict
    gamma_class: GammaClass
    note: str = field(default="")


def _as_kappa(P) -> KappaMatrix:
    return P if isinstance(P, KappaMatrix) else KappaMatrix(P)


def in_elliptope(P, tol: float = DEFAULT_TOL) -> ElliptopeVerdict:
    """Positive semidefiniteness test with a boundary band of width ``tol``."""
    P = _as_kappa(P)
    lam = min_eigenvalue(P.entries)
    if abs(lam) < tol:
        status = Status.BOUNDARY
    elif lam >= tol:
        status = Status.MEMBER
    else:
        status = Status.NON_MEMBER
    return ElliptopeVerdict(status, lam)


def _cut_problem(P: KappaMatrix) -> tuple[LpFeasibilityProblem, list[BVector]]:
    bvs = enumerate_bvectors(P.d)
    iu = np.triu_indices(P.d, 1)
    columns = np.column_stack([b.matrix()[iu] for b in bvs])
    return LpFeasibilityProblem(columns, P.upper()), bvs


def in_cut_polytope(P, tol: float = DEFAULT_TOL) -> CutPolytopeVerdict:
    """Membership in the cut polytope via a convex-combination LP.

    ``Member`` carries weights over b-vectors whose combination reproduces
    the upper triangle of ``P`` within ``tol``; ``Boundary`` means the
    smallest attainable L1 violation lies in ``(tol, 10 tol]``.
    """
    P = _as_kappa(P)
    if P.d > MAX_CUT_DIMENSION:
        raise CapacityError(f"cut-polytope test supports d <= {MAX_CUT_DIMENSION}, got d = {P.d}")
    problem, bvs = _cut_problem(P)
    w = solve_feasibility(problem, tol)
    if isinstance(w, Infeasible):
        status = Status.BOUNDARY if w.residual <= 10 * tol else Status.NON_MEMBER
        return CutPolytopeVerdict(status, None, float(w.residual))
    cert = {b: float(x) for b, x in zip(bvs, w) if x > tol * 1e-3}
    residual = float(np.max(np.abs(problem.columns @ w - problem.rhs)))
    return CutPolytopeVerdict(Status.MEMBER, cert, residual)


def classify_gamma_matrix(P, tol: float = DEFAULT_TOL) -> CompatibilityVerdict:
    """Sandwich classification for generalized Gini's gamma matrices."""
    P = _as_kappa(P)
    ell = in_elliptope(P, tol)
    cut = in_cut_polytope(P, tol)
    if cut.status is Status.MEMBER:
        cls, note = GammaClass.COMPATIBLE, "attained by the witness mixture of the certificate"
    elif ell.status is Status.NON_MEMBER:
        cls, note = GammaClass.INCOMPATIBLE, "not positive semidefinite, so no copula attains it"
    else:
        cls, note = GammaClass.INDETERMINATE, INDETERMINATE_NOTE
    return CompatibilityVerdict(ell, cut, cls, note)


# ---------------------------------------------------------------------------
# Estimation and witnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MatrixEstimate:
    matrix: KappaMatrix
    std_error: np.ndarray
    n: int


def estimate_matrix(data, spec: MeasureSpec) -> MatrixEstimate:
    """Pairwise plug-in estimates for an ``(n, d)`` data array."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[1] < 2:
        raise DomainError(f"need an (n, d) array with d >= 2, got shape {X.shape}")
    U = rank_transform(X)
    d = X.shape[1]
    K = np.eye(d)
    S = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            e = estimate(Empirical(U[:, [i, j]]), spec)
            K[i, j] = K[j, i] = e.value
            S[i, j] = S[j, i] = e.std_error
    return MatrixEstimate(KappaMatrix(K), S, X.shape[0])


def _certificate_items(w) -> tuple[list[BVector], np.ndarray]:
    if isinstance(w, CutPolytopeVerdict):
        w = w.certificate
    if not w:
        raise DomainError("empty certificate")
    bvs = [b if isinstance(b, BVector) else BVector(tuple(b)) for b in w]
    weights = np.array([float(x) for x in w.values()])
    if (weights < 0).any() or abs(weights.sum() - 1.0) > 1e-9:
        raise DomainError("certificate weights must form a probability vector")
    if len({b.d for b in bvs}) != 1:
        raise DomainError("certificate b-vectors must share one dimension")
    return bvs, weights / weights.sum()


def witness_sample(w, n: int, rng: RandomSource) -> np.ndarray:
    """Draw ``n`` rows from the mixture of witness copulas weighted by ``w``."""
    bvs, weights = _certificate_items(w)
    label = rng.child(0).generator().choice(len(bvs), size=n, p=weights)
    out = np.empty((n, bvs[0].d))
    for k, b in enumerate(bvs):
        idx = np.flatnonzero(label == k)
        if idx.size:
            out[idx] = witness_component_sample(b, idx.size, rng.child(k + 1))
    return out


def witness_matrix_roundtrip(w, spec: MeasureSpec, n: int, rng: RandomSource) -> MatrixEstimate:
    """Sample the witness mixture for certificate ``w`` and estimate its kappa-matrix.

    For any degree-one ``spec`` the population matrix is exactly
    ``sum_b w_b P^(b)``.
    """
    return estimate_matrix(witness_sample(w, n, rng), spec)


def certificate_matrix(w) -> np.ndarray:
    bvs, weights = _certificate_items(w)
    return sum(x * b.matrix() for b, x in zip(bvs, weights))


def equicorrelation_thresholds(d: int, tol: float = 1e-7) -> tuple[float, float]:
    """Smallest equicorrelation ``rho`` inside the elliptope and the cut polytope.

    The elliptope value is ``-1/(d-1)``; the cut-polytope value is located
    by bisection on :func:`in_cut_polytope` to within ``tol``.
    """
    if int(d) != d or d < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {d!r}")
    if d > MAX_CUT_DIMENSION:
        raise CapacityError(f"cut-polytope test supports d <= {MAX_CUT_DIMENSION}, got d = {d}")
    ell = -1.0 / (d - 1)

    def inside(rho):
        return in_cut_polytope(equicorrelation(d, rho)).status is not Status.NON_MEMBER

    if inside(-1.0):
        return ell, -1.0
    lo, hi = -1.0, 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return ell, hi
