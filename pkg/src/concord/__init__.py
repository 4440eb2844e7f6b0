"""Degree-one measures of concordance and compatibility of concordance matrices."""

from .compatibility import (
    CompatibilityVerdict,
    CutPolytopeVerdict,
    ElliptopeVerdict,
    GammaClass,
    KappaMatrix,
    MatrixEstimate,
    Status,
    certificate_matrix,
    classify_gamma_matrix,
    equicorrelation,
    equicorrelation_thresholds,
    estimate_matrix,
    in_cut_polytope,
    in_elliptope,
    witness_matrix_roundtrip,
    witness_sample,
)
from .copulas import (
    BVector,
    Comonotone,
    ConvexMixture,
    Copula,
    Countermonotone,
    Empirical,
    Gaussian,
    Independence,
    enumerate_bvectors,
    evaluate,
    pseudo_observations,
    rank_transform,
    witness_component_sample,
)
from .distributions import (
    ConcordanceInducingDistribution,
    StandardGaussian,
    Tabulated,
    ThreePoint,
    TransformPair,
    TransformVerdict,
    Uniform01,
    Verdict,
    Violation,
    check_transform_pair,
    quantile,
    validate,
    wrapping_function,
)
from .errors import CapacityError, ConcordError, DomainError, NumericalError
from .measures import (
    GINI_DENSITY,
    Atoms,
    BetaP,
    Blomqvist,
    Density,
    Estimate,
    GeneralizedGini,
    Gini,
    GTransformed,
    MeasureSpec,
    Method,
    NuMeasure,
    Spearman,
    beta_p,
    estimate,
    gaussian_gini_closed_form,
    generalized_gini_gamma,
    g_transformed_rho,
    gini_gamma,
    kappa,
    spearman_rho,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    Infeasible,
    LpFeasibilityProblem,
    QuadratureSpec,
    RandomSource,
    bivariate_normal_cdf,
    integrate,
    min_eigenvalue,
    solve_feasibility,
)

__version__ = "0.1.0"
