import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import ndtri

import oracles
from concord.copulas import Comonotone, ConvexMixture, Countermonotone, Empirical, Gaussian, Independence, pseudo_observations
from concord.distributions import StandardGaussian, Tabulated, ThreePoint, Uniform01
from concord.errors import DomainError, NumericalError
from concord.measures import (
    GINI_DENSITY,
    Atoms,
    BetaP,
    Blomqvist,
    Density,
    Estimate,
    GeneralizedGini,
    Gini,
    GTransformed,
    Method,
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
from concord.numerics import RandomSource

TABLE_G = Tabulated((np.arange(8) + 0.5) / 8, np.array([-3.0, -2.0, -1.5, -0.2, 0.2, 1.5, 2.0, 3.0]))

SPECS = [
    Spearman(),
    Blomqvist(),
    BetaP(0.1),
    BetaP(0.3),
    Gini(),
    GeneralizedGini(Atoms(((0.05, 0.2), (0.25, 0.3), (0.5, 0.5)))),
    GeneralizedGini(Density.from_table([0.0, 0.2, 0.5], [1.0, 3.0, 0.5])),
    GTransformed(Uniform01()),
    GTransformed(StandardGaussian()),
    GTransformed(ThreePoint(0.2)),
    GTransformed(TABLE_G),
]


def spec_id(spec):
    return repr(spec)[:60]


# --- beta_p -----------------------------------------------------------------


@pytest.mark.parametrize("p", [0.01, 0.2, 1 / 3, 0.5])
def test_beta_p_bounds_and_independence(p):
    assert beta_p(Comonotone(), p) == pytest.approx(1.0, abs=1e-15)
    assert beta_p(Countermonotone(), p) == pytest.approx(-1.0, abs=1e-15)
    assert beta_p(Independence(), p) == pytest.approx(0.0, abs=1e-15)


def test_blomqvist_gaussian():
    assert beta_p(Gaussian(-0.5), 0.5) == pytest.approx(-1 / 3, abs=1e-14)


@pytest.mark.parametrize("rho", [-0.8, -0.5, 0.3, 0.9])
@pytest.mark.parametrize("p", [0.05, 0.3])
def test_beta_p_gaussian_mpmath(rho, p):
    assert beta_p(Gaussian(rho), p) == pytest.approx(oracles.gaussian_beta_p(rho, p), abs=1e-10)


def test_beta_p_domain():
    for p in (0.0, 0.51, -0.2):
        with pytest.raises(DomainError):
            beta_p(Independence(), p)


def test_blomqvist_gaussian_monte_carlo():
    rng = RandomSource(21)
    est = g_transformed_rho(Gaussian(-0.5), ThreePoint(0.5), 1_000_000, rng, method="monte_carlo")
    assert abs(est.value + 1 / 3) <= 3 * est.std_error


# --- Spearman and G-transformed correlations --------------------------------


@pytest.mark.parametrize("rho", [-0.97, -0.6, -0.2, 0.0, 0.45, 0.8, 0.99])
def test_spearman_gaussian_closed_form(rho):
    assert spearman_rho(Gaussian(rho)) == pytest.approx(oracles.gaussian_spearman(rho), abs=1e-11)


@pytest.mark.parametrize("rho", [-0.9, -0.3, 0.6, 0.95])
def test_normal_scores_gaussian(rho):
    # the normal-scores correlation of a Gaussian copula is its parameter
    est = g_transformed_rho(Gaussian(rho), StandardGaussian())
    assert est.method is Method.QUADRATURE
    assert est.value == pytest.approx(rho, abs=1e-11)


def test_spearman_of_bounds():
    assert spearman_rho(Comonotone()) == pytest.approx(1.0, abs=1e-12)
    assert spearman_rho(Countermonotone()) == pytest.approx(-1.0, abs=1e-12)
    assert spearman_rho(Independence()) == pytest.approx(0.0, abs=1e-15)


def test_g_transformed_monte_carlo_agrees_with_quadrature():
    C = Gaussian(0.6)
    exact = g_transformed_rho(C, Uniform01())
    mc = g_transformed_rho(C, Uniform01(), 400_000, RandomSource(1), method="monte_carlo")
    assert mc.method is Method.MONTE_CARLO
    assert abs(mc.value - exact.value) <= 3 * mc.std_error


def test_tabulated_g_exact_sum_agrees_with_monte_carlo():
    C = ConvexMixture(((0.4, Gaussian(0.7)), (0.6, Countermonotone())))
    exact = g_transformed_rho(C, TABLE_G)
    mc = g_transformed_rho(C, TABLE_G, 400_000, RandomSource(2), method="monte_carlo")
    assert exact.method is Method.CLOSED_FORM
    assert abs(mc.value - exact.value) <= 3 * mc.std_error


def test_g_transformed_three_point_delegates():
    C = Gaussian(0.35)
    assert g_transformed_rho(C, ThreePoint(0.2)).value == beta_p(C, 0.2)


def test_g_transformed_rejects_invalid():
    asym = Tabulated((np.arange(10) + 0.5) / 10, np.arange(10.0) ** 2)
    with pytest.raises(DomainError):
        g_transformed_rho(Independence(), asym)
    with pytest.raises(DomainError):
        g_transformed_rho(Independence(), Uniform01(), 10, RandomSource(0), method="monte_carlo")
    with pytest.raises(DomainError):
        g_transformed_rho(Independence(), Uniform01(), 5000, None, method="monte_carlo")


# --- Gini's gamma -----------------------------------------------------------


def test_gini_of_bounds():
    assert gini_gamma(Independence()) == pytest.approx(0.0, abs=1e-15)
    assert gini_gamma(Comonotone()) == pytest.approx(1.0, abs=1e-15)
    assert gini_gamma(Countermonotone()) == pytest.approx(-1.0, abs=1e-15)


@pytest.mark.parametrize("rho", [-0.5, 0.2, 0.85])
def test_gini_closed_form_against_mpmath(rho):
    ref = oracles.gaussian_gini_mpmath(rho)
    assert gaussian_gini_closed_form(rho) == pytest.approx(ref, abs=1e-10)
    assert gini_gamma(Gaussian(rho)) == pytest.approx(ref, abs=1e-10)


def test_gini_closed_form_examples():
    assert gaussian_gini_closed_form(0.0) == 0.0
    assert gaussian_gini_closed_form(1.0) == pytest.approx(1.0, abs=1e-15)
    assert round(gaussian_gini_closed_form(-0.5), 3) == -0.379


def test_gini_quadrature_matches_closed_form_on_grid():
    for rho in np.linspace(-0.99, 0.99, 23):
        assert abs(gini_gamma(Gaussian(rho)) - gaussian_gini_closed_form(rho)) <= 1e-9


def test_generalized_gini_point_mass():
    C = Gaussian(-0.4)
    for p in (0.1, 0.5):
        assert generalized_gini_gamma(C, Atoms.point(p)) == beta_p(C, p)


def test_generalized_gini_gini_density():
    C = Gaussian(-0.5)
    assert abs(generalized_gini_gamma(C, GINI_DENSITY) - gini_gamma(C)) <= 1e-8


def test_generalized_gini_tabulated_gini_density():
    tab = Density.from_table(np.linspace(0, 0.5, 11), 8 * np.linspace(0, 0.5, 11))
    C = Gaussian(0.3)
    assert generalized_gini_gamma(C, tab) == pytest.approx(gini_gamma(C), abs=1e-10)


@pytest.mark.parametrize("nu", [GINI_DENSITY, Atoms(((0.1, 0.5), (0.4, 0.5))), Density.from_table([0, 0.5], [1, 1])])
def test_generalized_gini_comonotone(nu):
    assert generalized_gini_gamma(Comonotone(), nu) == pytest.approx(1.0, abs=1e-12)


def test_nu_measure_invariants():
    with pytest.raises(DomainError):
        Atoms(((0.6, 1.0),))
    with pytest.raises(DomainError):
        Atoms(((0.2, 0.5), (0.3, 0.4)))
    with pytest.raises(DomainError):
        Density(lambda p: np.ones_like(p), "unnormalised")
    with pytest.raises(DomainError):
        Density(lambda p: 4.0 - 16.0 * p, "signed")


def test_discretisation_preserves_mass_and_mean():
    atoms = GINI_DENSITY.discretize(64)
    p = np.array([a for a, _ in atoms.atoms])
    w = np.array([b for _, b in atoms.atoms])
    assert len(atoms.atoms) == 64
    assert np.allclose(w, 1 / 64, atol=1e-9)
    # mean of p under density 8p on (0, 1/2) is 1/3
    assert p @ w == pytest.approx(1 / 3, abs=1e-9)


# --- dispatch, axioms, linearity --------------------------------------------


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_kappa_normalisation(spec):
    assert abs(kappa(Comonotone(), spec) - 1.0) <= 1e-9
    assert abs(kappa(Countermonotone(), spec) + 1.0) <= 1e-9
    assert abs(kappa(Independence(), spec)) <= 1e-8


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_kappa_monotone_in_gaussian_rho(spec):
    vals = [kappa(Gaussian(r), spec) for r in np.linspace(-1, 1, 11)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(-1.0, abs=1e-9) and vals[-1] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_kappa_linear_over_mixtures(spec):
    rng = np.random.default_rng(4)
    for _ in range(3):
        C1, C2 = Gaussian(rng.uniform(-1, 1)), ConvexMixture(((0.5, Gaussian(rng.uniform(-1, 1))), (0.5, Comonotone())))
        t = rng.uniform()
        mix = ConvexMixture(((t, C1), (1 - t, C2)))
        assert abs(kappa(mix, spec) - t * kappa(C1, spec) - (1 - t) * kappa(C2, spec)) <= 1e-9


def test_estimate_value_range():
    with pytest.raises(NumericalError):
        Estimate(1.1)
    with pytest.raises(NumericalError):
        Estimate(float("nan"))
    assert Estimate(1.0 + 1e-12).value == 1.0


# --- estimation --------------------------------------------------------------


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_estimate_comonotone_data(spec):
    # n large enough that every tabulated atom sits above 1 / (n + 1)
    x = np.arange(1000.0)
    e = estimate(pseudo_observations(np.column_stack([x, x**3])), spec)
    assert e.value == pytest.approx(1.0, abs=1e-12)
    e = estimate(pseudo_observations(np.column_stack([x, -x])), spec)
    assert e.value == pytest.approx(-1.0, abs=1e-12)


def test_estimate_atom_below_first_rank_has_zero_variance():
    # first atom of this density lies below 1 / 101: its transform is constant on 100 ranks
    nu = Density.from_table([0, 0.2, 0.5], [1, 3, 0.5])
    assert nu.atoms64.atoms[0][0] < 1 / 101
    x = np.arange(100.0)
    with pytest.raises(NumericalError, match="variance"):
        estimate(pseudo_observations(np.column_stack([x, x])), GeneralizedGini(nu))


@given(st.integers(0, 2**32 - 1), st.integers(30, 400), st.sampled_from(SPECS))
def test_estimate_reflection_and_permutation(seed, n, spec):
    data = np.random.default_rng(seed).standard_normal((n, 2)) @ np.array([[1.0, 0.4], [0.0, 1.0]])
    E = pseudo_observations(data)
    try:
        base = estimate(E, spec).value
    except NumericalError:
        return
    assert abs(estimate(E.swapped(), spec).value - base) <= 1e-12
    assert abs(estimate(E.reflected(), spec).value + base) <= 1e-12


def test_estimate_zero_variance_diagnostic():
    data = np.column_stack([np.ones(50), np.arange(50.0)])
    with pytest.raises(NumericalError, match="zero"):
        estimate(pseudo_observations(data), BetaP(0.3))


def test_estimate_needs_ten_points():
    with pytest.raises(DomainError):
        estimate(pseudo_observations(np.random.default_rng(0).random((9, 2))), Spearman())
    with pytest.raises(DomainError):
        estimate(np.zeros((20, 2)), Spearman())


@pytest.mark.parametrize("spec", [Spearman(), Blomqvist(), BetaP(0.2), Gini(), GTransformed(StandardGaussian())], ids=spec_id)
def test_independent_data_coverage(spec):
    inside = 0
    for seed in range(100):
        E = pseudo_observations(Independence().sample(100_000, RandomSource(seed)))
        e = estimate(E, spec)
        inside += abs(e.value) <= 3 * e.std_error
    assert inside >= 99


@pytest.mark.parametrize("spec", [Spearman(), BetaP(0.3), Gini()], ids=spec_id)
def test_estimator_consistency(spec):
    C = Gaussian(0.5)
    target = kappa(C, spec)
    errs = []
    for k, n in enumerate((10_000, 40_000, 160_000)):
        e = estimate(pseudo_observations(C.sample(n, RandomSource(77, k))), spec)
        assert abs(e.value - target) <= 3 * e.std_error
        errs.append(e.std_error)
    # standard errors halve as n quadruples
    assert 1.7 < errs[0] / errs[1] < 2.3
    assert 1.7 < errs[1] / errs[2] < 2.3


def test_standard_error_calibration():
    C = Gaussian(-0.3)
    vals, ses = [], []
    for seed in range(200):
        e = estimate(pseudo_observations(C.sample(2000, RandomSource(5, seed))), Gini())
        vals.append(e.value)
        ses.append(e.std_error)
    assert 0.85 < np.mean(ses) / np.std(vals) < 1.15


def test_empirical_routes_through_estimate():
    E = pseudo_observations(Gaussian(0.4).sample(5000, RandomSource(3)))
    assert spearman_rho(E) == estimate(E, Spearman()).value
    assert gini_gamma(E) == estimate(E, Gini()).value
    assert kappa(E, BetaP(0.2)) == estimate(E, BetaP(0.2)).value
    assert isinstance(E, Empirical)
