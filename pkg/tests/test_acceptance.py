"""One test per acceptance criterion; each records a PASS/FAIL line in RESULTS."""

import time

import numpy as np
from scipy.special import ndtri

import oracles
from concord.compatibility import (
    GammaClass,
    Status,
    classify_gamma_matrix,
    equicorrelation,
    in_cut_polytope,
    in_elliptope,
    witness_matrix_roundtrip,
)
from concord.copulas import (
    Comonotone,
    ConvexMixture,
    Countermonotone,
    Gaussian,
    Independence,
    enumerate_bvectors,
    pseudo_observations,
)
from concord.distributions import (
    StandardGaussian,
    Tabulated,
    ThreePoint,
    TransformPair,
    Uniform01,
    Verdict,
    check_transform_pair,
    wrapping_function,
)
from concord.measures import (
    GINI_DENSITY,
    Atoms,
    BetaP,
    Blomqvist,
    Density,
    GeneralizedGini,
    Gini,
    GTransformed,
    Spearman,
    estimate,
    gaussian_gini_closed_form,
    generalized_gini_gamma,
    gini_gamma,
    kappa,
)
from concord.numerics import RandomSource

RESULTS: dict[int, str] = {}

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
    GTransformed(Tabulated((np.arange(8) + 0.5) / 8, np.array([-3.0, -2.0, -1.5, -0.2, 0.2, 1.5, 2.0, 3.0]))),
]


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def random_copula(rng):
    """Gaussian or a two-component mixture of Gaussian, M, W and Pi."""
    pool = [Comonotone(), Countermonotone(), Independence()]
    if rng.random() < 0.3:
        return Gaussian(float(rng.uniform(-1, 1)))
    a = Gaussian(float(rng.uniform(-1, 1)))
    b = pool[rng.integers(3)] if rng.random() < 0.5 else Gaussian(float(rng.uniform(-1, 1)))
    t = float(rng.uniform(0.05, 0.95))
    return ConvexMixture(((t, a), (1 - t, b)))


def test_criterion_1_gaussian_gini_anchor():
    start = time.perf_counter()
    C = Gaussian(-0.5)
    quad = gini_gamma(C)
    closed = gaussian_gini_closed_form(-0.5)
    est = estimate(pseudo_observations(C.sample(1_000_000, RandomSource(20240501))), Gini())
    elapsed = time.perf_counter() - start
    mp = oracles.gaussian_gini_mpmath(-0.5)
    ok = (
        abs(quad + 0.379) <= 5e-4
        and abs(closed + 0.379) <= 5e-4
        and abs(est.value - quad) <= 3 * est.std_error
        and abs(est.value + 0.379) <= 3 * est.std_error + 5e-4
        and abs(quad - mp) <= 1e-10
        and abs(closed - mp) <= 1e-10
        and elapsed < 10.0
    )
    record(
        1,
        ok,
        f"quadrature {quad:.6f}, closed form {closed:.6f}, plug-in {est.value:.6f} "
        f"(se {est.std_error:.1e}, z {(est.value - quad) / est.std_error:+.2f}), {elapsed:.2f} s",
    )


def test_criterion_2_representation_identity():
    rng = np.random.default_rng(2)
    copulas = [Gaussian(r) for r in np.linspace(-0.9, 0.9, 10)]
    while len(copulas) < 20:
        t = float(rng.uniform(0.05, 0.95))
        copulas.append(ConvexMixture(((t, random_copula(rng)), (1 - t, random_copula(rng)))))
    worst = max(abs(generalized_gini_gamma(C, GINI_DENSITY) - gini_gamma(C)) for C in copulas)
    record(2, worst <= 1e-8, f"max |gamma_nu(8p) - gamma| = {worst:.1e} over {len(copulas)} copulas")


def _bisect(predicate, lo, hi, tol):
    # predicate(lo) is False, predicate(hi) is True
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_criterion_3_equicorrelation_thresholds():
    ell = _bisect(lambda r: in_elliptope(equicorrelation(3, r)).status is not Status.NON_MEMBER, -1.0, 0.0, 1e-7)
    cut = _bisect(lambda r: in_cut_polytope(equicorrelation(3, r)).status is not Status.NON_MEMBER, -1.0, 0.0, 1e-7)
    flips = (
        in_elliptope(equicorrelation(3, -0.5 + 1e-6)).status is Status.MEMBER
        and in_elliptope(equicorrelation(3, -0.5 - 1e-6)).status is Status.NON_MEMBER
        and in_cut_polytope(equicorrelation(3, -1 / 3 + 1e-6)).status is Status.MEMBER
        and in_cut_polytope(equicorrelation(3, -1 / 3 - 1e-6)).status is Status.NON_MEMBER
    )
    ok = flips and abs(ell + 0.5) <= 1e-6 and abs(cut + 1 / 3) <= 1e-6
    record(3, ok, f"elliptope flips at {ell:.8f}, cut polytope at {cut:.8f}")


def test_criterion_4_indeterminate_gap():
    v = classify_gamma_matrix(equicorrelation(3, -0.379))
    ok = (
        v.gamma_class is GammaClass.INDETERMINATE
        and v.cut_polytope.status is Status.NON_MEMBER
        and v.elliptope.status is Status.MEMBER
        and bool(v.note)
    )
    record(4, ok, f"{v.gamma_class.value}: cut {v.cut_polytope.status.value}, elliptope {v.elliptope.status.value}")


def test_criterion_5_axioms():
    rng = np.random.default_rng(5)
    z = rng.standard_normal((2000, 2)) @ np.array([[1.0, 0.5], [0.0, 0.8]])
    E = pseudo_observations(z)
    E_swap = pseudo_observations(z[:, ::-1])
    E_neg = pseudo_observations(np.column_stack([z[:, 0], -z[:, 1]]))
    grid = np.linspace(-1, 1, 11)
    failures = []
    for spec in SPECS:
        m, w, pi = kappa(Comonotone(), spec), kappa(Countermonotone(), spec), kappa(Independence(), spec)
        if abs(m - 1) > 1e-9 or abs(w + 1) > 1e-9 or abs(pi) > 1e-8:
            failures.append(f"{spec.label}: M {m}, W {w}, Pi {pi}")
        e = estimate(E, spec).value
        if abs(estimate(E_swap, spec).value - e) > 1e-12 or abs(estimate(E_neg, spec).value + e) > 1e-12:
            failures.append(f"{spec.label}: permutation/reflection")
        path = np.array([kappa(Gaussian(r), spec) for r in grid])
        if (np.diff(path) < -1e-12).any():
            failures.append(f"{spec.label}: not monotone in rho")
    record(5, not failures, f"{len(SPECS)} specs" + ("" if not failures else "; " + "; ".join(failures)))


def test_criterion_6_degree_one_linearity():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        t = float(rng.uniform(0, 1))
        C, D = random_copula(rng), random_copula(rng)
        mix = ConvexMixture(((t, C), (1 - t, D)))
        for spec in SPECS:
            gap = abs(kappa(mix, spec) - t * kappa(C, spec) - (1 - t) * kappa(D, spec))
            worst = max(worst, gap)
    record(6, worst <= 1e-9, f"max linearity gap {worst:.1e} over 50 triples x {len(SPECS)} specs")


def test_criterion_7_certificate_round_trips():
    rng = np.random.default_rng(7)
    worst_res = 0.0
    members = 0
    certs = {}
    for i in range(100):
        d = (3, 4, 5)[i % 3]
        bvs = enumerate_bvectors(d)
        k = int(rng.integers(1, len(bvs) + 1))
        pick = rng.choice(len(bvs), size=k, replace=False)
        w = rng.dirichlet(np.ones(k))
        P = sum(x * bvs[j].matrix() for x, j in zip(w, pick))
        v = in_cut_polytope(P)
        if v.status is Status.MEMBER:
            members += 1
            worst_res = max(worst_res, float(np.max(np.abs(v.reconstruct() - P))))
            certs.setdefault(d, (v, P))
    z_max = 0.0
    trips_ok = True
    for n_spec, spec in enumerate((Spearman(), BetaP(0.3), Gini())):
        for d, (v, P) in sorted(certs.items()):
            est = witness_matrix_roundtrip(v, spec, 1_000_000, RandomSource(700 + 10 * n_spec + d))
            iu = np.triu_indices(d, 1)
            diff = np.abs(est.matrix.entries[iu] - P[iu])
            se = est.std_error[iu]
            trips_ok &= bool((diff <= 3 * se + 1e-12).all())
            # exact +-1 entries have a vanishing standard error and carry no z-score
            live = se > 1e-9
            if live.any():
                z_max = max(z_max, float(np.max(diff[live] / se[live])))
    ok = members == 100 and worst_res <= 1e-9 and trips_ok
    record(
        7,
        ok,
        f"{members}/100 Member, max re-substitution {worst_res:.1e}; round trips d={sorted(certs)} "
        f"x 3 specs, max |z| {z_max:.2f}",
    )


def test_criterion_8_transform_checker():
    grid = (np.arange(1000) + 0.5) / 1000
    q3 = ThreePoint(0.3).quantile

    def verdict(f1, f2):
        return check_transform_pair(TransformPair.from_functions(f1, f2, grid))

    wrap = lambda u: wrapping_function(ndtri(u))
    accepted = [verdict(lambda u: u, lambda u: u), verdict(ndtri, ndtri), verdict(q3, q3)]
    wrapped = verdict(wrap, wrap)
    square = verdict(lambda u: u, lambda u: u**2)
    ok = (
        all(v.verdict is Verdict.IS_MEASURE_OF_CONCORDANCE for v in accepted)
        and wrapped.verdict is Verdict.NOT_MONOTONE
        and square.verdict in (Verdict.DISTRIBUTIONS_DIFFER, Verdict.NOT_SYMMETRIC)
    )
    record(
        8,
        ok,
        "accepted " + ", ".join(type(v.distribution).__name__ for v in accepted)
        + f"; wrapping {wrapped.verdict.value}; (u, u^2) {square.verdict.value}",
    )


def test_criterion_9_lp_vs_facets():
    rng = np.random.default_rng(9)
    disagree = 0
    boundary = 0
    for _ in range(1000):
        r = rng.uniform(-1, 1, 3)
        P = np.eye(3)
        P[0, 1] = P[1, 0] = r[0]
        P[0, 2] = P[2, 0] = r[1]
        P[1, 2] = P[2, 1] = r[2]
        status = in_cut_polytope(P).status
        if status is Status.BOUNDARY:
            boundary += 1
            # a Boundary verdict must sit within the band of some facet
            disagree += oracles.in_cut3(r, slack=1e-8) == oracles.in_cut3(r, slack=-1e-8)
            continue
        disagree += (status is Status.MEMBER) != oracles.in_cut3(r)
    record(9, disagree == 0, f"{1000 - disagree}/1000 agree with the facet oracle ({boundary} Boundary)")
