import numpy as np
import pytest
from scipy.special import erfc, gamma
from scipy.stats import chi2, kstest, ks_2samp

from tfcauchy import bernstein as bfn
from tfcauchy.errors import ParameterError, UnsupportedModeError
from tfcauchy.operator import Domain1D, MODE_JUMP, build_operator, eigensystem
from tfcauchy.solver import ProblemSpec, SeparableSource, solve
from tfcauchy.special import inverse_subordinator_density
from tfcauchy.stochastic import (McConfig, RngSpec, estimate_solution_mc,
                                 exit_time_moments, sample_inverse_subordinator,
                                 sample_stable_subordinator, simulate_killed_path,
                                 survival_curve, _subordination_nodes)

N_DRAWS = 200_000


class TestStableSampler:
    def test_laplace_transform(self, rng):
        t = 1.3
        for alpha in (0.3, 0.5, 0.8):
            d = sample_stable_subordinator(alpha, t, rng, size=N_DRAWS)
            for u in (0.5, 1.0, 2.0):
                emp = np.exp(-u * d)
                dev = abs(emp.mean() - np.exp(-t * u ** alpha))
                assert dev <= 3.0 * emp.std() / np.sqrt(N_DRAWS)

    def test_half_against_closed_form_cdf(self, rng):
        # alpha = 1/2 subordinator has CDF erfc(1/(2 sqrt(x)))
        d = sample_stable_subordinator(0.5, 1.0, rng, size=N_DRAWS)
        res = kstest(d, lambda x: erfc(1.0 / (2.0 * np.sqrt(x))))
        assert res.pvalue > 0.01

    def test_self_similarity(self, rng):
        d4 = sample_stable_subordinator(0.5, 4.0, rng, size=N_DRAWS // 2)
        d1 = sample_stable_subordinator(0.5, 1.0, rng, size=N_DRAWS // 2)
        res = ks_2samp(d4, 16.0 * d1)
        assert res.pvalue > 0.01

    def test_parameter_validation(self, rng):
        with pytest.raises(ParameterError):
            sample_stable_subordinator(1.2, 1.0, rng)
        with pytest.raises(ParameterError):
            sample_stable_subordinator(0.5, 0.0, rng)


class TestInverseSubordinatorSampler:
    def test_mean(self, rng):
        # E[eta_t] = t^a / Gamma(1+a); at a=1/2, t=1 this is 2/sqrt(pi)
        d = sample_inverse_subordinator(0.5, 1.0, rng, size=N_DRAWS)
        want = 2.0 / np.sqrt(np.pi)
        assert abs(d.mean() - want) <= 3.0 * d.std() / np.sqrt(N_DRAWS)

    def test_histogram_matches_density(self, rng):
        alpha, t = 0.5, 1.0
        d = sample_inverse_subordinator(alpha, t, rng, size=N_DRAWS)
        edges = np.unique(np.quantile(d, np.linspace(0.005, 0.995, 61)))
        counts, edges = np.histogram(d, bins=edges)
        # expected counts integrate the density over each bin (midpoint values
        # bias wide tail bins at this sample size)
        nodes, wts = np.polynomial.legendre.leggauss(7)
        lo, hi = edges[:-1], edges[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        dens = inverse_subordinator_density(alpha, t, pts.ravel()).reshape(pts.shape)
        expected = (dens * wts[None, :]).sum(axis=1) * half * len(d)
        keep = expected > 5
        stat = float((((counts - expected) ** 2) / expected)[keep].sum())
        dof = int(keep.sum()) - 1
        assert stat < chi2.ppf(0.99, dof)

    def test_short_time_scaling(self, rng):
        # quantiles shrink like t^alpha as t -> 0
        alpha = 0.6
        q1 = np.quantile(sample_inverse_subordinator(alpha, 1e-2, rng, size=20000), 0.9)
        q2 = np.quantile(sample_inverse_subordinator(alpha, 1e-4, rng, size=20000), 0.9)
        assert q2 / q1 == pytest.approx(1e-2 ** alpha, rel=0.15)


class TestKilledPaths:
    def test_ensemble_invariants(self, sym_domain, rng):
        V = 0.5 * np.ones(sym_domain.n_grid)
        pe = simulate_killed_path(sym_domain, bfn.fractional(1.0), V, 0.0,
                                  horizon=0.5, h=1e-3, rng=rng, n_paths=4000)
        assert ((pe.fk_weight > 0.0) & (pe.fk_weight <= 1.0)).all()
        exited = pe.exit_flag
        assert (pe.exit_time[exited] <= 0.5 + 1e-12).all()
        assert np.isnan(pe.exit_time[~exited]).all()
        outside = (pe.terminal_position <= sym_domain.a) | \
                  (pe.terminal_position >= sym_domain.b)
        assert (outside == exited).all()
        assert pe.diagnostics["mean_jump_size"] > 0

    def test_survival_monotone(self, sym_domain):
        p, se = survival_curve(sym_domain, bfn.fractional(1.0), 0.0,
                               [0.1, 0.2, 0.4, 0.8], 2e-3, RngSpec(3), 20000)
        assert (np.diff(p) <= 0).all()

    def test_brownian_limit_against_eigen_series(self, unit_domain, classical_es):
        # nu = 2 degenerates to Brownian motion (variance 2t); the survival
        # probability then has the classical eigenfunction expansion.  Grid
        # monitoring overestimates survival at O(sqrt(h)); assert agreement
        # within 3 SE + measured bias margin at small h, and bias shrinkage in h.
        x0, t = 0.5, 0.1
        a0 = classical_es.inner(np.ones(unit_domain.n_grid))
        i0 = unit_domain.index_of(x0)
        exact = float(np.sum(np.exp(-classical_es.lambdas * t) * a0
                             * classical_es.eigvecs[i0, :]))
        biases = []
        for h in (4e-4, 1e-4):
            p, se = survival_curve(unit_domain, bfn.fractional(2.0), x0, [t],
                                   h, RngSpec(11), 20000)
            biases.append(p[0] - exact)
        assert abs(biases[1]) < abs(biases[0])            # h-refinement helps
        assert abs(biases[1]) <= 3.0 * se[0] + 0.01

    def test_exit_time_trend_across_domains(self):
        # E[tau] * Psi(diam^-2) stays of one size as the interval shrinks
        vals = []
        for r in (1.0, 0.5, 0.25):
            dom = Domain1D(-r, r, 32)
            em = exit_time_moments(dom, bfn.fractional(1.0), 0.0, 2e-3,
                                   RngSpec(5), 4000, horizon=30.0 * r)
            assert em["censored_fraction"] <= 1e-3
            vals.append(em["moments"][0] * 1.0 / (2.0 * r))
        vals = np.asarray(vals)
        assert vals.max() / vals.min() <= 1.5

    def test_path_simulation_guards(self, sym_domain, rng):
        with pytest.raises(UnsupportedModeError):
            simulate_killed_path(sym_domain, bfn.relativistic(1.0, 1.0), None, 0.0,
                                 0.5, 1e-3, rng)
        with pytest.raises(ParameterError):
            simulate_killed_path(sym_domain, bfn.fractional(1.0), None, 2.0,
                                 0.5, 1e-3, rng)
        with pytest.raises(ParameterError):
            simulate_killed_path(sym_domain, bfn.fractional(1.0), None, 0.0,
                                 0.5, 0.1, rng)


@pytest.fixture(scope="module")
def mc_setup():
    dom = Domain1D(-1.0, 1.0, 401)
    psi = bfn.fractional(1.0)
    es = eigensystem(build_operator(dom, psi, 0.0, MODE_JUMP), 100)
    phi0 = np.cos(np.pi * dom.x / 2.0)
    return dom, psi, es, phi0


class TestSolutionEstimator:
    def test_bounds_for_nonnegative_datum(self, mc_setup):
        dom, psi, es, phi0 = mc_setup
        spec = ProblemSpec(dom, psi, 0.0, phi0, None, 0.5, 1.0)
        mc = McConfig(n_paths=4000, h=2e-3, rng=RngSpec(21))
        for e in estimate_solution_mc(spec, [(0.25, 0.0), (1.0, 0.5)], mc):
            assert 0.0 <= e.estimate <= np.abs(phi0).max()

    def test_against_spectral_solution(self, mc_setup):
        dom, psi, es, phi0 = mc_setup
        spec = ProblemSpec(dom, psi, 0.0, phi0, None, 0.5, 1.0)
        mc = McConfig(n_paths=20000, h=1e-3, rng=RngSpec(7))
        est = estimate_solution_mc(spec, [(0.25, 0.0)], mc)[0]
        ref = solve(spec, es, np.asarray([0.25]), n_modes=100)
        want = ref.values[0, dom.index_of(0.0)]
        assert abs(est.estimate - want) <= 3.0 * est.stderr + 0.02 * abs(want)

    def test_potential_monotonicity_pathwise(self, mc_setup):
        # common random numbers: doubling V can only lower every estimate
        dom, psi, es, phi0 = mc_setup
        mc = McConfig(n_paths=3000, h=2e-3, rng=RngSpec(31))
        pts = [(0.25, 0.0), (0.5, 0.5)]
        base = 0.8 * np.ones(dom.n_grid)
        e1 = estimate_solution_mc(ProblemSpec(dom, psi, base, phi0, None, 0.5, 1.0),
                                  pts, mc)
        e2 = estimate_solution_mc(ProblemSpec(dom, psi, 2.0 * base, phi0, None,
                                              0.5, 1.0), pts, mc)
        for a, b in zip(e1, e2):
            assert b.estimate <= a.estimate + 1e-14

    def test_data_monotonicity_pathwise(self, mc_setup):
        dom, psi, es, phi0 = mc_setup
        mc = McConfig(n_paths=3000, h=2e-3, rng=RngSpec(32))
        pts = [(0.25, 0.0)]
        lo = estimate_solution_mc(ProblemSpec(dom, psi, 0.0, phi0, None, 0.5, 1.0),
                                  pts, mc)[0]
        hi = estimate_solution_mc(ProblemSpec(dom, psi, 0.0, phi0 + 0.3, None,
                                              0.5, 1.0), pts, mc)[0]
        assert hi.estimate >= lo.estimate - 1e-14

    def test_source_term_against_spectral(self, mc_setup):
        dom, psi, es, phi0 = mc_setup
        rho2 = np.exp(-4.0 * dom.x ** 2)
        V = 0.8 * np.ones(dom.n_grid)
        spec = ProblemSpec(dom, psi, V, phi0,
                           SeparableSource(lambda s: 1.0 + 0.5 * s, rho2), 0.5, 1.0)
        es_v = eigensystem(build_operator(dom, psi, V, MODE_JUMP), 100)
        ref = solve(spec, es_v, np.asarray([0.25]), n_modes=100)
        want = ref.values[0, dom.index_of(0.0)]
        mc = McConfig(n_paths=8000, h=2e-3, rng=RngSpec(8), n_time_nodes=10,
                      n_subord_nodes=40)
        est = estimate_solution_mc(spec, [(0.25, 0.0)], mc)[0]
        assert abs(est.estimate - want) <= 3.0 * est.stderr + 0.02 * abs(want)

    def test_reproducibility(self, mc_setup):
        dom, psi, es, phi0 = mc_setup
        spec = ProblemSpec(dom, psi, 0.0, phi0, None, 0.5, 1.0)
        mc = McConfig(n_paths=5000, h=2e-3, rng=RngSpec(42))
        a = estimate_solution_mc(spec, [(0.25, 0.0)], mc)[0]
        b = estimate_solution_mc(spec, [(0.25, 0.0)], mc)[0]
        assert a.estimate == b.estimate and a.stderr == b.stderr

    def test_budget_cap_flags_partial(self, mc_setup):
        dom, psi, es, phi0 = mc_setup
        spec = ProblemSpec(dom, psi, 0.0, phi0, None, 0.5, 1.0)
        mc = McConfig(n_paths=50000, h=5e-3, rng=RngSpec(1, block_size=2000),
                      max_blocks=2)
        e = estimate_solution_mc(spec, [(0.1, 0.0)], mc)[0]
        assert e.partial and e.n_paths == 4000

    def test_probe_validation(self, mc_setup):
        dom, psi, es, phi0 = mc_setup
        spec = ProblemSpec(dom, psi, 0.0, phi0, None, 0.5, 1.0)
        mc = McConfig(n_paths=100, h=2e-3, rng=RngSpec(2))
        with pytest.raises(ParameterError):
            estimate_solution_mc(spec, [(0.25, 2.0)], mc)
        with pytest.raises(ParameterError):
            estimate_solution_mc(spec, [(2.0, 0.0)], mc)


def test_subordination_weight_total():
    # the numerically built weights integrate omega to 1/Gamma(alpha)
    for alpha in (0.4, 0.5, 0.7):
        _, _, tot = _subordination_nodes(alpha, 48)
        assert tot == pytest.approx(1.0 / gamma(alpha), rel=1e-4)
