import numpy as np
import pytest
from scipy.special import expit

from dyadnet import (
    AdditiveNode,
    AdditiveNodeDraw,
    ClogitSample,
    CovariateSpec,
    EtaRecord,
    LatentDistance,
    ModelSpec,
    NetworkPanel,
    PointIdentificationFailure,
    SeparationError,
    SignedConfiguration,
    Theta,
    build_sample,
    collect_node_balanced,
    default_config_budget,
    delta_W,
    enumerate_configurations,
    exact_log_odds,
    fit,
    latent_distance_diagnostic,
    rank_check,
    simulate_panel,
)
from dyadnet.clogit import bernoulli_log_odds, latent_residual
from dyadnet.model import ErdosRenyiInitial, LatentDistanceDraw


@pytest.fixture(scope="module")
def additive_sim(additive_sim_small):
    return additive_sim_small


def sample_configs(n, T, budget, seed=0):
    return [c for _, c in collect_node_balanced(n, T, budget, seed=seed)]


class TestExactLogOdds:
    def test_identity_on_node_balanced(self, additive_sim):
        sim = additive_sim
        eta = EtaRecord.from_simulation(sim)
        cfgs = sample_configs(sim.spec.n, sim.spec.T, 120, seed=1)
        for cfg in cfgs:
            lo = exact_log_odds(cfg, eta)
            dw = delta_W(cfg, sim.spec.theta0, sim.panel, sim.covariates, sim.spec.registry)
            assert abs(lo - dw) < 1e-10

    def test_zero_theta_zero_contrast(self):
        spec = ModelSpec(n=20, T=2, theta0=Theta([0.0], [0.0, 0.0]),
                         initial=ErdosRenyiInitial(0.3))
        sim = simulate_panel(spec, seed=2)
        eta = EtaRecord.from_simulation(sim)
        for cfg in sample_configs(20, 2, 60, seed=2):
            assert abs(exact_log_odds(cfg, eta)) < 1e-10

    def test_unbalanced_rejected_and_residual_is_node_term(self, additive_sim):
        sim = additive_sim
        eta = EtaRecord.from_simulation(sim)
        cfg = SignedConfiguration(((0, 1, 1),), ((0, 2, 1),))  # sigma: 1:+1, 2:-1
        with pytest.raises(ValueError, match="node-balanced"):
            exact_log_odds(cfg, eta)
        lo = bernoulli_log_odds(cfg, eta)
        dw = delta_W(cfg, sim.spec.theta0, sim.panel, sim.covariates, sim.spec.registry)
        sigma_term = sim.nu[1] - sim.nu[2]
        assert abs(lo - dw - sigma_term) < 1e-10

    def test_invariant_to_common_nu_shift(self, additive_sim):
        sim = additive_sim
        eta0 = EtaRecord.from_simulation(sim)
        shifted = AdditiveNode(sim.nu + 7.3)
        eta1 = EtaRecord(eta=sim.index + shifted.dyad_effects()[None], nu=shifted.nu)
        for cfg in sample_configs(sim.spec.n, sim.spec.T, 40, seed=3):
            assert abs(exact_log_odds(cfg, eta0) - exact_log_odds(cfg, eta1)) < 1e-9

    def test_duplicate_cells_rejected(self, additive_sim):
        eta = EtaRecord.from_simulation(additive_sim)
        cfg = SignedConfiguration(((0, 1, 1), (0, 1, 1), (2, 3, 1), (2, 3, 1)),
                                  ((0, 2, 1), (0, 2, 1), (1, 3, 1), (1, 3, 1)))
        assert cfg.is_node_balanced()
        with pytest.raises(ValueError, match="distinct"):
            exact_log_odds(cfg, eta)


class TestBuildSample:
    def test_all_linked_panel_gives_empty_sample(self):
        n, T = 10, 2
        links = np.ones((T + 1, n, n), dtype=int)
        for t in range(T + 1):
            np.fill_diagonal(links[t], 0)
        panel = NetworkPanel(links)
        spec = ModelSpec(n=n, T=T, theta0=Theta([0.5], [0.5, 0.1]))
        sim = simulate_panel(spec, seed=0)
        cfgs = sample_configs(n, T, 30, seed=0)
        sample = build_sample(panel, sim.covariates, spec.registry, cfgs)
        assert len(sample) == 0
        assert sample.n_candidates == len(cfgs)

    def test_matches_direct_outcome_evaluation(self, additive_sim):
        sim = additive_sim
        from dyadnet import outcome_indicators

        cfgs = sample_configs(sim.spec.n, sim.spec.T, 150, seed=4)
        sample = build_sample(sim.panel, sim.covariates, sim.spec.registry, cfgs)
        informative = []
        for cfg in cfgs:
            yp, ym = outcome_indicators(cfg, sim.panel)
            if yp + ym == 1:
                informative.append((cfg, yp))
        assert len(sample) == len(informative)
        for (cfg, yp), x_row, y_row in zip(informative, sample.x, sample.y):
            assert y_row == yp
            dw_direct = delta_W(cfg, sim.spec.theta0, sim.panel, sim.covariates, sim.spec.registry)
            assert abs(x_row @ sim.spec.theta0.vector - dw_direct) < 1e-10

    def test_duplicates_duplicate_rows(self, additive_sim):
        sim = additive_sim
        cfgs = sample_configs(sim.spec.n, sim.spec.T, 100, seed=5)
        s1 = build_sample(sim.panel, sim.covariates, sim.spec.registry, cfgs)
        s2 = build_sample(sim.panel, sim.covariates, sim.spec.registry, cfgs + cfgs)
        assert len(s2) == 2 * len(s1)

    def test_rejects_unbalanced(self, additive_sim):
        sim = additive_sim
        bad = SignedConfiguration(((0, 1, 1),), ((0, 2, 1),))
        with pytest.raises(ValueError, match="node-balanced"):
            build_sample(sim.panel, sim.covariates, sim.spec.registry, [bad])


class TestFit:
    def test_zero_regressors_point_identification_failure(self):
        x = np.zeros((50, 3))
        y = np.zeros(50, dtype=np.int8)
        y[::2] = 1
        sample = ClogitSample(x=x, y=y, config_ids=["c"] * 50, d_h=1, n_candidates=50)
        with pytest.raises(PointIdentificationFailure) as exc:
            fit(sample)
        assert exc.value.null_space.shape[1] >= 1

    def test_rank_deficient_null_space_basis(self):
        rng = np.random.default_rng(0)
        col = rng.normal(size=60)
        x = np.column_stack([col, 2 * col, rng.normal(size=60)])
        y = (rng.random(60) < 0.5).astype(np.int8)
        sample = ClogitSample(x=x, y=y, config_ids=["c"] * 60, d_h=1, n_candidates=60)
        with pytest.raises(PointIdentificationFailure) as exc:
            fit(sample)
        v = exc.value.null_space[:, 0]
        assert np.linalg.norm(x @ v) < 1e-6 * np.linalg.norm(x)

    def test_gradient_matches_finite_differences(self, additive_sim):
        sim = additive_sim
        cfgs = sample_configs(sim.spec.n, sim.spec.T, 400, seed=6)
        sample = build_sample(sim.panel, sim.covariates, sim.spec.registry, cfgs)
        from dyadnet.clogit import _grad_hess, _loglik

        rng = np.random.default_rng(1)
        for _ in range(10):
            beta = rng.normal(scale=0.5, size=3)
            g, H = _grad_hess(sample.x, sample.y.astype(float), beta)
            step = 1e-5
            for k in range(3):
                e = np.zeros(3)
                e[k] = step
                fd = (_loglik(sample.x, sample.y, beta + e) - _loglik(sample.x, sample.y, beta - e)) / (2 * step)
                assert abs(g[k] - fd) <= 1e-6 * max(1.0, abs(fd))

    def test_hessian_negative_semidefinite(self, additive_sim):
        sim = additive_sim
        cfgs = sample_configs(sim.spec.n, sim.spec.T, 400, seed=7)
        sample = build_sample(sim.panel, sim.covariates, sim.spec.registry, cfgs)
        from dyadnet.clogit import _grad_hess

        rng = np.random.default_rng(2)
        for _ in range(8):
            beta = rng.normal(scale=1.0, size=3)
            _, H = _grad_hess(sample.x, sample.y.astype(float), beta)
            assert np.linalg.eigvalsh(H).max() <= 1e-10

    def test_separation_detected(self):
        # small-scale separated regressors keep the gradient above tolerance
        # while the iterates diverge past the declaration threshold
        x = np.linspace(-0.01, 0.01, 40).reshape(-1, 1)
        x = x[x[:, 0] != 0].reshape(-1, 1)
        y = (x[:, 0] > 0).astype(np.int8)
        sample = ClogitSample(x=x, y=y, config_ids=["c"] * len(x), d_h=1, n_candidates=len(x))
        with pytest.raises(SeparationError):
            fit(sample, max_iter=500)

    def test_conditional_frequency_by_exact_dw(self, additive_sim):
        sim = additive_sim
        cfgs = list(enumerate_configurations("within_date_tetrads", 80, 3, cap=60000, seed=8))
        sample = build_sample(sim.panel, sim.covariates, sim.spec.registry, cfgs)
        dw = sample.x @ sim.spec.theta0.vector
        vals, inv, cnt = np.unique(dw, return_inverse=True, return_counts=True)
        checked = 0
        for g in np.flatnonzero(cnt >= 150):
            p = sample.y[inv == g].mean()
            lam = expit(vals[g])
            se = np.sqrt(lam * (1 - lam) / cnt[g])
            assert abs(p - lam) <= 3 * se
            checked += 1
        assert checked >= 3

    def test_consistency_small(self):
        theta0 = Theta([1.0], [0.75, 0.25])
        ests = []
        for seed in range(6):
            spec = ModelSpec(n=100, T=3, theta0=theta0,
                             heterogeneity=AdditiveNodeDraw(loc=-1.0, scale=0.5),
                             initial=ErdosRenyiInitial(0.12))
            sim = simulate_panel(spec, seed=seed)
            cfgs = sample_configs(100, 3, 3000, seed=seed)
            sample = build_sample(sim.panel, sim.covariates, spec.registry, cfgs)
            fr = fit(sample)
            assert fr.converged and fr.grad_norm < 1e-8
            ests.append(fr.theta.vector)
        E = np.array(ests)
        dev = np.abs(E.mean(0) - theta0.vector)
        se = E.std(0, ddof=1) / np.sqrt(len(E))
        assert np.all(dev < 4 * se)  # acceptance runs the full 20-seed version


class TestRankCheck:
    def test_constant_covariates_deficient_in_alpha_block(self):
        spec = ModelSpec(
            n=40, T=2, theta0=Theta([0.5], [0.5, 0.2]),
            covariates=CovariateSpec(d_z=1, support=((1.0,),)),
            initial=ErdosRenyiInitial(0.3),
        )
        sim = simulate_panel(spec, seed=9)
        cfgs = sample_configs(40, 2, 800, seed=9)
        sample = build_sample(sim.panel, sim.covariates, spec.registry, cfgs)
        report = rank_check(sample)
        assert report.rank == 2 and not report.spanning
        with pytest.raises(PointIdentificationFailure) as exc:
            fit(sample)
        null = exc.value.null_space[:, 0]
        assert abs(abs(null[0]) - 1.0) < 1e-8  # alpha coordinate is the dead direction

    def test_family_attribution_restores_rank(self):
        # date-1 statistics vanish when the initial network is empty, so
        # date-1 tetrads alone cannot identify the lagged coefficients;
        # intertemporal comparisons pooling date 2 restore full rank
        spec = ModelSpec(n=40, T=2, theta0=Theta([1.0], [0.75, 0.25]),
                         heterogeneity=AdditiveNodeDraw(loc=-0.3, scale=0.3))
        sim = simulate_panel(spec, seed=10)
        t1 = [c for c in enumerate_configurations("within_date_tetrads", 40, 2, cap=4000, seed=1)
              if all(cell.t == 1 for cell in c.cells())]
        inter = list(enumerate_configurations("intertemporal_tetrads", 40, 2, cap=2000, seed=1))
        s_t1 = build_sample(sim.panel, sim.covariates, spec.registry, t1)
        s_all = build_sample(sim.panel, sim.covariates, spec.registry, t1 + inter)
        report = rank_check(
            s_all, by_family={"within_date_t1": s_t1, "intertemporal": s_all}
        )
        assert report.by_family["within_date_t1"] < 3
        assert report.rank == 3 and report.spanning
        assert "intertemporal" in report.restoring

    def test_duplicates_do_not_change_rank(self, additive_sim):
        sim = additive_sim
        cfgs = sample_configs(sim.spec.n, sim.spec.T, 200, seed=11)
        s = build_sample(sim.panel, sim.covariates, sim.spec.registry, cfgs)
        r1 = rank_check(s)
        r2 = rank_check(np.vstack([s.x, s.x]))
        assert r1.rank == r2.rank

    def test_default_budget(self):
        assert default_config_budget(3) == 30


class TestLatentDistance:
    def test_equal_positions_identity_holds(self):
        spec = ModelSpec(
            n=30, T=2, theta0=Theta([0.8], [0.5, 0.2]),
            heterogeneity=LatentDistance(np.linspace(-0.5, 0.5, 30), np.zeros(30)),
            initial=ErdosRenyiInitial(0.3),
        )
        sim = simulate_panel(spec, seed=12)
        cfgs = sample_configs(30, 2, 100, seed=12)
        rep = latent_distance_diagnostic(sim, cfgs, fit_sample=False)
        assert rep.max_identity_error < 1e-10
        assert np.all(rep.residuals == 0.0)

    def test_witness_residual_exactly_minus_two(self):
        spec = ModelSpec(
            n=4, T=1, theta0=Theta([0.5], [0.5, 0.2]),
            heterogeneity=LatentDistance(np.zeros(4), np.array([0.0, 1.0, 0.0, 1.0])),
            initial=ErdosRenyiInitial(0.5),
        )
        sim = simulate_panel(spec, seed=13)
        tet = SignedConfiguration(((0, 1, 1), (2, 3, 1)), ((0, 2, 1), (1, 3, 1)))
        assert latent_residual(tet, sim.xi) == -2.0
        eta = EtaRecord.from_simulation(sim)
        gap = exact_log_odds(tet, eta) - delta_W(
            tet, spec.theta0, sim.panel, sim.covariates, spec.registry
        )
        assert abs(gap - (-2.0)) < 1e-10

    def test_identity_error_matches_analytic_residual(self):
        spec = ModelSpec(
            n=60, T=3, theta0=Theta([1.0], [0.75, 0.25]),
            heterogeneity=LatentDistanceDraw(nu_loc=0.5, nu_scale=0.5, xi_scale=2.0),
            initial=ErdosRenyiInitial(0.15),
        )
        sim = simulate_panel(spec, seed=14)
        cfgs = sample_configs(60, 3, 300, seed=14)
        rep = latent_distance_diagnostic(sim, cfgs, fit_sample=False)
        assert rep.max_identity_error < 1e-10
        assert rep.frac_nonzero > 0.5

    def test_missing_xi_rejected(self, additive_sim):
        with pytest.raises(ValueError, match="xi"):
            latent_distance_diagnostic(additive_sim, [], fit_sample=False)

    def test_eta_record_probabilities_interior(self, additive_sim):
        eta = EtaRecord.from_simulation(additive_sim)
        p = expit(eta.eta)
        iu = np.triu_indices(additive_sim.spec.n, 1)
        assert np.all(p[:, iu[0], iu[1]] > 0) and np.all(p[:, iu[0], iu[1]] < 1)
