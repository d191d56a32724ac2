"""Posterior kernel identities, sampler exactness, and loss estimators."""
import numpy as np
import pytest
from scipy import integrate, stats

from chencensor import bayes, mle
from chencensor.censoring import CensoringPlan, classify, load_sample
from chencensor.chen import ChenParams

PRIOR = bayes.GammaPrior(2.0, 2.0, 2.0, 2.0)


def scaled_device_sample(devices30, m=15):
    """A censored sample whose times all sit inside (0, 1).

    Scaling keeps sum(ln x) negative so the importance proposal is valid.
    """
    times = np.sort(devices30)[:m] / 10.0
    plan = CensoringPlan(n=30, m=m, removals=(1,) * m, t1=0.15, t2=0.7)
    return load_sample(times, plan)


class TestKernel:
    def test_kernel_is_loglik_plus_log_prior(self, all_case_samples):
        """The joint kernel differs from loglik + gamma log-prior kernels by
        a parameter-free constant."""
        rng = np.random.default_rng(1)
        for s in all_case_samples:
            offsets = []
            scale = 1.0
            for _ in range(10):
                p = ChenParams(float(rng.uniform(0.05, 2.0)), float(rng.uniform(0.2, 2.0)))
                prior_kernel = ((PRIOR.a - 1) * np.log(p.alpha) - PRIOR.b * p.alpha
                                + (PRIOR.c - 1) * np.log(p.beta) - PRIOR.d * p.beta)
                offsets.append(bayes.log_posterior_kernel(p, s, PRIOR)
                               - mle.log_likelihood(p, s) - prior_kernel)
                # the cancelling alpha*nu terms bound the roundoff floor
                scale = max(scale, p.alpha * mle.nu(s, p.beta))
            assert np.ptp(offsets) < 1e-12 * scale + 1e-10


class TestGibbsAlpha:
    def test_draws_match_gamma_conditional(self, sample_case2):
        s = sample_case2
        beta = 0.8
        rng = np.random.default_rng(7)
        draws = np.array([bayes.gibbs_draw_alpha(s, beta, PRIOR, rng)
                          for _ in range(20000)])
        shape = s.d2 + PRIOR.a
        rate = PRIOR.b + mle.nu(s, beta)
        _, pval = stats.kstest(draws, stats.gamma(shape, scale=1.0 / rate).cdf)
        assert pval > 0.01


class TestMhBeta:
    def test_chain_matches_quadrature_conditional(self, sample_case2):
        """Empirical cdf of the beta MH chain at fixed alpha vs the
        normalized full-conditional computed by quadrature."""
        s = sample_case2
        alpha = 0.4
        sum_lnx = float(np.sum(np.log(s.times)))
        rng = np.random.default_rng(3)
        beta = 0.8
        draws = np.empty(40000)
        for i in range(draws.size):
            beta, _ = bayes.mh_step_beta(s, alpha, beta, PRIOR, 0.25, rng)
            draws[i] = beta
        draws = draws[5000:]

        def kernel(b):
            return np.exp(bayes._beta_logkernel(s, alpha, b, PRIOR, sum_lnx))

        z, _ = integrate.quad(kernel, 1e-6, 20.0, limit=200)
        grid = np.quantile(draws, np.linspace(0.05, 0.95, 19))
        for g in grid:
            target, _ = integrate.quad(kernel, 1e-6, g, limit=200)
            assert np.mean(draws <= g) == pytest.approx(target / z, abs=0.02)

    def test_rejects_nonpositive_current(self, sample_case1):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            bayes.mh_step_beta(sample_case1, 0.4, -1.0, PRIOR, 0.1, rng)


class TestRunMhGibbs:
    def test_deterministic_given_seed(self, devices30):
        s = scaled_device_sample(devices30)
        cfg = bayes.MhConfig(chain_length=500, burn_in=100, seed=11)
        a = bayes.run_mh_gibbs(s, PRIOR, cfg)
        b = bayes.run_mh_gibbs(s, PRIOR, cfg)
        np.testing.assert_array_equal(a.alpha, b.alpha)
        np.testing.assert_array_equal(a.beta, b.beta)
        assert a.acceptance_rate == b.acceptance_rate

    def test_loop_agrees_with_single_steps(self, devices30):
        """The vectorized chain must follow the same law as the reference
        one-step functions; compare posterior means loosely."""
        s = scaled_device_sample(devices30)
        cfg = bayes.MhConfig(chain_length=4000, burn_in=1000, seed=5)
        chains = bayes.run_mh_gibbs(s, PRIOR, cfg)
        rng = np.random.default_rng(17)
        init = mle.fit(s).params_hat
        sd = max(0.1 * abs(init.beta), 0.01)
        alpha, beta = init.alpha, init.beta
        ref_a, ref_b = [], []
        for _ in range(4000):
            alpha = bayes.gibbs_draw_alpha(s, beta, PRIOR, rng)
            beta, _ = bayes.mh_step_beta(s, alpha, beta, PRIOR, sd, rng)
            ref_a.append(alpha)
            ref_b.append(beta)
        assert np.mean(chains.alpha[1000:]) == pytest.approx(
            np.mean(ref_a[1000:]), abs=0.15)
        assert np.mean(chains.beta[1000:]) == pytest.approx(
            np.mean(ref_b[1000:]), abs=0.15)

    def test_posterior_concentrates_with_data(self):
        """With n=500 complete observations the posterior mean sits near truth."""
        truth = ChenParams(0.2, 0.5)
        rng = np.random.default_rng(23)
        from chencensor.chen import sample as chen_sample
        x = chen_sample(truth, rng, 500)
        plan = CensoringPlan(n=500, m=500, removals=(0,) * 500, t1=1e12, t2=2e12)
        s = load_sample(x, plan)
        chains = bayes.run_mh_gibbs(s, PRIOR, bayes.MhConfig(chain_length=4000,
                                                             burn_in=1000, seed=2))
        assert np.mean(chains.alpha[1000:]) == pytest.approx(truth.alpha, abs=0.05)
        assert np.mean(chains.beta[1000:]) == pytest.approx(truth.beta, abs=0.05)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            bayes.MhConfig(chain_length=100, burn_in=100)
        with pytest.raises(ValueError):
            bayes.MhConfig(proposal_sd=-0.1)


class TestImportanceSampling:
    def test_refuses_invalid_proposal(self, devices30):
        """sum(ln x) above the prior rate d breaks the beta proposal."""
        plan = CensoringPlan(n=30, m=30, removals=(0,) * 30, t1=1e12, t2=2e12)
        s = load_sample(devices30, plan)
        assert float(np.sum(np.log(s.times))) > PRIOR.d
        with pytest.raises(bayes.ProposalInvalidError):
            bayes.importance_sample(s, PRIOR, bayes.IsConfig(draws=100, seed=0))

    def test_weights_normalize_and_ess(self, devices30):
        s = scaled_device_sample(devices30)
        draws = bayes.importance_sample(s, PRIOR, bayes.IsConfig(draws=5000, seed=9))
        w = np.exp(draws.log_weight)
        w /= w.sum()
        assert w.sum() == pytest.approx(1.0, rel=1e-12)
        result = bayes.loss_estimates(draws)
        ess = result.diagnostics["effective_sample_size"]
        assert ess == pytest.approx(1.0 / np.max(w), rel=1e-9)
        assert 1.0 <= ess <= draws.alpha.size

    def test_deterministic_given_seed(self, devices30):
        s = scaled_device_sample(devices30)
        a = bayes.importance_sample(s, PRIOR, bayes.IsConfig(draws=1000, seed=4))
        b = bayes.importance_sample(s, PRIOR, bayes.IsConfig(draws=1000, seed=4))
        np.testing.assert_array_equal(a.log_weight, b.log_weight)

    def test_both_samplers_match_quadrature_truth(self, devices30):
        """Posterior means by quadrature: alpha integrates out in closed
        form, leaving a one-dimensional marginal in beta."""
        from scipy.special import gammaln

        s = scaled_device_sample(devices30)
        sum_lnx = float(np.sum(np.log(s.times)))
        shape_a = s.d2 + PRIOR.a

        def log_marginal_beta(b):
            return (gammaln(shape_a) - shape_a * np.log(PRIOR.b + mle.nu(s, b))
                    + (s.d2 + PRIOR.c - 1) * np.log(b)
                    - b * (PRIOR.d - sum_lnx) + float(np.sum(s.times**b)))

        bs = np.linspace(1e-4, 15.0, 20001)
        logw = np.array([log_marginal_beta(b) for b in bs])
        w = np.exp(logw - logw.max())
        z = np.trapezoid(w, bs)
        truth_beta = float(np.trapezoid(w * bs, bs) / z)
        cond_alpha = np.array([shape_a / (PRIOR.b + mle.nu(s, b)) for b in bs])
        truth_alpha = float(np.trapezoid(w * cond_alpha, bs) / z)

        chains = bayes.run_mh_gibbs(s, PRIOR, bayes.MhConfig(chain_length=11000,
                                                             burn_in=1000, seed=21))
        mh = bayes.loss_estimates(chains)
        assert mh.beta["sel"] == pytest.approx(truth_beta, abs=0.03)
        assert mh.alpha["sel"] == pytest.approx(truth_alpha, abs=0.1)

        # the importance sampler is unbiased but weight-degenerate on this
        # dataset (small effective sample size), hence the loose tolerance
        draws = bayes.importance_sample(s, PRIOR, bayes.IsConfig(draws=10000, seed=22))
        is_ = bayes.loss_estimates(draws)
        assert is_.beta["sel"] == pytest.approx(truth_beta, abs=0.15)
        assert is_.alpha["sel"] == pytest.approx(truth_alpha, abs=0.3)


@pytest.fixture(scope="module")
def chains(devices30):
    s = scaled_device_sample(devices30)
    return bayes.run_mh_gibbs(s, PRIOR, bayes.MhConfig(chain_length=6000,
                                                       burn_in=1000, seed=31))


class TestLossEstimates:
    def test_linex_approaches_sel_for_small_g(self, chains):
        res = bayes.loss_estimates(chains, bayes.LossParams(g=1e-6, q=1.0))
        for est in (res.alpha, res.beta):
            assert abs(est["linex"] - est["sel"]) < 1e-4 * est["sel"]

    def test_entropy_with_q_minus_one_equals_sel(self, chains):
        res = bayes.loss_estimates(chains, bayes.LossParams(g=1.0, q=-1.0))
        assert res.alpha["entropy"] == res.alpha["sel"]
        assert res.beta["entropy"] == res.beta["sel"]

    def test_jensen_orderings(self, chains):
        res = bayes.loss_estimates(chains, bayes.LossParams(g=1.0, q=1.0))
        for est in (res.alpha, res.beta):
            assert est["linex"] <= est["sel"]
            assert est["entropy"] <= est["sel"]

    def test_negative_g_reverses_linex_ordering(self, chains):
        res = bayes.loss_estimates(chains, bayes.LossParams(g=-1.0, q=1.0))
        for est in (res.alpha, res.beta):
            assert est["linex"] >= est["sel"]

    def test_loss_params_validation(self):
        with pytest.raises(ValueError):
            bayes.LossParams(g=0.0)
        with pytest.raises(ValueError):
            bayes.LossParams(q=0.0)

    def test_prior_dominates_without_data_weight(self, sample_case3):
        """As the prior tightens, the posterior mean moves to the prior mean."""
        s = sample_case3
        means = []
        for scale in (1.0, 50.0, 2000.0):
            prior = bayes.GammaPrior(3.0 * scale, 2.0 * scale, 2.0, 2.0)
            chains = bayes.run_mh_gibbs(s, prior, bayes.MhConfig(chain_length=4000,
                                                                 burn_in=500, seed=8))
            means.append(float(np.mean(chains.alpha[500:])))
        gaps = [abs(mu - 1.5) for mu in means]
        assert gaps[2] < gaps[1] < gaps[0] + 0.05
        assert gaps[2] < 0.03
