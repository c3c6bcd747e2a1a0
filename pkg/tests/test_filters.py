"""Tests for particle sets, resampling, the four step operations and run_filter."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import filter_config, weighted_set
from mpfilter.diagnostics import weight_variance
from mpfilter.filters import (
    DegenerateSimulationWeightsError,
    DegenerateWeightsError,
    FilterRunError,
    KernelBackendError,
    OptimalProposal,
    ParticleSet,
    ScaledTransitionProposal,
    TransitionPrior,
    ampf_step,
    asir_step,
    build_proposal,
    compute_simulation_weights,
    initialize,
    mpf_step,
    resample,
    resample_indices,
    run_filter,
    sir_step,
)
from mpfilter.filters.particles import normalize_log_weights
from mpfilter.models import LinearGaussianModel, StateSpaceModel, UngmModel, generate_synthetic

ALL_STEPS = [sir_step, asir_step, mpf_step, ampf_step]


class FlatLikelihoodUngm(UngmModel):
    """UNGM dynamics with p(y | x) constant in x."""

    def observation_logdensity(self, y, x, t):
        return np.zeros(np.asarray(x).shape[:-1])


class TableModel(StateSpaceModel):
    """Identity dynamics; p(y | x) = x for x in (0, 1]. Only the pieces the
    simulation-weight tests touch are meaningful."""

    def sample_initial(self, rng, n):
        return rng.random((n, 1))

    def sample_transition(self, rng, x_prev, t):
        return np.asarray(x_prev, dtype=float).copy()

    def transition_logdensity(self, x_t, x_prev, t):
        return np.zeros(np.broadcast(np.asarray(x_t), np.asarray(x_prev)).shape[:-1])

    def observation_logdensity(self, y, x, t):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(x, dtype=float)).sum(axis=-1)

    def sample_observation(self, rng, x, t):
        return np.asarray(x, dtype=float)

    def transition_representative(self, x_prev, t):
        return np.asarray(x_prev, dtype=float)


def _likelihood_weights(model, y, particles):
    loglik = model.observation_logdensity(y, particles.states, particles.time_index)
    return normalize_log_weights(loglik, particles.time_index)


# ---------------------------------------------------------------------------
# ParticleSet
# ---------------------------------------------------------------------------


def test_particle_set_normalizes_large_log_weights():
    p = ParticleSet.from_log_weights(np.zeros((3, 1)), np.array([1000.0, 1001.0, 999.0]), 4)
    assert p.norm_weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(p.norm_weights >= 0)
    expected = np.exp([-1.0, 0.0, -2.0]) / np.exp([-1.0, 0.0, -2.0]).sum()
    np.testing.assert_allclose(p.norm_weights, expected, rtol=1e-12)


def test_particle_set_all_zero_weights_is_an_error():
    with pytest.raises(DegenerateWeightsError, match="t=5") as info:
        ParticleSet.from_log_weights(np.zeros((2, 1)), np.array([-np.inf, -np.inf]), 5)
    assert info.value.t == 5


def test_particle_set_rejects_nan():
    with pytest.raises(DegenerateWeightsError):
        ParticleSet.from_log_weights(np.zeros((2, 1)), np.array([0.0, np.nan]), 1)


def test_particle_set_mean_and_ess(rng):
    p = ParticleSet.from_log_weights(np.array([[1.0], [3.0]]), np.log([0.25, 0.75]), 1)
    assert p.mean()[0] == pytest.approx(2.5)
    assert p.ess == pytest.approx(1.0 / (0.25**2 + 0.75**2))


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def test_stratified_uniform_weights_is_a_permutation(rng):
    idx = resample_indices(np.full(64, 1 / 64), "stratified", rng)
    np.testing.assert_array_equal(np.sort(idx), np.arange(64))


@pytest.mark.parametrize("scheme", ["stratified", "multinomial"])
def test_point_mass_resamples_to_copies(rng, scheme):
    p = ParticleSet.from_log_weights(
        np.arange(4.0)[:, None], np.array([0.0, -np.inf, -np.inf, -np.inf]), 2
    )
    out = resample(p, scheme, rng)
    np.testing.assert_array_equal(out.states[:, 0], np.zeros(4))
    np.testing.assert_allclose(out.norm_weights, 0.25)
    np.testing.assert_array_equal(out.ancestors, 0)


def test_stratified_offspring_count_bound(rng):
    for _ in range(2000):
        n = int(rng.integers(1, 40))
        w = rng.dirichlet(np.full(n, 0.5))
        counts = np.bincount(resample_indices(w, "stratified", rng), minlength=n)
        nw = n * w
        lower = np.maximum(np.floor(nw - 1e-9) - 1, 0)
        upper = np.ceil(nw + 1e-9) + 1
        assert np.all(counts >= lower) and np.all(counts <= upper)
        assert counts.sum() == n


@pytest.mark.parametrize("scheme", ["multinomial", "stratified"])
def test_resampled_counts_are_unbiased(rng, scheme):
    w = np.array([0.7, 0.3] + [0.0] * 8)
    reps = 20000
    total = sum(np.count_nonzero(resample_indices(w, scheme, rng) == 0) for _ in range(reps))
    mean = total / reps
    stderr = math.sqrt(10 * 0.7 * 0.3 / reps)
    assert abs(mean - 7.0) < 4 * stderr


def test_unknown_scheme(rng):
    with pytest.raises(ValueError, match="scheme"):
        resample_indices(np.ones(2) / 2, "systematic", rng)


# ---------------------------------------------------------------------------
# Single steps
# ---------------------------------------------------------------------------


def test_sir_with_prior_weights_are_the_likelihood(ungm, rng):
    prev = weighted_set(rng, 200)
    y = np.array([2.0])
    out = sir_step(prev, y, ungm, TransitionPrior(ungm), filter_config(), rng)
    np.testing.assert_allclose(out.norm_weights, _likelihood_weights(ungm, y, out), rtol=1e-12)
    assert out.time_index == 2


@pytest.mark.parametrize("model_name", ["ungm", "stochvol"])
@pytest.mark.parametrize("n", [1, 10, 500])
def test_mpf_with_prior_weights_are_the_likelihood(request, rng, model_name, n):
    model = request.getfixturevalue(model_name)
    prev = weighted_set(rng, n, spread=1.0)
    y = np.array([0.8])
    out = mpf_step(prev, y, model, TransitionPrior(model), filter_config(), rng)
    np.testing.assert_allclose(out.norm_weights, _likelihood_weights(model, y, out), rtol=1e-12)
    assert out.norm_weights.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("step", ALL_STEPS)
def test_single_particle_has_unit_weight(ungm, rng, step):
    prev = ParticleSet.uniform(np.array([[0.3]]), 1)
    proposal = ScaledTransitionProposal(ungm, 2.0)
    out = step(prev, np.array([5.0]), ungm, proposal, filter_config(), rng)
    np.testing.assert_array_equal(out.norm_weights, [1.0])


@pytest.mark.parametrize("step", [sir_step, asir_step])
def test_flat_likelihood_with_prior_gives_uniform_weights(rng, step):
    model = FlatLikelihoodUngm()
    prev = ParticleSet.uniform(rng.standard_normal((50, 1)), 1)
    out = step(prev, np.array([1.0]), model, TransitionPrior(model), filter_config(), rng)
    np.testing.assert_allclose(out.norm_weights, 1 / 50, rtol=1e-12)


def test_sir_without_resampling_carries_weights(ungm, rng):
    prev = weighted_set(rng, 30)
    y = np.array([1.0])
    out = sir_step(prev, y, ungm, TransitionPrior(ungm), filter_config(resample_threshold=0.0), rng)
    np.testing.assert_array_equal(out.ancestors, np.arange(30))
    expected = normalize_log_weights(
        prev.log_norm_weights + ungm.observation_logdensity(y, out.states, 2), 2
    )
    np.testing.assert_allclose(out.norm_weights, expected, rtol=1e-12)


def test_sir_adaptive_resamples_only_below_threshold(ungm, rng):
    uniform = ParticleSet.uniform(rng.standard_normal((40, 1)), 1)
    cfg = filter_config(resample_threshold=0.5)
    out = sir_step(uniform, np.array([1.0]), ungm, TransitionPrior(ungm), cfg, rng)
    np.testing.assert_array_equal(out.ancestors, np.arange(40))


# ---------------------------------------------------------------------------
# Simulation weights
# ---------------------------------------------------------------------------


def test_simulation_weights_arithmetic():
    prev = ParticleSet.uniform(np.array([[0.2], [0.8]]), 1)
    sim = compute_simulation_weights(prev, np.array([0.0]), TableModel())
    np.testing.assert_allclose(sim.lam, [0.2, 0.8], rtol=1e-12)
    np.testing.assert_array_equal(sim.representatives, prev.states)


def test_simulation_weights_constant_likelihood_equals_prev_weights(rng):
    prev = weighted_set(rng, 25)
    sim = compute_simulation_weights(prev, np.array([0.0]), FlatLikelihoodUngm())
    np.testing.assert_allclose(sim.lam, prev.norm_weights, rtol=1e-12)
    assert sim.lam.sum() == pytest.approx(1.0, abs=1e-12)


def test_simulation_weights_concentrate_on_single_live_particle():
    prev = ParticleSet.from_log_weights(
        np.array([[0.5], [0.6], [0.7]]), np.array([-np.inf, 0.0, -np.inf]), 1
    )
    sim = compute_simulation_weights(prev, np.array([0.0]), TableModel())
    np.testing.assert_array_equal(sim.lam, [0.0, 1.0, 0.0])


def test_simulation_weights_all_zero_is_an_error():
    prev = ParticleSet.uniform(np.array([[0.0], [0.0]]), 3)
    with pytest.raises(DegenerateSimulationWeightsError, match="t=4"):
        compute_simulation_weights(prev, np.array([0.0]), TableModel())


# ---------------------------------------------------------------------------
# Exact cases
# ---------------------------------------------------------------------------


def test_asir_optimal_proposal_exact_lookahead_has_zero_variance(linear_gaussian, rng):
    prev = weighted_set(rng, 300, spread=2.0)
    proposal = OptimalProposal(linear_gaussian)
    out = asir_step(prev, np.array([1.4]), linear_gaussian, proposal, filter_config(), rng)
    assert weight_variance(out.norm_weights) < 1e-20


def test_ampf_optimal_proposal_exact_lookahead_has_zero_variance(linear_gaussian, rng):
    prev = weighted_set(rng, 300, spread=2.0)
    proposal = OptimalProposal(linear_gaussian)
    out = ampf_step(prev, np.array([-0.6]), linear_gaussian, proposal, filter_config(), rng)
    assert weight_variance(out.norm_weights) < 1e-12


def test_ampf_flat_likelihood_uses_prev_weights_as_mixture(rng):
    model = FlatLikelihoodUngm()
    prev = weighted_set(rng, 60)
    proposal = ScaledTransitionProposal(model, 2.0)
    y = np.array([0.0])
    a = ampf_step(prev, y, model, proposal, filter_config(), np.random.default_rng(9))
    m = mpf_step(prev, y, model, proposal, filter_config(), np.random.default_rng(9))
    np.testing.assert_allclose(a.states, m.states)
    np.testing.assert_allclose(a.norm_weights, m.norm_weights, rtol=1e-10)


# ---------------------------------------------------------------------------
# Kernel backends inside MPF / AMPF
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("step", [mpf_step, ampf_step])
@pytest.mark.parametrize("backend", ["fgt", "dualtree"])
def test_fast_backends_match_naive_weights(ungm, step, backend):
    prev = weighted_set(np.random.default_rng(1), 200)
    proposal = ScaledTransitionProposal(ungm, 2.0)
    y = np.array([1.5])
    naive = step(prev, y, ungm, proposal, filter_config(), np.random.default_rng(2))
    fast = step(
        prev,
        y,
        ungm,
        proposal,
        filter_config(kernel_backend=backend, epsilon=1e-7),
        np.random.default_rng(2),
    )
    np.testing.assert_array_equal(fast.states, naive.states)
    np.testing.assert_allclose(fast.norm_weights, naive.norm_weights, atol=1e-5)


def test_fast_backend_without_gaussian_transition_is_rejected(rng):
    model = UngmModel(sigma_x=0.0)
    prev = weighted_set(rng, 10)
    cfg = filter_config(kernel_backend="fgt")
    with pytest.raises(KernelBackendError, match="fgt"):
        mpf_step(prev, np.array([1.0]), model, TransitionPrior(model), cfg, rng)


def test_naive_backend_handles_non_gaussian_transition(rng):
    model = UngmModel(sigma_x=0.0, initial_std=1.0)
    prev = weighted_set(rng, 10)
    out = mpf_step(prev, np.array([1.0]), model, TransitionPrior(model), filter_config(), rng)
    assert out.norm_weights.sum() == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# Proposals
# ---------------------------------------------------------------------------


def test_heavy_proposal_covers_target_support(ungm):
    proposal = ScaledTransitionProposal(ungm, 2.0)
    grid = np.linspace(-30, 30, 121)[:, None]
    x_prev = np.full_like(grid, 1.3)
    y = np.array([2.0])
    target = ungm.transition_logdensity(grid, x_prev, 3) + ungm.observation_logdensity(y, grid, 3)
    q = proposal.logdensity(grid, y, x_prev, 3)
    assert np.all(np.isfinite(q[np.isfinite(target)]))


def test_heavy_proposal_density_matches_its_gaussian_form(ungm):
    proposal = ScaledTransitionProposal(ungm, 2.0)
    x_prev = np.array([[0.4], [2.0]])
    form = proposal.gaussian_form(None, x_prev, 2)
    np.testing.assert_allclose(form.scale, [2.0 * ungm.sigma_x])
    x = np.array([[1.0], [-1.0]])
    expected = -0.5 * ((x - form.centers) / form.scale) ** 2 + form.log_normalizer
    np.testing.assert_allclose(proposal.logdensity(x, None, x_prev, 2), expected[:, 0])


def test_build_proposal_rejects_unknown_and_unsupported(ungm):
    with pytest.raises(ValueError, match="unknown"):
        build_proposal("cauchy", ungm)
    with pytest.raises(ValueError, match="optimal"):
        build_proposal("optimal", ungm)
    with pytest.raises(ValueError, match="Gaussian"):
        ScaledTransitionProposal(UngmModel(sigma_x=0.0))


# ---------------------------------------------------------------------------
# run_filter
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("algorithm", ["sir", "asir", "mpf", "ampf"])
def test_zero_noise_filter_tracks_truth(algorithm):
    model = UngmModel(sigma_x=0.0, sigma_y=1.0, initial_mean=0.7, initial_std=0.0)
    series = generate_synthetic(model, 15, seed=4)
    cfg = filter_config(algorithm=algorithm, n_particles=20)
    trace = run_filter(series, model, TransitionPrior(model), cfg)
    np.testing.assert_allclose(trace.estimates, series.ground_truth, rtol=1e-12, atol=1e-12)
    assert trace.summary().rmse == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize("algorithm", ["sir", "asir", "mpf", "ampf"])
def test_run_filter_is_deterministic(ungm, ungm_series, algorithm):
    proposal = ScaledTransitionProposal(ungm, 2.0)
    cfg = filter_config(algorithm=algorithm, n_particles=50, seed=3)
    a = run_filter(ungm_series, ungm, proposal, cfg)
    b = run_filter(ungm_series, ungm, proposal, cfg)
    c = run_filter(ungm_series, ungm, proposal, cfg.model_copy(update={"seed": 4}))
    np.testing.assert_array_equal(a.estimates, b.estimates)
    assert [s.unique_particles for s in a.steps] == [s.unique_particles for s in b.steps]
    assert not np.array_equal(a.estimates, c.estimates)


def test_run_filter_diagnostics_are_in_range(stochvol, stochvol_series):
    cfg = filter_config(algorithm="ampf", n_particles=80)
    trace = run_filter(stochvol_series, stochvol, ScaledTransitionProposal(stochvol), cfg)
    assert len(trace.steps) == stochvol_series.t_max
    for t, s in enumerate(trace.steps, start=1):
        assert s.t == t
        assert 1.0 - 1e-9 <= s.ess <= 80 + 1e-9
        assert 1 <= s.unique_particles <= 80
        assert s.weight_variance >= 0.0
        assert s.step_wallclock >= 0.0
    assert trace.final is not None and trace.final.time_index == stochvol_series.t_max


def test_mpf_weight_variance_below_sir_with_heavy_proposal(ungm, ungm_series):
    proposal = ScaledTransitionProposal(ungm, 2.0)
    sir, mpf = [], []
    for seed in range(3):
        for algo, out in (("sir", sir), ("mpf", mpf)):
            cfg = filter_config(algorithm=algo, n_particles=200, seed=seed)
            out.append(run_filter(ungm_series, ungm, proposal, cfg).summary().mean_weight_variance)
    assert np.mean(mpf) < np.mean(sir)


def test_mpf_weight_variance_under_half_of_sir_when_proposal_dominates():
    """Flat likelihood, widely spread particles, heavy proposal: SIR keeps the
    full p/q variance while the mixture ratio is nearly constant."""
    model = LinearGaussianModel(a=1.0, q=1.0, r=1000.0, initial_std=20.0)
    series = generate_synthetic(model, 10, seed=2)
    proposal = ScaledTransitionProposal(model, 2.0)
    means = {}
    for algo in ("sir", "mpf"):
        means[algo] = np.mean(
            [
                run_filter(series, model, proposal, filter_config(algorithm=algo, seed=seed))
                .summary()
                .mean_weight_variance
                for seed in range(3)
            ]
        )
    assert means["mpf"] < 0.5 * means["sir"]


def test_filter_draws_are_independent_of_the_data_draws(ungm):
    series = generate_synthetic(ungm, 1, seed=5)
    cfg = filter_config(n_particles=500, seed=5)
    trace = run_filter(series, ungm, TransitionPrior(ungm), cfg)
    assert not np.any(trace.final.states[:, 0] == series.ground_truth[0, 0])


def test_run_filter_reports_failing_timestep():
    model = UngmModel(sigma_x=1.0, sigma_y=0.0)
    series = generate_synthetic(model, 3, seed=0)
    with pytest.raises(FilterRunError, match="t=1") as info:
        run_filter(series, model, TransitionPrior(model), filter_config(algorithm="mpf"))
    assert info.value.t == 1
    assert info.value.algorithm == "mpf"
    assert isinstance(info.value.__cause__, DegenerateWeightsError)


def test_run_filter_wraps_backend_errors_with_timestep():
    model = UngmModel(sigma_x=0.0, initial_std=1.0)
    series = generate_synthetic(model, 4, seed=0)
    cfg = filter_config(algorithm="mpf", kernel_backend="dualtree")
    with pytest.raises(FilterRunError) as info:
        run_filter(series, model, TransitionPrior(model), cfg)
    assert info.value.t == 2
    assert isinstance(info.value.__cause__, KernelBackendError)


def test_initialize_uses_likelihood_weights(ungm, rng):
    y = np.array([3.0])
    p = initialize(y, ungm, filter_config(n_particles=40), rng)
    np.testing.assert_allclose(p.norm_weights, _likelihood_weights(ungm, y, p), rtol=1e-12)
    np.testing.assert_array_equal(p.ancestors, np.arange(40))
