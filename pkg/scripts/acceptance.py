"""Desk-scale acceptance checks for the filters and the kernel-sum engine.

Sections:
  1. equivalence  MPF with the transition prior vs normalized likelihoods and SIR
  2. ungm         MPF vs SIR on UNGM: RMSE and weight-variance orderings over 50 seeds
  3. variance     AMPF <= ASIR, MPF <= SIR on SV; MPF < 0.5 x SIR on a flat-likelihood walk
  4. kernelsum    500 random requests, dualtree / fgt vs naive error contract
  5. bench        FGT speedup trend over N and RMSE agreement with naive
  6. properties   stratified offspring bound, multinomial unbiasedness, ESS identity

Takes a few minutes in total.

Usage:
    python scripts/acceptance.py
    python scripts/acceptance.py --only kernelsum --only properties
"""

import argparse
import os
import sys
import tempfile
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np
from dotenv import load_dotenv
from scipy import stats

load_dotenv(os.path.join(os.path.dirname(__file__), "..", ".env"))

from mpfilter.config import BenchConfig, ExperimentConfig, FilterConfig
from mpfilter.diagnostics import effective_sample_size, weight_variance
from mpfilter.experiment import run_bench, run_experiment
from mpfilter.filters import (
    ScaledTransitionProposal,
    TransitionPrior,
    initialize,
    mpf_step,
    resample_indices,
    run_filter,
)
from mpfilter.filters.particles import normalize_log_weights
from mpfilter.kernelsum import KernelSpec, KernelSumRequest, kernel_sum, naive_sum
from mpfilter.models import LinearGaussianModel, StochVolModel, UngmModel, generate_synthetic

PASS = "\033[92mPASS\033[0m"
FAIL = "\033[91mFAIL\033[0m"
passed = 0
failed = 0


def check(name: str, condition: bool, detail: str = ""):
    global passed, failed
    if condition:
        passed += 1
        print(f"  {PASS} {name}{f' ({detail})' if detail else ''}")
    else:
        failed += 1
        print(f"  {FAIL} {name}{f': {detail}' if detail else ''}")


def final_estimates(series, model, proposal, algorithm, n, seeds):
    out = []
    for seed in seeds:
        cfg = FilterConfig(n_particles=n, algorithm=algorithm, seed=seed)
        out.append(run_filter(series, model, proposal, cfg).estimates[-1, 0])
    return np.array(out)


def check_equivalence():
    print("\n1. MPF with the transition prior")
    for model in (UngmModel(), StochVolModel()):
        series = generate_synthetic(model, 20, seed=0)
        prior = TransitionPrior(model)
        for n in (1, 10, 500):
            exact = True
            for seed in range(5):
                rng = np.random.default_rng(seed)
                cfg = FilterConfig(n_particles=n, algorithm="mpf", seed=seed)
                p = initialize(series.observation(1), model, cfg, rng)
                for t in range(2, series.t_max + 1):
                    y = series.observation(t)
                    p = mpf_step(p, y, model, prior, cfg, rng)
                    lik = normalize_log_weights(model.observation_logdensity(y, p.states, t), t)
                    exact &= bool(np.allclose(p.norm_weights, lik, rtol=1e-12, atol=0.0))
            check(f"{model.name} N={n}: weights are the normalized likelihood", exact)

    model = UngmModel()
    series = generate_synthetic(model, 10, seed=1)
    prior = TransitionPrior(model)
    sir = final_estimates(series, model, prior, "sir", 100, range(200))
    mpf = final_estimates(series, model, prior, "mpf", 100, range(1000, 1200))
    p_value = stats.ks_2samp(sir, mpf).pvalue
    check("SIR and MPF final estimates share a distribution", p_value > 0.01, f"KS p={p_value:.3f}")


def check_ungm():
    print("\n2. UNGM: MPF vs SIR over 50 seeds (N=500, T=100)")
    with tempfile.TemporaryDirectory() as out:
        config = ExperimentConfig.model_validate(
            {
                "algorithms": ["sir", "mpf"],
                "filter": {"n_particles": 500},
                "n_seeds": 50,
                "output_dir": out,
                "workers": 4,
            }
        )
        result = run_experiment(config)
    by_algo = {
        algo: sorted((r for r in result.records if r.algorithm == algo), key=lambda r: r.seed)
        for algo in ("sir", "mpf")
    }
    check("no failed runs", not any(r.status == "failed" for r in result.records))
    sir_rmse = np.array([r.rmse for r in by_algo["sir"]])
    mpf_rmse = np.array([r.rmse for r in by_algo["mpf"]])
    p_rmse = stats.ttest_rel(mpf_rmse, sir_rmse, alternative="less").pvalue
    check(
        "mean RMSE(MPF) < mean RMSE(SIR), paired p < 0.05",
        mpf_rmse.mean() < sir_rmse.mean() and p_rmse < 0.05,
        f"{mpf_rmse.mean():.3f} vs {sir_rmse.mean():.3f}, p={p_rmse:.3g}",
    )
    sir_var = np.array([r.mean_weight_variance for r in by_algo["sir"]])
    mpf_var = np.array([r.mean_weight_variance for r in by_algo["mpf"]])
    check(
        "mean weight variance(MPF) < 0.5 x SIR",
        mpf_var.mean() < 0.5 * sir_var.mean(),
        f"{mpf_var.mean():.4g} vs {sir_var.mean():.4g}",
    )


def check_variance():
    print("\n3. SV, heavy proposal: marginal filters lower the weight variance (N=500, T=50)")
    model = StochVolModel()
    series = generate_synthetic(model, 50, seed=0)
    proposal = ScaledTransitionProposal(model, 2.0)
    means = {}
    for algo in ("sir", "mpf", "asir", "ampf"):
        means[algo] = np.array(
            [
                run_filter(
                    series, model, proposal, FilterConfig(n_particles=500, algorithm=algo, seed=s)
                )
                .summary()
                .mean_weight_variance
                for s in range(50)
            ]
        )
    for low, high in (("ampf", "asir"), ("mpf", "sir")):
        diff = means[low] - means[high]
        stderr = diff.std(ddof=1) / np.sqrt(diff.size)
        check(
            f"{low.upper()} <= {high.upper()} + 3 SE",
            means[low].mean() <= means[high].mean() + 3 * stderr,
            f"{means[low].mean():.4g} vs {means[high].mean():.4g}",
        )

    model = LinearGaussianModel(a=1.0, q=1.0, r=1000.0, initial_std=20.0)
    series = generate_synthetic(model, 50, seed=0)
    proposal = ScaledTransitionProposal(model, 2.0)
    walk = {
        algo: np.mean(
            [
                run_filter(
                    series, model, proposal, FilterConfig(n_particles=500, algorithm=algo, seed=s)
                )
                .summary()
                .mean_weight_variance
                for s in range(50)
            ]
        )
        for algo in ("sir", "mpf")
    }
    check(
        "random walk, flat likelihood: MPF < 0.5 x SIR",
        walk["mpf"] < 0.5 * walk["sir"],
        f"{walk['mpf']:.4g} vs {walk['sir']:.4g}",
    )


def check_kernelsum():
    print("\n4. Kernel-sum error contract (500 random requests)")
    rng = np.random.default_rng(2024)
    violations = {"dualtree": 0, "fgt": 0}
    checked = {"dualtree": 0, "fgt": 0}
    for _ in range(500):
        d = int(rng.integers(1, 3))
        m, n = (int(v) for v in rng.integers(1, 2001, size=2))
        eps = float(rng.choice([1e-3, 1e-7]))
        spread = float(rng.uniform(0.5, 10.0))
        if rng.random() < 0.75:
            kernel = KernelSpec.gaussian(rng.uniform(0.05, 2.0, size=d))
        else:
            bandwidth = float(rng.uniform(0.1, 1.0))
            kernel = KernelSpec.monotone(lambda r: 1.0 / (1.0 + r * r), bandwidth)
        req = KernelSumRequest(
            spread * rng.random((m, d)), rng.random(m), spread * rng.random((n, d)), kernel, eps
        )
        exact = naive_sum(req)
        for backend in ("dualtree", "fgt"):
            if backend == "fgt" and kernel.family != "gaussian":
                continue
            err = np.max(np.abs(kernel_sum(req, backend) - exact))
            checked[backend] += 1
            if err > req.error_bound + 1e-12 * req.total_weight:
                violations[backend] += 1
    for backend, count in violations.items():
        check(f"{backend}: zero bound violations", count == 0, f"{count}/{checked[backend]}")


def check_bench():
    print("\n5. MPF with FGT vs naive on UNGM")
    with tempfile.TemporaryDirectory() as out:
        config = BenchConfig.model_validate(
            {
                "data": {"t_max": 30},
                "n_particles": [500, 1500, 5000],
                "epsilons": [1e-3, 1e-7],
                "backends": ["naive", "fgt"],
                "n_seeds": 3,
                "output_dir": out,
            }
        )
        result = run_bench(config)
    speedups = [result.row(1e-3, n, "fgt").speedup or 0.0 for n in (500, 1500, 5000)]
    check("speedup at N=1500 >= 2", speedups[1] >= 2.0, f"{speedups[1]:.2f}x")
    check(
        "speedup increases with N",
        speedups[0] < speedups[1] < speedups[2],
        " -> ".join(f"{s:.2f}" for s in speedups),
    )
    naive = result.row(1e-7, 5000, "naive")
    fgt = result.row(1e-7, 5000, "fgt")
    spread = naive.rmse_std or 0.0
    check(
        "eps=1e-7, N=5000: |RMSE_fgt - RMSE_naive| within one seed std",
        abs(fgt.rmse - naive.rmse) <= spread,
        f"{fgt.rmse:.4f} vs {naive.rmse:.4f} (std {spread:.4f})",
    )


def check_properties():
    print("\n6. Resampling and diagnostics properties")
    rng = np.random.default_rng(7)
    bound_ok = True
    identity_ok = True
    for _ in range(10_000):
        n = int(rng.integers(1, 60))
        w = rng.dirichlet(np.full(n, float(rng.uniform(0.1, 2.0))))
        counts = np.bincount(resample_indices(w, "stratified", rng), minlength=n)
        nw = n * w
        lower = np.maximum(np.floor(nw - 1e-9) - 1, 0)
        upper = np.ceil(nw + 1e-9) + 1
        bound_ok &= bool(np.all((counts >= lower) & (counts <= upper)))
        ess, var = effective_sample_size(w), weight_variance(w)
        identity_ok &= abs(ess * (1.0 + var) - n) <= 1e-9 * n
    check("stratified offspring counts within bound", bound_ok)
    check("ess * (1 + weight_variance) == N", identity_ok)

    w = np.array([0.7, 0.3] + [0.0] * 8)
    reps = 100_000
    hits = sum(np.count_nonzero(resample_indices(w, "multinomial", rng) == 0) for _ in range(reps))
    stderr = np.sqrt(10 * 0.21 / reps)
    check("multinomial count unbiased", abs(hits / reps - 7.0) < 4 * stderr, f"{hits / reps:.4f}")


SECTIONS = {
    "equivalence": check_equivalence,
    "ungm": check_ungm,
    "variance": check_variance,
    "kernelsum": check_kernelsum,
    "bench": check_bench,
    "properties": check_properties,
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--only", action="append", choices=list(SECTIONS))
    args = parser.parse_args()

    print("=" * 60)
    print("mpfilter acceptance checks")
    print("=" * 60)
    t0 = time.monotonic()
    for name in args.only or SECTIONS:
        SECTIONS[name]()

    elapsed = time.monotonic() - t0
    print(f"\n{'=' * 60}")
    print(f"Results: {passed} passed, {failed} failed ({elapsed:.1f}s)")
    print(f"{'=' * 60}")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
