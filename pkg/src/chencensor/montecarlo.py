"""Monte Carlo study engine: canonical removal schemes, replicated
experiments, and Bias / MSE / coverage / interval-length aggregation."""
from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from . import bayes, mle
from .censoring import CensoringPlan, simulate_experiment
from .chen import ChenParams

__all__ = [
    "Scenario",
    "StudyReport",
    "build_scheme",
    "run_study",
    "paper_grid",
    "REPORT_COLUMNS",
]

SCHEME_KINDS = ("I", "II", "III", "IV")

# frozen report schema: one row per scenario x estimator x parameter x loss
REPORT_COLUMNS = (
    "n", "m", "scheme", "t1", "t2", "estimator", "parameter", "loss",
    "bias", "mse", "coverage", "avg_ci_length", "replications_used", "failures",
)


def build_scheme(kind: str, n: int, m: int) -> tuple[int, ...]:
    """Removal vector for the canonical scheme layouts I-IV."""
    if m > n:
        raise ValueError("m must not exceed n")
    r = [0] * m
    spare = n - m
    if kind == "I":
        r[m - 1] = spare
    elif kind == "II":
        r[0] = spare
    elif kind == "III":
        pos = (m + 1) // 2 if m % 2 == 1 else m // 2
        r[pos - 1] = spare
    elif kind == "IV":
        if spare % m != 0:
            raise ValueError(f"scheme IV needs m | (n-m); got n={n}, m={m}")
        r = [spare // m] * m
    else:
        raise ValueError(f"unknown scheme kind {kind!r}")
    return tuple(r)


@dataclass(frozen=True)
class Scenario:
    n: int
    m: int
    scheme: str | tuple[int, ...]
    t1: float
    t2: float
    true_params: ChenParams
    replications: int = 2000
    estimators: frozenset = frozenset({"mle"})
    prior: bayes.GammaPrior = bayes.GammaPrior()
    loss: bayes.LossParams = bayes.LossParams()
    ci_level: float = 0.95
    seed: int = 0
    # sampler sizes used per replication; smaller than the one-shot
    # analysis defaults to keep large grids tractable
    mh_chain_length: int = 2000
    mh_burn_in: int = 500
    is_draws: int = 2000

    def plan(self) -> CensoringPlan:
        removals = (build_scheme(self.scheme, self.n, self.m)
                    if isinstance(self.scheme, str) else tuple(self.scheme))
        return CensoringPlan(n=self.n, m=self.m, removals=removals, t1=self.t1, t2=self.t2)

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        bad = set(self.estimators) - {"mle", "mh", "is"}
        if bad:
            raise ValueError(f"unknown estimators: {sorted(bad)}")
        self.plan()  # validate scheme/plan eagerly


@dataclass
class StudyReport:
    scenario: Scenario
    rows: list[dict] = field(default_factory=list)
    case_frequencies: dict[int, float] = field(default_factory=dict)
    failures: dict[str, int] = field(default_factory=dict)

    def to_rows(self) -> list[dict]:
        scn = self.scenario
        scheme = scn.scheme if isinstance(scn.scheme, str) else "custom"
        out = []
        for row in self.rows:
            flat = {
                "n": scn.n, "m": scn.m, "scheme": scheme,
                "t1": scn.t1, "t2": scn.t2,
            }
            flat.update(row)
            out.append({k: flat.get(k) for k in REPORT_COLUMNS})
        return out


def _one_replication(scn: Scenario, plan: CensoringPlan, rep: int) -> dict:
    """Simulate and estimate once; per-replication counter-based RNG stream."""
    rng = np.random.default_rng([scn.seed, rep])
    sample = simulate_experiment(plan, scn.true_params, rng)
    out: dict = {"case": sample.case.value}
    fit_result = None
    if scn.estimators & {"mle", "mh"}:
        try:
            fit_result = mle.fit(sample)
        except (mle.DegenerateSampleError, mle.NoRootError):
            fit_result = None
    if "mle" in scn.estimators:
        if fit_result is None:
            out["mle"] = None
        else:
            ci = mle.confidence_intervals(fit_result, scn.ci_level)
            out["mle"] = {
                "alpha": fit_result.params_hat.alpha,
                "beta": fit_result.params_hat.beta,
                "alpha_ci": ci.alpha_interval,
                "beta_ci": ci.beta_interval,
            }
    if "mh" in scn.estimators:
        if fit_result is None:
            out["mh"] = None
        else:
            cfg = bayes.MhConfig(
                chain_length=scn.mh_chain_length,
                burn_in=scn.mh_burn_in,
                init=fit_result.params_hat,
                seed=int(rng.integers(2**63)),
            )
            chains = bayes.run_mh_gibbs(sample, scn.prior, cfg)
            est = bayes.loss_estimates(chains, scn.loss)
            out["mh"] = {"alpha": est.alpha, "beta": est.beta}
    if "is" in scn.estimators:
        try:
            draws = bayes.importance_sample(
                sample, scn.prior,
                bayes.IsConfig(draws=scn.is_draws, seed=int(rng.integers(2**63))))
            est = bayes.loss_estimates(draws, scn.loss)
            out["is"] = {"alpha": est.alpha, "beta": est.beta}
        except bayes.ProposalInvalidError:
            out["is"] = None
    return out


def _aggregate(scn: Scenario, results: list[dict]) -> StudyReport:
    report = StudyReport(scenario=scn)
    n_rep = len(results)
    cases = np.array([r["case"] for r in results])
    report.case_frequencies = {c: float(np.mean(cases == c)) for c in (1, 2, 3)}
    truth = {"alpha": scn.true_params.alpha, "beta": scn.true_params.beta}

    for estimator in sorted(scn.estimators):
        ok = [r[estimator] for r in results if r[estimator] is not None]
        report.failures[estimator] = n_rep - len(ok)
        if not ok:
            continue
        if estimator == "mle":
            for param in ("alpha", "beta"):
                est = np.array([r[param] for r in ok])
                ci = np.array([r[f"{param}_ci"] for r in ok])
                covered = (ci[:, 0] <= truth[param]) & (truth[param] <= ci[:, 1])
                report.rows.append({
                    "estimator": estimator, "parameter": param, "loss": "none",
                    "bias": float(np.mean(est) - truth[param]),
                    "mse": float(np.mean((est - truth[param]) ** 2)),
                    "coverage": float(np.mean(covered)),
                    "avg_ci_length": float(np.mean(ci[:, 1] - ci[:, 0])),
                    "replications_used": len(ok),
                    "failures": report.failures[estimator],
                })
        else:
            for param in ("alpha", "beta"):
                for loss_name in bayes.LOSSES:
                    est = np.array([r[param][loss_name] for r in ok])
                    report.rows.append({
                        "estimator": estimator, "parameter": param, "loss": loss_name,
                        "bias": float(np.mean(est) - truth[param]),
                        "mse": float(np.mean((est - truth[param]) ** 2)),
                        "coverage": None,
                        "avg_ci_length": None,
                        "replications_used": len(ok),
                        "failures": report.failures[estimator],
                    })
    if all(report.failures.get(e, 0) == n_rep for e in scn.estimators):
        raise RuntimeError("every replication failed for every estimator")
    return report


def run_study(scn: Scenario, workers: int = 1) -> StudyReport:
    """Replicate the scenario and aggregate bias/MSE (and CI metrics for MLE)."""
    plan = scn.plan()
    reps = range(scn.replications)
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_replication, [scn] * scn.replications,
                                    [plan] * scn.replications, reps, chunksize=16))
    else:
        results = [_one_replication(scn, plan, rep) for rep in reps]
    return _aggregate(scn, results)


def paper_grid(replications: int = 2000, seed: int = 0,
               estimators: frozenset = frozenset({"mle", "mh", "is"})) -> list[Scenario]:
    """The 3 sizes x 4 schemes x 2 threshold-pair study grid."""
    scenarios = []
    for n, m in ((15, 5), (20, 10), (30, 15)):
        for kind in SCHEME_KINDS:
            for t1, t2 in ((0.4, 4.0), (1.0, 7.0)):
                scenarios.append(Scenario(
                    n=n, m=m, scheme=kind, t1=t1, t2=t2,
                    true_params=ChenParams(0.2, 0.5),
                    replications=replications,
                    estimators=estimators,
                    prior=bayes.GammaPrior(2.0, 2.0, 2.0, 2.0),
                    loss=bayes.LossParams(g=1.0, q=1.0),
                    seed=seed,
                ))
    return scenarios
