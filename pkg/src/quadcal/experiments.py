"""Experiment drivers: analytic Beta case, Genz calibration studies, and
the toy calibration pipeline, with run persistence.

Every run directory contains a config snapshot (config.json), a JSON-lines
iteration log (iterations.jsonl), a convergence table (convergence.csv,
fixed column schema), and the final rule (rule.json).  With builtin models
and a fixed seed the CSV is reproduced byte-for-byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import genz
from .adaptive import (
    AdaptiveConfig,
    BuiltinModel,
    GrowthSchedule,
    IterationRecord,
    run as run_adaptive,
)
from .baselines import (
    monte_carlo_posterior_mean,
    prior_rule_posterior_estimate,
    smolyak,
    tensor_grid,
)
from .bayes import (
    GaussianIIDLikelihood,
    GPDiscrepancyLikelihood,
    PriorBox,
    StatisticalModel,
    log_gaussian_iid,
    log_posterior_unnormalized,
)
from .basis import enumerate_basis
from .implicit import construct_implicit_rule
from .models import (
    calibration_prior_box,
    default_locations,
    toy_pressure_curve,
    toy_pressure_model,
    truth_parameters,
)
from .rules import QuadratureRule, apply_normalized, serialize

CSV_COLUMNS = (
    "experiment",
    "repeat",
    "iteration",
    "N",
    "D",
    "err_adaptive",
    "err_prior_rule",
    "err_tensor_cc",
    "err_smolyak",
    "e_N",
)

# Stream index reserved for per-repeat oracle/data draws, distinct from
# the per-iteration streams used inside the adaptive loop.
_ORACLE_STREAM = 0x0FACE


def derive_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def _rng(*keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_seed(*keys)))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, rows: list[dict]) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in CSV_COLUMNS))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _persist(out_dir, config: dict, rows: list[dict], jsonl: list[dict], rule=None):
    if out_dir is None:
        return
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(config, indent=2, sort_keys=True, default=str) + "\n",
        encoding="utf-8",
    )
    with (out_dir / "iterations.jsonl").open("w", encoding="utf-8") as fh:
        for record in jsonl:
            fh.write(json.dumps(record) + "\n")
    write_csv(out_dir / "convergence.csv", rows)
    if rule is not None:
        (out_dir / "rule.json").write_bytes(serialize(rule) + b"\n")


def _jsonl_record(experiment: str, repeat: int, rec: IterationRecord) -> dict:
    return {
        "experiment": experiment,
        "repeat": repeat,
        "iteration": rec.iteration,
        "D": rec.exactness_count,
        "node_count": rec.node_count,
        "new_nodes": rec.new_nodes,
        "estimate": np.atleast_1d(rec.estimate).tolist(),
        "e_N": rec.e_n,
        "wall_time_s": rec.wall_time_s,
        "seed": rec.seed,
    }


# ---------------------------------------------------------------------------
# Prior-only implicit rules (no surrogate refinement)


def run_prior_only(
    prior: PriorBox,
    log_likelihood_fn,
    schedule: GrowthSchedule,
    sample_count: int,
    seed: int,
    iterations: int,
    values_fn=None,
):
    """Nested implicit rules built from plain prior samples; posterior
    quantities come from the self-normalized ratio estimator.

    ``log_likelihood_fn`` maps a node batch (n, d) to log-likelihoods (n,).
    ``values_fn`` maps nodes to the integrand values (default: the nodes
    themselves, i.e. posterior first moments).  Returns a list of
    (exactness_count, node_count, estimate) triples.
    """
    if values_fn is None:
        values_fn = lambda nodes: nodes
    d = prior.dimension
    rule = None
    records = []
    for i in range(1, iterations + 1):
        count = schedule.exactness_count(i, d)
        samples = prior.sample(_rng(seed, i), sample_count + 1)
        basis = enumerate_basis(d, count, box=(prior.lower, prior.upper))
        built = construct_implicit_rule(rule, samples, basis)
        rule = QuadratureRule(
            nodes=built.nodes,
            weights=built.weights,
            exactness_count=built.exactness_count,
            evaluated_count=len(built),
        )
        estimate = prior_rule_posterior_estimate(
            rule, values_fn(rule.nodes), log_likelihood_fn(rule.nodes)
        )
        records.append((count, len(rule), np.atleast_1d(estimate)))
    return records


# ---------------------------------------------------------------------------
# Analytic Beta posterior (1-D)


def beta_oracle(a: int = 40, b: int = 60) -> tuple[float, float]:
    """Posterior mean and standard deviation of x under the density
    proportional to x^a (1-x)^b on [0, 1], by composite Gauss-Legendre
    quadrature (well beyond 12 correct digits)."""
    t, w = np.polynomial.legendre.leggauss(24)
    edges = np.linspace(0.0, 1.0, 201)
    moments = np.zeros(3)
    for lo, hi in zip(edges[:-1], edges[1:]):
        x = lo + 0.5 * (hi - lo) * (t + 1.0)
        ww = 0.5 * (hi - lo) * w
        with np.errstate(divide="ignore"):
            rho = np.exp(a * np.log(x) + b * np.log1p(-x))
        rho[~np.isfinite(rho)] = 0.0
        for p in range(3):
            moments[p] += float(np.sum(ww * rho * x**p))
    mean = moments[1] / moments[0]
    var = moments[2] / moments[0] - mean**2
    return float(mean), float(np.sqrt(var))


def _beta_log_posterior(x: float, a: int, b: int) -> float:
    if x <= 0.0 or x >= 1.0:
        return -np.inf
    return a * np.log(x) + b * np.log1p(-x)


def run_analytic_beta(config: dict, out_dir=None) -> dict:
    """Posterior-mean error of the adaptive loop on the analytic Beta
    case, swept over the surrogate sample count K."""
    a = int(config.get("exponent_a", 40))
    b = int(config.get("exponent_b", 60))
    seed = int(config.get("seed", 0))
    repeats = int(config.get("repeats", 50))
    k_values = [int(k) for k in config.get("k_values", (100, 1000, 10_000, 100_000))]
    max_iterations = int(config.get("max_iterations", 30))
    schedule = _schedule_from_config(config, GrowthSchedule("linear", 0, 1))
    with_prior_only = bool(config.get("with_prior_only", True))

    oracle_mean, oracle_std = beta_oracle(a, b)
    prior = PriorBox(lower=[0.0], upper=[1.0])
    model = BuiltinModel(fn=lambda pts: pts.copy(), output_dim=1, name="identity")

    def log_post(outputs, x):
        return _beta_log_posterior(float(x[0]), a, b)

    def batch_ll(nodes):
        return np.array([_beta_log_posterior(float(v), a, b) for v in nodes[:, 0]])

    rows: list[dict] = []
    jsonl: list[dict] = []
    report = {"oracle_mean": oracle_mean, "oracle_std": oracle_std, "sweeps": {}}
    last_rule = None
    for ki, k in enumerate(k_values):
        final_errors = []
        for r in range(repeats):
            cfg = AdaptiveConfig(
                prior=prior,
                model=model,
                log_posterior=log_post,
                schedule=schedule,
                sample_count=k,
                seed=derive_seed(seed, ki, r),
                max_iterations=max_iterations,
            )
            state = run_adaptive(cfg)
            last_rule = state.rule
            prior_records = None
            if with_prior_only:
                prior_records = run_prior_only(
                    prior,
                    batch_ll,
                    schedule,
                    k,
                    derive_seed(seed, ki, r, 1),
                    max_iterations,
                )
            for rec in state.history:
                err = abs(float(np.atleast_1d(rec.estimate)[0]) - oracle_mean)
                err_prior = None
                if prior_records is not None:
                    est_p = prior_records[rec.iteration - 1][2]
                    err_prior = abs(float(est_p[0]) - oracle_mean)
                rows.append(
                    {
                        "experiment": f"analytic_beta_k{k}",
                        "repeat": r,
                        "iteration": rec.iteration,
                        "N": rec.node_count,
                        "D": rec.exactness_count,
                        "err_adaptive": err,
                        "err_prior_rule": err_prior,
                        "e_N": rec.e_n,
                    }
                )
                jsonl.append(_jsonl_record(f"analytic_beta_k{k}", r, rec))
            final_errors.append(
                abs(float(np.atleast_1d(state.history[-1].estimate)[0]) - oracle_mean)
            )
        report["sweeps"][str(k)] = {
            "mean_final_error": float(np.mean(final_errors)),
            "final_errors": final_errors,
        }
    _persist(out_dir, config, rows, jsonl, last_rule)
    return report


def _schedule_from_config(config: dict, default: GrowthSchedule) -> GrowthSchedule:
    spec = config.get("schedule")
    if spec is None:
        return default
    return GrowthSchedule(
        kind=spec.get("kind", default.kind),
        base=int(spec.get("base", default.base)),
        step=int(spec.get("step", default.step)),
        cap=None if spec.get("cap") is None else int(spec["cap"]),
    )


# ---------------------------------------------------------------------------
# Genz studies


def _tensor_counts(d: int, budget: int) -> list[int]:
    c = 1
    while (c + 1) ** d <= max(budget, 1):
        c += 1
    return [c] * d


def _smolyak_at_budget(d: int, budget: int, box: PriorBox, cache: dict):
    level = 0
    chosen = None
    while True:
        if level not in cache:
            cache[level] = smolyak(d, level, box)
        rule = cache[level]
        if len(rule) <= max(budget, 1) or chosen is None:
            chosen = rule
            level += 1
        else:
            break
    return chosen


def _genz_repeat(
    experiment: str,
    fn_eval,
    d: int,
    config: dict,
    repeat: int,
    schedule: GrowthSchedule,
    rows: list,
    jsonl: list,
):
    """One repeat: synthesize data, run adaptive + baselines, append rows.

    Returns (per-iteration adaptive errors, final adaptive error, state).
    """
    seed = int(config.get("seed", 0))
    sample_count = int(config.get("sample_count", 10_000))
    max_iterations = int(config.get("max_iterations", 10))
    oracle_samples = int(config.get("oracle_samples", 200_000))
    sigma = float(config.get("sigma", np.sqrt(0.2)))
    m = int(config.get("measurements", 20))
    with_grids = bool(config.get("with_grids", True))
    with_prior_only = bool(config.get("with_prior_only", True))

    prior = PriorBox(lower=np.zeros(d), upper=np.ones(d))
    data_rng = _rng(seed, repeat, _ORACLE_STREAM)
    if config.get("x_star") is not None:
        x_star = np.asarray(config["x_star"], dtype=float)
    else:
        x_star = prior.sample(data_rng, 1)[0]
    dataset = genz.generate_data(fn_eval, x_star, sigma, m, data_rng)
    likelihood = GaussianIIDLikelihood(data=dataset.z, sigma=sigma)

    def batch_ll(nodes):
        vals = np.asarray(fn_eval(nodes), dtype=float)
        resid = vals[:, None] - likelihood.data[None, :]
        return -0.5 * np.sum(resid * resid, axis=1) / likelihood.sigma**2

    model = BuiltinModel(
        fn=lambda pts: np.asarray(fn_eval(pts), dtype=float)[:, None],
        output_dim=1,
        name=experiment,
    )

    def log_post(outputs, x):
        return log_gaussian_iid(float(outputs[0]), likelihood) + prior.log_density(x)

    # Reference posterior first moments: a dense tensor grid when
    # `oracle_grid` is set (accurate for smooth integrands), otherwise
    # plain Monte Carlo over the prior.
    oracle_grid = config.get("oracle_grid")
    if oracle_grid is not None:
        ref = tensor_grid([int(oracle_grid)] * d, prior)
        oracle = np.atleast_1d(
            prior_rule_posterior_estimate(ref, ref.nodes, batch_ll(ref.nodes))
        )
    else:
        pts = prior.sample(data_rng, oracle_samples)
        oracle = np.atleast_1d(monte_carlo_posterior_mean(pts, batch_ll(pts)))

    cfg = AdaptiveConfig(
        prior=prior,
        model=model,
        log_posterior=log_post,
        schedule=schedule,
        sample_count=sample_count,
        seed=derive_seed(seed, repeat),
        max_iterations=max_iterations,
    )
    state = run_adaptive(cfg)

    prior_records = None
    if with_prior_only:
        prior_records = run_prior_only(
            prior,
            batch_ll,
            schedule,
            sample_count,
            derive_seed(seed, repeat, 1),
            max_iterations,
        )

    smolyak_cache: dict = {}
    errors = []
    for rec in state.history:
        err = float(np.abs(np.atleast_1d(rec.estimate) - oracle).max())
        errors.append(err)
        err_prior = err_cc = err_smk = None
        if prior_records is not None:
            est_p = prior_records[rec.iteration - 1][2]
            err_prior = float(np.abs(est_p - oracle).max())
        if with_grids:
            budget = rec.node_count
            grid = tensor_grid(_tensor_counts(d, budget), prior)
            est_cc = np.atleast_1d(
                prior_rule_posterior_estimate(grid, grid.nodes, batch_ll(grid.nodes))
            )
            err_cc = float(np.abs(est_cc - oracle).max())
            smk = _smolyak_at_budget(d, budget, prior, smolyak_cache)
            est_smk = np.atleast_1d(
                prior_rule_posterior_estimate(smk, smk.nodes, batch_ll(smk.nodes))
            )
            err_smk = float(np.abs(est_smk - oracle).max())
        rows.append(
            {
                "experiment": experiment,
                "repeat": repeat,
                "iteration": rec.iteration,
                "N": rec.node_count,
                "D": rec.exactness_count,
                "err_adaptive": err,
                "err_prior_rule": err_prior,
                "err_tensor_cc": err_cc,
                "err_smolyak": err_smk,
                "e_N": rec.e_n,
            }
        )
        jsonl.append(_jsonl_record(experiment, repeat, rec))
    return errors, state


def run_genz(config: dict, mode: str, out_dir=None) -> dict:
    """Genz study driver for the genz2d / genz5d / genz_dim modes."""
    rows: list[dict] = []
    jsonl: list[dict] = []
    report: dict = {"mode": mode, "cases": {}}
    last_rule = None

    if mode == "genz2d":
        repeats = int(config.get("repeats", 25))
        schedule = _schedule_from_config(config, GrowthSchedule("linear", 0, 1))
        names = config.get("functions", ["product_peak"])
        for name in names:
            fn = genz.two_dim_fixture(name)
            fn_eval = lambda pts, fn=fn: genz.evaluate_genz(fn, pts)
            # Data centered on the domain midpoint for the 2-D fixtures.
            cfg = dict(config)
            cfg.setdefault("x_star", [0.5, 0.5])
            experiment = f"genz2d_{name}"
            per_iter = []
            for r in range(repeats):
                errors, state = _genz_repeat(
                    experiment, fn_eval, 2, cfg, r, schedule, rows, jsonl
                )
                per_iter.append(errors)
                last_rule = state.rule
            report["cases"][name] = _aggregate(per_iter)
    elif mode == "genz5d":
        repeats = int(config.get("repeats", 25))
        d = int(config.get("dimension", 5))
        schedule = _schedule_from_config(config, GrowthSchedule("exponential", 1, 1))
        families = config.get("families", list(genz.FAMILIES))
        seed = int(config.get("seed", 0))
        for family in families:
            experiment = f"genz5d_{family}"
            per_iter = []
            for r in range(repeats):
                fn = genz.random_genz(family, d, _rng(seed, r, 2, _ORACLE_STREAM))
                fn_eval = lambda pts, fn=fn: genz.evaluate_genz(fn, pts)
                errors, state = _genz_repeat(
                    experiment, fn_eval, d, config, r, schedule, rows, jsonl
                )
                per_iter.append(errors)
                last_rule = state.rule
            report["cases"][family] = _aggregate(per_iter)
    elif mode == "genz_dim":
        repeats = int(config.get("repeats", 100))
        dims = [int(d) for d in config.get("dims", (2, 3, 4, 5))]
        family = config.get("family", "gaussian")
        schedule = _schedule_from_config(config, GrowthSchedule("linear", 0, 1))
        seed = int(config.get("seed", 0))
        cfg = dict(config)
        cfg.setdefault("max_iterations", 20)
        final_means = {}
        for d in dims:
            experiment = f"genz_dim_d{d}"
            per_iter = []
            for r in range(repeats):
                fn = genz.random_genz(family, d, _rng(seed, d, r, _ORACLE_STREAM))
                fn_eval = lambda pts, fn=fn: genz.evaluate_genz(fn, pts)
                errors, state = _genz_repeat(
                    experiment, fn_eval, d, cfg, r, schedule, rows, jsonl
                )
                per_iter.append(errors)
                last_rule = state.rule
            agg = _aggregate(per_iter)
            final_means[d] = agg["mean_errors"][-1]
            report["cases"][str(d)] = agg
        ref = final_means.get(2) or next(iter(final_means.values()))
        report["scaled_final_errors"] = {
            str(d): (v / ref if ref else float("nan")) for d, v in final_means.items()
        }
    else:
        raise ValueError(f"unknown Genz mode {mode!r}")

    _persist(out_dir, config, rows, jsonl, last_rule)
    return report


def _aggregate(per_iter: list[list[float]]) -> dict:
    """Arithmetic mean of per-repeat errors at matched iteration indices
    (computed over completed repeats only)."""
    depth = min(len(e) for e in per_iter)
    mean_errors = [
        float(np.mean([e[i] for e in per_iter])) for i in range(depth)
    ]
    return {
        "repeats": len(per_iter),
        "mean_errors": mean_errors,
        "mean_final_error": mean_errors[-1],
    }


# ---------------------------------------------------------------------------
# Calibration pipeline


def run_calibrate(config: dict, out_dir=None, model=None) -> dict:
    """Toy-scale calibration: vector-valued model, GP-discrepancy
    likelihood with marginalized hyperparameters, nested rules up to the
    configured total degree; emits the rule file and posterior-predictive
    mean/std vectors at the measurement locations."""
    seed = int(config.get("seed", 0))
    sigma = float(config.get("sigma", 0.01))
    length_scale_base = float(config.get("length_scale_base", 0.01))
    hyper_A = tuple(config.get("hyper_prior_A", (0.0, 0.01)))
    hyper_l = tuple(config.get("hyper_prior_l", (0.0, 1.0)))
    grid = tuple(config.get("hyper_grid", (12, 12)))
    sample_count = int(config.get("sample_count", 20_000))
    max_iterations = int(config.get("max_iterations", 6))
    schedule = _schedule_from_config(
        config, GrowthSchedule("total_degree", 0, 1, cap=int(config.get("degree", 3)))
    )
    locations = default_locations(int(config.get("locations", 16)))
    box = calibration_prior_box()
    if model is None:
        model = toy_pressure_model(locations)

    data_rng = _rng(seed, _ORACLE_STREAM)
    truth_curve = toy_pressure_curve(truth_parameters()[None, :], locations)[0]
    data = truth_curve + sigma * data_rng.standard_normal(locations.shape[0])

    likelihood = GPDiscrepancyLikelihood(
        data=data,
        locations=locations,
        sigma_meas=sigma,
        length_scale_base=length_scale_base,
        hyper_prior_A=hyper_A,
        hyper_prior_l=hyper_l,
        include_logdet=bool(config.get("include_logdet", False)),
    )
    stat_model = StatisticalModel(prior=box, likelihood=likelihood, hyper_grid=grid)

    cfg = AdaptiveConfig(
        prior=box,
        model=model,
        log_posterior=lambda out, x: log_posterior_unnormalized(out, stat_model, x),
        schedule=schedule,
        sample_count=sample_count,
        seed=seed,
        max_iterations=max_iterations,
        quantity="model",
    )
    state = run_adaptive(cfg)

    mean = apply_normalized(state.rule, state.outputs)
    centered = state.outputs - mean[None, :]
    variance = apply_normalized(state.rule, centered**2)
    std = np.sqrt(np.maximum(variance, 0.0))

    rows: list[dict] = []
    jsonl: list[dict] = []
    for rec in state.history:
        rows.append(
            {
                "experiment": "calibrate",
                "repeat": 0,
                "iteration": rec.iteration,
                "N": rec.node_count,
                "D": rec.exactness_count,
                "e_N": rec.e_n,
            }
        )
        jsonl.append(_jsonl_record("calibrate", 0, rec))
    _persist(out_dir, config, rows, jsonl, state.rule)
    return {
        "locations": locations.tolist(),
        "data": data.tolist(),
        "predictive_mean": mean.tolist(),
        "predictive_std": std.tolist(),
        "predictive_variance": variance.tolist(),
        "e_history": [rec.e_n for rec in state.history],
        "exactness_counts": [rec.exactness_count for rec in state.history],
        "node_counts": [rec.node_count for rec in state.history],
        "model_evaluations": state.model_evaluations,
    }
