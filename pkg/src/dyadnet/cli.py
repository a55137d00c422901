"""Batch front-end: reproducible runs driven by a JSON configuration.

Subcommands: simulate, bounds, idset, clogit, verify-all, report.  All
randomness flows from the single config seed; rerunning a config reproduces
every CSV byte for byte, independent of the thread count (worker tasks are
pure and results are collected in task order).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np
import scipy

from . import __version__
from .clogit import (
    EtaRecord,
    build_sample,
    collect_node_balanced,
    exact_log_odds,
    fit,
    rank_check,
)
from .configurations import (
    SignedConfiguration,
    WeightedConfiguration,
    delta_W,
    enumerate_configurations,
)
from .inequalities import (
    BoundsResult,
    PanelData,
    composite_cdf,
    dyad_panel_bounds,
    identified_set,
    known_cdf_bounds,
    signed_subgraph_bounds,
    weighted_node_bounds,
)
from .model import (
    AdditiveNode,
    AdditiveNodeDraw,
    Ar1GaussianCopula,
    CovariateSpec,
    EmptyInitial,
    ErdosRenyiInitial,
    GivenInitial,
    IidKnownMarginal,
    IidLogistic,
    LatentDistance,
    LatentDistanceDraw,
    ModelSpec,
    Theta,
    UnrestrictedDyad,
    UnrestrictedDyadDraw,
    load_panel,
    save_panel,
    simulate_panel,
)

TASKS = ("simulate", "bounds", "idset", "clogit", "verify-all")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Config parsing (strict: unknown keys are errors)
# ---------------------------------------------------------------------------

_SCHEMA_VERSION = 1

_TOP_KEYS = {"schema_version", "seed", "model", "task", "grids", "budgets", "output"}
_MODEL_KEYS = {"n", "T", "d_z", "theta0", "covariates", "heterogeneity", "shocks", "initial"}
_GRID_KEYS = {"slack", "theta_grid", "c_grid"}
_BUDGET_KEYS = {"instance_cap", "config_budget", "min_cell_count", "seeds"}


def _check_keys(block: dict, allowed: set, path: str) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown key {path}{key!r}")


def _build_heterogeneity(block: dict):
    variant = block.get("variant")
    opts = {k: v for k, v in block.items() if k != "variant"}
    if variant == "additive_node":
        if "nu" in opts:
            return AdditiveNode(np.asarray(opts["nu"], dtype=float))
        _check_keys(opts, {"loc", "scale"}, "model.heterogeneity.")
        return AdditiveNodeDraw(**opts)
    if variant == "unrestricted_dyad":
        _check_keys(opts, {"loc", "scale"}, "model.heterogeneity.")
        return UnrestrictedDyadDraw(**opts)
    if variant == "latent_distance":
        if "nu" in opts:
            return LatentDistance(np.asarray(opts["nu"], float), np.asarray(opts["xi"], float))
        _check_keys(opts, {"nu_loc", "nu_scale", "xi_scale"}, "model.heterogeneity.")
        return LatentDistanceDraw(**opts)
    raise ConfigError(f"unknown heterogeneity variant {variant!r}")


_MARGINALS = {"logistic": lambda: __import__("scipy.stats", fromlist=["logistic"]).logistic(),
              "normal": lambda: __import__("scipy.stats", fromlist=["norm"]).norm()}


def _build_shocks(block: dict):
    variant = block.get("variant", "iid_logistic")
    if variant == "iid_logistic":
        _check_keys(block, {"variant"}, "model.shocks.")
        return IidLogistic()
    if variant == "iid_known_marginal":
        _check_keys(block, {"variant", "marginal"}, "model.shocks.")
        name = block.get("marginal", "logistic")
        if name not in _MARGINALS:
            raise ConfigError(f"unknown marginal {name!r}")
        return IidKnownMarginal(_MARGINALS[name]())
    if variant == "ar1_gaussian_copula":
        _check_keys(block, {"variant", "rho", "marginal"}, "model.shocks.")
        name = block.get("marginal", "logistic")
        if name not in _MARGINALS:
            raise ConfigError(f"unknown marginal {name!r}")
        return Ar1GaussianCopula(float(block["rho"]), _MARGINALS[name]())
    raise ConfigError(f"unknown shock variant {variant!r}")


def _build_initial(block: dict):
    variant = block.get("variant", "empty")
    if variant == "empty":
        _check_keys(block, {"variant"}, "model.initial.")
        return EmptyInitial()
    if variant == "erdos_renyi":
        _check_keys(block, {"variant", "p"}, "model.initial.")
        return ErdosRenyiInitial(float(block["p"]))
    raise ConfigError(f"unknown initial-network variant {variant!r}")


@dataclasses.dataclass
class RunConfig:
    seed: int
    model: ModelSpec
    task: str | None
    slack: float
    theta_grid: list[Theta]
    c_grid: np.ndarray | None
    instance_cap: int
    config_budget: int
    min_cell_count: int
    output: str
    raw: dict

    @classmethod
    def from_dict(cls, cfg: dict) -> "RunConfig":
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
        _check_keys(cfg, _TOP_KEYS, "")
        if cfg.get("schema_version") != _SCHEMA_VERSION:
            raise ConfigError(
                f"schema_version must be {_SCHEMA_VERSION}, got {cfg.get('schema_version')!r}"
            )
        if "seed" not in cfg:
            raise ConfigError("seed is mandatory")
        model_block = cfg.get("model")
        if not isinstance(model_block, dict):
            raise ConfigError("model block is mandatory")
        _check_keys(model_block, _MODEL_KEYS, "model.")
        theta_block = model_block.get("theta0", {})
        _check_keys(theta_block, {"alpha", "lambda"}, "model.theta0.")
        theta0 = Theta(theta_block.get("alpha", [0.0]), theta_block.get("lambda", [0.0]))
        d_z = int(model_block.get("d_z", 1))
        cov_block = model_block.get("covariates", {})
        _check_keys(cov_block, {"support"}, "model.covariates.")
        support = cov_block.get("support")
        covariates = CovariateSpec(
            d_z=d_z,
            support=tuple(tuple(s) for s in support) if support is not None else None,
        )
        spec = ModelSpec(
            n=int(model_block["n"]),
            T=int(model_block["T"]),
            theta0=theta0,
            heterogeneity=_build_heterogeneity(
                model_block.get("heterogeneity", {"variant": "additive_node"})
            ),
            shocks=_build_shocks(model_block.get("shocks", {"variant": "iid_logistic"})),
            covariates=covariates,
            initial=_build_initial(model_block.get("initial", {"variant": "empty"})),
        )
        grids = cfg.get("grids", {})
        _check_keys(grids, _GRID_KEYS, "grids.")
        budgets = cfg.get("budgets", {})
        _check_keys(budgets, _BUDGET_KEYS, "budgets.")
        d_h = theta0.d_h
        theta_grid = [
            Theta(np.asarray(v, float)[:d_h], np.asarray(v, float)[d_h:])
            for v in grids.get("theta_grid", [])
        ]
        c_grid = grids.get("c_grid")
        task = cfg.get("task")
        if task is not None and task not in TASKS:
            raise ConfigError(f"unknown task {task!r}; known: {TASKS}")
        return cls(
            seed=int(cfg["seed"]),
            model=spec,
            task=task,
            slack=float(grids.get("slack", 3.0)),
            theta_grid=theta_grid,
            c_grid=np.asarray(c_grid, float) if c_grid is not None else None,
            instance_cap=int(budgets.get("instance_cap", 200_000)),
            config_budget=int(budgets.get("config_budget", 0)),
            min_cell_count=int(budgets.get("min_cell_count", 30)),
            output=str(cfg.get("output", "dyadnet-out")),
            raw=cfg,
        )


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return RunConfig.from_dict(cfg)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


class RunContext:
    """Tracks written outputs; on failure, renames them to *.partial."""

    def __init__(self, outdir: str):
        self.outdir = outdir
        self.written: list[str] = []
        os.makedirs(outdir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.outdir, name)
        self.written.append(p)
        return p

    def mark_partial(self) -> None:
        for p in self.written:
            if os.path.exists(p):
                os.replace(p, p + ".partial")


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_bounds_csv(path: str, theta_id: str, results: list[BoundsResult]) -> None:
    with open(path, "w") as fh:
        fh.write("theta_id,family,config_id,cell_id,c,lower,upper,se_lower,se_upper,verdict\n")
        for res in results:
            for ev in res.evaluations:
                row = [
                    theta_id,
                    res.family,
                    res.config_id,
                    f"\"{ev.cell.label}\"",
                    _fmt(ev.c),
                    _fmt(ev.lower),
                    _fmt(ev.upper),
                    _fmt(ev.se_lower),
                    _fmt(ev.se_upper),
                    "pass" if ev.passed else "fail",
                ]
                fh.write(",".join(row) + "\n")


def write_manifest(ctx: RunContext, config: RunConfig, t_start: float, extra: dict | None = None) -> None:
    manifest = {
        "config_sha256": hashlib.sha256(
            json.dumps(config.raw, sort_keys=True).encode()
        ).hexdigest(),
        "seed": config.seed,
        "versions": {
            "dyadnet": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "wall_clock_s": round(time.time() - t_start, 3),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "outputs": sorted(os.path.basename(p) for p in ctx.written),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(ctx.outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parallel(tasks, threads: int):
    """Ordered map over pure tasks; results identical for any thread count."""
    if threads <= 1:
        return [fn() for fn in tasks]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn) for fn in tasks]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Tasks
# ---------------------------------------------------------------------------


def task_simulate(config: RunConfig, ctx: RunContext) -> list[str]:
    sim = simulate_panel(config.model, seed=config.seed)
    save_panel(ctx.path("panel.txt"), sim.panel, sim.covariates)
    lines = [
        f"simulate: n={config.model.n} T={config.model.T} seed={config.seed}",
        "link rates by date: "
        + " ".join(f"{t}:{sim.panel.link_rate(t):.4f}" for t in range(config.model.T + 1)),
    ]
    return lines


def _bound_families(config: RunConfig, data: PanelData, theta: Theta, threads: int):
    T = data.T
    cfg_tr = [
        SignedConfiguration(((0, 1, t),), ((0, 1, s),))
        for s in range(1, T + 1)
        for t in range(s + 1, T + 1)
    ]
    cfg_pair = [
        SignedConfiguration(((0, 1, t), (2, 3, t)), ((0, 1, s), (2, 3, s)))
        for s in range(1, T + 1)
        for t in range(s + 1, T + 1)
    ]
    kw = dict(
        slack=config.slack,
        min_cell_count=config.min_cell_count,
    )
    tasks = [lambda: dyad_panel_bounds(data, theta, config.c_grid, **kw)]
    for i, cfg in enumerate(cfg_tr):
        tasks.append(
            lambda cfg=cfg, i=i: signed_subgraph_bounds(
                data, theta, cfg, config.c_grid,
                instance_cap=config.instance_cap, seed=config.seed, config_id=f"trans{i}", **kw,
            )
        )
    for i, cfg in enumerate(cfg_pair):
        tasks.append(
            lambda cfg=cfg, i=i: signed_subgraph_bounds(
                data, theta, cfg, config.c_grid,
                instance_cap=config.instance_cap, seed=config.seed, config_id=f"pair{i}", **kw,
            )
        )
    if getattr(data.shocks, "serially_independent", False):
        for i, cfg in enumerate(cfg_tr):
            tasks.append(
                lambda cfg=cfg, i=i: known_cdf_bounds(
                    data, theta, cfg, config.c_grid,
                    instance_cap=config.instance_cap, seed=config.seed, config_id=f"trans{i}", **kw,
                )
            )
    return _parallel(tasks, threads)


def task_bounds(config: RunConfig, ctx: RunContext, threads: int) -> list[str]:
    if config.model.T < 2:
        raise ConfigError("task bounds requires model.T >= 2 (bounds compare distinct dates)")
    sim = simulate_panel(config.model, seed=config.seed)
    data = PanelData.from_simulation(sim)
    results = _bound_families(config, data, config.model.theta0, threads)
    by_family: dict[str, list[BoundsResult]] = {}
    for res in results:
        by_family.setdefault(res.family, []).append(res)
    lines = [f"bounds at theta0, slack={config.slack}"]
    for family, group in sorted(by_family.items()):
        write_bounds_csv(ctx.path(f"bounds_{family}.csv"), "theta0", group)
        ok = all(r.passed for r in group)
        nviol = sum(len(r.violations) for r in group)
        lines.append(f"{family}: {'pass' if ok else f'FAIL ({nviol} violations)'}")
    return lines


def task_idset(config: RunConfig, ctx: RunContext, threads: int) -> list[str]:
    if config.model.T < 2:
        raise ConfigError("task idset requires model.T >= 2 (bounds compare distinct dates)")
    if not config.theta_grid:
        raise ConfigError("grids.theta_grid is mandatory for task idset")
    sim = simulate_panel(config.model, seed=config.seed)
    data = PanelData.from_simulation(sim)
    report = identified_set(
        data,
        config.theta_grid,
        slack=config.slack,
        c_grid=config.c_grid,
        instance_cap=config.instance_cap,
        seed=config.seed,
        min_cell_count=config.min_cell_count,
    )
    with open(ctx.path("idset.csv"), "w") as fh:
        d = config.theta_grid[0].vector.size
        header = ",".join(f"theta{k}" for k in range(d))
        fh.write(f"{header},verdict,n_violations\n")
        for v in report.verdicts:
            coords = ",".join(repr(float(x)) for x in v.theta.vector)
            fh.write(f"{coords},{'pass' if v.passed else 'fail'},{len(v.violations)}\n")
    with open(ctx.path("idset.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    npass = sum(v.passed for v in report.verdicts)
    return [f"idset: {npass}/{len(report.verdicts)} grid points pass at slack {config.slack}"]


def task_clogit(config: RunConfig, ctx: RunContext) -> list[str]:
    spec = config.model
    sim = simulate_panel(spec, seed=config.seed)
    d = spec.theta0.vector.size
    budget = config.config_budget or 10 * d
    tagged = collect_node_balanced(spec.n, spec.T, budget, seed=config.seed)
    sample = build_sample(sim.panel, sim.covariates, spec.registry, [c for _, c in tagged])
    sample.to_csv(ctx.path("clogit_sample.csv"))
    lines = [f"clogit: {len(sample)} informative rows from {sample.n_candidates} configurations"]
    by_family: dict[str, list] = {}
    for fam, cfg in tagged:
        by_family.setdefault(fam, []).append(cfg)
    fam_samples = {
        fam: build_sample(sim.panel, sim.covariates, spec.registry, cfgs)
        for fam, cfgs in by_family.items()
    }
    rank = rank_check(sample, by_family=fam_samples)
    result = {"rows": len(sample), "rank": rank.rank, "spanning": rank.spanning,
              "rows_by_family": {f: len(s) for f, s in fam_samples.items()}}
    if len(sample) and rank.spanning:
        fr = fit(sample)
        result.update(
            theta_hat=fr.theta.vector.tolist(),
            loglik=fr.loglik,
            grad_norm=fr.grad_norm,
            converged=fr.converged,
            n_iter=fr.n_iter,
        )
        lines.append(
            f"theta_hat={np.round(fr.theta.vector, 4).tolist()} loglik={fr.loglik:.3f}"
            f" grad_norm={fr.grad_norm:.2e} converged={fr.converged}"
        )
    else:
        lines.append("fit skipped: empty sample or rank-deficient regressors")
    lines.append(f"rank {rank.rank}/{rank.d} spanning={rank.spanning}")
    with open(ctx.path("clogit_estimate.json"), "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return lines


def task_verify_all(config: RunConfig, ctx: RunContext, threads: int) -> tuple[list[str], bool]:
    """Battery of proposition-level checks on one simulated panel, plus the
    quadrature, identity, scale-cone, and power checks."""
    if config.model.T < 2:
        raise ConfigError("task verify-all requires model.T >= 2 (bounds compare distinct dates)")
    spec = config.model
    theta0 = spec.theta0
    checks: list[tuple[str, bool, str]] = []

    sim = simulate_panel(spec, seed=config.seed)
    data = PanelData.from_simulation(sim)
    ar_spec = dataclasses.replace(spec, shocks=Ar1GaussianCopula(0.5))
    sim_ar = simulate_panel(ar_spec, seed=config.seed)
    data_ar = PanelData.from_simulation(sim_ar)

    kw = dict(slack=config.slack, min_cell_count=config.min_cell_count)
    trans = SignedConfiguration(((0, 1, 2),), ((0, 1, 1),))
    pair = SignedConfiguration(((0, 1, 2), (2, 3, 2)), ((0, 1, 1), (2, 3, 1)))
    wtet = WeightedConfiguration(
        (((0, 1, 1), 1.0), ((2, 3, 1), 1.0), ((0, 2, 1), -1.0), ((1, 3, 1), -1.0))
    )

    results = _parallel(
        [
            lambda: dyad_panel_bounds(data, theta0, config.c_grid, **kw),
            lambda: signed_subgraph_bounds(
                data, theta0, trans, config.c_grid,
                instance_cap=config.instance_cap, seed=config.seed, config_id="trans", **kw),
            lambda: signed_subgraph_bounds(
                data_ar, theta0, trans, config.c_grid,
                instance_cap=config.instance_cap, seed=config.seed, config_id="trans_ar1", **kw),
            lambda: signed_subgraph_bounds(
                data, theta0, pair, config.c_grid,
                instance_cap=config.instance_cap, seed=config.seed, config_id="pair", **kw),
            lambda: known_cdf_bounds(
                data, theta0, trans, config.c_grid,
                instance_cap=config.instance_cap, seed=config.seed, config_id="trans", **kw),
            lambda: weighted_node_bounds(
                data, theta0, wtet, config.c_grid,
                instance_cap=config.instance_cap, seed=config.seed, config_id="wtet", **kw),
        ],
        threads,
    )
    names = [
        "dyad_panel_theta0",
        "transition_theta0",
        "transition_theta0_ar1",
        "pair_subgraph_theta0",
        "known_cdf_transition_theta0",
        "weighted_tetrad_theta0",
    ]
    bound_results = []
    for name, res in zip(names, results):
        checks.append((name, res.passed, f"{len(res.violations)} violations"))
        bound_results.append(res)
    write_bounds_csv(ctx.path("verify_bounds.csv"), "theta0", bound_results)

    F = composite_cdf(IidLogistic(), trans)
    err0 = abs(F(0.0) - 0.5)
    checks.append(("composite_cdf_half_at_zero", err0 < 1e-9, f"|F(0)-0.5|={err0:.2e}"))
    lo_mass, hi_mass = F.endpoint_masses()
    shape_ok = (
        np.all(np.diff(F.values) >= 0) and lo_mass < 1e-6 and hi_mass < 1e-6
    )
    checks.append(
        ("composite_cdf_shape", bool(shape_ok), f"end masses ({lo_mass:.1e},{hi_mass:.1e})")
    )

    eta = EtaRecord.from_simulation(sim)
    cfgs = [c for _, c in collect_node_balanced(min(spec.n, 40), spec.T, 80, seed=config.seed)]
    max_err = max(
        abs(
            exact_log_odds(c, eta)
            - delta_W(c, theta0, sim.panel, sim.covariates, spec.registry)
        )
        for c in cfgs
    )
    checks.append(("clogit_identity", max_err < 1e-10, f"max err {max_err:.2e}"))

    theta_bad = Theta(theta0.alpha, -2.0 * theta0.lam)
    bad_panel = dyad_panel_bounds(data, theta_bad, config.c_grid, **kw)
    bad_trans = signed_subgraph_bounds(
        data, theta_bad, trans, config.c_grid,
        instance_cap=config.instance_cap, seed=config.seed, config_id="trans", **kw)
    checks.append(
        (
            "power_flipped_lambda",
            (not bad_panel.passed) and (not bad_trans.passed),
            f"panel {len(bad_panel.violations)} / transition {len(bad_trans.violations)} violations",
        )
    )

    grid = [theta0, theta_bad]
    rep1 = identified_set(
        data, grid, slack=config.slack,
        instance_cap=config.instance_cap, seed=config.seed,
        min_cell_count=config.min_cell_count,
    )
    cone_ok = True
    for k in (0.5, 2.0):
        repk = identified_set(
            data, [t.scaled(k) for t in grid], slack=config.slack,
            instance_cap=config.instance_cap, seed=config.seed,
            min_cell_count=config.min_cell_count,
        )
        cone_ok &= all(
            a.passed == b.passed for a, b in zip(rep1.verdicts, repk.verdicts)
        )
    checks.append(("scale_cone_invariance", bool(cone_ok), "k in {0.5, 2}"))

    with open(ctx.path("verify.csv"), "w") as fh:
        fh.write("check,passed,detail\n")
        for name, ok, detail in checks:
            fh.write(f"{name},{'pass' if ok else 'FAIL'},\"{detail}\"\n")
    lines = [f"{name}: {'pass' if ok else 'FAIL'} ({detail})" for name, ok, detail in checks]
    return lines, all(ok for _, ok, _ in checks)


def task_report(results_dir: str, out_stream) -> int:
    manifest_path = os.path.join(results_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        print(f"error: no manifest.json in {results_dir}", file=sys.stderr)
        return 1
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    rows = []
    verify_path = os.path.join(results_dir, "verify.csv")
    if os.path.exists(verify_path):
        with open(verify_path) as fh:
            next(fh)
            for line in fh:
                name, passed, detail = line.rstrip("\n").split(",", 2)
                rows.append((name, passed, detail.strip('"')))
    idset_path = os.path.join(results_dir, "idset.csv")
    idset_rows = []
    if os.path.exists(idset_path):
        with open(idset_path) as fh:
            next(fh)
            for line in fh:
                idset_rows.append(line.strip())
    summary_path = os.path.join(results_dir, "report_summary.csv")
    with open(summary_path, "w") as fh:
        fh.write("item,value,detail\n")
        fh.write(f"config_sha256,{manifest['config_sha256']},\n")
        for name, passed, detail in rows:
            fh.write(f"{name},{passed},\"{detail}\"\n")
        for row in idset_rows:
            fh.write(f"idset,{row},\n")
    print(f"wrote {summary_path}", file=out_stream)
    for name, passed, detail in rows:
        print(f"{name}: {passed} ({detail})", file=out_stream)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_DEFAULT_VERIFY_CONFIG = {
    "schema_version": 1,
    "seed": 20260301,
    "model": {
        "n": 400,
        "T": 2,
        "d_z": 1,
        "theta0": {"alpha": [3.0], "lambda": [-3.0, 0.001]},
        "heterogeneity": {"variant": "additive_node", "loc": -0.25, "scale": 0.25},
        "shocks": {"variant": "iid_logistic"},
        "initial": {"variant": "erdos_renyi", "p": 0.65},
    },
    "grids": {"slack": 3.0},
    "budgets": {"instance_cap": 80000, "min_cell_count": 30},
    "output": "dyadnet-verify",
}


def default_verify_config() -> dict:
    return json.loads(json.dumps(_DEFAULT_VERIFY_CONFIG))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="dyadnet",
        description="Simulation, moment-inequality verification, identified sets,"
        " and conditional logit for dynamic dyadic network formation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config path")
    common.add_argument("--out", help="output directory (overrides config)")
    common.add_argument("--seed", type=int, help="seed override")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--slack", type=float, help="slack override (SE units)")
    for name in TASKS:
        sub.add_parser(name, parents=[common])
    rep = sub.add_parser("report")
    rep.add_argument("results_dir")
    args = parser.parse_args(argv)

    if args.command == "report":
        return task_report(args.results_dir, sys.stdout)

    if args.config:
        try:
            config = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
    elif args.command == "verify-all":
        config = RunConfig.from_dict(default_verify_config())
    else:
        print("error: --config is required", file=sys.stderr)
        return 2
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    if args.slack is not None:
        config = dataclasses.replace(config, slack=args.slack)
    outdir = args.out or config.output
    ctx = RunContext(outdir)
    t_start = time.time()
    status = 0
    try:
        if args.command == "simulate":
            lines = task_simulate(config, ctx)
        elif args.command == "bounds":
            lines = task_bounds(config, ctx, args.threads)
        elif args.command == "idset":
            lines = task_idset(config, ctx, args.threads)
        elif args.command == "clogit":
            lines = task_clogit(config, ctx)
        elif args.command == "verify-all":
            lines, all_ok = task_verify_all(config, ctx, args.threads)
            status = 0 if all_ok else 1
        else:  # pragma: no cover
            raise AssertionError(args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        ctx.mark_partial()
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"task failed: {exc}", file=sys.stderr)
        ctx.mark_partial()
        return 1
    with open(ctx.path("summary.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    write_manifest(ctx, config, t_start)
    for line in lines:
        print(line)
    return status


if __name__ == "__main__":
    sys.exit(main())
