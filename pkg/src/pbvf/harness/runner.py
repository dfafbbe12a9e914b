"""Multi-seed experiment execution and artifact emission.

Each seed is an independent single-threaded run; the pool only schedules
whole runs, and nothing mutable is shared, so concurrent output is
byte-identical to sequential output. Per-run artifacts are the curve CSV and
a critic checkpoint (plus parameter-trajectory overlays on the regulator
task); the summary CSV is written once after every seed has finished.

Checkpoint state snapshots (for critics that condition on states) are drawn
from the replay buffer with the run's substream (9,).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..algorithms import run_algo
from ..algorithms.common import evaluate_policy
from ..algorithms.theorem_oracle import run_oracle_suite
from ..algorithms.zero_shot import normalizer_blob
from ..critics import load_critic, save_critic
from ..envs import make_env
from ..errors import ConfigError, RunError
from ..numerics import DTYPE, SeededRng
from .config import RunConfig, build_run_config
from .csvio import (SummaryRow, write_curve_csv, write_landscape_csv,
                    write_oracle_csv, write_summary_csv, write_theta_csv)
from .landscape import landscape_table, mode_for_critic_kind
from .metrics import avg_metric, final_metric

SNAPSHOT_STATES = 256


def parse_seeds(spec: str) -> list[int]:
    """'0..4' (inclusive range), '1,3,5', or a single integer."""
    spec = spec.strip()
    if ".." in spec:
        lo, _, hi = spec.partition("..")
        try:
            lo_i, hi_i = int(lo), int(hi)
        except ValueError:
            raise ConfigError(f"bad seed range {spec!r}")
        if hi_i < lo_i:
            raise ConfigError(f"empty seed range {spec!r}")
        return list(range(lo_i, hi_i + 1))
    try:
        return [int(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"bad seed list {spec!r}")


def algo_label(cfg: RunConfig) -> str:
    if cfg.stochastic and cfg.algo in ("pssvf", "psvf"):
        return f"{cfg.algo}-stoch"
    return cfg.algo


def artifact_stem(cfg: RunConfig) -> str:
    return f"{algo_label(cfg)}_{cfg.env}_{cfg.arch}_seed{cfg.seed}"


@dataclass
class SeedOutcome:
    seed: int
    curve_path: str
    checkpoint_path: str | None
    avg: float
    final: float
    extras: dict


def _state_snapshot(res, cfg: RunConfig) -> list | None:
    buf = res.extras.get("buffer")
    if buf is None or len(buf) == 0:
        snap = res.extras.get("state_snapshot")
        return None if snap is None else np.asarray(snap).tolist()
    rng = SeededRng(cfg.seed, stream=(9,))
    idx = rng.integers(0, len(buf), size=min(SNAPSHOT_STATES, len(buf)))
    states = np.stack([buf[int(i)].state for i in idx]).astype(DTYPE)
    if res.normalizer is not None:
        states = res.normalizer.apply_batch(states)
    return states.tolist()


def run_single(cfg: RunConfig, out_dir: str) -> SeedOutcome:
    res = run_algo(cfg)
    stem = artifact_stem(cfg)
    curve_path = os.path.join(out_dir, f"curve_{stem}.csv")
    write_curve_csv(curve_path, res.curve)

    checkpoint_path = None
    if res.critic is not None and cfg.algo != "zero-shot":
        checkpoint_path = os.path.join(out_dir, f"critic_{stem}.npz")
        # The reference return stored with a checkpoint is the run's final
        # policy re-evaluated fresh, not a trailing average of the curve:
        # zero-shot policies climb this exact critic, so the policy that
        # last ascended it is the meaningful yardstick.
        eval_env = make_env(cfg.env, cfg.seed, role="eval")
        online_return, _ = evaluate_policy(eval_env, res.policy, 10,
                                           res.normalizer)
        extra = {
            "env": cfg.env,
            "arch": cfg.arch,
            "head": res.policy.head,
            "normalizer": normalizer_blob(res.normalizer),
            "online_final_return": online_return,
        }
        if res.critic.kind in ("psvf", "pavf"):
            snap = _state_snapshot(res, cfg)
            if snap is not None:
                extra["state_snapshot"] = snap
        save_critic(res.critic, checkpoint_path, extra=extra)

    if "theta_path" in res.extras:
        write_theta_csv(os.path.join(out_dir, f"traj_{stem}.csv"),
                        res.extras["theta_path"])
    if "theta_tilde_log" in res.extras:
        write_theta_csv(os.path.join(out_dir, f"behav_{stem}.csv"),
                        res.extras["theta_tilde_log"])

    return SeedOutcome(cfg.seed, curve_path, checkpoint_path,
                       avg_metric(res.curve), final_metric(res.curve), res.extras)


def run_experiment(options: dict, seeds: list[int], out_dir: str,
                   config_text: str | None = None,
                   max_workers: int | None = None) -> dict:
    """Run one config across seeds; returns {'outcomes', 'summary',
    'summary_path'}. Raises RunError after all seeds finish if any failed."""
    if not seeds:
        raise ConfigError("no seeds given")
    os.makedirs(out_dir, exist_ok=True)
    cfgs = []
    for seed in seeds:
        opts = dict(options)
        opts["seed"] = seed
        cfgs.append(build_run_config(opts, config_text=config_text))

    workers = max_workers or min(len(cfgs), os.cpu_count() or 1)
    results: dict[int, SeedOutcome] = {}
    failures: dict[int, Exception] = {}
    if workers <= 1:
        for cfg in cfgs:
            try:
                results[cfg.seed] = run_single(cfg, out_dir)
            except Exception as e:  # propagate after siblings finish
                failures[cfg.seed] = e
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {cfg.seed: pool.submit(run_single, cfg, out_dir)
                       for cfg in cfgs}
            for seed, fut in futures.items():
                try:
                    results[seed] = fut.result()
                except Exception as e:
                    failures[seed] = e

    summary = None
    summary_path = None
    if results:
        ordered = [results[s] for s in seeds if s in results]
        avgs = np.array([o.avg for o in ordered])
        finals = np.array([o.final for o in ordered])
        cfg0 = cfgs[0]
        summary = SummaryRow(
            algo=algo_label(cfg0), env=cfg0.env, arch=cfg0.arch,
            seed_count=len(ordered),
            avg_metric_mean=float(avgs.mean()),
            avg_metric_std=float(avgs.std()),
            final_metric_mean=float(finals.mean()),
            final_metric_std=float(finals.std()),
        )
        summary_path = os.path.join(out_dir, "summary.csv")
        write_summary_csv(summary_path, [summary])

    if failures:
        detail = "; ".join(f"seed {s}: {type(e).__name__}: {e}"
                           for s, e in sorted(failures.items()))
        raise RunError(f"{len(failures)} of {len(seeds)} runs failed: {detail}")
    return {"outcomes": results, "summary": summary, "summary_path": summary_path}


def run_landscape(critic_path: str, resolution: int, out_path: str,
                  mode: str | None = None) -> dict:
    """Dump the true-vs-predicted value grid for a saved 2-parameter critic."""
    critic, extra = load_critic(critic_path)
    if extra.get("env") not in (None, "lqr"):
        raise ConfigError(f"landscape is defined for the regulator task; "
                          f"checkpoint came from {extra.get('env')!r}")
    mode = mode or mode_for_critic_kind(critic.kind)
    thetas, true_j, pred = landscape_table(critic, resolution, mode)
    write_landscape_csv(out_path, thetas[:, 0], thetas[:, 1], true_j, pred)
    finite = np.isfinite(pred)
    r2 = float("nan")
    if finite.any() and np.std(pred[finite]) > 0 and np.std(true_j[finite]) > 0:
        r2 = float(np.corrcoef(true_j[finite], pred[finite])[0, 1] ** 2)
    best = thetas[int(np.argmax(true_j))]
    return {"out_path": out_path, "mode": mode, "resolution": resolution,
            "r_squared": r2, "true_max_theta": best.tolist()}


def run_oracle(out_path: str, instances: int = 20, seed: int = 0,
               gamma: float = 0.9) -> dict:
    """Exact policy-gradient identity checks: the fixed worst-case instance
    first, then random small MDPs."""
    from ..algorithms.theorem_oracle import degris_bias_example, pg_theorem_oracle

    mdp, theta, theta_b = degris_bias_example()
    constructed = pg_theorem_oracle(mdp, theta, theta_b)
    constructed.name = "constructed"
    reports = [constructed] + run_oracle_suite(instances, seed, gamma=gamma)
    rows = [(r.name, r.thm1_maxerr, r.thm3_maxerr, r.degris_bias)
            for r in reports]
    write_oracle_csv(out_path, rows)
    return {"out_path": out_path, "reports": reports,
            "thm1_maxerr": max(r.thm1_maxerr for r in reports),
            "thm3_maxerr": max(r.thm3_maxerr for r in reports),
            "constructed_bias": constructed.degris_bias}
