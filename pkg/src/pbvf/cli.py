"""Command-line client for the experiment service.

Every subcommand except `serve` talks HTTP: against a remote server when
--server is given, otherwise against an in-process instance of the same
application (full request/response cycle, no socket). Exit codes: 0 success,
2 config error, 3 runtime/numeric error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

POLL_SECONDS = 0.2


def _bool_option(value: str) -> bool:
    low = value.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {value!r}")


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", required=True)
    p.add_argument("--env", required=True)
    p.add_argument("--arch", default="lin")
    p.add_argument("--stochastic", action="store_true")
    p.add_argument("--steps", type=int)
    p.add_argument("--lr-actor", type=float, dest="lr_actor")
    p.add_argument("--lr-critic", type=float, dest="lr_critic")
    p.add_argument("--sigma", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--buffer-capacity", type=int, dest="buffer_capacity")
    p.add_argument("--critic-updates", type=int, dest="critic_updates")
    p.add_argument("--actor-updates", type=int, dest="actor_updates")
    p.add_argument("--update-every", type=int, dest="update_every")
    p.add_argument("--obs-normalization", type=_bool_option,
                   dest="obs_normalization")
    p.add_argument("--critic-hidden", dest="critic_hidden",
                   help="comma-separated layer widths, e.g. 512,512")
    p.add_argument("--critic-activation", dest="critic_activation")
    p.add_argument("--semi-gradient", type=_bool_option, dest="semi_gradient")
    p.add_argument("--n-evals", type=int, dest="n_evals")
    p.add_argument("--eval-episodes", type=int, dest="eval_episodes")
    p.add_argument("--metric", choices=("final", "avg"))
    p.add_argument("--n-directions", type=int, dest="n_directions")
    p.add_argument("--n-elite", type=int, dest="n_elite")
    p.add_argument("--critic-path", dest="critic_path")
    p.add_argument("--zs-policies", type=int, dest="zs_policies")
    p.add_argument("--zs-steps", type=int, dest="zs_steps")
    p.add_argument("--zs-eval-every", type=int, dest="zs_eval_every")
    p.add_argument("--zs-eval-episodes", type=int, dest="zs_eval_episodes")
    p.add_argument("--dataset-size", type=int, dest="dataset_size")
    p.add_argument("--perturb-every", type=int, dest="perturb_every")
    p.add_argument("--offline-updates", type=int, dest="offline_updates")
    p.add_argument("--checkpoint-every", type=int, dest="checkpoint_every")
    p.add_argument("--force", action="store_true")
    p.add_argument("--config", help="key = value file merged under CLI flags")
    p.add_argument("--out", required=True, help="artifact directory")
    p.add_argument("--max-workers", type=int, dest="max_workers")
    p.add_argument("--server", help="base URL of a running service; "
                                    "defaults to in-process execution")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbvf",
        description="parameter-based value function experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one run, one seed")
    _add_run_options(p_run)
    p_run.add_argument("--seed", type=int, default=0)

    p_sweep = sub.add_parser("sweep", help="one config across many seeds")
    _add_run_options(p_sweep)
    p_sweep.add_argument("--seeds", default="0..4",
                         help="'0..4' range or '0,2,5' list")

    p_land = sub.add_parser("landscape", help="value-surface grid dump")
    p_land.add_argument("--critic", required=True, dest="critic_path")
    p_land.add_argument("--resolution", type=int, default=101)
    p_land.add_argument("--mode", choices=("episodic", "discounted"))
    p_land.add_argument("--out", required=True)
    p_land.add_argument("--server")

    p_oracle = sub.add_parser("oracle", help="policy-gradient identity checks")
    p_oracle.add_argument("--instances", type=int, default=20)
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--gamma", type=float, default=0.9)
    p_oracle.add_argument("--out", required=True)
    p_oracle.add_argument("--server")

    p_serve = sub.add_parser("serve", help="start the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--job-workers", type=int, default=2)

    return parser


def make_client(server: str | None):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=None)
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _request_payload(args: argparse.Namespace, seeds: str) -> dict:
    keys = ("algo", "env", "arch", "stochastic", "steps", "lr_actor",
            "lr_critic", "sigma", "gamma", "batch_size", "buffer_capacity",
            "critic_updates", "actor_updates", "update_every",
            "obs_normalization", "critic_hidden", "critic_activation",
            "semi_gradient", "n_evals", "eval_episodes", "metric",
            "n_directions", "n_elite", "critic_path", "zs_policies",
            "zs_steps", "zs_eval_every", "zs_eval_episodes", "dataset_size",
            "perturb_every", "offline_updates", "checkpoint_every", "force",
            "max_workers")
    payload = {k: getattr(args, k) for k in keys
               if getattr(args, k, None) is not None}
    payload["seeds"] = seeds
    payload["out_dir"] = args.out
    if args.config:
        try:
            with open(args.config) as fh:
                payload["config_text"] = fh.read()
        except OSError as e:
            print(f"config file error: {e}", file=sys.stderr)
            raise SystemExit(EXIT_CONFIG)
    return payload


def _fail(detail: str, code: int) -> int:
    print(f"error: {detail}", file=sys.stderr)
    return code


def cmd_run(args: argparse.Namespace, seeds: str) -> int:
    payload = _request_payload(args, seeds)
    with make_client(getattr(args, "server", None)) as client:
        resp = client.post("/runs", json=payload)
        if resp.status_code == 400:
            return _fail(resp.json().get("detail", resp.text), EXIT_CONFIG)
        if resp.status_code not in (200, 202):
            return _fail(resp.text, EXIT_RUNTIME)
        job_id = resp.json()["job_id"]
        while True:
            status = client.get(f"/runs/{job_id}").json()
            if status["state"] in ("done", "failed"):
                break
            time.sleep(POLL_SECONDS)
    if status["state"] == "failed":
        code = EXIT_CONFIG if status.get("error_kind") == "config" else EXIT_RUNTIME
        return _fail(status.get("detail") or "run failed", code)
    for row in status["seeds"]:
        print(f"seed {row['seed']}: final {row['final_metric']:.4f} "
              f"avg {row['avg_metric']:.4f} curve {row['curve_path']}")
    summary = status["summary"]
    print(f"summary: final {summary['final_metric_mean']:.4f} "
          f"± {summary['final_metric_std']:.4f} over "
          f"{summary['seed_count']} seed(s) -> {status['summary_path']}")
    return EXIT_OK


def cmd_landscape(args: argparse.Namespace) -> int:
    payload = {"critic_path": args.critic_path, "out_path": args.out,
               "resolution": args.resolution}
    if args.mode:
        payload["mode"] = args.mode
    with make_client(args.server) as client:
        resp = client.post("/landscape", json=payload)
    if resp.status_code == 400:
        return _fail(resp.json().get("detail", resp.text), EXIT_CONFIG)
    if resp.status_code != 200:
        return _fail(resp.text, EXIT_RUNTIME)
    info = resp.json()
    print(f"landscape ({info['mode']}, {info['resolution']}x"
          f"{info['resolution']}) -> {info['out_path']}")
    print(f"fit R^2 {info['r_squared']:.4f}; true maximum near "
          f"({info['true_max_theta'][0]:.3f}, {info['true_max_theta'][1]:.3f})")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    payload = {"out_path": args.out, "instances": args.instances,
               "seed": args.seed, "gamma": args.gamma}
    with make_client(args.server) as client:
        resp = client.post("/oracle", json=payload)
    if resp.status_code == 400:
        return _fail(resp.json().get("detail", resp.text), EXIT_CONFIG)
    if resp.status_code != 200:
        return _fail(resp.text, EXIT_RUNTIME)
    info = resp.json()
    print(f"oracle report ({len(info['rows'])} instances) -> {info['out_path']}")
    print(f"max |thm1 err| {info['thm1_maxerr']:.3e}  "
          f"max |thm3 err| {info['thm3_maxerr']:.3e}  "
          f"constructed truncation bias {info['constructed_bias']:.6f}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(job_workers=args.job_workers),
                host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args, seeds=str(args.seed))
        if args.command == "sweep":
            return cmd_run(args, seeds=args.seeds)
        if args.command == "landscape":
            return cmd_landscape(args)
        if args.command == "oracle":
            return cmd_oracle(args)
        if args.command == "serve":
            return cmd_serve(args)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    except json.JSONDecodeError as e:
        return _fail(f"bad server response: {e}", EXIT_RUNTIME)
    except Exception as e:  # connection problems, unexpected failures
        return _fail(f"{type(e).__name__}: {e}", EXIT_RUNTIME)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
