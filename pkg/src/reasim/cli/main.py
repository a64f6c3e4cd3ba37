"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 1 runtime error. Every
subcommand accepts --seed, --scale, and --config <json>; config values
override defaults, explicit flags override the config, and unknown
config keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from ..errors import ConfigError, ReasimError

log = logging.getLogger("reasim")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    p.add_argument(
        "--scale",
        choices=["desk", "paper"],
        default="desk",
        help="desk-scale defaults or paper-scale sizes (default desk)",
    )
    p.add_argument("--config", type=str, default=None, help="JSON config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reasim")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario", help="generate a scenario JSON document")
    p.add_argument("--kind", required=True, help="scenario kind, e.g. scatter, maze, hold")
    p.add_argument("--out", default=None, help="output path (default <kind>_<seed>.json)")
    _add_common(p)

    p = sub.add_parser("collect-data", help="collect estimator training samples")
    p.add_argument("--count", type=int, default=20000)
    p.add_argument("--out", default="dataset")
    p.add_argument("--shield", default=None, help="shield weights path (optional)")
    p.add_argument(
        "--profile",
        choices=["desk", "paper", "hold-desk"],
        default="desk",
        help="estimator grid profile (default desk)",
    )
    p.add_argument("--ray-noise", type=float, default=0.05)
    _add_common(p)

    p = sub.add_parser("train-estimator", help="supervised estimator training")
    p.add_argument("--data", required=True, help="dataset path prefix")
    p.add_argument("--variant", choices=["reasan", "gru", "convgru", "agg"], default="reasan")
    p.add_argument("--epochs", type=int, default=12)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--out", default="runs/estimator")
    p.add_argument(
        "--profile", choices=["desk", "paper", "hold-desk"], default="desk"
    )
    _add_common(p)

    p = sub.add_parser("train-shield", help="two-stage safety-shield training")
    p.add_argument("--iterations", type=int, default=260)
    p.add_argument("--n-envs", type=int, default=64)
    p.add_argument("--rollout", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--heuristic", action="store_true", help="REA-heu tracking variant")
    p.add_argument("--out", default="runs/shield")
    _add_common(p)

    p = sub.add_parser("train-nav", help="navigation training through a frozen shield")
    p.add_argument("--shield", required=True, help="shield weights path")
    p.add_argument("--iterations", type=int, default=320)
    p.add_argument("--n-envs", type=int, default=64)
    p.add_argument("--rollout", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--out", default="runs/nav")
    _add_common(p)

    p = sub.add_parser("train-end2end", help="monolithic goal-reaching baseline")
    p.add_argument("--iterations", type=int, default=260)
    p.add_argument("--n-envs", type=int, default=64)
    p.add_argument("--rollout", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--out", default="runs/end2end")
    _add_common(p)

    p = sub.add_parser("eval", help="run an evaluation battery")
    p.add_argument("--variant", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--weights-dir", default="runs")
    p.add_argument("--groups", type=int, default=10)
    p.add_argument("--episodes", type=int, default=20)
    p.add_argument("--ray-noise", type=float, default=0.05)
    p.add_argument("--out", default=None, help="CSV path (default report_<...>.csv)")
    _add_common(p)

    p = sub.add_parser("replay-rewards", help="per-term reward trace from a replay log")
    p.add_argument("--replay", required=True)
    p.add_argument("--out", default=None)
    _add_common(p)

    p = sub.add_parser("inspect-weights", help="print a weights manifest")
    p.add_argument("path", help="weights path prefix (no extension)")
    _add_common(p)

    p = sub.add_parser("serve", help="live session with WebSocket streaming")
    p.add_argument("--scenario", default="hold")
    p.add_argument("--port", type=int, default=8700)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--weights-dir", default=None)
    p.add_argument("--nav", action="store_true", help="run the navigation policy")
    p.add_argument("--estimator", action="store_true", help="estimator in the loop")
    p.add_argument("--slowdown", type=float, default=1.0)
    p.add_argument("--ray-noise", type=float, default=0.0)
    p.add_argument("--static", default=None, help="cockpit static files directory")
    _add_common(p)

    return parser


def _merge_config(args: argparse.Namespace, argv: list[str]) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    with open(args.config) as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {k for k in vars(args) if k not in ("command", "config")}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}; known: {sorted(known)}")
    explicit = {tok.lstrip("-").replace("-", "_") for tok in argv if tok.startswith("--")}
    for k, v in cfg.items():
        if k not in explicit:
            setattr(args, k, v)
    return args


# ------------------------------------------------------------------ handlers

def _cmd_gen_scenario(args) -> int:
    from ..core.scenario_io import save_scenario
    from ..guidance.scenarios import ScenarioSpec, generate

    gen = generate(ScenarioSpec(kind=args.kind.replace("-", "_"), seed=args.seed, scale=args.scale))
    out = args.out or f"{args.kind}_{args.seed}.json"
    save_scenario(gen.to_scenario(), out)
    print(f"wrote {out}")
    return 0


def _estimator_cfg(profile: str, variant: str = "reasan"):
    from ..estimator.model import EstimatorConfig

    if profile == "desk":
        return EstimatorConfig.desk(variant)
    if profile == "paper":
        return EstimatorConfig.paper(variant)
    return EstimatorConfig.hold_desk(variant)


def _cmd_collect_data(args) -> int:
    from ..estimator.collect import data_collect

    controller = None
    if args.shield:
        from ..rl.obs import SHIELD_EXTRA
        from ..rl.train import load_policy

        shield = load_policy(args.shield, SHIELD_EXTRA, args.scale)
        from .controllers import ShieldController

        controller = ShieldController(shield)
    cfg = _estimator_cfg(args.profile)
    n = data_collect(
        args.out,
        args.count,
        cfg,
        seed=args.seed,
        controller=controller,
        scale=args.scale,
        ray_noise=args.ray_noise,
    )
    print(f"wrote {n} samples to {args.out}.bin")
    return 0


def _cmd_train_estimator(args) -> int:
    from ..estimator.train import EstimatorTrainConfig, train_estimator
    from ..raycast.dataset_io import load_dataset

    cfg = _estimator_cfg(args.profile, args.variant)
    ds = load_dataset(args.data)
    tc = EstimatorTrainConfig(
        epochs=args.epochs, lr=args.lr, batch_size=args.batch_size, seed=args.seed
    )
    _, curves = train_estimator(ds, cfg, tc, out_dir=args.out, tag=f"estimator_{args.variant}")
    print(
        f"trained {args.variant}: val loss {curves[0]['val_loss']:.5f} -> "
        f"{curves[-1]['val_loss']:.5f} ({len(curves)} points)"
    )
    return 0


def _ppo_from_args(args):
    from ..rl.ppo import PPOConfig

    ppo = PPOConfig(
        n_envs=args.n_envs, rollout_len=args.rollout, lr=args.lr, iterations=args.iterations
    )
    return ppo


def _cmd_train_shield(args) -> int:
    from ..rl.train import ShieldTrainConfig, train_shield

    tc = ShieldTrainConfig(
        seed=args.seed,
        scale=args.scale,
        ppo=_ppo_from_args(args),
        heuristic_tracking=args.heuristic,
    )
    manifest = train_shield(tc, args.out)
    print(f"shield saved to {manifest['weights']} (stage {manifest['final_stage']})")
    return 0


def _cmd_train_nav(args) -> int:
    from ..rl.train import NavTrainConfig, train_nav

    tc = NavTrainConfig(seed=args.seed, scale=args.scale, ppo=_ppo_from_args(args))
    manifest = train_nav(tc, args.shield, args.out)
    print(f"nav saved to {manifest['weights']}")
    return 0


def _cmd_train_end2end(args) -> int:
    from ..rl.train import ShieldTrainConfig, train_end2end

    tc = ShieldTrainConfig(seed=args.seed, scale=args.scale, ppo=_ppo_from_args(args))
    manifest = train_end2end(tc, args.out)
    print(f"end2end saved to {manifest['weights']}")
    return 0


def _cmd_eval(args) -> int:
    from ..evaluation.battery import run_battery, run_hold
    from ..evaluation.report import format_table, write_csv
    from ..evaluation.variants import PolicyBundle

    bundle = PolicyBundle(root=args.weights_dir, scale=args.scale)
    if args.scenario.startswith("hold"):
        report = run_hold(
            args.variant,
            bundle,
            scenario=args.scenario,
            seed=args.seed,
            groups=args.groups,
            episodes_per_group=args.episodes,
            ray_noise=args.ray_noise,
        )
    else:
        report = run_battery(
            args.variant,
            args.scenario,
            bundle,
            seed=args.seed,
            groups=args.groups,
            episodes_per_group=args.episodes,
            ray_noise=args.ray_noise,
        )
    out = args.out or f"report_{args.variant}_{args.scenario}_{args.seed}.csv"
    write_csv([report], out)
    print(format_table([report]))
    print(f"wrote {out}")
    return 0


def _cmd_replay_rewards(args) -> int:
    from ..core.scenario_io import read_replay
    from ..rewards.trace import trace_replay, write_trace_csv

    rows = trace_replay(read_replay(args.replay))
    out = args.out or args.replay.rsplit(".", 1)[0] + "_rewards.csv"
    write_trace_csv(rows, out)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_inspect_weights(args) -> int:
    from ..nn.model import read_manifest

    manifest = read_manifest(args.path)
    print(json.dumps(manifest, indent=1))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from ..guidance.scenarios import ScenarioSpec, generate
    from .serve import SimSession, build_app

    shield = nav = estimator = None
    if args.weights_dir:
        from ..evaluation.variants import PolicyBundle

        bundle = PolicyBundle(root=args.weights_dir, scale=args.scale)
        shield = bundle.shield()
        if args.nav:
            nav = bundle.nav()
        if args.estimator:
            estimator = bundle.estimator("reasan")
    gen = generate(
        ScenarioSpec(kind=args.scenario.replace("-", "_"), seed=args.seed, scale=args.scale)
    )
    session = SimSession(
        gen,
        shield=shield,
        nav=nav,
        estimator=estimator,
        seed=args.seed,
        slowdown=args.slowdown,
        ray_noise=args.ray_noise,
    )
    static = args.static
    if static is None:
        guess = os.path.join(os.getcwd(), "frontend", "dist")
        static = guess if os.path.isdir(guess) else None
    app = build_app(session, static_dir=static)
    session.start()
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        session.stop()
    return 0


_HANDLERS = {
    "gen-scenario": _cmd_gen_scenario,
    "collect-data": _cmd_collect_data,
    "train-estimator": _cmd_train_estimator,
    "train-shield": _cmd_train_shield,
    "train-nav": _cmd_train_nav,
    "train-end2end": _cmd_train_end2end,
    "eval": _cmd_eval,
    "replay-rewards": _cmd_replay_rewards,
    "inspect-weights": _cmd_inspect_weights,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _merge_config(args, argv)
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ReasimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
