"""Command-line orchestration for every pipeline stage.

Exit codes: 0 success, 1 usage/configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np
import torch

from . import agent, imitation, translate, transfer
from .agent import PolicyNet, TrainConfig, build_policy
from .checkpoint import load_into_module, load_tensors, save_module
from .config import load_config
from .envs import EnvConfig, make_env, read_frames, write_frames
from .errors import ConfigError, ContractViolation, CorruptCheckpointError, XferlabError
from .imitation import GateState
from .metrics import MetricsWriter
from .translate import GanTrainConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def save_policy(path, net: PolicyNet) -> None:
    save_module(path, net, {"kind": "policy", "n_actions": net.n_actions,
                            "stack": net.stack})


def load_policy(path) -> PolicyNet:
    tensors, meta = load_tensors(path)
    if meta.get("kind") != "policy":
        raise CorruptCheckpointError(f"{path}: not a policy checkpoint")
    net = PolicyNet(int(meta["n_actions"]), stack=int(meta.get("stack", 4)))
    load_into_module(path, net)
    return net


def _env_config(cfg: dict) -> EnvConfig:
    skin = cfg["variant"] if cfg["game"] == "breakout" else cfg["level"]
    return EnvConfig(game=cfg["game"], skin=skin, max_steps=cfg["max steps"])


def _train_config(cfg: dict) -> TrainConfig:
    return TrainConfig(
        workers=cfg["# actor learners"],
        nsteps=cfg["step-returns"],
        gamma=cfg["discount rate"],
        entropy_weight=cfg["entropy regularization weight"],
        lr=cfg["RMSprop learning rate"],
        total_updates=cfg["updates"],
        seed=cfg["seed"],
        metrics_every=cfg["metrics every"],
        eval_every=cfg["eval every"],
    )


def _run_training(env_cfg, train_cfg, net, metrics_path, out_path, il_args=None):
    writer = MetricsWriter(metrics_path) if metrics_path else None
    on_metrics = writer.write if writer else None
    try:
        if il_args is None:
            net, metrics, _ = agent.train_a2c(env_cfg, train_cfg, net=net,
                                              on_metrics=on_metrics)
        else:
            net, metrics, _ = imitation.train_il(env_cfg, il_args["buffer"],
                                                 il_args["gate"], train_cfg, net=net,
                                                 batch_size=il_args["b"],
                                                 sgd_lr=il_args["sgd_lr"],
                                                 supervised_iterations=il_args["iters"],
                                                 on_metrics=on_metrics)
    finally:
        if writer:
            writer.close()
    if out_path:
        save_policy(out_path, net)
    if metrics:
        last = metrics[-1]
        print(f"updates={last.updates} frames={last.frames} "
              f"mean_reward={last.mean_reward:.2f} episodes={last.episodes}")
    return net


def cmd_train_source(args, cfg):
    env_cfg = _env_config(cfg)
    _run_training(env_cfg, _train_config(cfg), None, args.metrics, args.out)
    return 0


def cmd_finetune(args, cfg):
    source = load_policy(args.policy)
    net = agent.apply_finetune_setting(source, cfg["setting"], cfg["seed"])
    _run_training(_env_config(cfg), _train_config(cfg), net, args.metrics, args.out)
    return 0


def cmd_collect_frames(args, cfg):
    frames = translate.collect_frames(_env_config(cfg), cfg["frames"], cfg["seed"])
    write_frames(args.out, frames)
    print(f"wrote {len(frames)} frames to {args.out}")
    return 0


def cmd_train_gan(args, cfg):
    frames_s = read_frames(args.dataset_source)
    frames_t = read_frames(args.dataset_target)
    gan_cfg = GanTrainConfig(
        iterations=cfg["gan iterations"],
        checkpoint_interval=cfg["checkpoint interval"],
        out_dir=args.out_dir,
        lam_cyc=cfg["lambda cyc"],
        lr=cfg["Adam learning rate"],
        sharing=cfg["sharing"],
        init=cfg["init"],
        seed=cfg["seed"],
    )
    checkpoints = translate.train_translator(frames_s, frames_t, gan_cfg)
    print(f"wrote {len(checkpoints)} checkpoints to {args.out_dir}")
    return 0


def _write_reports(path, reports):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["checkpoint_id", "episodes", "mean_score", "frames", "scores"])
        for r in reports:
            writer.writerow([r.checkpoint_id, r.episodes, r.mean_score, r.frames,
                             ";".join(str(s) for s in r.scores)])


def cmd_eval_transfer(args, cfg):
    net = load_policy(args.policy)
    env_cfg = _env_config(cfg)
    if args.select_from:
        paths = sorted(Path(args.select_from).glob("translator_*.rlgn"))
        stream = [(int(p.stem.split("_")[1]), p) for p in paths]
        best, reports = transfer.select_checkpoint(
            stream, net, env_cfg, eval_every=cfg["eval every"],
            episodes=cfg["episodes"], seed=cfg["seed"], mode=cfg["mode"])
        print(f"best checkpoint: iteration {best}")
    else:
        report = transfer.eval_with_translation(
            net, args.translator, env_cfg, episodes=cfg["episodes"],
            mode=cfg["mode"], seed=cfg["seed"], checkpoint_id=str(args.translator))
        reports = [report]
        print(f"mean_score={report.mean_score:.2f} over {report.episodes} episodes "
              f"({report.frames} frames)")
    if args.report:
        _write_reports(args.report, reports)
    return 0


def cmd_collect_demos(args, cfg):
    net = load_policy(args.policy)
    env_cfg = _env_config(cfg)
    r_ref = imitation.measure_reference_score(net, args.translator, env_cfg,
                                              seed=cfg["seed"])
    gate = GateState(beta1=cfg["beta_1"], beta2=cfg["beta_2"],
                     reference_score=r_ref, op_interval=cfg["op_interval"])
    buffer = imitation.collect_demonstrations(
        net, args.translator, env_cfg, cfg["trajectories"], gate,
        seed=cfg["seed"], gamma=cfg["discount rate"])
    imitation.save_demo_buffer(args.out, buffer)
    print(f"reference_score={r_ref:.2f} kept_triples={len(buffer)}")
    return 0


def cmd_train_il(args, cfg):
    buffer = imitation.load_demo_buffer(args.demos)
    gate = GateState(beta1=cfg["beta_1"], beta2=cfg["beta_2"],
                     reference_score=buffer.reference_score,
                     op_interval=cfg["op_interval"])
    il_args = {"buffer": buffer, "gate": gate, "b": cfg["b"],
               "sgd_lr": cfg["SGD learning rate"],
               "iters": cfg["Supervised_Iterations"]}
    _run_training(_env_config(cfg), _train_config(cfg), None, args.metrics,
                  args.out, il_args=il_args)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="xferlab", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def add(name, fn, **flags):
        p = sub.add_parser(name)
        p.set_defaults(fn=fn)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        for flag, (required, help_text) in flags.items():
            p.add_argument(flag, required=required, help=help_text)
        return p

    add("train-source", cmd_train_source,
        **{"--out": (False, "policy checkpoint to write"),
           "--metrics": (False, "metrics CSV to write")})
    add("baseline-scratch", cmd_train_source,
        **{"--out": (False, "policy checkpoint to write"),
           "--metrics": (False, "metrics CSV to write")})
    add("finetune", cmd_finetune,
        **{"--policy": (True, "source policy checkpoint"),
           "--setting": (False, "fine-tune setting id"),
           "--out": (False, "policy checkpoint to write"),
           "--metrics": (False, "metrics CSV to write")})
    add("collect-frames", cmd_collect_frames,
        **{"--out": (True, "RLGF dataset file to write")})
    add("train-gan", cmd_train_gan,
        **{"--dataset-source": (True, "RLGF dataset, source domain"),
           "--dataset-target": (True, "RLGF dataset, target domain"),
           "--out-dir": (True, "checkpoint directory")})
    add("eval-transfer", cmd_eval_transfer,
        **{"--policy": (True, "policy checkpoint"),
           "--translator": (False, "identity | oracle | translator checkpoint path"),
           "--select-from": (False, "checkpoint directory for model selection"),
           "--report": (False, "CSV file for evaluation reports")})
    add("collect-demos", cmd_collect_demos,
        **{"--policy": (True, "policy checkpoint"),
           "--translator": (False, "identity | oracle | translator checkpoint path"),
           "--out": (True, "demonstration buffer to write")})
    add("train-il", cmd_train_il,
        **{"--demos": (True, "demonstration buffer"),
           "--out": (False, "policy checkpoint to write"),
           "--metrics": (False, "metrics CSV to write")})
    return parser


# Flags that override config keys when present.
_FLAG_KEYS = {"setting": "setting"}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            parser.print_usage(sys.stderr)
            return 1
        overrides = {}
        for item in args.set:
            key, sep, value = item.partition("=")
            if not sep:
                raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
            overrides[key.strip()] = value.strip()
        for flag, key in _FLAG_KEYS.items():
            value = getattr(args, flag, None)
            if value is not None:
                overrides[key] = value
        cfg = load_config(args.config, overrides)
        if getattr(args, "translator", None) is None and hasattr(args, "translator"):
            args.translator = "identity"
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        torch.manual_seed(cfg["seed"])
        return args.fn(args, cfg)
    except (ConfigError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except XferlabError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
