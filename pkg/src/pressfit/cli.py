"""Command line entry points: train, classify-train, run, sweep, report.

Default policy/monitor settings can be overridden by a JSON config file
pointed to by the PRESSFIT_CONFIG environment variable (or --config), with
optional top-level "policy" and "monitor" sections.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import classifier as clf
from . import harness, runtime as rt
from .policy import Policy, PolicyConfig

CONFIG_ENV_VAR = "PRESSFIT_CONFIG"


def load_config(path=None) -> dict:
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    with open(path) as f:
        return json.load(f)


def _policy_config(cfg: dict) -> PolicyConfig:
    return PolicyConfig(**cfg.get("policy", {}))


def _monitor_config(cfg: dict) -> rt.MonitorConfig:
    return rt.MonitorConfig.from_dict(cfg.get("monitor", {}))


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    policy = harness.train_reference_policy(
        seed=args.seed, config=_policy_config(cfg), corrections_path=args.corrections
    )
    policy.save(args.out)
    print(f"trained policy written to {args.out}")
    return 0


def cmd_classify_train(args) -> int:
    policy = Policy.load(args.policy)
    if args.dataset_dir and os.path.isdir(args.dataset_dir):
        dataset = clf.LabeledDataset.load(args.dataset_dir)
    else:
        dataset = clf.generate_dataset(
            policy, trials=args.trials, seed=args.seed, window_seconds=args.window_seconds
        )
        if args.dataset_dir:
            dataset.save(args.dataset_dir)
    model, accuracy = clf.train_classifier(
        dataset, args.window_seconds, clf.TrainConfig(seed=args.seed)
    )
    model.save(args.out)
    print(f"held-out accuracy: {accuracy:.4f}")
    print(f"classifier written to {args.out}")
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    policy = Policy.load(args.policy)
    if args.spec:
        spec = rt.EpisodeSpec.from_file(args.spec)
        preset, mode, seed, monitor = spec.preset, rt.Mode(spec.mode), spec.seed, spec.monitor
    else:
        preset, mode, seed = args.preset, rt.Mode(args.mode), args.seed
        monitor = _monitor_config(cfg)
    classify = None
    if mode is rt.Mode.ACCIFR:
        if not args.classifier:
            print("accifr mode needs --classifier", file=sys.stderr)
            return 2
        model = clf.ClassifierModel.load(args.classifier)
        classify = model.predict
    from .sim import spawn_scenario

    world, start, goal = spawn_scenario(preset)
    result = rt.run_episode(
        policy, world, start, goal, cfg=monitor, mode=mode, classify=classify, seed=seed
    )
    if args.record:
        with open(args.record, "w") as f:
            f.write(result.record.to_json())
    print(
        f"preset={preset} mode={mode.value} success={result.record.success} "
        f"ticks={result.record.ticks} collisions={len(result.record.collisions)}"
    )
    return 0 if result.record.success else 1


def cmd_sweep(args) -> int:
    policy = Policy.load(args.policy)
    if args.dataset_dir and os.path.isdir(args.dataset_dir):
        dataset = clf.LabeledDataset.load(args.dataset_dir)
    else:
        dataset = clf.generate_dataset(policy, trials=args.trials, seed=args.seed)
        if args.dataset_dir:
            dataset.save(args.dataset_dir)
    rows = clf.history_length_sweep(dataset, train_config=clf.TrainConfig(seed=args.seed))
    report = clf.sweep_report_csv(rows)
    with open(args.out, "w") as f:
        f.write(report)
    print(report, end="")
    return 0


_BATTERIES = {
    "start": harness.start_battery_spec,
    "goal": harness.goal_battery_spec,
    "grasp": harness.grasp_battery_spec,
}


def cmd_report(args) -> int:
    policy = Policy.load(args.policy)
    classify = None
    if args.classifier:
        classify = clf.ClassifierModel.load(args.classifier).predict
    names = list(_BATTERIES) if args.battery == "all" else [args.battery]
    texts, csvs = [], []
    for name in names:
        spec = _BATTERIES[name](master_seed=args.seed, trials=args.trials)
        if classify is None:
            # recovery mode needs the classifier; compare baseline only
            import dataclasses

            spec = dataclasses.replace(spec, modes=(rt.Mode.ILOSA,))
        result = harness.run_experiment(spec, policy, classify=classify)
        texts.append(result.report_text())
        csvs.append(result.to_csv())
    with open(args.out, "w") as f:
        f.write("\n".join(texts))
    if args.csv:
        header, *_ = csvs[0].splitlines(keepends=True)
        body = "".join(c.split("\n", 1)[1] for c in csvs)
        with open(args.csv, "w") as f:
            f.write(header + body)
    print("\n".join(texts), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pressfit")
    p.add_argument("--config", help=f"config JSON (default: ${CONFIG_ENV_VAR})")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="learn a policy from the scripted demonstration")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", default="policy.json")
    t.add_argument("--corrections", help="teacher fixture JSON (default: bundled)")
    t.set_defaults(func=cmd_train)

    c = sub.add_parser("classify-train", help="train the contact-side classifier")
    c.add_argument("--policy", required=True)
    c.add_argument("--out", default="classifier.npz")
    c.add_argument("--trials", type=int, default=80)
    c.add_argument("--window-seconds", type=float, default=0.1)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--dataset-dir", help="cache directory for generated windows")
    c.set_defaults(func=cmd_classify_train)

    r = sub.add_parser("run", help="run one episode on a scenario preset")
    r.add_argument("--policy", required=True)
    r.add_argument("--preset", default="training")
    r.add_argument("--mode", choices=[m.value for m in rt.Mode], default="accifr")
    r.add_argument("--classifier")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--spec", help="episode spec JSON (overrides preset/mode/seed)")
    r.add_argument("--record", help="write the run record JSON here")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="classifier accuracy vs window duration")
    s.add_argument("--policy", required=True)
    s.add_argument("--trials", type=int, default=80)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--dataset-dir")
    s.add_argument("--out", default="sweep.csv")
    s.set_defaults(func=cmd_sweep)

    g = sub.add_parser("report", help="run a battery and write the report")
    g.add_argument("--policy", required=True)
    g.add_argument("--classifier")
    g.add_argument("--battery", choices=[*_BATTERIES, "all"], default="all")
    g.add_argument("--trials", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="report.txt")
    g.add_argument("--csv")
    g.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
