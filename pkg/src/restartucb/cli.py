"""Command line entry point.

    restartucb run --config abrupt.cfg --out results/ --policy restart,window
    restartucb verify --out results/
    restartucb bob --out results/bob
    restartucb presets --out configs/

Exit codes: 0 success, 1 failed verification check, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import statistics
import sys
from pathlib import Path

from .harness import (
    POLICY_NAMES,
    ConfigError,
    RunConfig,
    emit_csv,
    format_config,
    load_config,
    preset,
    run_experiment,
)
from .verification import run_suite

log = logging.getLogger("restartucb")


def _base_config(args, policy=None) -> RunConfig:
    overrides = dict(base_seed=args.seed, repetitions=args.reps, output=args.out, policy=policy)
    if args.config:
        return load_config(args.config, **overrides)
    cfg = preset(args.scenario)
    return cfg.replace(**{k: v for k, v in overrides.items() if v is not None})


def _policies(spec: str | None) -> list[str | None]:
    if spec is None:
        return [None]
    names = list(POLICY_NAMES[:4]) if spec == "all" else [p.strip() for p in spec.split(",")]
    bad = [p for p in names if p not in POLICY_NAMES]
    if bad:
        raise ConfigError(f"unknown policy {bad[0]!r}; choose from {POLICY_NAMES}")
    return names


def cmd_run(args) -> int:
    traces, summaries = [], []
    for name in _policies(args.policy):
        cfg = _base_config(args, name).replace(output=None)
        tr, s = run_experiment(cfg, keep_records=False)
        traces.extend(tr)
        summaries.append(s)
        rt_std = statistics.stdev(t.runtime for t in tr) if len(tr) > 1 else 0.0
        print(f"{s.policy:8s} mean={s.mean_final_regret:.2f} std={s.std_final_regret:.2f} "
              f"runtime={s.mean_runtime_sec:.4f}+-{rt_std:.4f}s reps={s.repetitions}")
        if name == "bob" or cfg.policy == "bob":
            clipped = sum(t.clipped for t in tr)
            episodes = sum(len(t.periods) for t in tr)
            print(f"bob clipped episodes: {clipped}/{episodes}")
    if args.out:
        emit_csv(traces, summaries, args.out)
        print(f"wrote {args.out}")
    return 0


def cmd_bob(args) -> int:
    args.policy = "bob"
    return cmd_run(args)


def cmd_verify(args) -> int:
    rows = run_suite(seed=args.seed or 0)
    print(f"{'check':34s} {'computed':>14s} {'bound':>12s}  result")
    for r in rows:
        print(f"{r.name:34s} {r.computed:14.6g} {r.bound:12.6g}  {'PASS' if r.passed else 'FAIL'}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "verify.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["name", "computed", "bound", "pass"])
            for r in rows:
                w.writerow([r.name, f"{r.computed:.10g}", f"{r.bound:.10g}", str(r.passed).lower()])
    return 0 if all(r.passed for r in rows) else 1


def cmd_presets(args) -> int:
    for name in ("abrupt", "gradual"):
        text = format_config(preset(name))
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{name}.cfg").write_text(text, encoding="utf-8")
            print(f"wrote {out / (name + '.cfg')}")
        else:
            print(f"# {name}\n{text}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="restartucb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--reps", type=int, help="number of repetitions")
        p.add_argument("--policy", help="policy name, comma list, or 'all'")
        if scenario:
            p.add_argument("--scenario", default="abrupt", choices=("abrupt", "gradual"),
                           help="preset used when no --config is given")

    common(sub.add_parser("run", help="run an experiment"))
    common(sub.add_parser("bob", help="run RestartUCB-BOB"))
    common(sub.add_parser("verify", help="run the numerical verification suite"), scenario=False)
    p = sub.add_parser("presets", help="write the abrupt and gradual configs")
    p.add_argument("--out", help="directory for abrupt.cfg and gradual.cfg")
    return parser


COMMANDS = {"run": cmd_run, "bob": cmd_bob, "verify": cmd_verify, "presets": cmd_presets}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
