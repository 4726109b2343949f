#!/usr/bin/env python3
"""Compare BOB against RestartUCB run with each fixed period from its pool.

Usage: python3 scripts/bob_period_sweep.py [--scenario abrupt] [--reps 50]

Shows how far the meta-learner lands from the best single pool member and
from the tuned period, and how often Exp3 picked each period.
"""

import argparse
from collections import Counter

from restartucb.bob import build_pool, episode_length, exp3_rate
from restartucb.harness import preset, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenario", default="abrupt", choices=("abrupt", "gradual"))
    ap.add_argument("--reps", type=int, default=50)
    args = ap.parse_args()

    cfg = preset(args.scenario).replace(repetitions=args.reps)
    pool = build_pool(cfg.d, cfg.S, cfg.T)
    D = episode_length(cfg.d, cfg.T)
    K = -(-cfg.T // D)
    print(f"pool {pool}, episode length {D}, {K} episodes, exp3 rate {exp3_rate(len(pool), K):.3f}")

    for H in pool + [cfg.tuned_period()]:
        _, s = run_experiment(cfg.replace(policy="restart", H=H), keep_records=False)
        print(f"restart H={H:5d}  mean final regret {s.mean_final_regret:10.1f}")

    traces, s = run_experiment(cfg.replace(policy="bob"), keep_records=False)
    print(f"bob              mean final regret {s.mean_final_regret:10.1f}")
    picks = Counter(h for t in traces for h in t.periods)
    total = sum(picks.values())
    print("period picks: " + ", ".join(f"{h}:{picks[h] / total:.2f}" for h in pool))
    print(f"clipped episodes: {sum(t.clipped for t in traces)}/{total}")


if __name__ == "__main__":
    main()
