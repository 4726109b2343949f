"""Experiment configuration, seeded repetitions and CSV output."""

from __future__ import annotations

import configparser
import csv
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .bob import run_bob
from .engine import RunRecord, simulate
from .environment import Environment, NoiseModel, ParameterPath, path_length
from .policies import POLICIES, PolicyParams, optimal_restart_period

SCENARIOS = ("abrupt", "gradual", "constant", "custom")
POLICY_NAMES = ("restart", "window", "static", "oracle", "bob")

# stream tags for SeedSequence spawn keys
ENV_STREAM = 0
POLICY_STREAM = 1


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str = "abrupt"
    T: int = 50_000
    d: int = 2
    n_arms: int = 20
    noise_std: float = 0.1
    policy: str = "restart"
    H: int | None = None
    w: int | None = None
    lam: float = 1.0
    delta: float | None = None
    S: float = 1.0
    L: float = 1.0
    R: float | None = None
    tau_scale: int = 10
    repetitions: int = 50
    base_seed: int = 0
    output: str | None = None
    resample_arms: bool = False
    engine: str = "fast"
    change_points: list[int] = field(default_factory=list)
    theta: list[float] | None = None
    values: list[list[float]] | None = None

    def __post_init__(self):
        if self.R is None:
            self.R = self.noise_std
        self.validate()

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.policy not in POLICY_NAMES:
            raise ConfigError(f"policy must be one of {POLICY_NAMES}, got {self.policy!r}")
        for name in ("T", "d", "n_arms", "repetitions", "tau_scale"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        for name in ("lam", "S", "L"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.noise_std < 0 or self.R < self.noise_std:
            raise ConfigError("need 0 <= noise_std <= R")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.H is not None and not 1 <= self.H <= self.T:
            raise ConfigError("H must lie in [1, T]")
        if self.w is not None and self.w < 1:
            raise ConfigError("w must be >= 1")
        if self.engine not in ("fast", "reference"):
            raise ConfigError("engine must be 'fast' or 'reference'")
        try:
            self.make_path()
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def make_path(self) -> ParameterPath:
        if self.scenario == "constant":
            return ParameterPath("constant", self.T, self.d, values=self.theta, S=self.S)
        if self.scenario == "custom":
            return ParameterPath("custom", self.T, self.d, list(self.change_points), self.values, S=self.S)
        return ParameterPath(self.scenario, self.T, self.d, S=self.S)

    def tuned_period(self) -> int:
        """``min(tau_scale * optimal_restart_period(d, T, P_T), T)`` from the true path length."""
        P = path_length(self.make_path())
        return min(self.tau_scale * optimal_restart_period(self.d, self.T, P), self.T)

    def policy_params(self) -> PolicyParams:
        path = self.make_path()
        tau = self.tuned_period()
        return PolicyParams(
            T=self.T,
            lam=self.lam,
            delta=self.delta,
            S=self.S,
            L=self.L,
            R=self.R,
            H=self.H if self.H is not None else tau,
            w=self.w if self.w is not None else tau,
            change_points=list(path.change_points),
        )

    def replace(self, **changes) -> "RunConfig":
        return RunConfig(**{**{f.name: getattr(self, f.name) for f in fields(self)}, **changes})


_INT = {"T", "d", "n_arms", "H", "w", "tau_scale", "repetitions", "base_seed"}
_FLOAT = {"noise_std", "lam", "delta", "S", "L", "R"}


def _parse_value(key, raw):
    raw = raw.strip()
    if raw.lower() in ("", "none"):
        return None
    try:
        if key in _INT:
            return int(raw)
        if key in _FLOAT:
            return float(raw)
        if key == "resample_arms":
            return raw.lower() in ("1", "true", "yes", "on")
        if key in ("change_points",):
            return [int(v) for v in raw.replace(",", " ").split()]
        if key == "theta":
            return [float(v) for v in raw.replace(",", " ").split()]
        if key == "values":
            return [[float(v) for v in piece.replace(",", " ").split()] for piece in raw.split(";")]
    except ValueError as e:
        raise ConfigError(f"bad value for {key}: {raw!r}") from e
    return raw


def parse_config(text: str, **overrides) -> RunConfig:
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from e
    known = {f.name for f in fields(RunConfig)}
    kw = {}
    for key, raw in cp["run"].items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        kw[key] = _parse_value(key, raw)
    kw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig(**kw)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def load_config(path, **overrides) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text, **overrides)


def format_config(cfg: RunConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if v is None or (f.name in ("change_points",) and not v):
            continue
        if f.name == "values":
            v = "; ".join(" ".join(repr(x) for x in piece) for piece in v)
        elif isinstance(v, list):
            v = " ".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def preset(name: str) -> RunConfig:
    """The two benchmark scenarios: T=50,000, d=2, 20 arms, noise std 0.1, 50 repetitions."""
    if name not in ("abrupt", "gradual"):
        raise ConfigError(f"unknown preset {name!r}")
    return RunConfig(scenario=name)


@dataclass
class RegretTrace:
    policy: str
    repetition: int
    instant: np.ndarray
    chosen: np.ndarray
    runtime: float = 0.0
    record: RunRecord | None = None
    periods: list[int] = field(default_factory=list)
    episode_rewards: list[float] = field(default_factory=list)
    clipped: int = 0

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.instant)

    @property
    def final(self) -> float:
        return float(self.instant.sum())


@dataclass
class SummaryRow:
    policy: str
    mean_final_regret: float
    std_final_regret: float
    mean_runtime_sec: float
    repetitions: int


def dynamic_regret_step(arms, theta, chosen: int) -> float:
    """Best expected reward minus the chosen arm's expected reward."""
    X = getattr(arms, "arms", arms)
    vals = np.asarray(X, dtype=float) @ np.asarray(theta, dtype=float)
    return float(vals.max() - vals[chosen])


def rng_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent environment and policy generators for one repetition."""
    env_ss = np.random.SeedSequence(seed, spawn_key=(ENV_STREAM,))
    pol_ss = np.random.SeedSequence(seed, spawn_key=(POLICY_STREAM,))
    return np.random.default_rng(env_ss), np.random.default_rng(pol_ss)


def make_environment(cfg: RunConfig, rng: np.random.Generator) -> Environment:
    return Environment(
        cfg.make_path(),
        cfg.n_arms,
        NoiseModel(cfg.noise_std, cfg.R),
        rng,
        L=cfg.L,
        resample_arms=cfg.resample_arms,
    )


def run_once(cfg: RunConfig, k: int) -> RegretTrace:
    """Repetition ``k`` of ``cfg`` (seed ``base_seed + k``)."""
    env_rng, pol_rng = rng_streams(cfg.base_seed + k)
    env = make_environment(cfg, env_rng)
    params = cfg.policy_params()
    start = time.perf_counter()
    if cfg.policy == "bob":
        res = run_bob(env, params, pol_rng, engine=cfg.engine)
        rec = res.record
        extra = dict(periods=res.periods, episode_rewards=res.episode_rewards, clipped=res.clipped)
    else:
        rec = simulate(POLICIES[cfg.policy](cfg.d, params), env, cfg.engine)
        extra = {}
    runtime = time.perf_counter() - start
    return RegretTrace(cfg.policy, k, rec.regret, rec.chosen, runtime, rec, **extra)


def summarize(traces: list[RegretTrace]) -> SummaryRow:
    finals = np.array([tr.final for tr in traces])
    std = float(finals.std(ddof=1)) if len(finals) > 1 else 0.0
    return SummaryRow(
        traces[0].policy,
        float(finals.mean()),
        std,
        float(np.mean([tr.runtime for tr in traces])),
        len(traces),
    )


def run_experiment(cfg: RunConfig, keep_records: bool = True) -> tuple[list[RegretTrace], SummaryRow]:
    """All repetitions of ``cfg``; writes CSVs when ``cfg.output`` is set."""
    cfg.validate()
    traces = []
    for k in range(cfg.repetitions):
        tr = run_once(cfg, k)
        if not keep_records:
            tr.record = None
        traces.append(tr)
    summary = summarize(traces)
    if cfg.output:
        emit_csv(traces, summary, cfg.output)
    return traces, summary


def _fmt(x) -> str:
    return f"{x:.10g}"


def emit_csv(traces: list[RegretTrace], summary, path) -> None:
    """Write ``trace.csv``, ``summary.csv`` and, for BOB runs, ``episodes.csv`` into ``path``."""
    if not traces:
        raise ValueError("no traces to write")
    out = Path(path)
    summaries = summary if isinstance(summary, list) else [summary]
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "trace.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["round", "repetition", "policy", "instant_regret", "cum_regret"])
            for tr in traces:
                cum = tr.cumulative
                for t, (r, c) in enumerate(zip(tr.instant, cum), start=1):
                    w.writerow([t, tr.repetition, tr.policy, _fmt(r), _fmt(c)])
        with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["policy", "mean_final_regret", "std_final_regret", "mean_runtime_sec", "repetitions"])
            for s in summaries:
                w.writerow([s.policy, _fmt(s.mean_final_regret), _fmt(s.std_final_regret),
                            _fmt(s.mean_runtime_sec), s.repetitions])
        if any(tr.periods for tr in traces):
            with open(out / "episodes.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["episode", "repetition", "chosen_period", "episode_reward"])
                for tr in traces:
                    for i, (h, r) in enumerate(zip(tr.periods, tr.episode_rewards), start=1):
                        w.writerow([i, tr.repetition, h, _fmt(r)])
    except OSError as e:
        raise OSError(f"cannot write results to {out}: {e}") from e
