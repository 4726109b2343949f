"""Restarted UCB for non-stationary linear bandits, with comparators,
Bandits-over-Bandits tuning and numerical checks of the estimation-error
analysis."""

from .bob import build_pool, episode_length, run_bob
from .engine import RunRecord, simulate
from .environment import ArmSet, Environment, NoiseModel, ParameterPath, path_length, sample_arms
from .harness import RunConfig, load_config, preset, run_experiment
from .policies import (
    OracleRestartUCB,
    PolicyParams,
    RestartUCB,
    StaticUCB,
    WindowUCB,
    optimal_restart_period,
)

__all__ = [
    "ArmSet",
    "Environment",
    "NoiseModel",
    "OracleRestartUCB",
    "ParameterPath",
    "PolicyParams",
    "RestartUCB",
    "RunConfig",
    "RunRecord",
    "StaticUCB",
    "WindowUCB",
    "build_pool",
    "episode_length",
    "load_config",
    "optimal_restart_period",
    "path_length",
    "preset",
    "run_bob",
    "run_experiment",
    "sample_arms",
    "simulate",
]
