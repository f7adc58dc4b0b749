"""Python bindings for the mugen candidate-action generator library."""

import json as _json

from ._mugen import (
    ArtifactError,
    ConfigError,
    NumericalError,
    brute_force_best,
    diversity,
    kernel_estimate,
    location_reward,
    opponent_cells,
    sample_grid,
    sample_hammer_state,
    score,
    simulate_shot,
    swap_teams,
    ucb_plan,
    utility,
    __version__,
)
from . import _mugen


def train(config):
    """Train a generator from a config dict. Returns (checkpoint dict, metric rows)."""
    checkpoint, metrics = _mugen.train(_json.dumps(config))
    return _json.loads(checkpoint), metrics


def run(command, config_path, *, out="runs", seed=None, threads=1, force=False, checkpoints=()):
    """Run one command-line subcommand and return (run directory, output files)."""
    return _mugen.run(command, str(config_path), str(out), seed, threads, force, [str(c) for c in checkpoints])
