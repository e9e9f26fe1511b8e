"""mecoff: a seedable MEC-enabled cloud network simulator with learned and
static computation-offloading policies."""

from .config import ExperimentConfig, load_config, parse_config_text
from .env import ActionVector, DiscretizationSpec, OffloadEnv, Transition
from .runner import RunResult, run_experiment

__all__ = [
    "ActionVector",
    "DiscretizationSpec",
    "ExperimentConfig",
    "OffloadEnv",
    "RunResult",
    "Transition",
    "load_config",
    "parse_config_text",
    "run_experiment",
]

__version__ = "0.1.0"
