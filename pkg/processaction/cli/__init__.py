"""Implements the command-line pipeline."""

__all__ = [
    "PipelineConfig",
    "PathsConfig",
    "SplitConfig",
    "ClusteringConfig",
    "MdpConfig",
    "SimConfig",
    "config_from_dict",
    "load_config",
    "train_hash",
    "config_hash",
    "cmd_generate",
    "cmd_train",
    "cmd_recommend",
    "cmd_eval_sim",
    "cmd_eval_log",
    "cmd_silhouette",
    "main",
]

from .commands import (
    cmd_eval_log,
    cmd_eval_sim,
    cmd_generate,
    cmd_recommend,
    cmd_silhouette,
    cmd_train,
)
from .config import (
    ClusteringConfig,
    MdpConfig,
    PathsConfig,
    PipelineConfig,
    SimConfig,
    SplitConfig,
    config_from_dict,
    config_hash,
    load_config,
    train_hash,
)
from .main import main
