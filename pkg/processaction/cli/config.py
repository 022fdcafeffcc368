"""Configuration of the pipeline.

The pipeline reads a single JSON file. All sections are optional; omitted
values take the documented defaults::

    {
      "paths": {"log": "data/log.csv", "artifacts": "artifacts", "reports": "reports"},
      "agent_activities": ["check_application", "create_offer", ...],
      "csv": {"case_id": "case_id", "activity": "activity", "timestamp": "timestamp"},
      "kpi": {"kind": "loan_profit", "interest_rate": 0.15, "labor_cost": 36.0},
      "split": {"train_fraction": 0.8, "seed": 0, "exclude_no_decision": true},
      "clustering": {"k": 100, "seed": 0, "candidates": [10, 50, 100]},
      "mdp": {"gamma": 0.99, "reward_mode": "transition"},
      "scaling": ["h0", "lin", "step:50", "smooth:50"],
      "algorithm": "mc",
      "train": {"episodes": 10000, "seed": 0},
      "sim": {"preset": "loan_common_small", "n_traces": 5000, "seed": 0}
    }
"""

import dataclasses
import hashlib
import json
import os
from collections.abc import Mapping
from dataclasses import dataclass, replace
from typing import Any, Optional, TypeVar

from processaction import config as pacfg
from processaction.eventlog import CsvSchema, KpiSpec
from processaction.exceptions import ConfigError
from processaction.mdp.builder import REWARD_MODES
from processaction.rl import ScalingFn, TrainConfig

ARTIFACTS_ENV = "PROCESSACTION_ARTIFACTS"
ALGORITHMS = ("mc", "q_learning")

T = TypeVar("T")


@dataclass(frozen=True)
class PathsConfig:
    """Locations of the pipeline files.

    Parameters
    ----------
    log : str
        The event log (CSV or JSON lines). ``generate`` writes it, the other
        commands read it.
    artifacts : str
        Directory of the trained artifacts. Overridden by the environment
        variable ``PROCESSACTION_ARTIFACTS``.
    reports : str
        Directory of the evaluation reports.
    """

    log: str = "log.csv"
    artifacts: str = "artifacts"
    reports: str = "reports"

    @property
    def artifacts_dir(self) -> str:
        """The artifacts directory, after applying the environment override."""
        return os.environ.get(ARTIFACTS_ENV) or self.artifacts


@dataclass(frozen=True)
class SplitConfig:
    """Train/test split of the log."""

    train_fraction: float = 0.8
    seed: int = 0
    exclude_no_decision: bool = True


@dataclass(frozen=True)
class ClusteringConfig:
    """Settings of the k-means prefix clustering.

    Parameters
    ----------
    k : int
        The number of clusters.
    seed : int
        Seed of the k-means++ initialisation.
    max_iter : int
        Maximum number of Lloyd iterations.
    tol : float
        Convergence tolerance.
    deduplicate : bool
        Whether to fit on the distinct prefix vectors only.
    candidates : tuple(int)
        The values of k reported by the ``silhouette`` command.
    """

    k: int = pacfg.n_clusters
    seed: int = 0
    max_iter: int = pacfg.kmeans_max_iter
    tol: float = pacfg.kmeans_tol
    deduplicate: bool = False
    candidates: tuple[int, ...] = (10, 25, 50, 100, 200)


@dataclass(frozen=True)
class MdpConfig:
    """Settings of the MDP construction."""

    gamma: float = pacfg.gamma
    reward_mode: str = "transition"


@dataclass(frozen=True)
class SimConfig:
    """Settings of log generation and of the simulation evaluation.

    Parameters
    ----------
    preset : str
        Name of a shipped process model.
    model_file : str, optional
        Path of a process model file; takes precedence over `preset`.
    preaccept_probability : float, optional
        Overrides the pre-acceptance probability of the model.
    log_traces : int, optional
        Number of cases of the generated log. Defaults to the model size.
    log_seed : int
        Seed of the generated log.
    n_traces : int
        Number of simulated cases per policy.
    seed : int
        Seed of the simulation.
    stall_limit : int
        Number of consecutive agent activities after which a case stalls.
    fallback : bool
        Whether unknown states are answered from the nearest known state.
    """

    preset: str = "loan_common_small"
    model_file: Optional[str] = None
    preaccept_probability: Optional[float] = None
    log_traces: Optional[int] = None
    log_seed: int = 0
    n_traces: int = pacfg.sim_traces
    seed: int = 0
    stall_limit: int = pacfg.stall_limit
    fallback: bool = False


@dataclass(frozen=True)
class PipelineConfig:
    """Configuration of all pipeline stages."""

    paths: PathsConfig = PathsConfig()
    agent_activities: tuple[str, ...] = ()
    csv: CsvSchema = CsvSchema()
    kpi: KpiSpec = KpiSpec()
    split: SplitConfig = SplitConfig()
    clustering: ClusteringConfig = ClusteringConfig()
    mdp: MdpConfig = MdpConfig()
    scaling: tuple[str, ...] = (
        "h0",
        "lin",
        f"step:{pacfg.step_threshold}",
        f"smooth:{pacfg.smooth_lambda:g}",
    )
    algorithm: str = "mc"
    train: TrainConfig = TrainConfig()
    sim: SimConfig = SimConfig()

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm: expected one of {ALGORITHMS}, got '{self.algorithm}'")
        if self.mdp.reward_mode not in REWARD_MODES:
            raise ConfigError(f"mdp.reward_mode: expected one of {REWARD_MODES}")
        if not 0 <= self.mdp.gamma <= 1:
            raise ConfigError("mdp.gamma: must lie in [0, 1]")
        if not 0 < self.split.train_fraction < 1:
            raise ConfigError("split.train_fraction: must lie in (0, 1)")
        if self.clustering.k < 1:
            raise ConfigError("clustering.k: must be positive")
        if self.sim.n_traces < 1:
            raise ConfigError("sim.n_traces: must be positive")
        if not self.scaling:
            raise ConfigError("scaling: at least one scaling function is needed")
        names = []
        for spec in self.scaling:
            try:
                names.append(ScalingFn.from_spec(spec).name)
            except ValueError as e:
                raise ConfigError(f"scaling: {e}") from e
        if len(set(names)) != len(names):
            raise ConfigError(f"scaling: duplicate policies {names}")

    @property
    def scaling_fns(self) -> list[ScalingFn]:
        """The parsed scaling functions."""
        return [ScalingFn.from_spec(s) for s in self.scaling]

    def with_seed(self, seed: int) -> "PipelineConfig":
        """Return a copy in which every seed is replaced by `seed`."""
        return replace(
            self,
            split=replace(self.split, seed=seed),
            clustering=replace(self.clustering, seed=seed),
            train=replace(self.train, seed=seed),
            sim=replace(self.sim, seed=seed, log_seed=seed),
        )

    def to_dict(self) -> dict[str, Any]:
        """Convert to a JSON-serializable dict."""
        return json.loads(json.dumps(dataclasses.asdict(self)))


def _section(cls: type[T], d: Any, name: str) -> T:  # noqa: ANN401
    if d is None:
        return cls()
    if not isinstance(d, Mapping):
        raise ConfigError(f"{name}: expected an object")
    known = {f.name for f in dataclasses.fields(cls)}  # type: ignore[arg-type]
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"{name}: unknown field(s) {unknown}")
    values = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
    try:
        return cls(**values)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{name}: {e}") from e


def config_from_dict(d: Mapping[str, Any]) -> PipelineConfig:
    """Create a pipeline configuration from a parsed JSON document.

    Parameters
    ----------
    d : dict
        The configuration document.

    Raises
    ------
    ConfigError
        If a field is unknown or has an invalid value. The message names the
        field.

    Returns
    -------
    PipelineConfig
        The configuration.
    """
    if not isinstance(d, Mapping):
        raise ConfigError("The configuration must be a JSON object")
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"Unknown field(s) {unknown}")
    sections = {
        "paths": PathsConfig,
        "csv": CsvSchema,
        "kpi": KpiSpec,
        "split": SplitConfig,
        "clustering": ClusteringConfig,
        "mdp": MdpConfig,
        "train": TrainConfig,
        "sim": SimConfig,
    }
    kwargs: dict[str, Any] = {n: _section(c, d.get(n), n) for n, c in sections.items()}
    if "agent_activities" in d:
        kwargs["agent_activities"] = tuple(d["agent_activities"])
    if "scaling" in d:
        kwargs["scaling"] = tuple(d["scaling"])
    if "algorithm" in d:
        kwargs["algorithm"] = d["algorithm"]
    try:
        return PipelineConfig(**kwargs)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from e


def load_config(path: str) -> PipelineConfig:
    """Load a pipeline configuration from a JSON file.

    Raises
    ------
    ConfigError
        If the file cannot be read or is invalid.
    """
    try:
        with open(path) as f:
            d = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration {path} is not valid JSON: {e}") from e
    return config_from_dict(d)


def _digest(d: Any) -> str:  # noqa: ANN401
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def train_hash(cfg: PipelineConfig) -> str:
    """Fingerprint of the settings that determine the trained artifacts."""
    d = cfg.to_dict()
    return _digest(
        {
            "log": os.path.basename(cfg.paths.log),
            **{
                k: d[k]
                for k in (
                    "agent_activities",
                    "csv",
                    "kpi",
                    "split",
                    "clustering",
                    "mdp",
                    "scaling",
                    "algorithm",
                    "train",
                )
            },
        }
    )


def config_hash(cfg: PipelineConfig) -> str:
    """Fingerprint of the whole configuration."""
    return _digest(cfg.to_dict())
