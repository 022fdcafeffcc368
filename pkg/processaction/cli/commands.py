"""The pipeline stages.

Every stage reads its inputs from and writes its outputs to files. Trained
artifacts are JSON envelopes::

    {"kind": ..., "train_hash": ..., "alphabet_hash": ..., "data": {...}}

where ``train_hash`` fingerprints the configuration of the training run.
Downstream stages refuse artifacts from another configuration. Reports
carry the ``train_hash`` of their artifacts and the ``config_hash`` of the
whole configuration that produced them.
"""

import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Optional

import pandas as pd

from processaction.clustering import KMeansModel, silhouette_analysis
from processaction.encoding import NormalizationStats, alphabet_hash, encode_log, fit_stats
from processaction.evaluation import EvalReport, evaluate_log, write_json, write_tables
from processaction.evaluation.significance import difference_matrix
from processaction.eventlog import (
    EventLog,
    enrich,
    parse_csv,
    read_jsonl,
    split,
    summary,
    write_csv,
    write_jsonl,
)
from processaction.exceptions import (
    AlphabetMismatch,
    ConfigError,
    IncompatibleAlphabet,
    MissingArtifact,
)
from processaction.mdp import Mdp, build
from processaction.mdp.io import from_dict as mdp_from_dict
from processaction.mdp.io import to_dict as mdp_to_dict
from processaction.recommender import Recommender
from processaction.rl import Policy, QTable, mc_policy_iteration, q_learning
from processaction.rl.base import policy_from_dict, policy_to_dict
from processaction.simgen import ProcessModel, generate_log, load_model, load_preset
from processaction.simgen.simulation import SimReport, check_alphabet, simulate_policies

from .config import PipelineConfig, config_hash, train_hash

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
STATS = "stats.json"
KMEANS = "kmeans.json"
MDP = "mdp.json"
SPLIT = "split.json"


def _policy_file(name: str) -> str:
    return f"policy_{name}.json"


def _is_jsonl(path: str) -> bool:
    return path.endswith((".jsonl", ".ndjson"))


def _write_artifact(
    directory: str,
    fname: str,
    kind: str,
    data: Any,  # noqa: ANN401
    fingerprint: str,
    alphabet: str,
) -> str:
    path = os.path.join(directory, fname)
    envelope = {"kind": kind, "train_hash": fingerprint, "alphabet_hash": alphabet, "data": data}
    with open(path, "w") as f:
        json.dump(envelope, f, indent=1, sort_keys=True)
        f.write("\n")
    return path


def _read_artifact(directory: str, fname: str, fingerprint: str) -> dict[str, Any]:
    path = os.path.join(directory, fname)
    if not os.path.isfile(path):
        raise MissingArtifact(f"{path} does not exist; run 'processaction train' first")
    with open(path) as f:
        envelope = json.load(f)
    if envelope.get("train_hash") != fingerprint:
        raise MissingArtifact(
            f"{path} was trained with configuration {envelope.get('train_hash')}, "
            f"not {fingerprint}; run 'processaction train' again"
        )
    return envelope


def read_log(cfg: PipelineConfig) -> EventLog:
    """Read the event log named by the configuration.

    Raises
    ------
    MissingArtifact
        If the log file does not exist.
    ConfigError
        If the process model that tags a CSV log cannot be loaded.
    """
    path = cfg.paths.log
    if not os.path.isfile(path):
        raise MissingArtifact(f"Event log {path} does not exist")
    if _is_jsonl(path):
        log = read_jsonl(path)
        if cfg.agent_activities:
            log = EventLog(log.traces, frozenset(cfg.agent_activities))
        return log
    return parse_csv(path, cfg.csv, _csv_agents(cfg, path))


def _csv_agents(cfg: PipelineConfig, path: str) -> tuple[str, ...]:
    if cfg.agent_activities:
        return cfg.agent_activities
    # the simulated process knows which activities the agent owns
    logger.info("Tagging %s with the agent activities of the process model", path)
    return tuple(sorted(sim_model(cfg).agent_activities))


def sim_model(cfg: PipelineConfig) -> ProcessModel:
    """Load the process model named by the configuration."""
    if cfg.sim.model_file is not None:
        if not os.path.isfile(cfg.sim.model_file):
            raise MissingArtifact(f"Process model {cfg.sim.model_file} does not exist")
        model = load_model(cfg.sim.model_file)
    else:
        try:
            model = load_preset(cfg.sim.preset)
        except ValueError as e:
            raise ConfigError(f"sim.preset: {e}") from e
    if cfg.sim.preaccept_probability is not None:
        model = model.with_preaccept_probability(cfg.sim.preaccept_probability)
    return model


def cmd_generate(cfg: PipelineConfig, out: Optional[str] = None) -> str:
    """Generate a synthetic event log.

    Parameters
    ----------
    cfg : PipelineConfig
        The configuration; the ``sim`` section selects the model.
    out : str, optional
        The output file. Defaults to ``paths.log``. Files ending in
        ``.jsonl`` are written as JSON lines, all others as CSV.

    Returns
    -------
    str
        The path of the log.
    """
    model = sim_model(cfg)
    log = generate_log(model, cfg.sim.log_traces, cfg.sim.log_seed)
    path = out or cfg.paths.log
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    if _is_jsonl(path):
        write_jsonl(log, path)
    else:
        write_csv(log, path)
    logger.info("Wrote %s: %s", path, summary(log, model.accept_activity))
    return path


def cmd_train(cfg: PipelineConfig, out: Optional[str] = None) -> dict[str, Any]:
    """Train one policy per configured scaling function.

    Runs enrich, split, normalization, k-means, MDP construction and policy
    learning, and writes all artifacts.

    Parameters
    ----------
    cfg : PipelineConfig
        The configuration.
    out : str, optional
        The artifacts directory. Defaults to ``paths.artifacts``.

    Returns
    -------
    dict
        The manifest of the artifacts.
    """
    directory = out or cfg.paths.artifacts_dir
    os.makedirs(directory, exist_ok=True)
    fingerprint = train_hash(cfg)

    log = enrich(read_log(cfg), cfg.kpi)
    train_log, test_log = split(
        log, cfg.split.train_fraction, cfg.split.seed, cfg.split.exclude_no_decision
    )
    stats = fit_stats(train_log)
    ahash = alphabet_hash(stats)
    vectors = encode_log(train_log, stats).to_numpy()
    c = cfg.clustering
    kmeans = KMeansModel(c.k, c.seed, c.max_iter, c.tol, c.deduplicate).fit(vectors, ahash)
    mdp = build(train_log, kmeans, stats, cfg.mdp.gamma, cfg.mdp.reward_mode)

    _write_artifact(directory, STATS, "stats", stats.to_dict(), fingerprint, ahash)
    _write_artifact(directory, KMEANS, "kmeans", kmeans.to_dict(), fingerprint, ahash)
    _write_artifact(directory, MDP, "mdp", mdp_to_dict(mdp), fingerprint, ahash)
    _write_artifact(
        directory,
        SPLIT,
        "split",
        {"train": train_log.case_ids, "test": test_log.case_ids},
        fingerprint,
        ahash,
    )
    names = []
    for scaling in cfg.scaling_fns:
        if cfg.algorithm == "mc":
            policy, qtable = mc_policy_iteration(
                mdp, scaling=scaling, cfg=cfg.train, alphabet=stats.alphabet
            )
        else:
            policy, qtable = q_learning(
                mdp, cfg=cfg.train, scaling=scaling, alphabet=stats.alphabet
            )
        _write_artifact(
            directory,
            _policy_file(policy.name),
            "policy",
            policy_to_dict(policy, qtable, mdp),
            fingerprint,
            ahash,
        )
        names.append(policy.name)

    manifest = {
        "policies": names,
        "n_train": len(train_log),
        "n_test": len(test_log),
        "n_states": len(mdp.states),
        "n_edges": len(mdp.edges),
        "config": cfg.to_dict(),
    }
    _write_artifact(directory, MANIFEST, "manifest", manifest, fingerprint, ahash)
    logger.info("Trained %s; artifacts in %s", ", ".join(names), directory)
    return manifest


@dataclass(frozen=True)
class Bundle:
    """The trained artifacts of a configuration."""

    stats: NormalizationStats
    kmeans: KMeansModel
    mdp: Mdp
    policies: dict[str, tuple[Policy, QTable]]
    split: dict[str, list[str]]

    def recommender(self, name: str, fallback: bool = False) -> Recommender:
        """Bundle the artifacts of one policy."""
        policy, qtable = self.policies[name]
        return Recommender(policy, qtable, self.mdp, self.kmeans, self.stats, fallback)


def load_bundle(cfg: PipelineConfig, directory: Optional[str] = None) -> Bundle:
    """Load the trained artifacts of a configuration.

    Raises
    ------
    MissingArtifact
        If an artifact is missing or was trained with another configuration.
    AlphabetMismatch
        If the artifacts were not trained on the same activity alphabet.
    """
    directory = directory or cfg.paths.artifacts_dir
    fingerprint = train_hash(cfg)
    manifest = _read_artifact(directory, MANIFEST, fingerprint)
    expected = manifest["alphabet_hash"]

    def read(fname: str) -> Any:  # noqa: ANN401
        envelope = _read_artifact(directory, fname, fingerprint)
        if envelope["alphabet_hash"] != expected:
            raise AlphabetMismatch(
                f"{os.path.join(directory, fname)} uses alphabet {envelope['alphabet_hash']}, "
                f"the manifest {expected}"
            )
        return envelope["data"]

    stats = NormalizationStats.from_dict(read(STATS))
    if alphabet_hash(stats) != expected:
        raise AlphabetMismatch(f"{os.path.join(directory, STATS)} does not match its fingerprint")
    policies = {
        name: policy_from_dict(read(_policy_file(name))) for name in manifest["data"]["policies"]
    }
    return Bundle(
        stats=stats,
        kmeans=KMeansModel.from_dict(read(KMEANS)),
        mdp=mdp_from_dict(read(MDP)),
        policies=policies,
        split=read(SPLIT),
    )


def _reports_dir(cfg: PipelineConfig, out: Optional[str]) -> str:
    directory = out or cfg.paths.reports
    os.makedirs(directory, exist_ok=True)
    return directory


def cmd_recommend(
    cfg: PipelineConfig,
    prefixes_path: str,
    policy: Optional[str] = None,
    out: Optional[str] = None,
) -> dict[str, Any]:
    """Recommend the next activity of ongoing cases.

    Parameters
    ----------
    cfg : PipelineConfig
        The configuration.
    prefixes_path : str
        A log of ongoing cases, in the format of the event log.
    policy : str, optional
        The name of the policy. Defaults to the first trained policy.
    out : str, optional
        The output file. Defaults to ``recommendations.json`` in the reports
        directory.

    Raises
    ------
    ConfigError
        If there is no policy with the given name.

    Returns
    -------
    dict
        The recommendations, one record per case.
    """
    bundle = load_bundle(cfg)
    name = policy or next(iter(bundle.policies))
    if name not in bundle.policies:
        raise ConfigError(
            f"policy: no trained policy '{name}', choose from {list(bundle.policies)}"
        )
    if not os.path.isfile(prefixes_path):
        raise MissingArtifact(f"Prefix file {prefixes_path} does not exist")
    if _is_jsonl(prefixes_path):
        prefixes = read_jsonl(prefixes_path)
    else:
        prefixes = parse_csv(prefixes_path, cfg.csv, _csv_agents(cfg, prefixes_path))
    recommender = bundle.recommender(name, cfg.sim.fallback)
    report = {
        "policy": name,
        "train_hash": train_hash(cfg),
        "config_hash": config_hash(cfg),
        "recommendations": recommender.recommend_batch(prefixes.traces),
    }
    path = out or os.path.join(_reports_dir(cfg, None), "recommendations.json")
    write_json(report, path)
    return report


def cmd_eval_sim(cfg: PipelineConfig, out: Optional[str] = None) -> SimReport:
    """Evaluate the trained policies by simulation.

    Writes ``sim_report.json``, ``sim_summary.csv``, ``pairwise.csv`` and
    ``pairwise_matrix.csv``.

    Parameters
    ----------
    cfg : PipelineConfig
        The configuration.
    out : str, optional
        The reports directory. Defaults to ``paths.reports``.

    Raises
    ------
    AlphabetMismatch
        If the policies know activities the process model does not.

    Returns
    -------
    SimReport
        The simulation results, with the unguided process as policy "log".
    """
    bundle = load_bundle(cfg)
    model = sim_model(cfg)
    recommenders = {n: bundle.recommender(n, cfg.sim.fallback) for n in bundle.policies}
    try:
        for r in recommenders.values():
            check_alphabet(model, r)
    except IncompatibleAlphabet as e:
        raise AlphabetMismatch(f"sim: {e}") from e
    report = simulate_policies(
        model, recommenders, cfg.sim.n_traces, cfg.sim.seed, cfg.sim.stall_limit
    )
    directory = _reports_dir(cfg, out)
    write_json(
        {"train_hash": train_hash(cfg), "config_hash": config_hash(cfg), **report.to_dict()},
        os.path.join(directory, "sim_report.json"),
    )
    report.summary().to_csv(os.path.join(directory, "sim_summary.csv"), index=False)
    pairwise = report.pairwise()
    pairwise.to_csv(os.path.join(directory, "pairwise.csv"), index=False)
    difference_matrix(pairwise).to_csv(os.path.join(directory, "pairwise_matrix.csv"))
    return report


def cmd_eval_log(cfg: PipelineConfig, out: Optional[str] = None) -> EvalReport:
    """Evaluate the trained policies on the held-out test log.

    Writes ``eval_report.json``, ``optimal_traces.csv``, ``prefix_gain.csv``
    and ``prefix_gain_flat.csv``.

    Parameters
    ----------
    cfg : PipelineConfig
        The configuration.
    out : str, optional
        The reports directory. Defaults to ``paths.reports``.

    Returns
    -------
    EvalReport
        The test-log analyses of every policy.
    """
    bundle = load_bundle(cfg)
    log = enrich(read_log(cfg), cfg.kpi)
    test_log = log.select(bundle.split["test"])
    if len(test_log) != len(bundle.split["test"]):
        raise MissingArtifact(
            f"The log {cfg.paths.log} does not contain all test cases of the trained split"
        )
    recommenders = {n: bundle.recommender(n) for n in bundle.policies}
    report = evaluate_log(test_log, recommenders)
    directory = _reports_dir(cfg, out)
    write_json(
        {"train_hash": train_hash(cfg), "config_hash": config_hash(cfg), **report.to_dict()},
        os.path.join(directory, "eval_report.json"),
    )
    write_tables(report, directory)
    return report


def cmd_silhouette(cfg: PipelineConfig, out: Optional[str] = None) -> pd.DataFrame:
    """Report the silhouette of the prefix clustering for candidate k values.

    Parameters
    ----------
    cfg : PipelineConfig
        The configuration; ``clustering.candidates`` lists the k values.
    out : str, optional
        The reports directory. Defaults to ``paths.reports``.

    Returns
    -------
    pd.DataFrame
        The silhouette and inertia per k.
    """
    log = enrich(read_log(cfg), cfg.kpi)
    train_log, _ = split(log, cfg.split.train_fraction, cfg.split.seed)
    stats = fit_stats(train_log)
    vectors = encode_log(train_log, stats).to_numpy()
    scores = silhouette_analysis(vectors, cfg.clustering.candidates, cfg.clustering.seed)
    scores.to_csv(os.path.join(_reports_dir(cfg, out), "silhouette.csv"), index=False)
    return scores
