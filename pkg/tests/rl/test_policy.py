from pathlib import Path

import pytest
from processaction.exceptions import NoActionsAvailable
from processaction.mdp import START, Mdp, State
from processaction.rl import (
    QTable,
    ScalingFn,
    TrainConfig,
    extract_policy,
    greedy_action,
    load_policy,
    mc_policy_iteration,
    optimal_actions,
    ranked_actions,
    save_policy,
    state_visit_probability,
    value_iteration,
)
from processaction.rl.base import policy_from_dict, policy_to_dict


@pytest.fixture
def three_way() -> Mdp:
    counts = {(START, a, State(a, -1)): n for a, n in (("a", 5), ("b", 9), ("c", 9))}
    return Mdp.from_counts(counts, agent_actions={"a", "b", "c"}, gamma=1.0)


class TestGreedyAction:
    """Tests for choosing the action with the highest scaled q-value."""

    def test_highest_scaled_value(self, three_way: Mdp) -> None:
        """It should rank the actions by scaled q-value."""
        qtable = QTable({(START, "a"): 9.0, (START, "b"): 3.0, (START, "c"): 1.0})
        assert greedy_action(qtable, ScalingFn("h0"), three_way, START) == "a"
        assert greedy_action(qtable, ScalingFn("step", n_t=6), three_way, START) == "b"
        ranked = ranked_actions(qtable, ScalingFn("h0"), three_way, START)
        assert [r[0] for r in ranked] == ["a", "b", "c"]
        assert ranked[0] == ("a", 9.0, 9.0, 5)

    def test_ties(self, three_way: Mdp) -> None:
        """It should break ties by support, then by label."""
        qtable = QTable({(START, "a"): 2.0, (START, "b"): 2.0, (START, "c"): 2.0})
        assert greedy_action(qtable, ScalingFn("h0"), three_way, START) == "b"

    def test_no_actions(self, three_way: Mdp) -> None:
        """It should raise in a state where the agent cannot act."""
        with pytest.raises(NoActionsAvailable):
            greedy_action(QTable(), ScalingFn("h0"), three_way, State("a", -1))

    def test_extract_policy(self, three_way: Mdp) -> None:
        """It should cover every decision state of the MDP."""
        qtable = QTable({(START, "c"): 1.0})
        policy = extract_policy(qtable, ScalingFn("h0"), three_way)
        assert dict(policy.action_of) == {START: "c"}
        assert policy(State("zz", 0)) is None


class TestValueIteration:
    """Tests for the exact optimal values of a mined MDP."""

    def test_overfitting(self, overfitting_mdp: Mdp) -> None:
        """It should value each action by its mean reward."""
        v, q = value_iteration(overfitting_mdp)
        assert q[(START, "a")] == pytest.approx(10.0)
        assert q[(START, "b")] == pytest.approx(12.0)
        assert v[START] == pytest.approx(12.0)
        assert optimal_actions(q, START) == {"b"}
        assert optimal_actions(q, State("a", -1)) == set()

    def test_discounting(self, discounted_chain: Mdp) -> None:
        """It should discount the reward of later steps."""
        _, q = value_iteration(discounted_chain)
        assert q[(START, "go")] == pytest.approx(4.0)

    def test_visit_probability(self, overfitting_mdp: Mdp) -> None:
        """It should only reach the states the policy leads to."""
        reach = state_visit_probability(overfitting_mdp, {START: "a"})
        assert reach[START] == 1.0
        assert reach[State("a", -1)] == pytest.approx(1.0)
        assert reach[State("b", -1)] == 0.0


class TestPolicyPersistency:
    """Tests for saving and loading a policy with its q-values."""

    def test_roundtrip(self, tmp_path: Path, overfitting_mdp: Mdp) -> None:
        """It should restore the actions, the q-values and the scaling function."""
        policy, qtable = mc_policy_iteration(
            overfitting_mdp, ScalingFn("lin"), TrainConfig(200), alphabet=("a", "b")
        )
        path = str(tmp_path / "policy.json")
        save_policy(policy, qtable, overfitting_mdp, path)
        restored, restored_q = load_policy(path)
        assert dict(restored.action_of) == dict(policy.action_of)
        assert restored.scaling == policy.scaling
        assert restored.name == "pi_lin"
        assert restored.alphabet == ("a", "b")
        assert restored_q.values == pytest.approx(qtable.values)

    def test_scaled_values_exported(self, overfitting_mdp: Mdp) -> None:
        """It should export the scaled q-value and the support of every pair."""
        qtable = QTable({(START, "a"): 10.0, (START, "b"): 12.0}, gamma=1.0)
        scaling = ScalingFn("step", n_t=50)
        policy = extract_policy(qtable, scaling, overfitting_mdp)
        d = policy_to_dict(policy, qtable, overfitting_mdp)
        entries = {r["action"]: r for r in d["q"]}
        assert entries["b"]["scaled_q"] == 0.0
        assert entries["b"]["n"] == 2
        assert entries["a"]["scaled_q"] == 10.0
        restored, _ = policy_from_dict(d)
        assert restored(START) == "a"

    def test_no_overwrite(self, tmp_path: Path, overfitting_mdp: Mdp) -> None:
        """It should not overwrite an existing file unless asked to."""
        qtable = QTable({(START, "a"): 1.0})
        policy = extract_policy(qtable, ScalingFn("h0"), overfitting_mdp)
        path = str(tmp_path / "policy.json")
        save_policy(policy, qtable, overfitting_mdp, path)
        with pytest.raises(ValueError):
            save_policy(policy, qtable, overfitting_mdp, path, overwrite=False)
