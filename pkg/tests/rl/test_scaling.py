import math

import numpy as np
import pytest
from processaction.exceptions import DegenerateRangeWarning
from processaction.mdp import START, Mdp, State
from processaction.rl import ScalingFn, h_value, scaled_q
from sklearn.exceptions import NotFittedError


def _mdp(*counts: int) -> Mdp:
    return Mdp.from_counts(
        {(START, f"a{i}", State(f"a{i}", -1)): c for i, c in enumerate(counts)},
        agent_actions={f"a{i}" for i in range(len(counts))},
    )


class TestScalingFunctions:
    """Tests for the occurrence-based scaling functions."""

    def test_h0(self) -> None:
        """It should leave every q-value unscaled."""
        h = ScalingFn("h0")
        assert [h(n) for n in (0, 1, 1000)] == [1.0, 1.0, 1.0]

    def test_step(self) -> None:
        """It should zero the q-values of pairs seen at most n_t times."""
        h = ScalingFn("step", n_t=50)
        assert h(0) == 0.0
        assert h(50) == 0.0
        assert h(51) == 1.0

    def test_smooth(self) -> None:
        """It should rise from 0 towards 1 with steepness lambda."""
        h = ScalingFn("smooth", lam=50.0)
        assert h(0) == 0.0
        z = math.exp(-1.0)
        assert h(50) == pytest.approx(1 - 2 * z / (1 + z))
        assert h(10000) == pytest.approx(1.0)

    def test_lin(self) -> None:
        """It should interpolate between the least and most frequent pairs."""
        h = ScalingFn("lin").fit(_mdp(10, 30, 110))
        assert (h.n_min, h.n_max) == (10, 110)
        assert h(10) == 0.0
        assert h(60) == pytest.approx(0.5)
        assert h(110) == 1.0
        assert h(500) == 1.0

    def test_lin_not_fitted(self) -> None:
        """It should refuse to evaluate a linear function that was not fitted."""
        with pytest.raises(NotFittedError):
            h_value(ScalingFn("lin"), 3)

    def test_lin_degenerate(self) -> None:
        """It should warn and return 1 when all pairs occur equally often."""
        h = ScalingFn("lin").fit(_mdp(4, 4))
        with pytest.warns(DegenerateRangeWarning):
            assert h(4) == 1.0

    @pytest.mark.parametrize("spec", ["h0", "lin", "step:50", "smooth:50"])
    def test_monotone_in_unit_range(self, spec: str) -> None:
        """It should be non-decreasing with values in [0, 1]."""
        h = ScalingFn.from_spec(spec).fit(_mdp(1, 500))
        values = np.array([h(n) for n in range(0, 600)])
        assert values.min() >= 0.0
        assert values.max() <= 1.0
        assert np.all(np.diff(values) >= 0)

    def test_negative_count(self) -> None:
        """It should refuse negative occurrence counts."""
        with pytest.raises(ValueError):
            h_value(ScalingFn("h0"), -1)

    def test_scaled_q(self) -> None:
        """It should multiply the q-value with the scaling factor."""
        assert scaled_q(12.0, ScalingFn("step", n_t=5), 2) == 0.0
        assert scaled_q(12.0, ScalingFn("step", n_t=5), 6) == 12.0


class TestSpec:
    """Tests for the short string form of scaling functions."""

    def test_parse(self) -> None:
        """It should parse the kind and its optional parameter."""
        assert ScalingFn.from_spec("step:20") == ScalingFn("step", n_t=20)
        assert ScalingFn.from_spec("smooth:7.5") == ScalingFn("smooth", lam=7.5)
        assert ScalingFn.from_spec(" LIN ") == ScalingFn("lin")

    def test_spec_roundtrip(self) -> None:
        """It should print a spec that parses to the same function."""
        for spec in ("h0", "lin", "step:50", "smooth:50"):
            assert ScalingFn.from_spec(spec).spec == spec

    def test_names(self) -> None:
        """It should name the policy trained with the function."""
        names = [ScalingFn.from_spec(s).name for s in ("h0", "lin", "step", "smooth")]
        assert names == ["pi_0", "pi_lin", "pi_step", "pi_smooth"]

    @pytest.mark.parametrize("spec", ["cubic", "step:x", "h0:3", "smooth:-1"])
    def test_invalid(self, spec: str) -> None:
        """It should refuse specs it cannot parse."""
        with pytest.raises(ValueError):
            ScalingFn.from_spec(spec)

    def test_dict_roundtrip(self) -> None:
        """It should be restored from its dict, fitted range included."""
        h = ScalingFn("lin").fit(_mdp(2, 9))
        assert ScalingFn.from_dict(h.to_dict()) == h
