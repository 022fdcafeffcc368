"""Occurrence-based scaling of q-values.

A q-value q(s, a) is multiplied with a non-decreasing function h of the
number n(s, a) of occurrences of the state-action pair in the log. Actions
that look profitable but were rarely observed are thereby discouraged.

- ``h0``: h(n) = 1, i.e., the unscaled q-value.
- ``lin``: h(n) = (n - n_min) / (n_max - n_min), with n_min and n_max taken
  over all state-action pairs of the MDP.
- ``step``: h(n) = 0 if n <= n_t else 1.
- ``smooth``: h(n) = 1 - 2 exp(-n/λ) / (1 + exp(-n/λ)).
"""

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

from sklearn.exceptions import NotFittedError

from processaction import config as pacfg
from processaction.exceptions import DegenerateRangeWarning
from processaction.mdp import Mdp

SCALING_KINDS = ("h0", "lin", "step", "smooth")


@dataclass(frozen=True)
class ScalingFn:
    """A scaling function h.

    Parameters
    ----------
    kind : {'h0', 'lin', 'step', 'smooth'}
        The shape of the function.
    n_t : int
        Threshold of the step function.
    lam : float
        Steepness λ of the smooth function.
    n_min : int, optional
        Lowest occurrence count (linear function). Set by :meth:`fit`.
    n_max : int, optional
        Highest occurrence count (linear function). Set by :meth:`fit`.
    """

    kind: str = "h0"
    n_t: int = pacfg.step_threshold
    lam: float = pacfg.smooth_lambda
    n_min: Optional[int] = None
    n_max: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in SCALING_KINDS:
            raise ValueError(f"Unknown scaling '{self.kind}', expected one of {SCALING_KINDS}")
        if self.n_t < 1:
            raise ValueError(f"n_t must be positive, got {self.n_t}")
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    @classmethod
    def from_spec(cls, spec: str) -> "ScalingFn":
        """Create a scaling function from a short string.

        Parameters
        ----------
        spec : str
            One of "h0", "lin", "step[:n_t]" and "smooth[:lambda]", e.g.
            "step:50".

        Raises
        ------
        ValueError
            If the string cannot be parsed.

        Returns
        -------
        ScalingFn
            The scaling function.
        """
        kind, _, arg = spec.strip().partition(":")
        kind = kind.lower()
        try:
            if kind == "step" and arg:
                return cls(kind, n_t=int(arg))
            if kind == "smooth" and arg:
                return cls(kind, lam=float(arg))
        except ValueError as e:
            raise ValueError(f"Invalid scaling spec '{spec}'") from e
        if arg:
            raise ValueError(f"Scaling '{kind}' takes no parameter, got '{spec}'")
        return cls(kind)

    @property
    def spec(self) -> str:
        """The short string of the function, see :meth:`from_spec`."""
        if self.kind == "step":
            return f"step:{self.n_t}"
        if self.kind == "smooth":
            return f"smooth:{self.lam:g}"
        return self.kind

    @property
    def name(self) -> str:
        """The name of the policy trained with this function."""
        return {"h0": "pi_0", "lin": "pi_lin"}.get(self.kind, f"pi_{self.kind}")

    def fit(self, mdp: Mdp) -> "ScalingFn":
        """Freeze the occurrence range of an MDP into a linear function.

        Other kinds are returned unchanged.

        Parameters
        ----------
        mdp : Mdp
            The MDP.

        Returns
        -------
        ScalingFn
            The fitted scaling function.
        """
        if self.kind != "lin":
            return self
        counts = list(mdp.occurrence.values())
        if not counts:
            return replace(self, n_min=0, n_max=0)
        return replace(self, n_min=min(counts), n_max=max(counts))

    def __call__(self, n: int) -> float:
        return h_value(self, n)

    def to_dict(self) -> dict[str, object]:
        """Convert to a JSON-serializable dict."""
        return {
            "kind": self.kind,
            "n_t": self.n_t,
            "lam": self.lam,
            "n_min": self.n_min,
            "n_max": self.n_max,
        }

    @classmethod
    def from_dict(cls, d: dict[str, object]) -> "ScalingFn":
        """Create from a dict produced by :meth:`to_dict`."""
        return cls(**d)  # type: ignore[arg-type]


def h_value(scaling: ScalingFn, n: int) -> float:
    """Evaluate a scaling function.

    Parameters
    ----------
    scaling : ScalingFn
        The scaling function.
    n : int
        The number of occurrences n(s, a).

    Raises
    ------
    ValueError
        If `n` is negative.
    NotFittedError
        If a linear function was not fitted.

    Returns
    -------
    float
        The scaling factor, in [0, 1].
    """
    if n < 0:
        raise ValueError(f"Occurrence counts are non-negative, got {n}")
    if scaling.kind == "h0":
        return 1.0
    if scaling.kind == "step":
        return 0.0 if n <= scaling.n_t else 1.0
    if scaling.kind == "smooth":
        z = math.exp(-n / scaling.lam)
        return 1.0 - 2.0 * z / (1.0 + z)
    if scaling.n_min is None or scaling.n_max is None:
        raise NotFittedError("Fit the linear scaling function on an MDP first")
    if scaling.n_max == scaling.n_min:
        warnings.warn(
            f"All state-action pairs occur {scaling.n_min} times; linear scaling is 1",
            DegenerateRangeWarning,
        )
        return 1.0
    h = (n - scaling.n_min) / (scaling.n_max - scaling.n_min)
    return min(max(h, 0.0), 1.0)


def scaled_q(q: float, scaling: ScalingFn, n: int) -> float:
    """Scale a q-value with the occurrence count of its state-action pair.

    Parameters
    ----------
    q : float
        The q-value.
    scaling : ScalingFn
        The scaling function.
    n : int
        The number of occurrences n(s, a).

    Returns
    -------
    float
        ``q * h(n)``.
    """
    return q * h_value(scaling, n)
