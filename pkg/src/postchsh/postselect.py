"""Role labeling (which locations hold qubits i, j, k) and postselected correlations.

Two labeling strategies are supported:

* ``OutcomeBased``: on ZZZ events, i and j are the locations that gave -1
  and k is the remaining one.  Ties (all +1, or the noise-only patterns with
  one or three -1) are resolved by averaging the per-event statistic over
  every pair that maximizes the number of -1 outcomes.
* ``LocationFixed``: k is a fixed location; when k is measured along Z, the
  event is kept only if its outcome there equals ``required_z``.

Estimators accept either sampled events or an exact ``OutcomeDistribution``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Literal, Sequence

import numpy as np

from .measurement import (
    EventBatch,
    MeasurementSetting,
    OutcomeDistribution,
    OutcomeEvent,
    outcome_patterns,
    pattern_index,
)

ZRole = Literal["pair", "k"]


class NoAcceptedEvents(ValueError):
    pass


@dataclass(frozen=True)
class LabelingStrategy:
    kind: Literal["outcome", "fixed"] = "outcome"
    k_location: int = 2
    required_z: int = 1

    def __post_init__(self):
        if self.kind not in ("outcome", "fixed"):
            raise ValueError(f"unknown labeling strategy {self.kind!r}")
        if self.kind == "fixed" and self.k_location not in (0, 1, 2):
            raise ValueError(f"k_location must be 0, 1 or 2, got {self.k_location!r}")
        if self.required_z not in (1, -1):
            raise ValueError(f"required_z must be -1 or +1, got {self.required_z!r}")

    @classmethod
    def parse(cls, text: str) -> "LabelingStrategy":
        """``"outcome"`` or ``"fixed:<loc>"`` with a 0-based location."""
        if text == "outcome":
            return OutcomeBased()
        if text.startswith("fixed:"):
            try:
                loc = int(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad fixed location in {text!r}") from None
            return LocationFixed(loc)
        raise ValueError(f"strategy must be 'outcome' or 'fixed:<loc>', got {text!r}")

    def __str__(self):
        return "outcome" if self.kind == "outcome" else f"fixed:{self.k_location}"


def OutcomeBased() -> LabelingStrategy:
    return LabelingStrategy("outcome")


def LocationFixed(k_location: int = 2, required_z: int = 1) -> LabelingStrategy:
    return LabelingStrategy("fixed", k_location, required_z)


@dataclass(frozen=True)
class RoleAssignment:
    i_location: int
    j_location: int
    k_location: int
    accepted: bool
    # equally weighted (i, j, k) assignments; more than one when symmetrized
    candidates: tuple[tuple[int, int, int], ...] = ()
    noise_only: bool = False

    @property
    def symmetrized(self) -> bool:
        return len(self.candidates) > 1


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    num_events_used: int | None
    standard_error: float
    accepted_fraction: float = 1.0

    @property
    def exact(self) -> bool:
        return self.num_events_used is None

    @property
    def degenerate(self) -> bool:
        """True when fewer than two events leave the standard error undefined."""
        return not self.exact and self.num_events_used < 2


def _assignment(i, j, k, accepted, candidates=None, noise_only=False) -> RoleAssignment:
    return RoleAssignment(i, j, k, bool(accepted), tuple(candidates or [(i, j, k)]), noise_only)


def _label_zzz(outcomes, strategy: LabelingStrategy) -> RoleAssignment:
    if strategy.kind == "fixed":
        k = strategy.k_location
        i, j = (q for q in range(3) if q != k)
        return _assignment(i, j, k, outcomes[k] == strategy.required_z)
    minus = [o == -1 for o in outcomes]
    scores = {pair: minus[pair[0]] + minus[pair[1]] for pair in combinations(range(3), 2)}
    best = max(scores.values())
    candidates = [(i, j, 3 - i - j) for (i, j), s in scores.items() if s == best]
    noise_only = sum(minus) % 2 == 1
    return _assignment(*candidates[0], True, candidates, noise_only)


def _label_one_z(axes: str, outcomes, strategy: LabelingStrategy, z_role: ZRole | None) -> RoleAssignment:
    z = axes.index("Z")
    xs = [q for q in range(3) if q != z]
    if strategy.kind == "fixed":
        role = "k" if strategy.k_location == z else "pair"
        if z_role is not None and z_role != role:
            raise ValueError(
                f"fixed:{strategy.k_location} puts the Z location of {axes} in role "
                f"{role!r}, estimator needs {z_role!r}"
            )
        k = strategy.k_location
        if role == "k":
            return _assignment(xs[0], xs[1], k, outcomes[k] == strategy.required_z)
        i, j = (q for q in range(3) if q != k)
        return _assignment(i, j, k, True)
    if (z_role or "pair") == "k":
        return _assignment(xs[0], xs[1], z, outcomes[z] == strategy.required_z)
    # j and k are the two X locations in either order; the symmetric product
    # statistics used with this role do not depend on which is which
    return _assignment(z, xs[0], xs[1], True, [(z, xs[0], xs[1]), (z, xs[1], xs[0])])


def label_event(
    event: OutcomeEvent, strategy: LabelingStrategy, z_role: ZRole | None = None
) -> RoleAssignment:
    """Assign roles i, j, k to the three locations of one event.

    ``z_role`` applies to settings with a single Z axis: ``"pair"`` puts the
    Z location in the correlated pair, ``"k"`` makes it the conditioning
    qubit (kept only when its outcome is +1).
    """
    axes = MeasurementSetting(event.label).axes
    outcomes = tuple(event.outcomes)
    if len(axes) != 3 or len(outcomes) != 3:
        raise ValueError("labeling is defined for three-location events only")
    for o in outcomes:
        if o not in (1, -1):
            raise ValueError(f"outcome must be -1 or +1, got {o!r}")
    if axes == "ZZZ":
        return _label_zzz(outcomes, strategy)
    if axes.count("Z") == 1:
        return _label_one_z(axes, outcomes, strategy, z_role)
    if strategy.kind == "fixed":
        k = strategy.k_location
        i, j = (q for q in range(3) if q != k)
        accepted = outcomes[k] == strategy.required_z if axes[k] == "Z" else True
        return _assignment(i, j, k, accepted)
    raise ValueError(f"outcome-based labeling has no rule for setting {axes}")


def _as_weights(source) -> tuple[MeasurementSetting, np.ndarray, int | None]:
    if isinstance(source, OutcomeDistribution):
        return source.setting, np.asarray(source.probs, dtype=float), None
    if isinstance(source, EventBatch):
        return source.setting, source.counts.astype(float), len(source)
    events: Sequence[OutcomeEvent] = list(source)
    if not events:
        raise NoAcceptedEvents("no events supplied")
    labels = {e.label for e in events}
    if len(labels) != 1:
        raise ValueError(f"events mix several settings: {sorted(labels)}")
    setting = MeasurementSetting(labels.pop())
    counts = np.zeros(2 ** len(setting))
    for e in events:
        counts[pattern_index(e.outcomes)] += 1
    return setting, counts, len(events)


def _estimate(source, strategy, z_role, statistic, check_setting) -> CorrelationEstimate:
    setting, weights, shots = _as_weights(source)
    check_setting(setting.axes)
    accepted = np.zeros(weights.size, dtype=bool)
    stats = np.zeros(weights.size)
    for idx, outcomes in enumerate(outcome_patterns(3)):
        roles = label_event(OutcomeEvent(setting.label, outcomes), strategy, z_role)
        accepted[idx] = roles.accepted
        if roles.accepted:
            stats[idx] = np.mean([statistic(outcomes, c) for c in roles.candidates])
    w = np.where(accepted, weights, 0.0)
    total = w.sum()
    if total <= 0:
        raise NoAcceptedEvents(f"no accepted events for setting {setting.label} under {strategy}")
    value = float(np.dot(w, stats) / total)
    fraction = float(total / weights.sum())
    if shots is None:
        return CorrelationEstimate(value, None, 0.0, fraction)
    n_used = int(round(total))
    if n_used < 2:
        return CorrelationEstimate(value, n_used, math.nan, fraction)
    var = float(np.dot(w, (stats - value) ** 2) / (n_used - 1))
    return CorrelationEstimate(value, n_used, math.sqrt(var / n_used), fraction)


def _require(predicate, message):
    def check(axes):
        if not predicate(axes):
            raise ValueError(f"{message}, got {axes}")
    return check


def corr_zz(source, strategy: LabelingStrategy | None = None) -> CorrelationEstimate:
    """Mean of z_i * z_j over accepted ZZZ events."""
    return _estimate(
        source,
        strategy or OutcomeBased(),
        None,
        lambda o, c: o[c[0]] * o[c[1]],
        _require(lambda a: a == "ZZZ", "corr_zz needs ZZZ events"),
    )


def corr_zxx_product(source, strategy: LabelingStrategy | None = None) -> CorrelationEstimate:
    """Mean of the triple product z * x * x over events of a one-Z setting.

    On the ideal GHZ state every event has product -1, which is the
    operational content of C(Z_i, X_j) = -x_k.
    """
    return _estimate(
        source,
        strategy or OutcomeBased(),
        "pair",
        lambda o, c: o[0] * o[1] * o[2],
        _require(lambda a: len(a) == 3 and a.count("Z") == 1 and a.count("X") == 2,
                 "corr_zxx_product needs a setting with one Z and two X axes"),
    )


def corr_xx_postselected(source, strategy: LabelingStrategy | None = None) -> CorrelationEstimate:
    """Mean of x_i * x_j over events whose Z location (qubit k) gave +1."""
    return _estimate(
        source,
        strategy or OutcomeBased(),
        "k",
        lambda o, c: o[c[0]] * o[c[1]],
        _require(lambda a: len(a) == 3 and a.count("Z") == 1 and a.count("X") == 2,
                 "corr_xx_postselected needs a setting with one Z and two X axes"),
    )
