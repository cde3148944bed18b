"""Joint outcome distributions of per-qubit Pauli measurements, and sampling.

Outcome patterns are enumerated in basis order: pattern index ``b`` has
outcome ``(-1)**bit`` at each location, so index 0 is (+1, +1, +1) and the
last index is all -1.

Sampling draws uniforms from numpy's PCG64 generator, seeded through
``SeedSequence([seed, stream])``, and maps them through the inverse CDF of
the outcome table.  The same (state, setting, shots, visibility, seed,
stream) always gives the same events.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .statevector import StateVector, apply_single

CLAMP_TOL = 1e-15

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SDG = np.array([[1, 0], [0, -1j]], dtype=complex)
# unitaries rotating each axis eigenbasis onto the Z basis (+1 eigenvector -> |0>)
BASIS_CHANGE = {
    "Z": np.eye(2, dtype=complex),
    "X": _H,
    "Y": _H @ _SDG,
}

# the five settings sampled together by one experiment
EXPERIMENT_SETTINGS = ("ZZZ", "ZXX", "XZX", "XXZ", "XXX")


def outcome_patterns(n: int) -> list[tuple[int, ...]]:
    return [tuple(1 - 2 * bit for bit in bits) for bits in itertools.product((0, 1), repeat=n)]


def pattern_index(outcomes: Sequence[int]) -> int:
    idx = 0
    for o in outcomes:
        if o not in (1, -1):
            raise ValueError(f"outcome must be -1 or +1, got {o!r}")
        idx = 2 * idx + (o == -1)
    return idx


@dataclass(frozen=True)
class MeasurementSetting:
    axes: str
    label: str = ""

    def __post_init__(self):
        axes = self.axes.upper()
        if not axes or set(axes) - set("XYZ"):
            raise ValueError(f"setting axes must be a non-empty string over X, Y, Z, got {self.axes!r}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "label", self.label or axes)

    def __len__(self):
        return len(self.axes)

    @classmethod
    def parse(cls, setting: "MeasurementSetting | str") -> "MeasurementSetting":
        return setting if isinstance(setting, cls) else cls(setting)

    def z_locations(self) -> list[int]:
        return [q for q, a in enumerate(self.axes) if a == "Z"]


@dataclass(frozen=True)
class OutcomeEvent:
    label: str
    outcomes: tuple[int, ...]


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of every outcome pattern, indexed as in ``outcome_patterns``."""

    setting: MeasurementSetting
    probs: np.ndarray

    def __getitem__(self, outcomes) -> float:
        return float(self.probs[pattern_index(outcomes)])

    @property
    def probabilities(self) -> dict[tuple[int, ...], float]:
        return dict(zip(outcome_patterns(len(self.setting)), map(float, self.probs)))


class EventBatch(Sequence[OutcomeEvent]):
    """Sampled events for one setting, backed by an (shots, n) int8 array."""

    def __init__(self, setting: MeasurementSetting, outcomes: np.ndarray):
        outcomes = np.asarray(outcomes, dtype=np.int8)
        if outcomes.ndim != 2 or outcomes.shape[1] != len(setting):
            raise ValueError(f"outcomes must have shape (shots, {len(setting)})")
        if not np.all(np.abs(outcomes) == 1):
            raise ValueError("outcomes must be -1 or +1")
        outcomes.setflags(write=False)
        self.setting = setting
        self.outcomes = outcomes

    def __len__(self):
        return self.outcomes.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return EventBatch(self.setting, self.outcomes[i])
        return OutcomeEvent(self.setting.label, tuple(int(o) for o in self.outcomes[i]))

    def __iter__(self) -> Iterator[OutcomeEvent]:
        label = self.setting.label
        for row in self.outcomes.tolist():
            yield OutcomeEvent(label, tuple(row))

    @cached_property
    def counts(self) -> np.ndarray:
        n = self.outcomes.shape[1]
        bits = (self.outcomes == -1).astype(np.int64)
        idx = bits @ (1 << np.arange(n - 1, -1, -1))
        return np.bincount(idx, minlength=2**n)

    @classmethod
    def from_counts(cls, setting: MeasurementSetting, counts) -> "EventBatch":
        counts = np.asarray(counts, dtype=np.int64)
        patterns = np.array(outcome_patterns(len(setting)), dtype=np.int8)
        return cls(setting, np.repeat(patterns, counts, axis=0))

    @classmethod
    def concatenate(cls, batches: Sequence["EventBatch"]) -> "EventBatch":
        settings = {b.setting for b in batches}
        if len(settings) != 1:
            raise ValueError("can only concatenate batches of a single setting")
        return cls(batches[0].setting, np.concatenate([b.outcomes for b in batches]))


def born_distribution(state: StateVector, setting: MeasurementSetting) -> np.ndarray:
    if len(setting) != state.num_qubits:
        raise ValueError(
            f"setting {setting.label!r} has {len(setting)} axes, state has {state.num_qubits} qubits"
        )
    t = state.tensor()
    for q, axis in enumerate(setting.axes):
        if axis != "Z":
            t = apply_single(t, BASIS_CHANGE[axis], q)
    probs = np.abs(t.reshape(-1)) ** 2
    probs[probs < CLAMP_TOL] = 0.0
    return probs / probs.sum()


def joint_distribution(
    state: StateVector, setting: MeasurementSetting | str, visibility: float = 1.0
) -> OutcomeDistribution:
    """V * (Born distribution) + (1 - V) * (uniform distribution)."""
    setting = MeasurementSetting.parse(setting)
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must be in [0, 1], got {visibility!r}")
    born = born_distribution(state, setting)
    probs = visibility * born + (1.0 - visibility) / born.size
    probs.setflags(write=False)
    return OutcomeDistribution(setting, probs)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    if seed < 0 or stream < 0:
        raise ValueError("seed and stream must be non-negative integers")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def sample_distribution(dist: OutcomeDistribution, shots: int, rng: np.random.Generator) -> EventBatch:
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    u = rng.random(shots)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.size - 1)
    patterns = np.array(outcome_patterns(len(dist.setting)), dtype=np.int8)
    return EventBatch(dist.setting, patterns[idx])


def sample(
    state: StateVector,
    setting: MeasurementSetting | str,
    shots: int,
    visibility: float = 1.0,
    seed: int = 0,
    stream: int = 0,
) -> EventBatch:
    """Draw ``shots`` i.i.d. events from ``joint_distribution``."""
    dist = joint_distribution(state, setting, visibility)
    return sample_distribution(dist, shots, make_rng(seed, stream))


def sample_partitioned(
    state: StateVector,
    setting: MeasurementSetting | str,
    shots: int,
    partitions: int,
    visibility: float = 1.0,
    seed: int = 0,
    stream: int = 0,
) -> EventBatch:
    """Split ``shots`` over partitions seeded ``seed + index``, concatenated in order.

    Each partition can run on its own worker; the result differs from a
    single-partition run but is itself reproducible.
    """
    if partitions < 1 or partitions > shots:
        raise ValueError(f"partitions must be in [1, shots], got {partitions}")
    dist = joint_distribution(state, setting, visibility)
    sizes = [shots // partitions + (i < shots % partitions) for i in range(partitions)]
    batches = [
        sample_distribution(dist, size, make_rng(seed + i, stream)) for i, size in enumerate(sizes)
    ]
    return EventBatch.concatenate(batches)
