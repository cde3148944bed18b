"""Triple-coincidence tables and reconstruction of the CH-form probabilities.

Counts file grammar (one record per line, whitespace separated)::

    SETTING a b c count

``SETTING`` is three axis letters from X, Y, Z; ``a b c`` are outcomes
written ``1`` or ``-1`` (``+1`` is accepted on input); ``count`` is a
non-negative integer.  Text after ``#`` is a comment and blank lines are
ignored.  Each (setting, outcome) pair may appear at most once; missing
pairs count as zero.
"""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, TextIO

import numpy as np

from .measurement import (
    EXPERIMENT_SETTINGS,
    EventBatch,
    MeasurementSetting,
    OutcomeDistribution,
    outcome_patterns,
    pattern_index,
)

PATTERNS = outcome_patterns(3)

# P_{Z_i Z_j}(-1,-1): ZZZ patterns with at least two -1 outcomes
ZZ_TERMS = (("ZZZ", (1, -1, -1)), ("ZZZ", (-1, 1, -1)), ("ZZZ", (-1, -1, 1)), ("ZZZ", (-1, -1, -1)))
# common upper bound for P_{Z_i X_j}(-1,-x_k) and P_{X_i Z_j}(-x_k,-1)
SIX_TERMS = (
    ("ZXX", (-1, 1, -1)), ("ZXX", (-1, -1, 1)),
    ("XZX", (1, -1, -1)), ("XZX", (-1, -1, 1)),
    ("XXZ", (1, -1, -1)), ("XXZ", (-1, 1, -1)),
)
# P_{X_i X_j}(x_k, x_k)
XX_TERMS = (("XXX", (1, 1, 1)), ("XXX", (-1, -1, -1)))


class CountsFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class CoincidenceTable:
    """Per-setting weights over the eight outcome triples.

    Sampled tables hold integer counts.  Exact tables (``exact=True``) hold
    probabilities and cannot be written to a counts file.
    """

    def __init__(self, counts: Mapping[str, Iterable[float]], exact: bool = False):
        self.exact = exact
        self._counts: dict[str, np.ndarray] = {}
        for label, row in counts.items():
            setting = MeasurementSetting(label)
            if len(setting) != 3:
                raise ValueError(f"setting {label!r} must have three axes")
            arr = np.array(row, dtype=float if exact else np.int64)
            if arr.shape != (8,):
                raise ValueError(f"setting {label!r} needs 8 entries, got shape {arr.shape}")
            if np.any(arr < 0):
                raise ValueError(f"negative count in setting {label!r}")
            arr.setflags(write=False)
            self._counts[setting.label] = arr

    @classmethod
    def from_events(cls, batches: Iterable[EventBatch]) -> "CoincidenceTable":
        counts: dict[str, np.ndarray] = {}
        for b in batches:
            prev = counts.get(b.setting.label, 0)
            counts[b.setting.label] = prev + b.counts
        return cls(counts)

    @classmethod
    def from_distributions(cls, dists: Iterable[OutcomeDistribution]) -> "CoincidenceTable":
        return cls({d.setting.label: d.probs for d in dists}, exact=True)

    def __contains__(self, label):
        return label in self._counts

    def __eq__(self, other):
        if not isinstance(other, CoincidenceTable):
            return NotImplemented
        return (self.exact == other.exact and self._counts.keys() == other._counts.keys()
                and all(np.array_equal(v, other._counts[k]) for k, v in self._counts.items()))

    def __repr__(self):
        return f"CoincidenceTable({ {k: v.tolist() for k, v in self._counts.items()} }, exact={self.exact})"

    @property
    def settings(self) -> list[str]:
        known = [s for s in EXPERIMENT_SETTINGS if s in self._counts]
        return known + sorted(s for s in self._counts if s not in EXPERIMENT_SETTINGS)

    def counts(self, label: str) -> np.ndarray:
        try:
            return self._counts[label]
        except KeyError:
            raise KeyError(f"table has no setting {label!r}") from None

    def count(self, label: str, outcomes) -> float:
        return self.counts(label)[pattern_index(outcomes)]

    def total_shots(self, label: str) -> float:
        return self.counts(label).sum()

    def probability(self, label: str, outcomes) -> float:
        """Relative frequency count / total_shots, unsmoothed."""
        total = self.total_shots(label)
        if total <= 0:
            raise ValueError(f"setting {label!r} has zero shots")
        return float(self.count(label, outcomes) / total)

    def source(self, label: str):
        """Events (sampled table) or a distribution (exact table) for the estimators."""
        setting = MeasurementSetting(label)
        if self.exact:
            probs = self.counts(label) / self.total_shots(label)
            return OutcomeDistribution(setting, probs)
        return EventBatch.from_counts(setting, self.counts(label))


def _sum_terms(table: CoincidenceTable, terms) -> tuple[float, float]:
    """Sum of estimated probabilities and its binomial standard error.

    Terms sharing a setting are disjoint events of one multinomial, so they
    are merged before taking the per-setting binomial variance.
    """
    by_setting: dict[str, float] = {}
    for label, outcomes in terms:
        by_setting[label] = by_setting.get(label, 0.0) + table.probability(label, outcomes)
    value = sum(by_setting.values())
    if table.exact:
        return value, 0.0
    var = sum(p * (1 - p) / table.total_shots(label) for label, p in by_setting.items())
    return value, math.sqrt(var)


def _require(table: CoincidenceTable, labels):
    missing = [s for s in labels if s not in table]
    if missing:
        raise KeyError(f"table is missing setting(s) {missing}")


def reconstruct_p_zz(table: CoincidenceTable) -> float:
    _require(table, ["ZZZ"])
    return _sum_terms(table, ZZ_TERMS)[0]


def six_term_bound(table: CoincidenceTable) -> float:
    _require(table, ["ZXX", "XZX", "XXZ"])
    return _sum_terms(table, SIX_TERMS)[0]


def reconstruct_p_xx(table: CoincidenceTable) -> float:
    _require(table, ["XXX"])
    return _sum_terms(table, XX_TERMS)[0]


def _per_setting_terms(label: str):
    setting = MeasurementSetting(label)
    if len(setting) != 3 or setting.axes.count("Z") != 1 or setting.axes.count("X") != 2:
        raise ValueError(f"per-setting estimate needs one Z and two X axes, got {label!r}")
    z = setting.axes.index("Z")
    x1, x2 = (q for q in range(3) if q != z)
    return [(label, o) for o in PATTERNS if o[z] == -1 and o[x1] != o[x2]]


def per_setting_p_zx(table: CoincidenceTable, setting_label: str) -> float:
    """Probability that the Z outcome is -1 while the two X outcomes differ."""
    terms = _per_setting_terms(setting_label)
    _require(table, [setting_label])
    return _sum_terms(table, terms)[0]


@dataclass(frozen=True)
class CHProbabilities:
    p_zz: float
    p_zx: float
    p_xz: float
    p_xx: float
    six_term_bound: float | None
    # "per_setting": p_zx, p_xz from ZXX and XZX; "six_term_bound": both set to the bound
    zx_source: str = "per_setting"
    standard_errors: dict | None = None

    def as_tuple(self) -> tuple[float, float, float, float]:
        return self.p_zz, self.p_zx, self.p_xz, self.p_xx


def ch_probabilities(table: CoincidenceTable, use_bound: bool = False) -> CHProbabilities:
    """The four CH-form probabilities from a table holding the five settings."""
    _require(table, ["ZZZ", "XXX"])
    p_zz, se_zz = _sum_terms(table, ZZ_TERMS)
    p_xx, se_xx = _sum_terms(table, XX_TERMS)
    bound = se_bound = None
    if all(s in table for s in ("ZXX", "XZX", "XXZ")):
        bound, se_bound = _sum_terms(table, SIX_TERMS)
    if use_bound:
        if bound is None:
            raise KeyError("six-term bound needs settings ZXX, XZX and XXZ")
        p_zx = p_xz = min(bound, 1.0)
        se_zx = se_xz = se_bound
        source = "six_term_bound"
    else:
        _require(table, ["ZXX", "XZX"])
        p_zx, se_zx = _sum_terms(table, _per_setting_terms("ZXX"))
        p_xz, se_xz = _sum_terms(table, _per_setting_terms("XZX"))
        source = "per_setting"
    ses = {"P_zz": se_zz, "P_zx": se_zx, "P_xz": se_xz, "P_xx": se_xx}
    if se_bound is not None:
        ses["six_term_bound"] = se_bound
    return CHProbabilities(p_zz, p_zx, p_xz, p_xx, bound, source, ses)


# counts file I/O

def _parse_outcome(token: str, lineno: int, field: str) -> int:
    if token in ("1", "+1"):
        return 1
    if token == "-1":
        return -1
    raise CountsFormatError(lineno, f"field {field!r}: outcome must be -1 or 1, got {token!r}")


def read_counts(stream: TextIO) -> CoincidenceTable:
    counts: dict[str, np.ndarray] = {}
    seen: set[tuple[str, tuple[int, ...]]] = set()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise CountsFormatError(lineno, f"expected 5 fields 'SETTING a b c count', got {len(fields)}")
        label, a, b, c, n = fields
        try:
            setting = MeasurementSetting(label)
        except ValueError:
            setting = None
        if setting is None or len(setting) != 3 or setting.axes != label:
            raise CountsFormatError(lineno, f"field 'setting': unknown setting label {label!r}")
        outcomes = tuple(_parse_outcome(t, lineno, f) for t, f in zip((a, b, c), ("a", "b", "c")))
        try:
            count = int(n)
        except ValueError:
            raise CountsFormatError(lineno, f"field 'count': not an integer: {n!r}") from None
        if count < 0:
            raise CountsFormatError(lineno, f"field 'count': negative count {count}")
        if (label, outcomes) in seen:
            raise CountsFormatError(lineno, f"duplicate record for {label} {outcomes}")
        seen.add((label, outcomes))
        row = counts.setdefault(label, np.zeros(8, dtype=np.int64))
        row[pattern_index(outcomes)] = count
    return CoincidenceTable(counts)


def write_counts(table: CoincidenceTable, stream: TextIO) -> None:
    if table.exact:
        raise ValueError("exact probability tables have no counts to write")
    stream.write("# SETTING a b c count\n")
    for label in table.settings:
        row = table.counts(label)
        for outcomes, n in zip(PATTERNS, row.tolist()):
            stream.write(f"{label} {outcomes[0]} {outcomes[1]} {outcomes[2]} {n}\n")


def load_counts(source) -> CoincidenceTable:
    """Read a counts file from a path or an open text stream."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            return read_counts(fh)
    return read_counts(source)


def save_counts(table: CoincidenceTable, sink) -> None:
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            write_counts(table, fh)
    else:
        write_counts(table, sink)


def counts_to_string(table: CoincidenceTable) -> str:
    buf = io.StringIO()
    write_counts(table, buf)
    return buf.getvalue()
