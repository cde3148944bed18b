"""End-to-end analysis: five settings in, CHSH and CH reports out."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coincidence import CHProbabilities, CoincidenceTable, ch_probabilities
from .inequalities import CHSH_CIRELSON, CHSH_LHV, CHSH_MAX, InequalityReport, ch_report, chsh_report
from .measurement import EXPERIMENT_SETTINGS, joint_distribution, make_rng, sample_distribution
from .postselect import (
    CorrelationEstimate,
    LabelingStrategy,
    OutcomeBased,
    corr_xx_postselected,
    corr_zxx_product,
    corr_zz,
)
from .statevector import make_weighted_ghz

DEFAULT_THETA = math.pi / 4


@dataclass(frozen=True)
class Analysis:
    correlations: dict[str, CorrelationEstimate]
    probabilities: CHProbabilities
    chsh: InequalityReport
    ch: InequalityReport
    table: CoincidenceTable


def _combined_se(ses) -> float | None:
    ses = list(ses)
    if any(s is None or math.isnan(s) for s in ses):
        return None
    return math.sqrt(sum(s * s for s in ses))


def analyze_table(table: CoincidenceTable, strategy: LabelingStrategy | None = None,
                  use_bound: bool = False) -> Analysis:
    """Run the correlation (CHSH) and probability (CH) pipelines on one table."""
    strategy = strategy or OutcomeBased()
    missing = [s for s in EXPERIMENT_SETTINGS if s not in table]
    if missing:
        raise KeyError(f"table is missing setting(s) {missing}")
    corr = {
        "C_zz": corr_zz(table.source("ZZZ"), strategy),
        "C_zx": corr_zxx_product(table.source("ZXX"), strategy),
        "C_xz": corr_zxx_product(table.source("XZX"), strategy),
        "C_xx": corr_xx_postselected(table.source("XXZ"), strategy),
    }
    values = [corr[k].value for k in ("C_zz", "C_zx", "C_xz", "C_xx")]
    ses = {k: c.standard_error for k, c in corr.items()}
    # every term enters with coefficient of magnitude 1, and settings are sampled independently
    ses["combination"] = _combined_se(ses.values())
    chsh = chsh_report(*values, standard_errors=ses)

    probs = ch_probabilities(table, use_bound=use_bound)
    pses = dict(probs.standard_errors)
    if use_bound:
        # P_zx and P_xz are the same estimate, so their errors add linearly
        pses["combination"] = _combined_se([pses["P_zz"], 2 * pses["P_zx"], pses["P_xx"]])
    else:
        pses["combination"] = _combined_se(pses[k] for k in ("P_zz", "P_zx", "P_xz", "P_xx"))
    ch = ch_report(*probs.as_tuple(), standard_errors=pses)
    return Analysis(corr, probs, chsh, ch, table)


def exact_table(theta: float = DEFAULT_THETA, visibility: float = 1.0) -> CoincidenceTable:
    state = make_weighted_ghz(theta)
    return CoincidenceTable.from_distributions(
        joint_distribution(state, s, visibility) for s in EXPERIMENT_SETTINGS
    )


def sampled_table(theta: float = DEFAULT_THETA, visibility: float = 1.0, shots: int = 100_000,
                  seed: int = 0) -> CoincidenceTable:
    """Sample all five settings; setting ``i`` uses PRNG stream ``i`` of ``seed``."""
    state = make_weighted_ghz(theta)
    batches = [
        sample_distribution(joint_distribution(state, s, visibility), shots, make_rng(seed, i))
        for i, s in enumerate(EXPERIMENT_SETTINGS)
    ]
    return CoincidenceTable.from_events(batches)


def analyze_exact(theta: float = DEFAULT_THETA, visibility: float = 1.0,
                  strategy: LabelingStrategy | None = None, use_bound: bool = False) -> Analysis:
    return analyze_table(exact_table(theta, visibility), strategy, use_bound)


def analyze_sampled(theta: float = DEFAULT_THETA, visibility: float = 1.0, shots: int = 100_000,
                    seed: int = 0, strategy: LabelingStrategy | None = None,
                    use_bound: bool = False) -> Analysis:
    return analyze_table(sampled_table(theta, visibility, shots, seed), strategy, use_bound)


def _num(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return float(x)


def report_dict(analysis: Analysis, *, theta=None, visibility=None, strategy=None,
                shots=None, seed=None) -> dict:
    """JSON-ready report with the fields the CLI emits."""
    corr = {
        k: {
            "value": c.value,
            "standard_error": _num(c.standard_error),
            "num_events_used": c.num_events_used,
            "accepted_fraction": c.accepted_fraction,
            "degenerate": c.degenerate,
        }
        for k, c in analysis.correlations.items()
    }
    probs = analysis.probabilities
    ch_terms = {
        k: {"value": v, "standard_error": _num(probs.standard_errors.get(k))}
        for k, v in analysis.ch.terms.items()
    }
    return {
        "state_params": {"family": "weighted_ghz_y", "num_qubits": 3, "theta": theta},
        "visibility": visibility,
        "strategy": str(strategy or OutcomeBased()),
        "terms": {
            "correlations": corr,
            "ch_probabilities": ch_terms,
            "p_zx_source": probs.zx_source,
            "six_term_bound": {
                "value": probs.six_term_bound,
                "standard_error": _num(probs.standard_errors.get("six_term_bound")),
            },
        },
        "ch_value": analysis.ch.combination_value,
        "ch_standard_error": _num(analysis.ch.standard_errors.get("combination")),
        "chsh_value": analysis.chsh.combination_value,
        "chsh_standard_error": _num(analysis.chsh.standard_errors.get("combination")),
        "bounds": {
            "chsh": analysis.chsh.bounds(),
            "ch": {**analysis.ch.bounds(), "lhv_band": list(analysis.ch.lhv_band)},
        },
        "shots": shots,
        "seed": seed,
    }


SWEEP_HEADER = ("param", "value", "chsh", "ch", "bound_lhv", "bound_cirelson", "bound_max")


def sweep(param: str, start: float, stop: float, steps: int, *, theta: float = DEFAULT_THETA,
          visibility: float = 1.0, strategy: LabelingStrategy | None = None) -> list[tuple]:
    """Exact CHSH and CH values on an evenly spaced grid of ``param``.

    Bound columns carry the CHSH-form bounds (2, 2 sqrt 2, 4).
    """
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if param == "visibility":
        if not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
            raise ValueError("visibility range must lie within [0, 1]")
    elif param != "theta":
        raise ValueError(f"sweep parameter must be 'visibility' or 'theta', got {param!r}")
    if not (math.isfinite(start) and math.isfinite(stop)):
        raise ValueError("sweep range must be finite")
    rows = []
    for value in np.linspace(start, stop, steps):
        value = float(value)
        kw = {"theta": theta, "visibility": visibility, param: value}
        a = analyze_exact(kw["theta"], kw["visibility"], strategy)
        rows.append((param, value, a.chsh.combination_value, a.ch.combination_value,
                     CHSH_LHV, CHSH_CIRELSON, CHSH_MAX))
    return rows
