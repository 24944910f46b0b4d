"""
Task and subtask success rates over a batch of trials.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Sequence, Tuple, Union

from services.errors import InsufficientDataError
from services.execution.models import TrialResult
from utils import load_trial_rows

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrialSummary:
    """The per-trial numbers metrics need (one trials.csv row)."""
    trial: int
    seed: int
    S_i: int
    n_i: int
    replans: int = 0
    failure_modes: Tuple[str, ...] = ()

    @classmethod
    def of(cls, result: TrialResult) -> "TrialSummary":
        return cls(result.trial, result.seed, result.S_i, result.n_i, result.replans_used,
                   tuple(result.failure_modes))

    @classmethod
    def from_row(cls, row: Dict[str, Any]) -> "TrialSummary":
        return cls(row["trial"], row["seed"], row["S_i"], row["n_i"], row["replans"],
                   tuple(row["failure_modes"]))

    def to_dict(self) -> Dict[str, Any]:
        return {"trial": self.trial, "seed": self.seed, "S_i": self.S_i, "n_i": self.n_i,
                "replans": self.replans, "failure_modes": list(self.failure_modes)}


@dataclass(frozen=True)
class MetricsReport:
    N: int
    M: int
    TSR: Fraction
    SSR: Fraction
    trials: Tuple[TrialSummary, ...]
    failure_histogram: Dict[str, int] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "N": self.N,
            "M": self.M,
            "TSR": float(self.TSR),
            "SSR": float(self.SSR),
            "TSR_exact": str(self.TSR),
            "SSR_exact": str(self.SSR),
            "failure_histogram": dict(self.failure_histogram),
            "trials": [t.to_dict() for t in self.trials],
            "config": self.config,
        }


TrialLike = Union[TrialResult, TrialSummary]


def compute_metrics(results: Sequence[TrialLike], M: int, config: Dict[str, Any] = None) -> MetricsReport:
    """
    TSR = mean of S_i; SSR = mean of n_i / M (exact fractions).

    Args:
        results: Trial results or summaries, any order
        M: Expected subtasks per trial
        config: Effective configuration to echo

    Raises:
        InsufficientDataError: no results
        ValueError: a trial with n_i > M or with S_i inconsistent with n_i
    """
    if not results:
        raise InsufficientDataError("metrics need at least one trial")
    if M < 1:
        raise ValueError("M must be at least 1")

    summaries = sorted(
        (r if isinstance(r, TrialSummary) else TrialSummary.of(r) for r in results),
        key=lambda s: (s.trial, s.seed),
    )
    for s in summaries:
        if not 0 <= s.n_i <= M:
            raise ValueError(f"trial {s.trial}: n_i={s.n_i} outside [0, {M}]")
        if s.S_i != int(s.n_i == M):
            raise ValueError(f"trial {s.trial}: S_i={s.S_i} inconsistent with n_i={s.n_i}, M={M}")

    N = len(summaries)
    tsr = Fraction(sum(s.S_i for s in summaries), N)
    ssr = Fraction(sum(s.n_i for s in summaries), N * M)
    histogram = Counter(mode for s in summaries for mode in s.failure_modes)
    logger.info(f"Metrics over {N} trial(s), M={M}: TSR={float(tsr):.2f} SSR={float(ssr):.2f}")
    return MetricsReport(
        N=N,
        M=M,
        TSR=tsr,
        SSR=ssr,
        trials=tuple(summaries),
        failure_histogram=dict(sorted(histogram.items())),
        config=dict(config or {}),
    )


def load_trials(path: str) -> List[TrialSummary]:
    """Trial summaries from a trials.csv file."""
    return [TrialSummary.from_row(row) for row in load_trial_rows(path)]
