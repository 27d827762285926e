"""Kendall's tau-b from pair counts and system-level correlations.

Pairs are classified exhaustively (O(n^2)); with a few dozen systems this is
cheap and keeps the counts directly comparable with a naive oracle. Ties are
exact floating-point equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, UndefinedCorrelationError
from .scoredata import (
    ScoreMatrix,
    SystemAggregate,
    align_systems,
    restrict_to_common_docs,
    system_means,
)

JUDGED_ONLY = "judged-only"
FULL_TEST = "full-test"
DELTA_WINDOW = "delta-window"
SCORING_MODES = (JUDGED_ONLY, FULL_TEST)


@dataclass(frozen=True)
class TauComponents:
    """Counts of concordant, discordant and tied pairs among ``n`` items.

    ``x_ties`` counts pairs tied only in x, ``z_ties`` pairs tied only in z and
    ``joint_ties`` pairs tied in both. Over all pairs the five counts sum to
    n(n-1)/2; over a pair subset they sum to the subset size.
    """

    concordant: int
    discordant: int
    x_ties: int
    z_ties: int
    joint_ties: int
    n: int

    def __post_init__(self):
        counts = (self.concordant, self.discordant, self.x_ties, self.z_ties, self.joint_ties)
        if min(counts) < 0:
            raise InputError("pair counts must be nonnegative")
        if self.n < 2:
            raise InputError("at least 2 items are required")
        if sum(counts) > self.n * (self.n - 1) // 2:
            raise InputError("more classified pairs than item pairs")

    @property
    def pairs(self) -> int:
        return self.concordant + self.discordant + self.x_ties + self.z_ties + self.joint_ties

    def __add__(self, other: "TauComponents") -> "TauComponents":
        return TauComponents(
            self.concordant + other.concordant,
            self.discordant + other.discordant,
            self.x_ties + other.x_ties,
            self.z_ties + other.z_ties,
            self.joint_ties + other.joint_ties,
            max(self.n, other.n),
        )


@dataclass(frozen=True)
class CorrelationResult:
    coefficient: float
    components: TauComponents
    pairs_used: int
    mode: str | None = None

    def to_dict(self) -> dict:
        c = self.components
        return {
            "coefficient": self.coefficient,
            "P": c.concordant,
            "Q": c.discordant,
            "T": c.x_ties,
            "U": c.z_ties,
            "B": c.joint_ties,
            "n": c.n,
            "pairs_used": self.pairs_used,
            "mode": self.mode,
        }


def _as_vectors(x, z) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.ndim != 1 or z.ndim != 1:
        raise InputError("x and z must be 1-D")
    if len(x) != len(z):
        raise InputError(f"length mismatch: {len(x)} vs {len(z)}")
    if len(x) < 2:
        raise InputError("at least 2 items are required")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
        raise InputError("x and z must be finite")
    return x, z


def classify_pairs(x: np.ndarray, z: np.ndarray, first: np.ndarray, second: np.ndarray) -> TauComponents:
    """Classify the item pairs ``(first[k], second[k])`` by the signs of their differences."""
    sx = np.sign(x[first] - x[second])
    sz = np.sign(z[first] - z[second])
    prod = sx * sz
    x_tied = sx == 0
    z_tied = sz == 0
    return TauComponents(
        concordant=int(np.count_nonzero(prod > 0)),
        discordant=int(np.count_nonzero(prod < 0)),
        x_ties=int(np.count_nonzero(x_tied & ~z_tied)),
        z_ties=int(np.count_nonzero(z_tied & ~x_tied)),
        joint_ties=int(np.count_nonzero(x_tied & z_tied)),
        n=len(x),
    )


def count_pair_components(x, z) -> TauComponents:
    """Classify all n(n-1)/2 pairs of ``(x, z)``."""
    x, z = _as_vectors(x, z)
    first, second = np.triu_indices(len(x), k=1)
    return classify_pairs(x, z, first, second)


def tau_from_components(c: TauComponents) -> float:
    """``(P - Q) / sqrt((P + Q + T) * (P + Q + U))``.

    Raises :class:`UndefinedCorrelationError` when either factor is zero.
    """
    p, q = c.concordant, c.discordant
    left = p + q + c.x_ties
    right = p + q + c.z_ties
    if left == 0 or right == 0:
        raise UndefinedCorrelationError(
            f"tau is undefined: no pairs untied in {'z' if left == 0 else 'x'}"
            f" (P={p}, Q={q}, T={c.x_ties}, U={c.z_ties}, B={c.joint_ties})"
        )
    return (p - q) / math.sqrt(left * right)


def classical_tau_b(c: TauComponents) -> float:
    """tau-b via the textbook form ``(P - Q) / sqrt((n0 - n1) * (n0 - n2))``.

    ``n0`` is the number of classified pairs, ``n1`` the pairs tied in x (alone
    or jointly) and ``n2`` those tied in z.
    """
    n0 = c.pairs
    n1 = c.x_ties + c.joint_ties
    n2 = c.z_ties + c.joint_ties
    denom = (n0 - n1) * (n0 - n2)
    if denom == 0:
        raise UndefinedCorrelationError("tau is undefined: one ranking is fully tied")
    return (c.concordant - c.discordant) / math.sqrt(denom)


def kendall_tau_b(x, z) -> CorrelationResult:
    c = count_pair_components(x, z)
    tau = tau_from_components(c)
    if __debug__:
        assert tau == classical_tau_b(c), "tau-b forms disagree"
    return CorrelationResult(tau, c, c.pairs)


def pearson(x, z) -> float:
    """Sample Pearson correlation, clipped to [-1, 1]."""
    x, z = _as_vectors(x, z)
    dx = x - x.mean()
    dz = z - z.mean()
    sxx = float(dx @ dx)
    szz = float(dz @ dz)
    if sxx == 0.0 or szz == 0.0:
        raise UndefinedCorrelationError("Pearson correlation is undefined for a constant vector")
    return float(np.clip((dx @ dz) / math.sqrt(sxx * szz), -1.0, 1.0))


def check_mode(mode: str) -> str:
    if mode not in SCORING_MODES:
        raise InputError(f"unknown scoring mode {mode!r}; expected one of {SCORING_MODES}")
    return mode


def prepare_pair(metric: ScoreMatrix, human: ScoreMatrix, mode: str) -> tuple[ScoreMatrix, ScoreMatrix]:
    """Align systems and, in judged-only mode, cut the metric down to the judged docs."""
    check_mode(mode)
    metric, human = align_systems(metric, human)
    if mode == JUDGED_ONLY:
        metric = restrict_to_common_docs(metric, human)
    return metric, human


def system_aggregates(
    metric: ScoreMatrix, human: ScoreMatrix, mode: str
) -> tuple[SystemAggregate, SystemAggregate]:
    """Per-system means of both matrices under the given scoring mode.

    judged-only averages the metric over exactly the human-judged documents;
    full-test averages it over every document it was scored on.
    """
    metric, human = prepare_pair(metric, human, mode)
    return system_means(metric), system_means(human)


def system_level_correlation(metric: ScoreMatrix, human: ScoreMatrix, scoring_mode: str) -> CorrelationResult:
    """Kendall tau-b between per-system metric and human means."""
    m_agg, h_agg = system_aggregates(metric, human, scoring_mode)
    result = kendall_tau_b(m_agg.means, h_agg.means)
    return CorrelationResult(result.coefficient, result.components, result.pairs_used, scoring_mode)
