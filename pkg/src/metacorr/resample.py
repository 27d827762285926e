"""Seeded bootstrap resampling: correlation CIs, score variance, ranking stability.

Reproducibility
---------------
Every iteration draws from its own generator,
``numpy.random.Generator(numpy.random.Philox(key=derive_iteration_seed(seed, i, stream)))``,
so results do not depend on execution order or worker count. Indices are
drawn with ``Generator.integers(0, size, size=k)``. The stream tags are part of
the reproducibility contract:

============================  =============================================
``inputs``                    shared judged-doc draw (judged-only Boot-Inputs)
``inputs/metric``             metric-doc draw (full-test Boot-Inputs)
``inputs/human``              human-doc draw (full-test Boot-Inputs)
``systems``                   system draw (Boot-Systems, Boot-Both)
``variance/M={M}``            doc draw for the score-variance analysis
``stability/a/M={M}``         first doc sample of a ranking-stability draw
``stability/b/M={M}``         second doc sample
============================  =============================================
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .correlation import (
    JUDGED_ONLY,
    check_mode,
    count_pair_components,
    prepare_pair,
    system_level_correlation,
    tau_from_components,
)
from .errors import InputError, UndefinedCorrelationError
from .scoredata import ScoreMatrix, row_means

BOOT_INPUTS = "boot-inputs"
BOOT_SYSTEMS = "boot-systems"
BOOT_BOTH = "boot-both"
METHODS = (BOOT_INPUTS, BOOT_SYSTEMS, BOOT_BOTH)

STABILITY_CSV_HEADER = ("M", "mean_tau", "std_tau", "iterations", "defined")

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    # SplitMix64 finalizer; a bijection on 64-bit integers
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK64
    return x ^ (x >> 31)


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_iteration_seed(root_seed: int, iteration: int, stream: str) -> int:
    """64-bit seed for one iteration of one named stream.

    For a fixed root and stream the map from iteration to seed is a bijection
    on 64-bit integers, so consecutive iterations never collide.
    """
    base = _mix64(_mix64(root_seed & _MASK64) ^ _fnv1a64(stream.encode("utf-8")))
    return _mix64((base + _GOLDEN_GAMMA * ((iteration & _MASK64) + 1)) & _MASK64)


def iteration_rng(root_seed: int, iteration: int, stream: str) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_iteration_seed(root_seed, iteration, stream)))


def draw_indices(root_seed: int, iteration: int, stream: str, population: int, size: int) -> np.ndarray:
    """``size`` indices in ``[0, population)`` drawn with replacement."""
    return iteration_rng(root_seed, iteration, stream).integers(0, population, size=size)


def _map_iterations(fn: Callable[[int], object], iterations: int, workers: int) -> list:
    if workers <= 1:
        return [fn(i) for i in range(iterations)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order whatever the completion order
        return list(pool.map(fn, range(iterations), chunksize=max(1, iterations // (4 * workers))))


def percentile_interval(samples: Sequence[float], level: float = 0.95) -> tuple[float, float]:
    """Two-sided percentile interval with linear interpolation between order statistics."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise InputError("cannot take an interval of an empty sample")
    if not 0.0 < level < 1.0:
        raise InputError(f"level must be in (0, 1), got {level}")
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(arr, [alpha, 1.0 - alpha], method="linear")
    return float(lo), float(hi)


def _tau_or_nan(x: np.ndarray, z: np.ndarray) -> float:
    try:
        return tau_from_components(count_pair_components(x, z))
    except UndefinedCorrelationError:
        return math.nan


# --------------------------------------------------------------------------
# confidence intervals for the system-level correlation


@dataclass(frozen=True)
class BootstrapConfig:
    method: str = BOOT_INPUTS
    iterations: int = 1000
    seed: int = 0
    confidence_level: float = 0.95
    scoring_mode: str = JUDGED_ONLY

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"unknown bootstrap method {self.method!r}; expected one of {METHODS}")
        if self.iterations < 1:
            raise InputError("iterations must be >= 1")
        if not 0.0 < self.confidence_level < 1.0:
            raise InputError("confidence_level must be in (0, 1)")
        if not 0 <= self.seed <= _MASK64:
            raise InputError("seed must be an unsigned 64-bit integer")
        check_mode(self.scoring_mode)


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    point_estimate: float | None
    method: str
    scoring_mode: str
    iterations: int
    defined_iterations: int

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "width": self.width,
            "level": self.level,
            "point_estimate": self.point_estimate,
            "method": self.method,
            "scoring_mode": self.scoring_mode,
            "estimator": "percentile",
            "iterations": self.iterations,
            "defined_iterations": self.defined_iterations,
        }


def bootstrap_correlation_samples(
    metric: ScoreMatrix, human: ScoreMatrix, cfg: BootstrapConfig, workers: int = 1
) -> np.ndarray:
    """Resampled tau values, one per iteration; NaN marks an undefined tau.

    Boot-Inputs in judged-only mode draws one set of judged-doc indices and
    applies it to both matrices, keeping the metric and human scores of a
    document paired. In full-test mode the metric and human doc sets differ,
    so each side is resampled independently at its own size. Boot-Systems
    applies one system draw to both sides; Boot-Both does both.
    """
    metric, human = prepare_pair(metric, human, cfg.scoring_mode)
    n = metric.n_systems
    resample_docs = cfg.method in (BOOT_INPUTS, BOOT_BOTH)
    resample_systems = cfg.method in (BOOT_SYSTEMS, BOOT_BOTH)
    x_full = row_means(metric.values)
    z_full = row_means(human.values)
    seed = cfg.seed
    paired = cfg.scoring_mode == JUDGED_ONLY

    def one(i: int) -> float:
        if resample_docs:
            if paired:
                cols = draw_indices(seed, i, "inputs", human.n_docs, human.n_docs)
                x = row_means(np.take(metric.values, cols, axis=1))
                z = row_means(np.take(human.values, cols, axis=1))
            else:
                mcols = draw_indices(seed, i, "inputs/metric", metric.n_docs, metric.n_docs)
                hcols = draw_indices(seed, i, "inputs/human", human.n_docs, human.n_docs)
                x = row_means(np.take(metric.values, mcols, axis=1))
                z = row_means(np.take(human.values, hcols, axis=1))
        else:
            x, z = x_full, z_full
        if resample_systems:
            rows = draw_indices(seed, i, "systems", n, n)
            x, z = x[rows], z[rows]
        return _tau_or_nan(x, z)

    return np.array(_map_iterations(one, cfg.iterations, workers), dtype=np.float64)


def bootstrap_correlation_ci(
    metric: ScoreMatrix, human: ScoreMatrix, cfg: BootstrapConfig, workers: int = 1
) -> ConfidenceInterval:
    """Percentile bootstrap CI for the system-level Kendall tau.

    Iterations with an undefined tau are dropped and the remainder counted in
    ``defined_iterations``. ``point_estimate`` is the tau on the original data
    (None if undefined there).
    """
    samples = bootstrap_correlation_samples(metric, human, cfg, workers)
    defined = samples[~np.isnan(samples)]
    if defined.size == 0:
        raise UndefinedCorrelationError(f"all {cfg.iterations} bootstrap iterations gave an undefined tau")
    lower, upper = percentile_interval(defined, cfg.confidence_level)
    try:
        point = system_level_correlation(metric, human, cfg.scoring_mode).coefficient
    except UndefinedCorrelationError:
        point = None
    return ConfidenceInterval(
        lower=lower,
        upper=upper,
        level=cfg.confidence_level,
        point_estimate=point,
        method=cfg.method,
        scoring_mode=cfg.scoring_mode,
        iterations=cfg.iterations,
        defined_iterations=int(defined.size),
    )


# --------------------------------------------------------------------------
# score variance


@dataclass(frozen=True)
class VarianceReport:
    per_system_variance: dict[str, float]
    sample_size: int
    iterations: int
    per_system_interval: dict[str, tuple[float, float]] = field(default_factory=dict)
    level: float = 0.95

    @property
    def mean_variance(self) -> float:
        return float(np.mean(list(self.per_system_variance.values())))

    def to_dict(self) -> dict:
        return {
            "M": self.sample_size,
            "iterations": self.iterations,
            "per_system_variance": self.per_system_variance,
            "mean_variance": self.mean_variance,
            "level": self.level,
            "per_system_interval": {k: list(v) for k, v in self.per_system_interval.items()},
        }


def _check_sizes(size: int, iterations: int) -> None:
    if size < 1:
        raise InputError(f"sample size must be >= 1, got {size}")
    if iterations < 2:
        raise InputError(f"iterations must be >= 2, got {iterations}")


def bootstrap_system_means(m: ScoreMatrix, size: int, iterations: int, seed: int, workers: int = 1) -> np.ndarray:
    """``iterations x N`` array of per-system means over ``size`` resampled docs."""
    _check_sizes(size, iterations)

    def one(i: int) -> np.ndarray:
        cols = draw_indices(seed, i, f"variance/M={size}", m.n_docs, size)
        return row_means(np.take(m.values, cols, axis=1))

    return np.stack(_map_iterations(one, iterations, workers))


def system_score_variance(
    m: ScoreMatrix, size: int, iterations: int = 1000, seed: int = 0, level: float = 0.95, workers: int = 1
) -> VarianceReport:
    """Variance of each system's mean score when scored on ``size`` random docs.

    Each iteration samples ``size`` documents with replacement and recomputes
    the per-system means; the reported variance is the sample variance
    (ddof=1) of those means across iterations.
    """
    means = bootstrap_system_means(m, size, iterations, seed, workers)
    var = means.var(axis=0, ddof=1)
    intervals = {
        s: percentile_interval(means[:, k], level) for k, s in enumerate(m.system_ids)
    }
    return VarianceReport(
        per_system_variance=dict(zip(m.system_ids, var.tolist())),
        sample_size=size,
        iterations=iterations,
        per_system_interval=intervals,
        level=level,
    )


def variance_reduction(first: VarianceReport, last: VarianceReport) -> float | None:
    """Relative drop of the summed per-system variance from ``first`` to ``last``."""
    before = sum(first.per_system_variance.values())
    after = sum(last.per_system_variance.values())
    if before == 0.0:
        return None
    return 1.0 - after / before


# --------------------------------------------------------------------------
# ranking stability


@dataclass(frozen=True)
class StabilityPoint:
    size: int
    mean_tau: float
    std_tau: float
    iterations: int
    defined: int

    @property
    def std_error(self) -> float:
        return self.std_tau / math.sqrt(self.defined)

    def to_dict(self) -> dict:
        return {
            "M": self.size,
            "mean_tau": self.mean_tau,
            "std_tau": self.std_tau,
            "iterations": self.iterations,
            "defined": self.defined,
        }


def stability_samples(m: ScoreMatrix, size: int, iterations: int, seed: int, workers: int = 1) -> np.ndarray:
    """tau between rankings from two independent size-``size`` doc samples, per iteration."""
    _check_sizes(size, iterations)

    def one(i: int) -> float:
        a = draw_indices(seed, i, f"stability/a/M={size}", m.n_docs, size)
        b = draw_indices(seed, i, f"stability/b/M={size}", m.n_docs, size)
        return _tau_or_nan(row_means(np.take(m.values, a, axis=1)), row_means(np.take(m.values, b, axis=1)))

    return np.array(_map_iterations(one, iterations, workers), dtype=np.float64)


def ranking_stability_curve(
    m: ScoreMatrix, sizes: Sequence[int], iterations: int = 1000, seed: int = 0, workers: int = 1
) -> list[StabilityPoint]:
    """Mean and standard deviation of the two-sample ranking tau for each size."""
    if m.n_systems < 2:
        raise InputError("ranking stability needs at least 2 systems")
    if not sizes:
        raise InputError("at least one sample size is required")
    points = []
    for size in sizes:
        taus = stability_samples(m, int(size), iterations, seed, workers)
        defined = taus[~np.isnan(taus)]
        if defined.size == 0:
            raise UndefinedCorrelationError(f"every stability draw at M={size} gave an undefined tau")
        std = float(defined.std(ddof=1)) if defined.size > 1 else 0.0
        points.append(StabilityPoint(int(size), float(defined.mean()), std, iterations, int(defined.size)))
    return points


def stability_csv(points: Sequence[StabilityPoint]) -> str:
    lines = [",".join(STABILITY_CSV_HEADER)]
    for p in points:
        lines.append(f"{p.size},{p.mean_tau!r},{p.std_tau!r},{p.iterations},{p.defined}")
    return "\n".join(lines) + "\n"
