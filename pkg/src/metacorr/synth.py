"""Synthetic metric/human score matrices and a naive tau oracle.

The generative model is additive Gaussian:

    human  z[i, j] = q[i] + noise
    metric x[i, j] = q[i] + distortion * d[i] + noise

with latent quality ``q[i] ~ U[0, quality_spread]`` and per-system metric bias
``d[i] ~ N(0, 1)``. The human matrix covers the first ``m_jud`` of the
``m_test`` metric documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, UndefinedCorrelationError
from .resample import iteration_rng
from .scoredata import ScoreMatrix

SUMMEVAL_SYSTEMS = 16
REALSUMM_SYSTEMS = 25
JUDGED_DOCS = 100
CNNDM_TEST_DOCS = 11490


@dataclass(frozen=True)
class SynthConfig:
    n_systems: int = SUMMEVAL_SYSTEMS
    m_test: int = CNNDM_TEST_DOCS
    m_jud: int = JUDGED_DOCS
    quality_spread: float = 1.0
    doc_noise: float = 1.0
    metric_distortion: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.n_systems < 2:
            raise InputError("n_systems must be >= 2")
        if not 1 <= self.m_jud <= self.m_test:
            raise InputError("need 1 <= m_jud <= m_test")
        if min(self.quality_spread, self.doc_noise, self.metric_distortion) < 0:
            raise InputError("scales must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")


def generate_dataset(cfg: SynthConfig) -> tuple[ScoreMatrix, ScoreMatrix]:
    """Return ``(metric, human)`` matrices fully determined by ``cfg``."""
    rng = iteration_rng(cfg.seed, 0, "synth")
    n = cfg.n_systems
    quality = rng.uniform(0.0, cfg.quality_spread, size=n)
    distortion = rng.standard_normal(n)
    human_noise = rng.standard_normal((n, cfg.m_jud))
    metric_noise = rng.standard_normal((n, cfg.m_test))

    systems = [f"sys{i:02d}" for i in range(n)]
    docs = [f"doc{j:05d}" for j in range(cfg.m_test)]
    human = quality[:, None] + cfg.doc_noise * human_noise
    metric = (quality + cfg.metric_distortion * distortion)[:, None] + cfg.doc_noise * metric_noise
    return (
        ScoreMatrix(systems, docs, metric, "synthetic-metric"),
        ScoreMatrix(systems, docs[: cfg.m_jud], human, "synthetic-human"),
    )


def brute_force_tau(x, z) -> float:
    """Kendall tau-b by an explicit double loop over pairs.

    Written independently of :mod:`metacorr.correlation` to serve as a test
    oracle; do not use it for real work.
    """
    x = [float(v) for v in x]
    z = [float(v) for v in z]
    if len(x) != len(z) or len(x) < 2:
        raise InputError("need two equal-length vectors of length >= 2")
    concordant = discordant = only_x = only_z = 0
    for a in range(len(x)):
        for b in range(a + 1, len(x)):
            if x[a] == x[b] and z[a] == z[b]:
                continue
            if x[a] == x[b]:
                only_x += 1
            elif z[a] == z[b]:
                only_z += 1
            elif (x[a] < x[b]) == (z[a] < z[b]):
                concordant += 1
            else:
                discordant += 1
    left = concordant + discordant + only_x
    right = concordant + discordant + only_z
    if left == 0 or right == 0:
        raise UndefinedCorrelationError("tau undefined for a fully tied vector")
    return (concordant - discordant) / math.sqrt(left * right)
