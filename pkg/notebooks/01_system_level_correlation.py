"""
System-level correlation, two ways
==================================

A summarization metric is usually judged by how well its per-system mean
scores rank the systems compared with human judgments. Humans only annotate
a small judged subset of documents, but the metric can be run on the whole
test set. This script builds a synthetic benchmark and compares the two
ways of aggregating the metric.
"""

# %%
# A synthetic benchmark shaped like the common summarization setup:
# 16 systems, 11,490 test documents, 100 of them judged by humans.
import numpy as np

from metacorr import SynthConfig, generate_dataset, kendall_tau_b, system_aggregates, system_level_correlation

metric, human = generate_dataset(SynthConfig(seed=1))
print(metric)
print(human)

# %%
# Kendall's tau-b is built from pair counts. Each of the 120 system pairs is
# concordant, discordant, or tied on one side.
result = system_level_correlation(metric, human, "judged-only")
print(result.to_dict())

# %%
# Same pairs, but the metric mean now uses all 11,490 documents. The human
# side is unchanged because there are no more annotations to use.
full = system_level_correlation(metric, human, "full-test")
print(f"judged-only tau = {result.coefficient:.3f}")
print(f"full-test   tau = {full.coefficient:.3f}")

# %%
# The aggregates themselves: with 100 documents the per-system metric means
# scatter around the values the full test set gives.
m_judged, h = system_aggregates(metric, human, "judged-only")
m_full, _ = system_aggregates(metric, human, "full-test")
print(np.round(np.c_[m_judged.means, m_full.means, h.means], 3))

# %%
# Ties are handled in both variables. Here two systems share a metric score.
print(kendall_tau_b([1.0, 1.0, 2.0, 3.0], [1.0, 2.0, 3.0, 4.0]).to_dict())
