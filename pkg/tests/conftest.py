import numpy as np
import pytest

from metacorr import ScoreMatrix


def matrix(values, systems=None, docs=None, label=""):
    values = np.asarray(values, dtype=float)
    systems = systems or [f"S{i}" for i in range(values.shape[0])]
    docs = docs or [f"d{j}" for j in range(values.shape[1])]
    return ScoreMatrix(systems, docs, values, label)


@pytest.fixture
def small():
    return matrix([[1.0, 2.0], [3.0, 4.0]], ["A", "B"], ["d1", "d2"])


@pytest.fixture
def three_system_pair():
    """Judged-only means disagree with full-test means.

    Human means [1, 2, 3]; metric on the judged doc d1 gives [1, 3, 2] while
    the metric averaged over d1 and d2 gives [1, 2, 3].
    """
    human = matrix([[1.0], [2.0], [3.0]], ["A", "B", "C"], ["d1"], "human")
    metric = matrix([[1.0, 1.0], [3.0, 1.0], [2.0, 4.0]], ["A", "B", "C"], ["d1", "d2"], "metric")
    return metric, human
