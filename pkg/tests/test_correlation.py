import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import stats

from metacorr import (
    CorrelationResult,
    InputError,
    TauComponents,
    UndefinedCorrelationError,
    brute_force_tau,
    classical_tau_b,
    count_pair_components,
    kendall_tau_b,
    pearson,
    system_level_correlation,
)

from conftest import matrix


def enumerate_pairs(x, z):
    """Independent pair classification with itertools, used to freeze expected counts."""
    out = dict(P=0, Q=0, T=0, U=0, B=0)
    for a, b in itertools.combinations(range(len(x)), 2):
        dx, dz = x[a] - x[b], z[a] - z[b]
        if dx == 0 and dz == 0:
            out["B"] += 1
        elif dx == 0:
            out["T"] += 1
        elif dz == 0:
            out["U"] += 1
        elif dx * dz > 0:
            out["P"] += 1
        else:
            out["Q"] += 1
    return out


def as_dict(c: TauComponents):
    return dict(P=c.concordant, Q=c.discordant, T=c.x_ties, U=c.z_ties, B=c.joint_ties)


class TestPairCounts:
    @pytest.mark.parametrize(
        "x, z, expected",
        [
            ([1, 2, 3], [1, 2, 3], dict(P=3, Q=0, T=0, U=0, B=0)),
            ([1, 2, 3, 4], [1, 3, 2, 4], dict(P=5, Q=1, T=0, U=0, B=0)),
            ([1, 1, 2], [1, 2, 3], dict(P=2, Q=0, T=1, U=0, B=0)),
        ],
    )
    def test_examples(self, x, z, expected):
        assert enumerate_pairs(x, z) == expected
        assert as_dict(count_pair_components(x, z)) == expected

    def test_partition(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(2, 15))
            x, z = rng.integers(0, 4, n), rng.integers(0, 4, n)
            c = count_pair_components(x, z)
            assert c.pairs == n * (n - 1) // 2
            assert as_dict(c) == enumerate_pairs(x.tolist(), z.tolist())

    def test_exact_ties_not_epsilon(self):
        c = count_pair_components([1.0, 1.0 + 1e-15], [0.0, 1.0])
        assert c.concordant == 1 and c.x_ties == 0

    @pytest.mark.parametrize("x, z", [([1, 2], [1, 2, 3]), ([1], [1]), ([1, math.nan], [1, 2])])
    def test_invalid(self, x, z):
        with pytest.raises(InputError):
            count_pair_components(x, z)


class TestKendall:
    def test_reversal(self):
        assert kendall_tau_b([1, 2, 3], [3, 2, 1]).coefficient == -1.0

    def test_tie_example(self):
        # P=2, Q=0, T=1, U=0 -> 2 / sqrt(3 * 2)
        assert kendall_tau_b([1, 1, 2], [1, 2, 3]).coefficient == pytest.approx(2 / math.sqrt(6), abs=1e-15)
        assert kendall_tau_b([1, 1, 2], [1, 2, 3]).coefficient == pytest.approx(0.8165, abs=1e-4)

    def test_fully_tied_is_undefined(self):
        with pytest.raises(UndefinedCorrelationError):
            kendall_tau_b([5, 5, 5], [1, 2, 3])
        with pytest.raises(UndefinedCorrelationError):
            kendall_tau_b([1, 2, 3], [4, 4, 4])

    def test_undefined_is_not_input_error(self):
        with pytest.raises(UndefinedCorrelationError) as exc:
            kendall_tau_b([5, 5], [1, 2])
        assert not isinstance(exc.value, InputError)

    def test_matches_oracle_and_scipy(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            n = int(rng.integers(2, 13))
            x = np.round(rng.normal(size=n), 1)
            z = np.round(rng.normal(size=n), 1)
            try:
                expected = brute_force_tau(x, z)
            except UndefinedCorrelationError:
                with pytest.raises(UndefinedCorrelationError):
                    kendall_tau_b(x, z)
                continue
            got = kendall_tau_b(x, z).coefficient
            assert got == pytest.approx(expected, abs=1e-12)
            assert got == pytest.approx(stats.kendalltau(x, z).statistic, abs=1e-12)
            assert -1.0 <= got <= 1.0

    def test_classical_form_identical(self):
        c = count_pair_components([1, 1, 2, 3, 3], [2, 1, 1, 3, 5])
        assert classical_tau_b(c) == kendall_tau_b([1, 1, 2, 3, 3], [2, 1, 1, 3, 5]).coefficient

    def test_result_json(self):
        d = kendall_tau_b([1, 1, 2], [1, 2, 3]).to_dict()
        assert set(d) == {"coefficient", "P", "Q", "T", "U", "B", "n", "pairs_used", "mode"}
        json.dumps(d)


vectors = st.integers(2, 10).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-3, 3).map(float), min_size=n, max_size=n),
        st.lists(st.integers(-3, 3).map(float), min_size=n, max_size=n),
    )
)


def tau_or_none(x, z):
    try:
        return kendall_tau_b(x, z).coefficient
    except UndefinedCorrelationError:
        return None


class TestProperties:
    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=10, unique=True).flatmap(
            lambda x: st.tuples(st.just(x), st.lists(st.integers(-3, 3).map(float), min_size=len(x), max_size=len(x)))
        )
    )
    def test_antisymmetry(self, xz):
        x, z = xz
        t = tau_or_none(x, z)
        assume(t is not None)
        assert tau_or_none([-v for v in x], z) == pytest.approx(-t, abs=1e-15)

    @given(vectors, st.randoms())
    def test_permutation_equivariance(self, xz, rnd):
        x, z = xz
        perm = list(range(len(x)))
        rnd.shuffle(perm)
        a = tau_or_none(x, z)
        b = tau_or_none([x[i] for i in perm], [z[i] for i in perm])
        assert a == b

    @given(vectors)
    def test_strict_monotone_invariance(self, xz):
        x, z = xz
        t = tau_or_none(x, z)
        assert tau_or_none([math.exp(v) for v in x], z) == t
        assert tau_or_none([2 * v + 1 for v in x], z) == t

    @settings(max_examples=200)
    @given(vectors)
    def test_oracle_equivalence(self, xz):
        x, z = xz
        try:
            expected = brute_force_tau(x, z)
        except UndefinedCorrelationError:
            assert tau_or_none(x, z) is None
            return
        assert tau_or_none(x, z) == pytest.approx(expected, abs=1e-12)


class TestPearson:
    def test_identity(self):
        assert pearson([1, 2, 5], [1, 2, 5]) == pytest.approx(1.0)

    def test_negation(self):
        assert pearson([1, 2, 5], [-1, -2, -5]) == pytest.approx(-1.0)

    def test_hand_checked(self):
        # deviations (-1.5,-.5,.5,1.5) and (-.5,-1.5,1.5,.5): 3 / sqrt(5 * 5)
        assert pearson([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6, abs=1e-15)

    def test_zero_variance(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1, 1, 1], [1, 2, 3])


class TestSystemLevel:
    @pytest.mark.parametrize("mode", ["judged-only", "full-test"])
    def test_identical_matrices(self, mode):
        rng = np.random.default_rng(2)
        m = matrix(rng.normal(size=(6, 20)))
        r = system_level_correlation(m, m, mode)
        assert r.coefficient == 1.0
        assert r.mode == mode

    def test_modes_agree_when_doc_sets_equal(self):
        rng = np.random.default_rng(4)
        metric, human = matrix(rng.normal(size=(7, 30))), matrix(rng.normal(size=(7, 30)))
        a = system_level_correlation(metric, human, "judged-only")
        b = system_level_correlation(metric, human, "full-test")
        assert (a.coefficient, a.components) == (b.coefficient, b.components)

    def test_modes_disagree(self, three_system_pair):
        metric, human = three_system_pair
        judged = system_level_correlation(metric, human, "judged-only")
        full = system_level_correlation(metric, human, "full-test")
        assert as_dict(judged.components) == enumerate_pairs([1, 3, 2], [1, 2, 3])
        assert judged.coefficient == pytest.approx(1 / 3, abs=1e-15)
        assert full.coefficient == 1.0

    def test_alignment_applied(self):
        metric = matrix([[3.0], [1.0], [2.0]], ["C", "A", "B"])
        human = matrix([[1.0], [2.0], [3.0], [0.0]], ["A", "B", "C", "D"])
        assert system_level_correlation(metric, human, "judged-only").coefficient == 1.0

    def test_unknown_mode(self):
        m = matrix([[1.0], [2.0]])
        with pytest.raises(InputError):
            system_level_correlation(m, m, "sometimes")

    def test_judged_doc_missing_from_metric(self):
        metric = matrix([[1.0], [2.0]], docs=["d1"])
        human = matrix([[1.0], [2.0]], docs=["d2"])
        with pytest.raises(InputError):
            system_level_correlation(metric, human, "judged-only")
        assert system_level_correlation(metric, human, "full-test").coefficient == 1.0
