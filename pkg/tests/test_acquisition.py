import math

import numpy as np
import pytest

from mtal.acquisition import (
    MAX_BINARY_ENTROPY,
    DynamicWeightConfig,
    binary_entropy,
    combine_dynamic,
    combine_equal,
    combine_weighted,
    dynamic_offensive_weight,
    select_top_k,
    task_entropies,
)
from mtal.tasks import TaskTriple


class TestBinaryEntropy:
    def test_maximum_at_half(self):
        assert binary_entropy(0.5) == pytest.approx(math.log(2), abs=1e-12)

    def test_near_certainty_is_near_zero(self):
        assert binary_entropy(0.999999999999) < 1e-10
        assert binary_entropy(1.0) < 1e-10  # clamped, not NaN
        assert binary_entropy(0.0) < 1e-10

    def test_scalar_value(self):
        # -0.9 ln 0.9 - 0.1 ln 0.1
        assert binary_entropy(0.9) == pytest.approx(0.325083, abs=1e-6)

    def test_symmetry(self):
        rng = np.random.default_rng(42)
        for p in rng.uniform(1e-9, 1 - 1e-9, size=1000):
            assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-12)

    def test_strictly_increasing_below_half(self):
        grid = np.linspace(1e-6, 0.5, 2000)
        values = [binary_entropy(p) for p in grid]
        assert all(b > a for a, b in zip(values, values[1:]))
        assert max(values) <= MAX_BINARY_ENTROPY + 1e-12


class TestCombiners:
    def test_equal_is_plain_mean(self):
        assert combine_equal(TaskTriple(0.6, 0.2, 0.4)) == pytest.approx(0.4, abs=1e-15)
        assert combine_equal(TaskTriple(0.0, 0.0, 0.0)) == 0.0
        ln2 = math.log(2)
        assert combine_equal(TaskTriple(ln2, ln2, ln2)) == pytest.approx(ln2, abs=1e-15)

    def test_weighted_example(self):
        h = TaskTriple(0.6, 0.2, 0.4)
        assert combine_weighted(h, TaskTriple(2, 1, 1)) == pytest.approx(0.45, abs=1e-15)

    def test_weighted_reduces_to_equal(self):
        rng = np.random.default_rng(0)
        ones = TaskTriple(1.0, 1.0, 1.0)
        for _ in range(1000):
            h = TaskTriple(*rng.uniform(0, math.log(2), size=3))
            assert combine_weighted(h, ones) == combine_equal(h)

    def test_weighted_scale_invariance(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            h = TaskTriple(*rng.uniform(0, math.log(2), size=3))
            w = TaskTriple(*rng.uniform(0.1, 5.0, size=3))
            scale = float(rng.uniform(0.1, 10.0))
            scaled = TaskTriple(*(scale * x for x in w))
            assert combine_weighted(h, w) == pytest.approx(combine_weighted(h, scaled), abs=1e-12)

    def test_weighted_rejects_nonpositive_weights(self):
        with pytest.raises(ValueError):
            combine_weighted(TaskTriple(0.1, 0.1, 0.1), TaskTriple(1.0, 0.0, 1.0))

    def test_dynamic_example(self):
        h = TaskTriple(0.6, 0.3, 0.2)
        assert combine_dynamic(h, 2.0) == pytest.approx(1.8, abs=1e-12)

    def test_dynamic_zero_entropies(self):
        assert combine_dynamic(TaskTriple(0.0, 0.0, 0.0), 1.7) == 0.0

    def test_dynamic_linearity_in_weight(self):
        h = TaskTriple(0.5, 0.4, 0.1)
        assert combine_dynamic(h, 2.0) == pytest.approx(2 * combine_dynamic(h, 1.0), rel=1e-12)

    def test_task_entropies_maps_each_probability(self):
        probs = TaskTriple(0.5, 0.9, 0.1)
        h = task_entropies(probs)
        assert h.offensive == pytest.approx(math.log(2), abs=1e-12)
        assert h.violent == pytest.approx(binary_entropy(0.9), abs=1e-15)
        assert h.vulgar == pytest.approx(h.violent, abs=1e-12)  # symmetry


class TestDynamicWeightSchedule:
    def test_pinned_values(self):
        assert dynamic_offensive_weight(0.75) == pytest.approx(1.0, abs=1e-12)
        assert dynamic_offensive_weight(0.70) == pytest.approx(1.05, abs=1e-12)
        assert dynamic_offensive_weight(0.90) == pytest.approx(0.85, abs=1e-12)
        assert dynamic_offensive_weight(0.0) == pytest.approx(1.75, abs=1e-12)

    def test_continuous_at_threshold(self):
        eps = 1e-9
        below = dynamic_offensive_weight(0.75 - eps)
        above = dynamic_offensive_weight(0.75 + eps)
        assert below == pytest.approx(above, abs=1e-8)

    def test_monotone_non_increasing(self):
        grid = np.linspace(0.0, 1.0, 10001)
        values = [dynamic_offensive_weight(float(f1)) for f1 in grid]
        assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))

    def test_bounds_under_defaults(self):
        values = [dynamic_offensive_weight(f1 / 1000) for f1 in range(1001)]
        assert min(values) >= 0.5
        assert max(values) <= 1.75 + 1e-12

    def test_rejects_out_of_range_f1(self):
        with pytest.raises(ValueError):
            dynamic_offensive_weight(1.2)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            DynamicWeightConfig(f1_threshold=1.5)
        with pytest.raises(ValueError):
            DynamicWeightConfig(weight_min=3.0, weight_max=2.0)


class TestTopKSelection:
    def test_basic(self):
        assert select_top_k([0.1, 0.9, 0.5], 2) == [1, 2]

    def test_k_at_least_length_returns_all(self):
        assert select_top_k([0.3, 0.1, 0.2], 7) == [0, 2, 1]

    def test_tie_break_by_lower_index(self):
        assert select_top_k([0.4, 0.4, 0.4], 2) == [0, 1]

    def test_rejects_k_below_one(self):
        with pytest.raises(ValueError):
            select_top_k([1.0], 0)

    def test_matches_sort_oracle(self):
        rng = np.random.default_rng(99)
        for trial in range(1000):
            n = int(rng.integers(1, 50))
            # Quantize some trials so ties actually occur.
            scores = rng.uniform(0, 1, size=n)
            if trial % 3 == 0:
                scores = np.round(scores, 1)
            k = int(rng.integers(1, n + 1))
            expected = sorted(range(n), key=lambda i: (-scores[i], i))[:k]
            assert select_top_k([float(s) for s in scores], k) == expected

    def test_dynamic_topk_set_invariant_to_weight_scale(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            entropies = [TaskTriple(*rng.uniform(0, math.log(2), size=3)) for _ in range(64)]
            base = [combine_dynamic(h, 0.8) for h in entropies]
            scaled = [combine_dynamic(h, 0.8 * 3.7) for h in entropies]
            assert set(select_top_k(base, 10)) == set(select_top_k(scaled, 10))
