"""Uncertainty scoring for sample selection.

Per-task binary entropies are combined into one acquisition score per
sample by one of three rules (plain mean, fixed-weight mean, or a
dynamic rule whose offensive-task weight tracks recent validation macro
F1), and the top-k scorers of each batch are kept for training.
"""

import math
from dataclasses import dataclass
from typing import Sequence

from .tasks import TaskTriple

# Probabilities are clamped before the entropy log to dodge 0 * log(0).
PROB_CLAMP = 1e-12
MAX_BINARY_ENTROPY = math.log(2.0)


def binary_entropy(p: float) -> float:
    """Entropy (nats) of a Bernoulli with success probability p.

    Inputs are clamped into [PROB_CLAMP, 1 - PROB_CLAMP] so saturated
    sigmoid outputs stay finite.
    """
    p = min(max(p, PROB_CLAMP), 1.0 - PROB_CLAMP)
    return -(p * math.log(p) + (1.0 - p) * math.log1p(-p))


def task_entropies(probabilities: TaskTriple) -> TaskTriple:
    """Entropy of each task's predicted probability."""
    return probabilities.map(binary_entropy)


def combine_equal(entropies: TaskTriple) -> float:
    """Mean of the three task entropies."""
    return (entropies.offensive + entropies.violent + entropies.vulgar) / 3.0


def combine_weighted(entropies: TaskTriple, weights: TaskTriple) -> float:
    """Weighted mean of the task entropies; weights must all be positive."""
    if min(weights) <= 0:
        raise ValueError(f"uncertainty weights must be positive, got {tuple(weights)}")
    total = weights.offensive + weights.violent + weights.vulgar
    return (
        weights.offensive * entropies.offensive
        + weights.violent * entropies.violent
        + weights.vulgar * entropies.vulgar
    ) / total


@dataclass(frozen=True)
class DynamicWeightConfig:
    """Parameters of the performance-driven offensive-task weight schedule.

    Below f1_threshold the weight grows with the shortfall (capped at
    weight_max); at or above it the weight shrinks with the surplus
    (floored at weight_min). The violent and vulgar entropies ride along
    at fixed ratios of the offensive weight.
    """

    f1_threshold: float = 0.75
    weight_min: float = 0.5
    weight_max: float = 2.0
    initial_offensive_weight: float = 2.0
    violent_ratio: float = 2.0 / 3.0
    vulgar_ratio: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.f1_threshold < 1.0:
            raise ValueError(f"f1_threshold must lie in (0, 1), got {self.f1_threshold}")
        if not 0.0 < self.weight_min <= self.weight_max:
            raise ValueError(
                f"need 0 < weight_min <= weight_max, got {self.weight_min}, {self.weight_max}"
            )
        if self.initial_offensive_weight <= 0:
            raise ValueError("initial_offensive_weight must be positive")
        if self.violent_ratio <= 0 or self.vulgar_ratio <= 0:
            raise ValueError("task ratios must be positive")


def dynamic_offensive_weight(f1_offensive: float, cfg: DynamicWeightConfig = DynamicWeightConfig()) -> float:
    """Map the latest offensive macro F1 to the next offensive-task weight."""
    if not 0.0 <= f1_offensive <= 1.0:
        raise ValueError(f"macro F1 must lie in [0, 1], got {f1_offensive}")
    if f1_offensive < cfg.f1_threshold:
        return min(cfg.weight_max, (cfg.f1_threshold - f1_offensive) + 1.0)
    return max(cfg.weight_min, 1.0 - (f1_offensive - cfg.f1_threshold))


def combine_dynamic(
    entropies: TaskTriple,
    offensive_weight: float,
    violent_ratio: float = 2.0 / 3.0,
    vulgar_ratio: float = 0.5,
) -> float:
    """Unnormalized dynamic score: the offensive weight, scaled down for
    the auxiliary tasks by the configured ratios."""
    if offensive_weight <= 0:
        raise ValueError(f"offensive_weight must be positive, got {offensive_weight}")
    return (
        offensive_weight * entropies.offensive
        + violent_ratio * offensive_weight * entropies.violent
        + vulgar_ratio * offensive_weight * entropies.vulgar
    )


def select_top_k(scores: Sequence[float], k: int) -> list[int]:
    """Indices of the k largest scores, sorted by descending score and then
    ascending index; ties go to the lower index. Returns every index when
    k is at least len(scores)."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return order[:k]
