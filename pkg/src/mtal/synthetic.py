"""Synthetic corpora with planted linear structure.

Two flavors: ready-to-train sparse-vector splits whose labels come from
three random hyperplanes (separable by construction, with a margin), and
corpus-format TSV files for exercising the full load/normalize/encode
path end to end.
"""

from pathlib import Path

import numpy as np

from .encoding import FeatureVector
from .tasks import TaskTriple
from .training import PreparedSplit

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _vector_samples(rng, planes, count, dim, nnz, margin):
    features = []
    labels = []
    for _ in range(count):
        # Redraw indices and values together: an unlucky support can make
        # the margin unreachable for fixed indices.
        while True:
            indices = np.sort(rng.choice(dim, size=nnz, replace=False)).astype(np.int64)
            values = rng.normal(size=nnz)
            norm = np.linalg.norm(values)
            if norm == 0:
                continue
            values = values / norm
            margins = planes[:, indices] @ values
            if np.all(np.abs(margins) >= margin):
                break
        features.append(FeatureVector(indices, values, dim))
        labels.append(TaskTriple(*(bool(m > 0) for m in margins)))
    return features, labels


def synthetic_vector_splits(
    n_train: int,
    n_dev: int,
    n_test: int,
    dim: int = 1024,
    seed: int = 0,
    nnz: int = 16,
    margin: float = 0.7,
) -> tuple:
    """Three splits labeled by the same three planted hyperplanes."""
    rng = np.random.default_rng(seed)
    planes = rng.normal(size=(3, dim))
    splits = []
    for count in (n_train, n_dev, n_test):
        features, labels = _vector_samples(rng, planes, count, dim, nnz, margin)
        splits.append(PreparedSplit(features=features, labels=labels))
    return tuple(splits)


def _word(rng, length) -> str:
    return "".join(_LETTERS[i] for i in rng.integers(0, len(_LETTERS), size=length))


def write_synthetic_tsv(
    path,
    count: int,
    seed: int = 0,
    offensive_rate: float = 0.4,
    include_auxiliary_labels: bool = True,
) -> None:
    """Write a corpus-format TSV (id, text, offensive, hate, vulgar, violent).

    Offensive tweets carry marker words and an angry emoji so the planted
    signal survives normalization; vulgar/violent positives are rare
    subsets of the offensive ones, mirroring the source data's imbalance.
    """
    rng = np.random.default_rng(seed)
    neutral = [_word(rng, int(rng.integers(4, 8))) for _ in range(150)]
    offensive_markers = [_word(rng, int(rng.integers(5, 9))) for _ in range(25)]
    vulgar_markers = [_word(rng, int(rng.integers(5, 9))) for _ in range(10)]
    violent_markers = [_word(rng, int(rng.integers(5, 9))) for _ in range(10)]

    def pick(pool, count_):
        return [pool[int(i)] for i in rng.integers(0, len(pool), size=count_)]

    lines = []
    for i in range(count):
        offensive = bool(rng.random() < offensive_rate)
        vulgar = offensive and bool(rng.random() < 0.12)
        violent = offensive and bool(rng.random() < 0.08)
        words = pick(neutral, int(rng.integers(4, 10)))
        if offensive:
            words += pick(offensive_markers, 2) + ["😡"]
        if vulgar:
            words += pick(vulgar_markers, 2)
        if violent:
            words += pick(violent_markers, 2)
        order = rng.permutation(len(words))
        text = " ".join(words[int(j)] for j in order)
        fields = [
            f"s{i:06d}",
            text,
            "OFF" if offensive else "NOT_OFF",
            "NOT_HS",
        ]
        if include_auxiliary_labels:
            fields += ["VLG" if vulgar else "NOT_VLG", "V" if violent else "NOT_V"]
        lines.append("\t".join(fields))
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
