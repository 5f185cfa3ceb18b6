"""Hashed bag-of-n-grams features.

A deterministic, training-free encoder: word n-grams over the token
sequence and character n-grams within tokens are hashed into a fixed
power-of-two index space with a sign hash, weighted by the token weights
from normalization, and L2-normalized. Any object exposing `dim` and
`encode` satisfies the encoder contract, so a transformer embedding
backend can be swapped in without touching the trainer.
"""

import hashlib
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .textprep import CleanText


@dataclass(frozen=True)
class EncoderConfig:
    dim: int = 2**18
    word_orders: tuple = (1, 2)
    char_orders: tuple = (3, 4)
    hash_seed: int = 42

    def __post_init__(self) -> None:
        if self.dim <= 0 or self.dim & (self.dim - 1):
            raise ValueError(f"dim must be a power of two, got {self.dim}")
        for order in tuple(self.word_orders) + tuple(self.char_orders):
            if order < 1:
                raise ValueError(f"n-gram orders must be >= 1, got {order}")
        object.__setattr__(self, "word_orders", tuple(self.word_orders))
        object.__setattr__(self, "char_orders", tuple(self.char_orders))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Sparse vector: strictly increasing indices, matching nonzero values."""

    indices: np.ndarray
    values: np.ndarray
    dim: int

    def __post_init__(self) -> None:
        if self.indices.shape != self.values.shape:
            raise ValueError("indices and values must have the same shape")
        if self.indices.size:
            if self.indices[0] < 0 or self.indices[-1] >= self.dim:
                raise ValueError("indices must lie in [0, dim)")
            if np.any(np.diff(self.indices) <= 0):
                raise ValueError("indices must be strictly increasing")
            if np.any(self.values == 0.0):
                raise ValueError("zero values must not be stored")

    @property
    def nnz(self) -> int:
        return int(self.indices.size)


def empty_vector(dim: int) -> FeatureVector:
    return FeatureVector(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64), dim)


_WORD_SEP = "\x1f"


def _seed_bytes(seed: int) -> bytes:
    return (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")


def _hash64(key: str, seed: bytes) -> int:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8, salt=seed).digest()
    return int.from_bytes(digest, "little")


def _bump(acc: dict, key: str, weight: float, seed: bytes, dim: int) -> None:
    h = _hash64(key, seed)
    sign = 1.0 if h >> 63 else -1.0
    index = h & (dim - 1)
    acc[index] = acc.get(index, 0.0) + sign * weight


def _raw_features(tokens: CleanText, cfg: EncoderConfig) -> dict:
    """Accumulate signed n-gram contributions per hashed index (collisions sum).

    A word n-gram contributes the mean weight of its member tokens; a
    character n-gram contributes its token's weight.
    """
    acc: dict = {}
    seed = _seed_bytes(cfg.hash_seed)
    texts = [token.text for token in tokens]
    weights = [token.weight for token in tokens]
    for order in cfg.word_orders:
        for i in range(len(texts) - order + 1):
            key = f"w{order}{_WORD_SEP}" + _WORD_SEP.join(texts[i : i + order])
            weight = sum(weights[i : i + order]) / order
            _bump(acc, key, weight, seed, cfg.dim)
    for order in cfg.char_orders:
        for token in tokens:
            text = token.text
            for j in range(len(text) - order + 1):
                _bump(acc, f"c{order}{_WORD_SEP}{text[j : j + order]}", token.weight, seed, cfg.dim)
    return acc


def encode(tokens: CleanText, cfg: EncoderConfig) -> FeatureVector:
    """Hash a normalized tweet into an L2-normalized sparse vector."""
    acc = _raw_features(tokens, cfg)
    items = sorted((index, value) for index, value in acc.items() if value != 0.0)
    if not items:
        return empty_vector(cfg.dim)
    indices = np.array([index for index, _ in items], dtype=np.int64)
    values = np.array([value for _, value in items], dtype=np.float64)
    values /= np.linalg.norm(values)
    return FeatureVector(indices, values, cfg.dim)


@runtime_checkable
class Encoder(Protocol):
    """Encoder contract: a declared output width and one encode operation."""

    @property
    def dim(self) -> int: ...

    def encode(self, tokens: CleanText) -> FeatureVector: ...


class HashingEncoder:
    """The built-in encoder, closing over one EncoderConfig."""

    def __init__(self, config: EncoderConfig = EncoderConfig()):
        self.config = config

    @property
    def dim(self) -> int:
        return self.config.dim

    def encode(self, tokens: CleanText) -> FeatureVector:
        return encode(tokens, self.config)
