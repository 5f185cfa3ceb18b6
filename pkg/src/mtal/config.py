"""Experiment configuration.

Configs live in versioned TOML files validated strictly: unknown keys are
errors and every validation failure is reported at once. The resolved
config is echoed into each run's outputs together with a canonical
sha256 hash, and all randomness flows from the single seed through named
derived streams.
"""

import hashlib
import json
import zlib
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .acquisition import DynamicWeightConfig
from .corpus import ColumnSchema
from .encoding import EncoderConfig
from .textprep import EmojiPolicy, default_emoji_lexicon, load_emoji_lexicon

CONFIG_SCHEMA_VERSION = 1


class ConfigurationError(ValueError):
    """A structurally valid config that cannot drive the requested command."""


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunSettings(StrictModel):
    seed: int = Field(default=42, ge=0)
    batch_size: int = Field(default=64, ge=1)
    k_selected: Union[int, Literal["all"]] = "all"
    uncertainty_mode: Literal["none", "equal", "weighted", "dynamic"] = "none"
    loss_mode: Literal["equal", "static", "dynamic"] = "equal"
    max_epochs: int = Field(default=20, ge=1)
    patience: int = Field(default=3, ge=1)
    # Default suits the built-in hashing encoder; transformer backends
    # typically want 2e-5.
    lr: float = Field(default=1e-2, gt=0)

    @model_validator(mode="after")
    def _check_k(self) -> "RunSettings":
        if isinstance(self.k_selected, int):
            if self.k_selected < 1:
                raise ValueError("k_selected must be >= 1 or 'all'")
            if self.k_selected > self.batch_size:
                raise ValueError(
                    f"k_selected ({self.k_selected}) must not exceed batch_size ({self.batch_size})"
                )
        return self


class LossSettings(StrictModel):
    static_weights: tuple[float, float, float] = (0.7, 0.15, 0.15)

    @model_validator(mode="after")
    def _check_weights(self) -> "LossSettings":
        if any(w < 0 for w in self.static_weights):
            raise ValueError("static loss weights must be non-negative")
        if sum(self.static_weights) == 0:
            raise ValueError("static loss weights must not all be zero")
        return self


class DynamicWeightSettings(StrictModel):
    f1_threshold: float = 0.75
    weight_min: float = 0.5
    weight_max: float = 2.0
    initial_offensive_weight: float = 2.0
    violent_ratio: float = 2.0 / 3.0
    vulgar_ratio: float = 0.5

    @model_validator(mode="after")
    def _check(self) -> "DynamicWeightSettings":
        self.to_runtime()  # DynamicWeightConfig owns the invariants
        return self

    def to_runtime(self) -> DynamicWeightConfig:
        return DynamicWeightConfig(
            f1_threshold=self.f1_threshold,
            weight_min=self.weight_min,
            weight_max=self.weight_max,
            initial_offensive_weight=self.initial_offensive_weight,
            violent_ratio=self.violent_ratio,
            vulgar_ratio=self.vulgar_ratio,
        )


class UncertaintySettings(StrictModel):
    weights: tuple[float, float, float] = (2.0, 1.0, 1.0)
    dynamic: DynamicWeightSettings = DynamicWeightSettings()

    @model_validator(mode="after")
    def _check_weights(self) -> "UncertaintySettings":
        if any(w <= 0 for w in self.weights):
            raise ValueError("uncertainty weights must be positive")
        return self


class EmojiSettings(StrictModel):
    mode: Literal["strip", "keep", "weighted"] = "keep"
    lexicon_file: Optional[str] = None
    default_weight: float = Field(default=1.0, gt=0)

    def to_policy(self) -> EmojiPolicy:
        if self.mode != "weighted":
            return EmojiPolicy(mode=self.mode)
        lexicon = (
            load_emoji_lexicon(self.lexicon_file)
            if self.lexicon_file
            else default_emoji_lexicon()
        )
        return EmojiPolicy(mode="weighted", lexicon=lexicon, default_weight=self.default_weight)


class EncoderSettings(StrictModel):
    dim: int = 2**18
    word_ngram_orders: list[int] = [1, 2]
    char_ngram_orders: list[int] = [3, 4]
    hash_seed: int = 42

    @model_validator(mode="after")
    def _check(self) -> "EncoderSettings":
        self.to_config()  # EncoderConfig owns the invariants
        return self

    def to_config(self) -> EncoderConfig:
        return EncoderConfig(
            dim=self.dim,
            word_orders=tuple(self.word_ngram_orders),
            char_orders=tuple(self.char_ngram_orders),
            hash_seed=self.hash_seed,
        )


class ModelSettings(StrictModel):
    hidden: int = Field(default=64, ge=1)


class ColumnMapping(StrictModel):
    id_column: int = Field(ge=0)
    text_column: int = Field(ge=0)
    offensive_column: int = Field(ge=0)
    hate_column: Optional[int] = Field(default=None, ge=0)
    vulgar_column: Optional[int] = Field(default=None, ge=0)
    violent_column: Optional[int] = Field(default=None, ge=0)
    offensive_tokens: tuple[str, str] = ("OFF", "NOT_OFF")
    violent_tokens: tuple[str, str] = ("V", "NOT_V")
    vulgar_tokens: tuple[str, str] = ("VLG", "NOT_VLG")
    has_header: bool = False

    @model_validator(mode="after")
    def _check(self) -> "ColumnMapping":
        self.to_schema()  # ColumnSchema owns the invariants
        return self

    def to_schema(self) -> ColumnSchema:
        return ColumnSchema(
            id_column=self.id_column,
            text_column=self.text_column,
            offensive_column=self.offensive_column,
            hate_column=self.hate_column,
            vulgar_column=self.vulgar_column,
            violent_column=self.violent_column,
            offensive_tokens=tuple(self.offensive_tokens),
            violent_tokens=tuple(self.violent_tokens),
            vulgar_tokens=tuple(self.vulgar_tokens),
            has_header=self.has_header,
        )


class DataSettings(ColumnMapping):
    # The test split may use its own mapping (e.g. no vulgar/violent columns).
    test: Optional[ColumnMapping] = None

    def schema_for(self, split: str) -> ColumnSchema:
        if split == "test" and self.test is not None:
            return self.test.to_schema()
        return self.to_schema()


class ExperimentConfig(StrictModel):
    schema_version: Literal[1] = CONFIG_SCHEMA_VERSION
    run: RunSettings = RunSettings()
    loss: LossSettings = LossSettings()
    uncertainty: UncertaintySettings = UncertaintySettings()
    emoji: EmojiSettings = EmojiSettings()
    encoder: EncoderSettings = EncoderSettings()
    model: ModelSettings = ModelSettings()
    data: Optional[DataSettings] = None

    def resolved(self) -> dict:
        return self.model_dump(mode="json")


class GridAxes(StrictModel):
    loss_modes: list[Literal["equal", "static", "dynamic"]] = ["equal", "static", "dynamic"]
    uncertainty_modes: list[Literal["none", "equal", "weighted", "dynamic"]] = [
        "none",
        "equal",
        "weighted",
        "dynamic",
    ]
    emoji_modes: Optional[list[Literal["strip", "keep", "weighted"]]] = None
    k_values: Optional[list[Union[int, Literal["all"]]]] = None
    static_weight_sets: Optional[list[tuple[float, float, float]]] = None

    @model_validator(mode="after")
    def _check_nonempty(self) -> "GridAxes":
        for name in ("loss_modes", "uncertainty_modes", "emoji_modes", "k_values", "static_weight_sets"):
            values = getattr(self, name)
            if values is not None and len(values) == 0:
                raise ValueError(f"grid axis {name} must not be empty")
        return self


class GridConfig(StrictModel):
    schema_version: Literal[1] = CONFIG_SCHEMA_VERSION
    grid: GridAxes = GridAxes()
    base: ExperimentConfig = ExperimentConfig()

    def resolved(self) -> dict:
        return self.model_dump(mode="json")


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def config_hash(payload: dict) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def _load_toml(path) -> dict:
    with open(path, "rb") as handle:
        return tomllib.load(handle)


def load_experiment_config(path) -> ExperimentConfig:
    return ExperimentConfig.model_validate(_load_toml(path))


def load_grid_config(path) -> GridConfig:
    return GridConfig.model_validate(_load_toml(path))


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Named RNG stream derived from the single experiment seed."""
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(key,)))
