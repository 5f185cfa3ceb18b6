"""Request/response models for the service endpoints.

Validate/preprocess move corpus lines through the request body, so those
endpoints work against a remote server. Train/grid jobs take filesystem
paths and write their outputs server-side (checkpoints are far too large
to inline); their responses still carry the full report/summary payload.
"""

from typing import Optional, Union

from pydantic import BaseModel, Field

from ..config import ColumnMapping, EmojiSettings, ExperimentConfig, GridConfig


class HealthResponse(BaseModel):
    status: str
    version: str


class LineDiagnostic(BaseModel):
    line: int
    message: str


class ValidateRequest(BaseModel):
    lines: list[str]
    columns: ColumnMapping
    expectations: Optional[dict[str, int]] = None


class ValidateResponse(BaseModel):
    ok: bool
    stats: dict[str, int]
    errors: list[LineDiagnostic]
    expectation_failures: list[str]


class PreprocessRequest(BaseModel):
    lines: list[str]
    emoji: EmojiSettings = EmojiSettings()


class PreprocessResponse(BaseModel):
    lines: list[str]


class TrainRequest(BaseModel):
    config: ExperimentConfig
    train_path: str
    dev_path: str
    test_path: str
    out_dir: str


class TrainResponse(BaseModel):
    report: dict
    report_path: str
    checkpoint_path: str
    meta_path: str
    wall_clock_seconds: float


class GridRequest(BaseModel):
    grid: GridConfig
    train_path: str
    dev_path: str
    test_path: str
    out_dir: str
    jobs: int = Field(default=1, ge=1)


class GridResponse(BaseModel):
    summary: dict
    summary_json_path: str
    summary_tsv_path: str
    summary_txt_path: str
    failed_cells: int
