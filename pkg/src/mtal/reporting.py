"""Run reports.

A RunReport is fully deterministic for a given config and data: floats
serialize via shortest-round-trip repr and keys are sorted, so identical
runs produce byte-identical report files. Volatile facts (wall clock,
timestamps) belong in the sidecar meta file, never in the report.
"""

import json
from dataclasses import dataclass
from pathlib import Path

from .tasks import TaskTriple

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: TaskTriple  # unweighted mean per task
    dev_macro_f1: TaskTriple  # float, or None for unlabeled tasks
    selected: int
    cumulative_selected: int
    loss_weights: TaskTriple
    uncertainty_w_off: object  # float under dynamic uncertainty, else None


@dataclass(frozen=True)
class RunReport:
    config: dict
    config_hash: str
    split_sizes: dict
    epochs: list
    epochs_run: int
    best_epoch: int
    best_dev_macro_f1_offensive: float
    stopped_early: bool
    cumulative_selected: int
    test_macro_f1: TaskTriple  # float, or None for unlabeled tasks
    schema_version: int = REPORT_SCHEMA_VERSION


def report_to_dict(report: RunReport) -> dict:
    return {
        "schema_version": report.schema_version,
        "config": report.config,
        "config_hash": report.config_hash,
        "split_sizes": report.split_sizes,
        "epochs": [
            {
                "epoch": record.epoch,
                "train_loss": record.train_loss.to_dict(),
                "dev_macro_f1": record.dev_macro_f1.to_dict(),
                "selected": record.selected,
                "cumulative_selected": record.cumulative_selected,
                "loss_weights": record.loss_weights.to_dict(),
                "uncertainty_w_off": record.uncertainty_w_off,
            }
            for record in report.epochs
        ],
        "epochs_run": report.epochs_run,
        "best_epoch": report.best_epoch,
        "best_dev_macro_f1_offensive": report.best_dev_macro_f1_offensive,
        "stopped_early": report.stopped_early,
        "cumulative_selected": report.cumulative_selected,
        "test_macro_f1": report.test_macro_f1.to_dict(),
    }


def to_canonical_json(report: RunReport) -> str:
    """Deterministic serialization: sorted keys, repr floats, NaN forbidden."""
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_report(report: RunReport, path) -> None:
    Path(path).write_text(to_canonical_json(report), encoding="utf-8")


def render_summary(report: RunReport) -> str:
    """Short human-readable digest for terminal output."""
    def pct(value):
        return "-" if value is None else f"{100 * value:.2f}"

    test = report.test_macro_f1
    lines = [
        f"config_hash={report.config_hash}",
        f"epochs_run={report.epochs_run} best_epoch={report.best_epoch} "
        f"stopped_early={str(report.stopped_early).lower()}",
        f"best_dev_macro_f1_offensive={pct(report.best_dev_macro_f1_offensive)}",
        f"cumulative_selected={report.cumulative_selected}",
        f"test_macro_f1 offensive={pct(test.offensive)} violent={pct(test.violent)} "
        f"vulgar={pct(test.vulgar)}",
    ]
    return "\n".join(lines) + "\n"
