"""File-level experiment execution shared by the service and the CLI.

Single runs write report.json (deterministic), report_meta.json (wall
clock and provenance, excluded from the determinism contract), and a
model checkpoint into the output directory. Grid sweeps write one cell
directory per configuration plus summary.json / summary.tsv /
summary.txt; a failing cell is marked and the sweep continues. Grid
cells are independent and may run in parallel worker processes; the
summary is assembled in cell-index order either way.
"""

import concurrent.futures
import json
import multiprocessing
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import (
    ColumnMapping,
    ConfigurationError,
    EmojiSettings,
    ExperimentConfig,
    GridConfig,
    config_hash,
)
from .corpus import load_split, parse_lines, split_stats, stats_as_dict
from .encoding import HashingEncoder
from .model import save_checkpoint
from .reporting import report_to_dict, write_report
from .textprep import normalize, render_weighted
from .training import prepare_split, run_training

REPORT_FILE = "report.json"
META_FILE = "report_meta.json"
CHECKPOINT_FILE = "model.npz"


def validate_records(lines, mapping: ColumnMapping, expectations=None) -> dict:
    """Parse corpus lines and compare stats against optional expectations."""
    samples, errors = parse_lines(lines, mapping.to_schema())
    stats = stats_as_dict(split_stats(samples))
    failures = []
    for key in sorted(expectations or {}):
        expected = expectations[key]
        if key not in stats:
            failures.append(f"unknown expectation key {key!r}")
        elif stats[key] != expected:
            failures.append(f"{key}: expected {expected}, found {stats[key]}")
    return {
        "ok": not errors and not failures,
        "stats": stats,
        "errors": [{"line": e.line, "message": e.message} for e in errors],
        "expectation_failures": failures,
    }


def preprocess_records(lines, emoji: EmojiSettings) -> list:
    """Normalize raw lines; non-unit emoji weights render as token|weight."""
    policy = emoji.to_policy()
    return [render_weighted(normalize(line, policy)) for line in lines]


def _load_prepared_splits(cfg: ExperimentConfig, train_path, dev_path, test_path):
    if cfg.data is None:
        raise ConfigurationError("config lacks the [data] column mapping section")
    policy = cfg.emoji.to_policy()
    encoder = HashingEncoder(cfg.encoder.to_config())
    splits = []
    for split, path in (("train", train_path), ("dev", dev_path), ("test", test_path)):
        samples = load_split(path, cfg.data.schema_for(split))
        splits.append(prepare_split(samples, policy, encoder))
    return tuple(splits)


def run_file_experiment(cfg: ExperimentConfig, train_path, dev_path, test_path, out_dir) -> dict:
    """Load, train, and persist one experiment's outputs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started_at = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    train, dev, test = _load_prepared_splits(cfg, train_path, dev_path, test_path)
    report, state = run_training(cfg, train, dev, test)
    wall_clock = time.perf_counter() - t0

    report_path = out / REPORT_FILE
    checkpoint_path = out / CHECKPOINT_FILE
    meta_path = out / META_FILE
    write_report(report, report_path)
    save_checkpoint(state, checkpoint_path, report.config_hash)
    meta = {
        "config_hash": report.config_hash,
        "wall_clock_seconds": wall_clock,
        "started_at": started_at.isoformat(),
        "package_version": __version__,
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return {
        "report": report_to_dict(report),
        "report_path": str(report_path),
        "checkpoint_path": str(checkpoint_path),
        "meta_path": str(meta_path),
        "wall_clock_seconds": wall_clock,
    }


@dataclass(frozen=True)
class GridCell:
    index: int
    loss_mode: str
    uncertainty_mode: str
    emoji_mode: str
    k: object  # int or "all"
    static_weights: tuple
    name: str


def _weights_tag(weights) -> str:
    return "-".join(f"{w:g}" for w in weights)


def enumerate_grid(grid: GridConfig) -> list:
    """Cells in deterministic order: emoji, k, weights outer; loss then
    uncertainty inner (one loss x uncertainty table per outer combination)."""
    axes = grid.grid
    emoji_modes = axes.emoji_modes or [grid.base.emoji.mode]
    k_values = axes.k_values if axes.k_values is not None else [grid.base.run.k_selected]
    weight_sets = axes.static_weight_sets or [grid.base.loss.static_weights]
    cells = []
    index = 0
    for emoji_mode in emoji_modes:
        for k in k_values:
            for weights in weight_sets:
                for loss_mode in axes.loss_modes:
                    for uncertainty_mode in axes.uncertainty_modes:
                        name = (
                            f"{index:03d}_loss-{loss_mode}_unc-{uncertainty_mode}"
                            f"_emoji-{emoji_mode}_k-{k}_w-{_weights_tag(weights)}"
                        )
                        cells.append(
                            GridCell(
                                index=index,
                                loss_mode=loss_mode,
                                uncertainty_mode=uncertainty_mode,
                                emoji_mode=emoji_mode,
                                k=k,
                                static_weights=tuple(weights),
                                name=name,
                            )
                        )
                        index += 1
    return cells


def cell_config(base: ExperimentConfig, cell: GridCell) -> ExperimentConfig:
    payload = base.model_dump()
    payload["run"]["loss_mode"] = cell.loss_mode
    payload["run"]["uncertainty_mode"] = cell.uncertainty_mode
    payload["run"]["k_selected"] = cell.k
    payload["emoji"]["mode"] = cell.emoji_mode
    payload["loss"]["static_weights"] = list(cell.static_weights)
    return ExperimentConfig.model_validate(payload)


def _cell_row(cell: GridCell) -> dict:
    return {
        "index": cell.index,
        "name": cell.name,
        "loss_mode": cell.loss_mode,
        "uncertainty_mode": cell.uncertainty_mode,
        "emoji_mode": cell.emoji_mode,
        "k": cell.k,
        "static_weights": list(cell.static_weights),
    }


def _run_cell(payload: dict) -> dict:
    """One grid cell, failure-isolated; runs in-process or in a worker."""
    cell_kwargs = payload["cell"]
    cell = GridCell(**{**cell_kwargs, "static_weights": tuple(cell_kwargs["static_weights"])})
    row = _cell_row(cell)
    try:
        cfg = cell_config(ExperimentConfig.model_validate(payload["base"]), cell)
        result = run_file_experiment(
            cfg,
            payload["train_path"],
            payload["dev_path"],
            payload["test_path"],
            Path(payload["out_dir"]) / "cells" / cell.name,
        )
    except Exception as exc:  # cell failures are marked, the sweep continues
        row.update({"status": "failed", "error": f"{type(exc).__name__}: {exc}"})
        return row
    report = result["report"]
    row.update(
        {
            "status": "ok",
            "error": None,
            "test_macro_f1": report["test_macro_f1"],
            "best_dev_macro_f1_offensive": report["best_dev_macro_f1_offensive"],
            "cumulative_selected": report["cumulative_selected"],
            "epochs_run": report["epochs_run"],
            "best_epoch": report["best_epoch"],
            "config_hash": report["config_hash"],
            "report_path": result["report_path"],
        }
    )
    return row


def _summary_tsv(rows) -> str:
    columns = [
        "index",
        "name",
        "loss_mode",
        "uncertainty_mode",
        "emoji_mode",
        "k",
        "static_weights",
        "status",
        "test_macro_f1_offensive",
        "test_macro_f1_violent",
        "test_macro_f1_vulgar",
        "cumulative_selected",
        "epochs_run",
        "best_epoch",
    ]
    def cell_text(value) -> str:
        if value is None:
            return ""
        return repr(value) if isinstance(value, float) else str(value)

    lines = ["\t".join(columns)]
    for row in rows:
        test = row.get("test_macro_f1") or {}
        record = {
            **row,
            "static_weights": _weights_tag(row["static_weights"]),
            "test_macro_f1_offensive": test.get("offensive"),
            "test_macro_f1_violent": test.get("violent"),
            "test_macro_f1_vulgar": test.get("vulgar"),
        }
        lines.append("\t".join(cell_text(record.get(column)) for column in columns))
    return "\n".join(lines) + "\n"


def _summary_tables(rows, loss_modes, uncertainty_modes) -> str:
    """Loss x uncertainty matrices of test offensive macro F1 (percent),
    one block per (emoji, k, weights) combination."""
    blocks = []
    seen = []
    for row in rows:
        key = (row["emoji_mode"], row["k"], tuple(row["static_weights"]))
        if key not in seen:
            seen.append(key)
    for emoji_mode, k, weights in seen:
        members = {
            (r["loss_mode"], r["uncertainty_mode"]): r
            for r in rows
            if (r["emoji_mode"], r["k"], tuple(r["static_weights"])) == (emoji_mode, k, weights)
        }
        header = f"emoji={emoji_mode} k={k} static_weights={_weights_tag(weights)}"
        width = max(len(m) for m in uncertainty_modes + ["loss\\unc"]) + 2
        lines = [header, "-" * len(header)]
        lines.append("".join(name.ljust(width) for name in ["loss\\unc"] + list(uncertainty_modes)))
        for loss_mode in loss_modes:
            cells = [loss_mode]
            for uncertainty_mode in uncertainty_modes:
                row = members.get((loss_mode, uncertainty_mode))
                if row is None:
                    cells.append("-")
                elif row["status"] != "ok":
                    cells.append("FAIL")
                else:
                    value = row["test_macro_f1"]["offensive"]
                    cells.append("-" if value is None else f"{100 * value:.2f}")
            lines.append("".join(cell.ljust(width) for cell in cells))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def run_grid(grid: GridConfig, train_path, dev_path, test_path, out_dir, jobs: int = 1) -> dict:
    """Run every grid cell; returns the summary payload and file paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = enumerate_grid(grid)
    base_payload = grid.base.model_dump(mode="json")
    payloads = [
        {
            "cell": _cell_row(cell),
            "base": base_payload,
            "train_path": str(train_path),
            "dev_path": str(dev_path),
            "test_path": str(test_path),
            "out_dir": str(out),
        }
        for cell in cells
    ]
    if jobs <= 1:
        rows = [_run_cell(payload) for payload in payloads]
    else:
        context = multiprocessing.get_context("spawn")
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs, mp_context=context) as pool:
            rows = list(pool.map(_run_cell, payloads))
    rows.sort(key=lambda row: row["index"])

    resolved = grid.resolved()
    summary = {
        "schema_version": 1,
        "grid_config": resolved,
        "grid_config_hash": config_hash(resolved),
        "cells": rows,
        "failed_cells": sum(1 for row in rows if row["status"] != "ok"),
    }
    summary_json = out / "summary.json"
    summary_json.write_text(
        json.dumps(summary, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n",
        encoding="utf-8",
    )
    summary_tsv = out / "summary.tsv"
    summary_tsv.write_text(_summary_tsv(rows), encoding="utf-8")
    summary_txt = out / "summary.txt"
    summary_txt.write_text(
        _summary_tables(rows, grid.grid.loss_modes, grid.grid.uncertainty_modes), encoding="utf-8"
    )
    return {
        "summary": summary,
        "summary_json_path": str(summary_json),
        "summary_tsv_path": str(summary_tsv),
        "summary_txt_path": str(summary_txt),
    }
