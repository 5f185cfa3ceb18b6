"""Tab-separated corpus ingestion with per-task binary labels.

Files carry one record per line (UTF-8, LF or CRLF) with columns for an
id, the tweet text, and label tokens per task. Column positions and
label tokens are supplied by the caller, never guessed. A hate column
can be declared so its presence is checked, but its value is read and
discarded. Splits whose files lack the vulgar/violent columns load those
labels as None ("unlabeled") and are excluded from those tasks' metrics;
an empty field or "-" in a declared label column means the same.

Parsing collects every malformed line with its line number and reports
them all at once.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

from .tasks import TASK_NAMES, TaskTriple

DEFAULT_LABEL_TOKENS = {
    "offensive": ("OFF", "NOT_OFF"),
    "violent": ("V", "NOT_V"),
    "vulgar": ("VLG", "NOT_VLG"),
}


@dataclass(frozen=True)
class Sample:
    id: str
    raw_text: str
    labels: TaskTriple  # Optional[bool] per task; None marks "unlabeled"


@dataclass(frozen=True)
class ColumnSchema:
    """0-based column positions and label token pairs for one file layout."""

    id_column: int
    text_column: int
    offensive_column: int
    hate_column: Optional[int] = None
    vulgar_column: Optional[int] = None
    violent_column: Optional[int] = None
    offensive_tokens: tuple = DEFAULT_LABEL_TOKENS["offensive"]
    violent_tokens: tuple = DEFAULT_LABEL_TOKENS["violent"]
    vulgar_tokens: tuple = DEFAULT_LABEL_TOKENS["vulgar"]
    has_header: bool = False

    def __post_init__(self) -> None:
        columns = [self.id_column, self.text_column, self.offensive_column]
        columns += [c for c in (self.hate_column, self.vulgar_column, self.violent_column) if c is not None]
        if any(c < 0 for c in columns):
            raise ValueError("column positions must be non-negative")
        if len(set(columns)) != len(columns):
            raise ValueError(f"column positions must be distinct, got {columns}")
        for task in TASK_NAMES:
            pos, neg = getattr(self, f"{task}_tokens")
            if not pos or not neg or pos.strip().lower() == neg.strip().lower():
                raise ValueError(f"{task} label tokens must be two distinct non-empty strings")

    @property
    def required_columns(self) -> int:
        columns = [self.id_column, self.text_column, self.offensive_column]
        columns += [c for c in (self.hate_column, self.vulgar_column, self.violent_column) if c is not None]
        return max(columns) + 1


class LineError(NamedTuple):
    line: int
    message: str


class CorpusFormatError(ValueError):
    """One or more lines failed to parse; carries every line diagnostic."""

    def __init__(self, source: str, errors: list):
        self.source = source
        self.errors = errors
        preview = "; ".join(f"line {e.line}: {e.message}" for e in errors[:5])
        more = "" if len(errors) <= 5 else f" (+{len(errors) - 5} more)"
        super().__init__(f"{source}: {len(errors)} malformed line(s): {preview}{more}")


# Placeholders some distributions use for tasks left unlabeled in a split.
UNLABELED_TOKENS = frozenset({"", "-"})


def _parse_label(field: str, tokens: tuple) -> tuple:
    """Return (label, ok); label None with ok=True means explicitly unlabeled.

    Token matching is case-insensitive since distributions vary in casing.
    """
    value = field.strip()
    if value in UNLABELED_TOKENS:
        return None, True
    lowered = value.lower()
    if lowered == tokens[0].strip().lower():
        return True, True
    if lowered == tokens[1].strip().lower():
        return False, True
    return None, False


def parse_lines(lines: Iterable[str], schema: ColumnSchema) -> tuple:
    """Parse records into samples; returns (samples, line_errors)."""
    samples: list = []
    errors: list = []
    required = schema.required_columns
    for lineno, line in enumerate(lines, start=1):
        if schema.has_header and lineno == 1:
            continue
        record = line.rstrip("\r\n")
        if not record:
            continue
        fields = record.split("\t")
        if len(fields) < required:
            errors.append(
                LineError(lineno, f"expected at least {required} tab-separated columns, found {len(fields)}")
            )
            continue
        text = fields[schema.text_column].strip()
        if not text:
            errors.append(LineError(lineno, "empty text"))
            continue
        labels = {}
        bad = False
        for task in TASK_NAMES:
            column = getattr(schema, f"{task}_column")
            if column is None:
                labels[task] = None
                continue
            label, ok = _parse_label(fields[column], getattr(schema, f"{task}_tokens"))
            if not ok:
                errors.append(
                    LineError(lineno, f"unrecognized {task} label {fields[column].strip()!r}")
                )
                bad = True
            else:
                labels[task] = label
        if bad:
            continue
        samples.append(Sample(id=fields[schema.id_column].strip(), raw_text=text, labels=TaskTriple.from_dict(labels)))
    return samples, errors


def load_split(path, schema: ColumnSchema) -> list:
    """Load a split file in order; raises CorpusFormatError listing every bad line."""
    file_path = Path(path)
    if not file_path.is_file():
        raise FileNotFoundError(f"corpus file not found: {file_path}")
    with open(file_path, encoding="utf-8") as handle:
        samples, errors = parse_lines(handle, schema)
    if errors:
        raise CorpusFormatError(str(file_path), errors)
    return samples


class TaskStats(NamedTuple):
    positive: int
    negative: int
    unlabeled: int


@dataclass(frozen=True)
class SplitStats:
    total: int
    tasks: TaskTriple  # TaskStats per task


def split_stats(samples: Iterable[Sample]) -> SplitStats:
    counts = {task: [0, 0, 0] for task in TASK_NAMES}
    total = 0
    for sample in samples:
        total += 1
        for task, label in zip(TASK_NAMES, sample.labels):
            if label is None:
                counts[task][2] += 1
            elif label:
                counts[task][0] += 1
            else:
                counts[task][1] += 1
    return SplitStats(
        total=total,
        tasks=TaskTriple(*(TaskStats(*counts[task]) for task in TASK_NAMES)),
    )


def stats_as_dict(stats: SplitStats) -> dict:
    """Flatten stats to the documented key=value schema keys."""
    out = {"total": stats.total}
    for task, task_stats in zip(TASK_NAMES, stats.tasks):
        out[f"{task}.positive"] = task_stats.positive
        out[f"{task}.negative"] = task_stats.negative
        out[f"{task}.unlabeled"] = task_stats.unlabeled
    return out


def format_stats(stats: SplitStats) -> str:
    """Render stats as the documented key=value lines."""
    return "".join(f"{key}={value}\n" for key, value in stats_as_dict(stats).items())
