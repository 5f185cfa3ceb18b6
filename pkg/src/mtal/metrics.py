"""Binary classification metrics: confusion counts, per-class F1, macro F1.

Macro F1 here is the unweighted mean of the positive-class and
negative-class F1 scores. Edge conventions are pinned by tests: a class
that never occurs and is never predicted contributes 1.0, a class with
any support but zero true positives contributes 0.0.
"""

from typing import NamedTuple, Sequence


class ConfusionCounts(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int


def _check_inputs(predictions: Sequence[bool], labels: Sequence[bool]) -> None:
    if len(predictions) != len(labels):
        raise ValueError(
            f"predictions and labels differ in length: {len(predictions)} vs {len(labels)}"
        )
    if len(predictions) == 0:
        raise ValueError("cannot score an empty prediction set")


def confusion_counts(predictions: Sequence[bool], labels: Sequence[bool]) -> ConfusionCounts:
    """Count tp/fp/fn/tn treating True as the positive class."""
    _check_inputs(predictions, labels)
    tp = fp = fn = tn = 0
    for pred, actual in zip(predictions, labels):
        if pred and actual:
            tp += 1
        elif pred and not actual:
            fp += 1
        elif not pred and actual:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, fn, tn)


def class_f1(tp: int, fp: int, fn: int) -> float:
    """F1 for a single class from its confusion counts.

    tp = fp = fn = 0 means the class is absent and never predicted, which
    counts as a perfect 1.0; tp = 0 with any fp/fn support counts as 0.0.
    """
    if tp == 0 and fp == 0 and fn == 0:
        return 1.0
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def macro_f1(predictions: Sequence[bool], labels: Sequence[bool]) -> float:
    """Mean of positive-class and negative-class F1."""
    counts = confusion_counts(predictions, labels)
    positive = class_f1(counts.tp, counts.fp, counts.fn)
    # Negative class viewed as positive: its tp are tn, its fp are fn, its fn are fp.
    negative = class_f1(counts.tn, counts.fn, counts.fp)
    return 0.5 * (positive + negative)


def predict_positive(logit: float) -> bool:
    """Decision rule: probability above 0.5 is positive, exactly 0.5 is negative.

    sigmoid is monotone with sigmoid(0) = 0.5, so the rule reduces to a
    strict sign test on the logit.
    """
    return logit > 0.0
