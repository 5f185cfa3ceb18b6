"""Joint multi-task training with per-batch uncertainty selection.

Every epoch shuffles the training set with a seeded stream and walks it
in batches. Each batch is scored by the configured uncertainty rule from
a forward pass over the current model, the top-k scorers are trained on
with the current loss weights, and the rest contribute nothing to the
gradient. At epoch end the dev split is scored, the dynamic schedules
(loss weights from the epoch's mean losses, uncertainty weight from the
dev offensive macro F1) roll forward, and early stopping watches the dev
offensive macro F1 with a fixed patience. The best checkpoint is
reloaded for test evaluation.

Bookkeeping matches the batch arithmetic exactly: with N samples, batch
size B and k selected per batch, one epoch trains on
ceil(N/B) * k samples (the final short batch contributes
min(k, N mod B)), and "none"/"all" select whole batches.
"""

import math
from dataclasses import dataclass

import numpy as np

from .acquisition import (
    combine_dynamic,
    combine_equal,
    combine_weighted,
    dynamic_offensive_weight,
    select_top_k,
    task_entropies,
)
from .config import ExperimentConfig, config_hash, rng_stream
from .encoding import Encoder
from .metrics import macro_f1, predict_positive
from .model import ModelState, backward_and_step, forward, init_state, sigmoid
from .reporting import EpochRecord, RunReport
from .tasks import TASK_NAMES, TaskTriple
from .textprep import EmojiPolicy, normalize

# Early stopping counts an epoch as an improvement only when the dev
# offensive macro F1 rises by at least this much.
IMPROVEMENT_EPS = 1e-6


def loss_weights_equal() -> TaskTriple:
    return TaskTriple(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)


def loss_weights_static(weights: TaskTriple) -> TaskTriple:
    """Configured weights normalized to sum 1."""
    if min(weights) < 0:
        raise ValueError(f"static loss weights must be non-negative, got {tuple(weights)}")
    total = sum(weights)
    if total == 0:
        raise ValueError("static loss weights must not all be zero")
    return TaskTriple(*(w / total for w in weights))


def loss_weights_dynamic(previous_epoch_losses: TaskTriple) -> TaskTriple:
    """Losses normalized to weights: harder tasks (higher loss) weigh more.

    All-zero losses fall back to equal weights.
    """
    if min(previous_epoch_losses) < 0:
        raise ValueError("per-task losses cannot be negative")
    total = sum(previous_epoch_losses)
    if total == 0:
        return loss_weights_equal()
    return TaskTriple(*(loss / total for loss in previous_epoch_losses))


@dataclass(frozen=True)
class PreparedSplit:
    """Encoded features and labels for one split, in corpus order."""

    features: list
    labels: list  # TaskTriple of Optional[bool] per sample

    def __post_init__(self) -> None:
        if len(self.features) != len(self.labels):
            raise ValueError("features and labels must align")

    def __len__(self) -> int:
        return len(self.features)


def prepare_split(samples, policy: EmojiPolicy, encoder: Encoder) -> PreparedSplit:
    """Normalize and encode raw samples."""
    features = [encoder.encode(normalize(sample.raw_text, policy)) for sample in samples]
    return PreparedSplit(features=features, labels=[sample.labels for sample in samples])


def evaluate_split(state: ModelState, split: PreparedSplit) -> TaskTriple:
    """Per-task macro F1 over the split's labeled samples (None when a task
    has no labels at all)."""
    logits = [forward(state, x) for x in split.features]
    scores = []
    for t in range(len(TASK_NAMES)):
        predictions = []
        labels = []
        for logit_triple, label_triple in zip(logits, split.labels):
            if label_triple[t] is None:
                continue
            predictions.append(predict_positive(logit_triple[t]))
            labels.append(label_triple[t])
        scores.append(macro_f1(predictions, labels) if labels else None)
    return TaskTriple(*scores)


def _initial_loss_weights(cfg: ExperimentConfig) -> TaskTriple:
    if cfg.run.loss_mode == "equal":
        return loss_weights_equal()
    if cfg.run.loss_mode == "static":
        return loss_weights_static(TaskTriple(*cfg.loss.static_weights))
    return loss_weights_equal()  # dynamic starts equal; no losses exist yet


def _score_batch(cfg, state, split, batch_indices, uncertainty_weights, w_off, dynamic_cfg):
    scores = []
    for i in batch_indices:
        logits = forward(state, split.features[i])
        entropies = task_entropies(TaskTriple(*(sigmoid(z) for z in logits)))
        if cfg.run.uncertainty_mode == "equal":
            scores.append(combine_equal(entropies))
        elif cfg.run.uncertainty_mode == "weighted":
            scores.append(combine_weighted(entropies, uncertainty_weights))
        else:
            scores.append(
                combine_dynamic(entropies, w_off, dynamic_cfg.violent_ratio, dynamic_cfg.vulgar_ratio)
            )
    return scores


def run_training(
    cfg: ExperimentConfig,
    train: PreparedSplit,
    dev: PreparedSplit,
    test: PreparedSplit,
) -> tuple:
    """Train under one config; returns (RunReport, best ModelState)."""
    if len(train) == 0:
        raise ValueError("training split is empty")
    if len(dev) == 0:
        raise ValueError("dev split is empty")

    run = cfg.run
    dynamic_cfg = cfg.uncertainty.dynamic.to_runtime()
    uncertainty_weights = TaskTriple(*cfg.uncertainty.weights)
    dim = train.features[0].dim

    state = init_state(dim, cfg.model.hidden, rng_stream(run.seed, "init"))
    shuffle_rng = rng_stream(run.seed, "shuffle")

    loss_weights = _initial_loss_weights(cfg)
    w_off = dynamic_cfg.initial_offensive_weight if run.uncertainty_mode == "dynamic" else None

    best_f1 = -math.inf
    best_state = None
    best_epoch = -1
    bad_epochs = 0
    stopped_early = False
    records = []
    cumulative_selected = 0
    n = len(train)

    for epoch in range(run.max_epochs):
        order = shuffle_rng.permutation(n)
        loss_sums = np.zeros(3)
        selected_this_epoch = 0

        for start in range(0, n, run.batch_size):
            batch_indices = [int(i) for i in order[start : start + run.batch_size]]
            if run.uncertainty_mode == "none":
                chosen = batch_indices
            else:
                scores = _score_batch(
                    cfg, state, train, batch_indices, uncertainty_weights, w_off, dynamic_cfg
                )
                k = len(batch_indices) if run.k_selected == "all" else min(run.k_selected, len(batch_indices))
                chosen = [batch_indices[j] for j in select_top_k(scores, k)]
            batch = [(train.features[i], train.labels[i]) for i in chosen]
            state, batch_losses = backward_and_step(state, batch, loss_weights, run.lr)
            loss_sums += np.array(batch_losses, dtype=np.float64) * len(batch)
            selected_this_epoch += len(batch)

        cumulative_selected += selected_this_epoch
        epoch_losses = TaskTriple(*(float(v) for v in loss_sums / selected_this_epoch))
        dev_f1 = evaluate_split(state, dev)
        if dev_f1.offensive is None:
            raise ValueError("dev split has no offensive labels; early stopping is undefined")
        records.append(
            EpochRecord(
                epoch=epoch,
                train_loss=epoch_losses,
                dev_macro_f1=dev_f1,
                selected=selected_this_epoch,
                cumulative_selected=cumulative_selected,
                loss_weights=loss_weights,
                uncertainty_w_off=w_off,
            )
        )

        # Roll the dynamic schedules forward for the next epoch.
        if run.loss_mode == "dynamic":
            loss_weights = loss_weights_dynamic(epoch_losses)
        if run.uncertainty_mode == "dynamic":
            w_off = dynamic_offensive_weight(dev_f1.offensive, dynamic_cfg)

        if best_state is None or dev_f1.offensive - best_f1 >= IMPROVEMENT_EPS:
            best_f1 = dev_f1.offensive
            best_state = state.clone()
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= run.patience:
                stopped_early = True
                break

    state = best_state  # reload the best checkpoint for testing
    test_f1 = evaluate_split(state, test) if len(test) else TaskTriple(None, None, None)

    resolved = cfg.resolved()
    report = RunReport(
        config=resolved,
        config_hash=config_hash(resolved),
        split_sizes={"train": n, "dev": len(dev), "test": len(test)},
        epochs=records,
        epochs_run=len(records),
        best_epoch=best_epoch,
        best_dev_macro_f1_offensive=best_f1,
        stopped_early=stopped_early,
        cumulative_selected=cumulative_selected,
        test_macro_f1=test_f1,
    )
    return report, state
