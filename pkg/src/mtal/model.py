"""Hard-parameter-sharing multi-task classifier.

One shared affine layer with ReLU feeds three scalar task heads. Losses
are binary cross-entropy on logits in the stable log-sum-exp form,
gradients are analytic, and updates use an adaptive-moment optimizer with
decoupled weight decay (betas 0.9/0.999, eps 1e-8, decay 0.01). Task
heads whose loss weight is zero for a step receive no update at all, so
a zero weight freezes that task exactly.
"""

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoding import FeatureVector
from .tasks import TASK_NAMES, TaskTriple

BETA1 = 0.9
BETA2 = 0.999
ADAM_EPS = 1e-8
WEIGHT_DECAY = 0.01
CHECKPOINT_FORMAT = 1

PARAM_KEYS = ("shared_w", "shared_b") + tuple(
    f"{task}_{suffix}" for task in TASK_NAMES for suffix in ("w", "b")
)


class DivergenceError(RuntimeError):
    """Raised when a training step produces non-finite losses or gradients."""


@dataclass
class ModelState:
    dim: int
    hidden: int
    params: dict
    m: dict
    v: dict
    step: int = 0

    def clone(self) -> "ModelState":
        return ModelState(
            dim=self.dim,
            hidden=self.hidden,
            params={k: a.copy() for k, a in self.params.items()},
            m={k: a.copy() for k, a in self.m.items()},
            v={k: a.copy() for k, a in self.v.items()},
            step=self.step,
        )


def init_state(dim: int, hidden: int, rng: np.random.Generator) -> ModelState:
    """Seeded uniform(-a, a) init with a = sqrt(6 / (fan_in + fan_out)); zero biases."""
    a_shared = math.sqrt(6.0 / (dim + hidden))
    a_head = math.sqrt(6.0 / (hidden + 1))
    params = {
        "shared_w": rng.uniform(-a_shared, a_shared, size=(dim, hidden)),
        "shared_b": np.zeros(hidden),
    }
    for task in TASK_NAMES:
        params[f"{task}_w"] = rng.uniform(-a_head, a_head, size=hidden)
        params[f"{task}_b"] = np.zeros(1)
    zeros = {k: np.zeros_like(a) for k, a in params.items()}
    return ModelState(
        dim=dim,
        hidden=hidden,
        params=params,
        m=zeros,
        v={k: np.zeros_like(a) for k, a in params.items()},
        step=0,
    )


def _pre_activation(state: ModelState, x: FeatureVector) -> np.ndarray:
    if x.dim != state.dim:
        raise ValueError(f"feature dim {x.dim} does not match model dim {state.dim}")
    pre = state.params["shared_b"]
    if x.indices.size:
        pre = pre + x.values @ state.params["shared_w"][x.indices]
    return pre


def forward(state: ModelState, x: FeatureVector) -> TaskTriple:
    """Per-task logits for one sample."""
    hidden = np.maximum(_pre_activation(state, x), 0.0)
    return TaskTriple(
        *(
            float(state.params[f"{task}_w"] @ hidden + state.params[f"{task}_b"][0])
            for task in TASK_NAMES
        )
    )


def sigmoid(z):
    """Numerically stable logistic function, branching on the sign of z."""
    arr = np.asarray(z, dtype=np.float64)
    out = np.empty_like(arr)
    positive = arr >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-arr[positive]))
    exp_z = np.exp(arr[~positive])
    out[~positive] = exp_z / (1.0 + exp_z)
    return float(out) if out.ndim == 0 else out


def bce_loss(logit: float, label: bool) -> float:
    """Binary cross-entropy straight from the logit:
    max(z, 0) - z*y + log(1 + exp(-|z|))."""
    z = float(logit)
    y = 1.0 if label else 0.0
    return max(z, 0.0) - z * y + math.log1p(math.exp(-abs(z)))


def _stack_labels(batch) -> np.ndarray:
    rows = []
    for _, labels in batch:
        row = []
        for task, value in zip(TASK_NAMES, labels):
            if value is None:
                raise ValueError(f"training sample lacks a {task} label")
            row.append(1.0 if value else 0.0)
        rows.append(row)
    return np.array(rows, dtype=np.float64)


def compute_gradients(
    state: ModelState,
    batch: Sequence,
    task_weights: TaskTriple,
) -> tuple:
    """Analytic gradients of sum_t w_t * mean-over-batch BCE_t.

    Returns (grads keyed like params, unweighted per-task mean losses).
    """
    size = len(batch)
    if size == 0:
        raise ValueError("batch must be non-empty")
    labels = _stack_labels(batch)
    pres = np.stack([_pre_activation(state, x) for x, _ in batch])
    hiddens = np.maximum(pres, 0.0)
    head_w = np.stack([state.params[f"{task}_w"] for task in TASK_NAMES], axis=1)
    head_b = np.array([state.params[f"{task}_b"][0] for task in TASK_NAMES])
    logits = hiddens @ head_w + head_b

    with np.errstate(invalid="ignore", over="ignore"):
        losses = np.maximum(logits, 0.0) - logits * labels + np.log1p(np.exp(-np.abs(logits)))
    if not np.isfinite(losses).all():
        raise DivergenceError("non-finite loss; training diverged")
    mean_losses = TaskTriple(*(float(v) for v in losses.mean(axis=0)))

    weights = np.array(task_weights, dtype=np.float64)
    dlogits = weights * (sigmoid(logits) - labels) / size

    grads = {}
    for t, task in enumerate(TASK_NAMES):
        grads[f"{task}_w"] = hiddens.T @ dlogits[:, t]
        grads[f"{task}_b"] = np.array([dlogits[:, t].sum()])
    dhidden = dlogits @ head_w.T
    dpre = dhidden * (pres > 0.0)
    grads["shared_b"] = dpre.sum(axis=0)
    shared_grad = np.zeros_like(state.params["shared_w"])
    for row, (x, _) in enumerate(batch):
        if x.indices.size:
            shared_grad[x.indices] += np.outer(x.values, dpre[row])
    grads["shared_w"] = shared_grad

    if not all(np.isfinite(g).all() for g in grads.values()):
        raise DivergenceError("non-finite gradient; training diverged")
    return grads, mean_losses


def _adamw_step(state: ModelState, grads: dict, lr: float, frozen: set) -> None:
    state.step += 1
    bias1 = 1.0 - BETA1**state.step
    bias2 = 1.0 - BETA2**state.step
    for key in PARAM_KEYS:
        if key in frozen:
            continue
        g = grads[key]
        m = state.m[key]
        v = state.v[key]
        m *= BETA1
        m += (1.0 - BETA1) * g
        v *= BETA2
        v += (1.0 - BETA2) * np.square(g)
        update = (m / bias1) / (np.sqrt(v / bias2) + ADAM_EPS)
        param = state.params[key]
        param -= lr * (update + WEIGHT_DECAY * param)


def backward_and_step(
    state: ModelState,
    batch: Sequence,
    task_weights: TaskTriple,
    lr: float,
) -> tuple:
    """One training step on a batch of (FeatureVector, label TaskTriple).

    The task weighting lives in the gradients only; the returned per-task
    mean losses are unweighted. Mutates and returns the state.
    """
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    if max(task_weights) <= 0:
        raise ValueError("at least one task weight must be positive")
    if min(task_weights) < 0:
        raise ValueError("task weights must be non-negative")
    grads, mean_losses = compute_gradients(state, batch, task_weights)
    frozen = {
        f"{task}_{suffix}"
        for task, weight in zip(TASK_NAMES, task_weights)
        if weight == 0.0
        for suffix in ("w", "b")
    }
    _adamw_step(state, grads, lr, frozen)
    return state, mean_losses


def save_checkpoint(state: ModelState, path, config_hash: str = "") -> None:
    """Versioned binary dump of parameters, moments, and step counter."""
    meta = json.dumps(
        {
            "format_version": CHECKPOINT_FORMAT,
            "dim": state.dim,
            "hidden": state.hidden,
            "step": state.step,
            "config_hash": config_hash,
        },
        sort_keys=True,
    )
    arrays = {f"param_{k}": a for k, a in state.params.items()}
    arrays.update({f"m_{k}": a for k, a in state.m.items()})
    arrays.update({f"v_{k}": a for k, a in state.v.items()})
    np.savez(path, meta=np.array(meta), **arrays)


def load_checkpoint(path) -> tuple:
    """Load a checkpoint; returns (ModelState, config_hash). Round-trips bit-exactly."""
    with np.load(path) as data:
        meta = json.loads(str(data["meta"][()]))
        if meta["format_version"] != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format {meta['format_version']}")
        params = {k: data[f"param_{k}"] for k in PARAM_KEYS}
        m = {k: data[f"m_{k}"] for k in PARAM_KEYS}
        v = {k: data[f"v_{k}"] for k in PARAM_KEYS}
    state = ModelState(
        dim=meta["dim"], hidden=meta["hidden"], params=params, m=m, v=v, step=meta["step"]
    )
    return state, meta["config_hash"]
