"""Multi-task active learning for offensive-speech detection.

One shared encoder feeds three binary task heads (offensive, violent,
vulgar). Training batches are filtered by entropy-based uncertainty
scoring, task losses are combined under configurable weighting schedules,
and everything runs deterministically from a single seed.
"""

__version__ = "0.1.0"

from .tasks import TASK_NAMES, TaskTriple

__all__ = ["TASK_NAMES", "TaskTriple", "__version__"]
