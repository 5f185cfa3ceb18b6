"""Shared plumbing for the three detection tasks.

Everything per-task in this package (labels, probabilities, entropies,
weights, losses, metrics) travels as a TaskTriple in the fixed order
(offensive, violent, vulgar).
"""

from typing import Any, Callable, NamedTuple

TASK_NAMES = ("offensive", "violent", "vulgar")


class TaskTriple(NamedTuple):
    """One value per task, in (offensive, violent, vulgar) order."""

    offensive: Any
    violent: Any
    vulgar: Any

    def map(self, fn: Callable[[Any], Any]) -> "TaskTriple":
        return TaskTriple(fn(self.offensive), fn(self.violent), fn(self.vulgar))

    def to_dict(self) -> dict:
        return {name: value for name, value in zip(TASK_NAMES, self)}

    @classmethod
    def from_dict(cls, mapping: dict) -> "TaskTriple":
        return cls(*(mapping[name] for name in TASK_NAMES))

    @classmethod
    def broadcast(cls, value: Any) -> "TaskTriple":
        return cls(value, value, value)
