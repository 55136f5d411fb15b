from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class MetricScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "MetricScore":
        if precision + recall > 0:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = 0.0
        return cls(precision, recall, f1)


ZERO = MetricScore(0.0, 0.0, 0.0)


def ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0
