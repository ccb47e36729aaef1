"""Feedback factor: score the previous release and rescale planning inputs.

The factor FF combines schedule overrun (dT), failed-requirement ratio (FR)
and user perception (UP) as UP - weight * (dT + FR), clamped to a positive
floor so the 1/FF input scaling stays finite. Requirements being
re-implemented get their hours, priorities and values divided by FF before
the next planning round; everything else is left untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from relplan.model import RatingMatrices, ReleaseOutcome

__all__ = [
    "ReleaseOutcome",
    "FeedbackConfig",
    "compute_dt",
    "compute_fr",
    "compute_ff",
    "first_increment_ff",
    "apply_feedback",
]


@dataclass(frozen=True)
class FeedbackConfig:
    """Weight of model accuracy vs. user perception, and the clamp floor."""

    model_weight: float = 0.5
    ff_floor: float = 0.05

    def __post_init__(self):
        if not (0 <= self.model_weight <= 1):
            raise ValueError(f"model_weight must be in [0,1], got {self.model_weight}")
        if not (0 < self.ff_floor <= 1):
            raise ValueError(f"ff_floor must be in (0,1], got {self.ff_floor}")


def compute_dt(actual: float, estimated: float) -> float:
    """Schedule-overrun ratio in [0,1].

    0 when on time, the relative overrun up to a factor of two, 1 beyond.
    """
    if estimated <= 0:
        raise ValueError(f"estimated hours must be > 0, got {estimated}")
    if actual < 0:
        raise ValueError(f"actual hours must be >= 0, got {actual}")
    if actual <= estimated:
        return 0.0
    if actual <= 2 * estimated:
        return (actual - estimated) / estimated
    return 1.0


def compute_fr(failed: int, implemented: int) -> float:
    """Failed-requirement ratio in [0,1]."""
    if implemented < 1:
        raise ValueError("no requirements implemented; use the first-increment factor instead")
    if not (0 <= failed <= implemented):
        raise ValueError(f"failed count must be in [0,{implemented}], got {failed}")
    return failed / implemented


def compute_ff(outcome: ReleaseOutcome, cfg: FeedbackConfig = FeedbackConfig()) -> float:
    """Feedback factor in [ff_floor, 1]."""
    if not (0 <= outcome.user_perception <= 1):
        raise ValueError(f"user_perception must be in [0,1], got {outcome.user_perception}")
    dt = compute_dt(outcome.actual_hours, outcome.estimated_hours)
    fr = compute_fr(outcome.failed_count, outcome.implemented_count)
    raw = outcome.user_perception - cfg.model_weight * (dt + fr)
    return min(1.0, max(cfg.ff_floor, raw))


def first_increment_ff() -> float:
    """Feedback is perfect or not yet available before the first release."""
    return 1.0


def apply_feedback(
    times: Mapping[str, float],
    matrices: RatingMatrices,
    candidates: tuple[str, ...],
    reimplemented: Iterable[str],
    ff: float,
) -> tuple[dict[str, float], RatingMatrices]:
    """Divide hours and rating columns of re-implemented requirements by FF.

    `matrices` columns must follow `candidates` order. Inputs are not
    modified; fresh objects are returned. FF = 1 is the identity.
    """
    if ff <= 0:
        raise ValueError(f"feedback factor must be > 0, got {ff}")
    reimpl = set(reimplemented)
    unknown = reimpl - set(candidates)
    if unknown:
        raise ValueError(f"re-implemented ids not among candidates: {sorted(unknown)}")
    new_times = dict(times)
    prio = matrices.prio.astype(float).copy()
    value = matrices.value.astype(float).copy()
    for col, rid in enumerate(candidates):
        if rid in reimpl:
            new_times[rid] = new_times[rid] / ff
            if prio.size:
                prio[:, col] /= ff
            if value.size:
                value[:, col] /= ff
    return new_times, RatingMatrices(
        prio=prio, value=value, value_scale_max=matrices.value_scale_max, lam=matrices.lam
    )
