"""Use-case-point effort estimation and weighted per-requirement time split.

Total effort is TCF * ECF * UUCP * PF (hours). The total is then divided
across size clusters proportionally to cluster weights, so every member of a
cluster with weight w receives total * w / sum(count_l * weight_l).
"""

from __future__ import annotations

from dataclasses import dataclass

TCF_WEIGHTS = (2.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 2.0, 1.0, 1.0, 1.0, 1.0, 1.0)
ECF_WEIGHTS = (1.5, 0.5, 1.0, 0.5, 1.0, 2.0, -1.0, 2.0)
USE_CASE_WEIGHTS = (5.0, 10.0, 15.0)
ACTOR_WEIGHTS = (1.0, 2.0, 3.0)


@dataclass(frozen=True)
class TechnicalFactors:
    """Perceived complexity (0..5) for the 13 technical factors."""

    perceived: tuple[float, ...]

    def __post_init__(self):
        if len(self.perceived) != len(TCF_WEIGHTS):
            raise ValueError(f"expected {len(TCF_WEIGHTS)} technical factors, got {len(self.perceived)}")
        for i, v in enumerate(self.perceived):
            if not (0 <= v <= 5):
                raise ValueError(f"technical factor {i + 1} must be in [0,5], got {v}")


@dataclass(frozen=True)
class EnvironmentalFactors:
    """Perceived impact (0..5) for the 8 environmental factors."""

    perceived: tuple[float, ...]

    def __post_init__(self):
        if len(self.perceived) != len(ECF_WEIGHTS):
            raise ValueError(f"expected {len(ECF_WEIGHTS)} environmental factors, got {len(self.perceived)}")
        for i, v in enumerate(self.perceived):
            if not (0 <= v <= 5):
                raise ValueError(f"environmental factor {i + 1} must be in [0,5], got {v}")


@dataclass(frozen=True)
class UseCaseInventory:
    """Counts of use cases and actors by complexity class."""

    simple: int = 0
    average: int = 0
    complex: int = 0
    simple_actors: int = 0
    average_actors: int = 0
    complex_actors: int = 0

    def __post_init__(self):
        for name in ("simple", "average", "complex", "simple_actors", "average_actors", "complex_actors"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} count must be >= 0")


@dataclass(frozen=True)
class Cluster:
    label: str
    weight: float
    members: tuple[str, ...] = ()


@dataclass(frozen=True)
class ClusterSpec:
    """Size clusters with proportional weights; every candidate belongs to
    exactly one cluster (checked at project validation)."""

    clusters: tuple[Cluster, ...]

    def __post_init__(self):
        for c in self.clusters:
            if c.weight <= 0:
                raise ValueError(f"cluster {c.label!r} weight must be > 0")

    def cluster_of(self, rid: str) -> Cluster:
        for c in self.clusters:
            if rid in c.members:
                return c
        raise KeyError(rid)


@dataclass(frozen=True)
class EstimationInputs:
    """Everything needed to produce per-requirement hours for a project."""

    technical: TechnicalFactors
    environmental: EnvironmentalFactors
    inventory: UseCaseInventory
    pf: float
    clusters: tuple[Cluster, ...]

    def invariant_errors(self) -> list[tuple[str, str]]:
        errs = []
        if self.pf <= 0:
            errs.append(("pf", f"productivity factor must be > 0, got {self.pf}"))
        for c in self.clusters:
            if c.weight <= 0:
                errs.append(("clusters.weight", f"cluster {c.label!r} weight must be > 0"))
        labels = [c.label for c in self.clusters]
        if len(set(labels)) != len(labels):
            errs.append(("clusters.labels", "cluster labels must be unique"))
        return errs


def compute_tcf(tf: TechnicalFactors) -> float:
    """Technical complexity factor: 0.6 + 0.01 * weighted factor total."""
    total = sum(w * p for w, p in zip(TCF_WEIGHTS, tf.perceived))
    return 0.6 + 0.01 * total


def compute_ecf(ef: EnvironmentalFactors) -> float:
    """Environmental complexity factor: 1.4 - 0.03 * weighted factor total."""
    total = sum(w * p for w, p in zip(ECF_WEIGHTS, ef.perceived))
    return 1.4 - 0.03 * total


def compute_uucp(inv: UseCaseInventory) -> float:
    """Unadjusted use case points: weighted use cases plus weighted actors."""
    uucw = (
        USE_CASE_WEIGHTS[0] * inv.simple
        + USE_CASE_WEIGHTS[1] * inv.average
        + USE_CASE_WEIGHTS[2] * inv.complex
    )
    uaw = (
        ACTOR_WEIGHTS[0] * inv.simple_actors
        + ACTOR_WEIGHTS[1] * inv.average_actors
        + ACTOR_WEIGHTS[2] * inv.complex_actors
    )
    return uucw + uaw


def compute_ucp(tcf: float, ecf: float, uucp: float, pf: float) -> float:
    """Total estimated hours: the plain product, unrounded."""
    for name, v in (("tcf", tcf), ("ecf", ecf), ("uucp", uucp), ("pf", pf)):
        if v <= 0:
            raise ValueError(f"{name} must be > 0, got {v}")
    return tcf * ecf * uucp * pf


def cluster_unit_times(total: float, clusters: tuple[Cluster, ...]) -> dict[str, float]:
    """Hours assigned to one member of each cluster."""
    if total <= 0:
        raise ValueError(f"total hours must be > 0, got {total}")
    denom = sum(len(c.members) * c.weight for c in clusters)
    if denom <= 0:
        raise ValueError("no requirements in any cluster")
    return {c.label: total * c.weight / denom for c in clusters}


def distribute_time(total: float, clusters: tuple[Cluster, ...]) -> dict[str, float]:
    """Split the total estimate across requirements by cluster weight.

    The per-requirement shares always sum back to the total (requirements
    in the same cluster get identical hours).
    """
    unit = cluster_unit_times(total, clusters)
    out: dict[str, float] = {}
    for c in clusters:
        for rid in c.members:
            out[rid] = unit[c.label]
    return out
