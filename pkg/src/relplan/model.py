"""Core domain types for a release-planning project.

Everything here is an immutable value object: planning operations never
mutate a ProjectState, they build a new one. Matrices are numpy arrays and
are treated as read-only once attached to a state.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import numpy as np

if TYPE_CHECKING:
    from relplan.estimation import EstimationInputs
    from relplan.optimizer import FitnessConfig, GaConfig, PlanSolution

ORIGINS = ("new", "carryover", "defect")

LAMBDA_SUM_TOL = 1e-9
RECIPROCITY_WARN_TOL = 0.10


class PlanningError(Exception):
    """Base for errors that carry a machine-readable code."""

    code = "error"

    def __init__(self, message: str, details: Optional[dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ValidationFailed(PlanningError):
    code = "validation_failed"


class NotFound(PlanningError):
    code = "not_found"


class Conflict(PlanningError):
    code = "conflict"


class Infeasible(PlanningError):
    code = "infeasible"


@dataclass(frozen=True)
class Requirement:
    """A candidate unit of work (feature, carried-over item, or defect)."""

    id: str
    title: str = ""
    cluster: str = ""
    estimated_hours: Optional[float] = None
    origin: str = "new"
    reimplemented: bool = False


@dataclass(frozen=True)
class Stakeholder:
    id: str
    name: str = ""


@dataclass(frozen=True)
class RatingMatrices:
    """Stakeholder-by-requirement priority and business-value matrices.

    `prio` ranks use 1 = highest priority. Entries may exceed the nominal
    scales after feedback scaling; they are never clamped. `lam` holds the
    normalized stakeholder weights (computed, not persisted).
    """

    prio: np.ndarray
    value: np.ndarray
    value_scale_max: float = 5.0
    lam: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def column_slice(self, indices: Sequence[int]) -> "RatingMatrices":
        idx = list(indices)
        return RatingMatrices(
            prio=self.prio[:, idx].copy(),
            value=self.value[:, idx].copy(),
            value_scale_max=self.value_scale_max,
            lam=self.lam,
        )


@dataclass(frozen=True)
class ConstraintSet:
    """Precedence pairs (a before-or-with b) and coupling pairs (same increment)."""

    precedence: tuple[tuple[str, str], ...] = ()
    coupling: tuple[tuple[str, str], ...] = ()

    def restricted_to(self, ids: Iterable[str]) -> "ConstraintSet":
        """Keep only pairs whose both endpoints are in `ids`."""
        keep = set(ids)
        return ConstraintSet(
            precedence=tuple(p for p in self.precedence if p[0] in keep and p[1] in keep),
            coupling=tuple(p for p in self.coupling if p[0] in keep and p[1] in keep),
        )

    def coupling_groups(self) -> list[frozenset[str]]:
        """Transitive closure of the coupling relation, as disjoint groups."""
        parent: dict[str, str] = {}

        def find(x: str) -> str:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in self.coupling:
            parent.setdefault(a, a)
            parent.setdefault(b, b)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        groups: dict[str, set[str]] = {}
        for x in parent:
            groups.setdefault(find(x), set()).add(x)
        return [frozenset(g) for g in groups.values()]


@dataclass(frozen=True)
class ReleaseOutcome:
    """Human-entered result of one delivered release."""

    actual_hours: float
    estimated_hours: float
    failed_count: int
    implemented_count: int
    user_perception: float


@dataclass(frozen=True)
class IterationRecord:
    """One planning cycle: candidates, the ranked solutions, the human choice
    and, once delivered, the recorded outcome with its feedback factor."""

    index: int
    candidates: tuple[str, ...]
    ff_applied: float = 1.0
    t_max: Optional[float] = None
    solutions: tuple["PlanSolution", ...] = ()
    chosen: Optional[int] = None
    outcome: Optional[ReleaseOutcome] = None
    outcome_ff: Optional[float] = None
    failed_ids: tuple[str, ...] = ()

    @property
    def is_open(self) -> bool:
        return self.outcome is None

    @property
    def chosen_solution(self) -> Optional["PlanSolution"]:
        if self.chosen is None:
            return None
        return self.solutions[self.chosen]


@dataclass(frozen=True)
class ProjectState:
    """The whole project document: requirement pool, stakeholders, ratings,
    constraints, estimation inputs, optimizer configuration and the iteration
    history."""

    requirements: tuple[Requirement, ...] = ()
    stakeholders: tuple[Stakeholder, ...] = ()
    comparison: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    matrices: RatingMatrices = field(
        default_factory=lambda: RatingMatrices(np.zeros((0, 0)), np.zeros((0, 0)))
    )
    constraints: ConstraintSet = ConstraintSet()
    estimation: Optional["EstimationInputs"] = None
    fitness: Optional["FitnessConfig"] = None
    ga: Optional["GaConfig"] = None
    iterations: tuple[IterationRecord, ...] = ()
    rng_seed: int = 0

    @property
    def requirement_ids(self) -> tuple[str, ...]:
        return tuple(r.id for r in self.requirements)

    def requirement(self, rid: str) -> Requirement:
        for r in self.requirements:
            if r.id == rid:
                return r
        raise NotFound(f"unknown requirement id {rid!r}")

    def column_index(self, rid: str) -> int:
        for i, r in enumerate(self.requirements):
            if r.id == rid:
                return i
        raise NotFound(f"unknown requirement id {rid!r}")

    def open_iteration(self) -> Optional[IterationRecord]:
        for it in self.iterations:
            if it.is_open:
                return it
        return None

    @property
    def current_index(self) -> int:
        open_it = self.open_iteration()
        if open_it is not None:
            return open_it.index
        return len(self.iterations) + 1


@dataclass(frozen=True)
class Violation:
    invariant: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def _check_comparison(state: ProjectState, errs: list[Violation], warns: list[Violation]) -> None:
    m = np.asarray(state.comparison, dtype=float)
    q = len(state.stakeholders)
    if m.size == 0 and q == 0:
        return
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != q:
        errs.append(Violation("comparison.shape", f"comparison matrix must be {q}x{q}, got {m.shape}"))
        return
    if not np.all(m > 0):
        errs.append(Violation("comparison.positive", "comparison entries must be > 0"))
    if not np.allclose(np.diag(m), 1.0):
        errs.append(Violation("comparison.diagonal", "comparison diagonal entries must equal 1"))
    for p in range(q):
        for r in range(p + 1, q):
            prod = m[p, r] * m[r, p]
            if abs(prod - 1.0) > RECIPROCITY_WARN_TOL:
                warns.append(
                    Violation(
                        "comparison.reciprocity",
                        f"entries ({p},{r}) and ({r},{p}) multiply to {prod:.4g}, not 1",
                        (state.stakeholders[p].id, state.stakeholders[r].id),
                    )
                )


def _check_matrices(state: ProjectState, errs: list[Violation]) -> None:
    q = len(state.stakeholders)
    n = len(state.requirements)
    mat = state.matrices
    for name, arr in (("prio", mat.prio), ("value", mat.value)):
        a = np.asarray(arr, dtype=float)
        if a.shape != (q, n):
            errs.append(Violation(f"matrices.{name}.shape", f"{name} must be {q}x{n}, got {a.shape}"))
            continue
        if name == "prio" and a.size and not np.all(a > 0):
            errs.append(Violation("matrices.prio.positive", "prio entries must be > 0"))
        if name == "value" and a.size and not np.all(a >= 0):
            errs.append(Violation("matrices.value.nonneg", "value entries must be >= 0"))
    if mat.value_scale_max <= 0:
        errs.append(Violation("matrices.value_scale_max", "value_scale_max must be > 0"))
    if mat.lam.size:
        if mat.lam.shape != (q,):
            errs.append(Violation("matrices.lambda.shape", f"lambda must have length {q}"))
        elif q and abs(float(mat.lam.sum()) - 1.0) > LAMBDA_SUM_TOL:
            errs.append(Violation("matrices.lambda.sum", "stakeholder weights must sum to 1"))


def _check_constraints(state: ProjectState, errs: list[Violation]) -> None:
    known = set(state.requirement_ids)
    cs = state.constraints
    for kind, pairs in (("precedence", cs.precedence), ("coupling", cs.coupling)):
        for a, b in pairs:
            for rid in (a, b):
                if rid not in known:
                    errs.append(
                        Violation(f"constraints.{kind}.unknown_id", f"{kind} pair references unknown id {rid!r}", (rid,))
                    )
            if a == b:
                errs.append(Violation(f"constraints.{kind}.self_pair", f"{kind} pair ({a!r},{a!r}) is degenerate", (a,)))
    graph: dict[str, set[str]] = {}
    for a, b in cs.precedence:
        graph.setdefault(b, set()).add(a)
        graph.setdefault(a, set())
    try:
        tuple(graphlib.TopologicalSorter(graph).static_order())
    except graphlib.CycleError as exc:
        cycle = tuple(str(x) for x in exc.args[1])
        errs.append(Violation("constraints.precedence.cycle", f"precedence cycle: {' -> '.join(cycle)}", cycle))


def _check_estimation(state: ProjectState, errs: list[Violation]) -> None:
    est = state.estimation
    if est is None:
        return
    for msg in est.invariant_errors():
        errs.append(Violation("estimation." + msg[0], msg[1]))
    known = set(state.requirement_ids)
    seen: dict[str, str] = {}
    for cluster in est.clusters:
        for rid in cluster.members:
            if rid not in known:
                errs.append(Violation("estimation.clusters.unknown_id", f"cluster {cluster.label!r} references unknown id {rid!r}", (rid,)))
            if rid in seen:
                errs.append(
                    Violation(
                        "estimation.clusters.overlap",
                        f"requirement {rid!r} is in clusters {seen[rid]!r} and {cluster.label!r}",
                        (rid,),
                    )
                )
            seen[rid] = cluster.label
    missing = known - set(seen)
    if est.clusters and missing:
        errs.append(
            Violation(
                "estimation.clusters.uncovered",
                f"requirements not assigned to any cluster: {sorted(missing)}",
                tuple(sorted(missing)),
            )
        )


def _check_iterations(state: ProjectState, errs: list[Violation]) -> None:
    known = set(state.requirement_ids)
    open_count = 0
    for pos, it in enumerate(state.iterations):
        if it.index != pos + 1:
            errs.append(Violation("iterations.contiguous", f"iteration at position {pos} has index {it.index}"))
        if it.is_open:
            open_count += 1
        for rid in it.candidates:
            if rid not in known:
                errs.append(Violation("iterations.unknown_candidate", f"iteration {it.index} references unknown id {rid!r}", (rid,)))
        if it.t_max is not None and it.t_max <= 0:
            errs.append(Violation("iterations.t_max", f"iteration {it.index} t_max must be > 0"))
        if not (0 < it.ff_applied <= 1):
            errs.append(Violation("iterations.ff_applied", f"iteration {it.index} ff_applied must be in (0,1]"))
        if it.chosen is not None and not (0 <= it.chosen < len(it.solutions)):
            errs.append(Violation("iterations.chosen_range", f"iteration {it.index} chosen index {it.chosen} out of range"))
        if it.outcome is not None and it.chosen is None:
            errs.append(Violation("iterations.outcome_order", f"iteration {it.index} has an outcome but no chosen solution"))
        if it.outcome is not None:
            out = it.outcome
            if out.failed_count > out.implemented_count:
                errs.append(Violation("outcome.failed_le_implemented", f"iteration {it.index}: failed_count exceeds implemented_count"))
            if not (0 <= out.user_perception <= 1):
                errs.append(Violation("outcome.user_perception", f"iteration {it.index}: user_perception must be in [0,1]"))
            if out.estimated_hours <= 0:
                errs.append(Violation("outcome.estimated_hours", f"iteration {it.index}: estimated_hours must be > 0"))
            if out.actual_hours < 0:
                errs.append(Violation("outcome.actual_hours", f"iteration {it.index}: actual_hours must be >= 0"))
    if open_count > 1:
        errs.append(Violation("iterations.single_open", f"{open_count} iterations are open; at most one allowed"))


def validate_project(state: ProjectState) -> ValidationReport:
    """Check every structural invariant; violations are data, not exceptions.

    Idempotent and side-effect free. The report is empty exactly when the
    project satisfies all invariants; reciprocity deviations in the
    comparison matrix are reported as warnings and do not fail validation.
    """
    errs: list[Violation] = []
    warns: list[Violation] = []

    seen_req: set[str] = set()
    for r in state.requirements:
        if r.id in seen_req:
            errs.append(Violation("requirement.id_unique", f"duplicate requirement id {r.id!r}", (r.id,)))
        seen_req.add(r.id)
        if r.estimated_hours is not None and r.estimated_hours < 0:
            errs.append(Violation("requirement.hours_nonneg", f"requirement {r.id!r} has negative estimated_hours", (r.id,)))
        if r.origin not in ORIGINS:
            errs.append(Violation("requirement.origin", f"requirement {r.id!r} has unknown origin {r.origin!r}", (r.id,)))
        if r.origin == "defect" and not r.reimplemented:
            errs.append(Violation("requirement.defect_reimplemented", f"defect {r.id!r} must be flagged reimplemented", (r.id,)))

    seen_st: set[str] = set()
    for s in state.stakeholders:
        if s.id in seen_st:
            errs.append(Violation("stakeholder.id_unique", f"duplicate stakeholder id {s.id!r}", (s.id,)))
        seen_st.add(s.id)

    _check_comparison(state, errs, warns)
    _check_matrices(state, errs)
    _check_constraints(state, errs)
    _check_estimation(state, errs)
    _check_iterations(state, errs)
    return ValidationReport(tuple(errs), tuple(warns))
