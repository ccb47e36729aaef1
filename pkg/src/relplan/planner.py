"""The iterative planning loop: estimate once, scale by feedback, optimize,
let a human choose, record the outcome, open the next iteration.

All operations take a ProjectState and return a new one; nothing mutates in
place. Randomness is derived from the project seed plus the iteration index,
so replaying a saved project reproduces identical solution lists.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from relplan import estimation as est
from relplan.feedback import FeedbackConfig, apply_feedback, compute_ff, first_increment_ff
from relplan.model import (
    Conflict,
    Infeasible,
    IterationRecord,
    NotFound,
    ProjectState,
    RatingMatrices,
    ReleaseOutcome,
    Requirement,
    ValidationFailed,
    validate_project,
)
from relplan.optimizer import (
    FitnessConfig,
    GaConfig,
    PlanProblem,
    brute_force_plan,
    min_feasible_hours,
    run_ga,
)
from relplan.weights import compute_lambda

BRUTE_FORCE_MAX_N = 12

_SEED_MIX = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class PlanRequest:
    """Inputs for planning one iteration; overrides patch the project-level
    optimizer configuration for this run only."""

    iteration: int
    t_max: float
    fitness_overrides: Optional[dict] = None
    ga_overrides: Optional[dict] = None


@dataclass(frozen=True)
class NewDefect:
    """A requirement born from a failure in the delivered release."""

    id: str
    title: str = ""
    cluster: str = ""
    prio_column: tuple[float, ...] = ()
    value_column: tuple[float, ...] = ()


@dataclass(frozen=True)
class TimelineRow:
    index: int
    candidates: tuple[str, ...]
    planned: bool
    chosen: Optional[tuple[str, ...]]
    cycle_hours: Optional[float]
    ff_applied: float
    outcome_ff: Optional[float]


def iteration_seed(rng_seed: int, index: int) -> int:
    """Stable per-iteration GA seed derived from the project seed."""
    return (rng_seed + _SEED_MIX * index) % (1 << 63)


def _require_valid(state: ProjectState) -> None:
    report = validate_project(state)
    if not report.ok:
        raise ValidationFailed(
            "project fails validation",
            details={"violations": [f"{v.invariant}: {v.message}" for v in report.violations]},
        )


def _ensure_estimated(state: ProjectState) -> ProjectState:
    """Fill missing estimated_hours from the use-case-point split.

    Per-cluster unit times are derived with defect-origin requirements
    excluded from the denominator, so estimates assigned at project start
    never shift when later defects join a cluster.
    """
    missing = [r for r in state.requirements if r.estimated_hours is None]
    if not missing:
        return state
    e = state.estimation
    if e is None:
        raise ValidationFailed(
            "unestimated requirements and no estimation inputs",
            details={"ids": [r.id for r in missing]},
        )
    total = est.compute_ucp(
        est.compute_tcf(e.technical), est.compute_ecf(e.environmental), est.compute_uucp(e.inventory), e.pf
    )
    defect_ids = {r.id for r in state.requirements if r.origin == "defect"}
    base_clusters = tuple(
        est.Cluster(c.label, c.weight, tuple(m for m in c.members if m not in defect_ids)) for c in e.clusters
    )
    unit = est.cluster_unit_times(total, base_clusters)
    by_label = {c.label: c for c in e.clusters}
    updated = []
    for r in state.requirements:
        if r.estimated_hours is not None:
            updated.append(r)
            continue
        label = None
        for c in e.clusters:
            if r.id in c.members:
                label = c.label
                break
        if label is None:
            raise ValidationFailed(f"requirement {r.id!r} is not assigned to any cluster", details={"id": r.id})
        updated.append(replace(r, estimated_hours=unit[label], cluster=label))
    return replace(state, requirements=tuple(updated))


def _with_lambda(state: ProjectState) -> ProjectState:
    lam = compute_lambda(state.comparison) if np.asarray(state.comparison).size else np.zeros(0)
    return replace(state, matrices=replace(state.matrices, lam=lam))


def _replace_iteration(state: ProjectState, record: IterationRecord) -> ProjectState:
    records = tuple(record if it.index == record.index else it for it in state.iterations)
    return replace(state, iterations=records)


def build_problem(state: ProjectState, record: IterationRecord, t_max: float,
                  fitness: FitnessConfig) -> PlanProblem:
    """Assemble the optimizer input for one iteration: candidate times and
    rating columns with 1/FF scaling applied to re-implemented requirements."""
    times = {}
    reimplemented = set()
    for rid in record.candidates:
        r = state.requirement(rid)
        if r.estimated_hours is None:
            raise ValidationFailed(f"requirement {rid!r} has no estimate", details={"id": rid})
        times[rid] = r.estimated_hours
        if r.reimplemented:
            reimplemented.add(rid)
    cols = [state.column_index(rid) for rid in record.candidates]
    sliced = state.matrices.column_slice(cols)
    times, matrices = apply_feedback(times, sliced, record.candidates, reimplemented, record.ff_applied)
    return PlanProblem(
        candidates=record.candidates,
        times=times,
        t_max=t_max,
        constraints=state.constraints.restricted_to(record.candidates),
        matrices=matrices,
        fitness=fitness,
    )


def plan_iteration(state: ProjectState, request: PlanRequest) -> ProjectState:
    """Produce and store the ranked solution list for the open iteration."""
    _require_valid(state)
    state = _with_lambda(state)
    state = _ensure_estimated(state)

    record = state.open_iteration()
    if record is None:
        if state.iterations:
            raise Conflict("all iterations are closed; the project is complete")
        if request.iteration != 1:
            raise NotFound(f"no open iteration {request.iteration}; the project starts at iteration 1")
        if not state.requirements:
            raise ValidationFailed("project has no requirements to plan")
        record = IterationRecord(
            index=1,
            candidates=state.requirement_ids,
            ff_applied=first_increment_ff(),
        )
        state = replace(state, iterations=state.iterations + (record,))
    if request.iteration != record.index:
        raise NotFound(f"open iteration is {record.index}, not {request.iteration}")
    if record.solutions and record.chosen is None:
        raise Conflict(f"iteration {record.index} is already planned; choose a solution first")
    if record.chosen is not None:
        raise Conflict(f"iteration {record.index} already has a chosen solution")
    if request.t_max <= 0:
        raise ValidationFailed(f"t_max must be > 0, got {request.t_max}")

    fitness = state.fitness or FitnessConfig()
    if request.fitness_overrides:
        fitness = replace(fitness, **request.fitness_overrides)
    ga = state.ga or GaConfig()
    if request.ga_overrides:
        ga = replace(ga, **request.ga_overrides)
    ga = replace(ga, rng_seed=iteration_seed(state.rng_seed + ga.rng_seed, record.index))

    problem = build_problem(state, record, request.t_max, fitness)
    if problem.n <= BRUTE_FORCE_MAX_N:
        solutions = brute_force_plan(problem)
    else:
        solutions = run_ga(problem, ga)
    if not solutions:
        bound = min_feasible_hours(problem)
        raise Infeasible(
            f"no valid subset fits within {request.t_max:g} hours"
            + (f"; the cheapest constraint-valid subset needs {bound:g} hours" if bound is not None else ""),
            details={"t_max": request.t_max, "min_feasible_hours": bound},
        )

    record = replace(record, t_max=request.t_max, solutions=tuple(solutions), chosen=None)
    return _replace_iteration(state, record)


def choose_solution(state: ProjectState, iteration: int, solution_index: int) -> ProjectState:
    """Mark the human-selected solution; its total hours is the cycle time."""
    record = next((it for it in state.iterations if it.index == iteration), None)
    if record is None:
        raise NotFound(f"iteration {iteration} does not exist")
    if not record.solutions:
        raise Conflict(f"iteration {iteration} has not been planned")
    if record.chosen is not None:
        raise Conflict(f"iteration {iteration} already has a chosen solution")
    if not (0 <= solution_index < len(record.solutions)):
        raise NotFound(
            f"solution index {solution_index} out of range [0,{len(record.solutions) - 1}]"
        )
    return _replace_iteration(state, replace(record, chosen=solution_index))


def record_outcome(
    state: ProjectState,
    iteration: int,
    outcome: ReleaseOutcome,
    failed_ids: Sequence[str] = (),
    new_defects: Sequence[NewDefect] = (),
    feedback_cfg: FeedbackConfig = FeedbackConfig(),
) -> ProjectState:
    """Close an iteration: compute FF, flag failures for re-implementation,
    add defect requirements, and open the next iteration (unless done)."""
    record = next((it for it in state.iterations if it.index == iteration), None)
    if record is None:
        raise NotFound(f"iteration {iteration} does not exist")
    if record.chosen is None:
        raise Conflict(f"iteration {iteration} has no chosen solution; record the choice first")
    if record.outcome is not None:
        raise Conflict(f"iteration {iteration} already has an outcome")

    chosen = record.solutions[record.chosen]
    selected = set(chosen.selected)
    failed = list(dict.fromkeys(failed_ids))
    bad = [f for f in failed if f not in selected]
    if bad:
        raise ValidationFailed(f"failed ids not in the chosen solution: {bad}", details={"ids": bad})
    if outcome.failed_count != len(failed):
        raise ValidationFailed(
            f"failed_count {outcome.failed_count} does not match {len(failed)} failed ids"
        )
    if outcome.implemented_count != len(selected):
        raise ValidationFailed(
            f"implemented_count {outcome.implemented_count} does not match the {len(selected)} implemented requirements"
        )
    if not (0 <= outcome.user_perception <= 1):
        raise ValidationFailed(f"user_perception must be in [0,1], got {outcome.user_perception}")

    ff = compute_ff(outcome, feedback_cfg)

    q = len(state.stakeholders)
    known = set(state.requirement_ids)
    for d in new_defects:
        if d.id in known:
            raise ValidationFailed(f"defect id {d.id!r} already exists", details={"id": d.id})
        known.add(d.id)
        if q and (len(d.prio_column) != q or len(d.value_column) != q):
            raise ValidationFailed(
                f"defect {d.id!r} needs prio and value ratings for all {q} stakeholders",
                details={"id": d.id},
            )
        if state.estimation is not None and not any(c.label == d.cluster for c in state.estimation.clusters):
            raise ValidationFailed(f"defect {d.id!r} names unknown cluster {d.cluster!r}", details={"id": d.id})

    failed_set = set(failed)
    requirements = []
    for r in state.requirements:
        if r.id in failed_set:
            origin = r.origin if r.origin == "defect" else "carryover"
            requirements.append(replace(r, origin=origin, reimplemented=True))
        else:
            requirements.append(r)
    for d in new_defects:
        requirements.append(
            Requirement(id=d.id, title=d.title, cluster=d.cluster, origin="defect", reimplemented=True)
        )

    matrices = state.matrices
    if new_defects and q:
        prio = np.hstack([matrices.prio] + [np.array(d.prio_column, dtype=float).reshape(q, 1) for d in new_defects])
        value = np.hstack([matrices.value] + [np.array(d.value_column, dtype=float).reshape(q, 1) for d in new_defects])
        matrices = replace(matrices, prio=prio, value=value)

    estimation = state.estimation
    if new_defects and estimation is not None:
        clusters = tuple(
            replace(c, members=c.members + tuple(d.id for d in new_defects if d.cluster == c.label))
            for c in estimation.clusters
        )
        estimation = replace(estimation, clusters=clusters)

    closed = replace(record, outcome=outcome, outcome_ff=ff, failed_ids=tuple(failed))
    state = replace(
        state,
        requirements=tuple(requirements),
        matrices=matrices,
        estimation=estimation,
    )
    state = _replace_iteration(state, closed)

    deferred = [rid for rid in record.candidates if rid not in selected]
    next_candidates = deferred + failed + [d.id for d in new_defects]
    order = {rid: i for i, rid in enumerate(state.requirement_ids)}
    next_candidates = tuple(sorted(dict.fromkeys(next_candidates), key=order.__getitem__))
    if next_candidates:
        state = replace(
            state,
            iterations=state.iterations
            + (IterationRecord(index=record.index + 1, candidates=next_candidates, ff_applied=ff),),
        )
    return state


def project_timeline(state: ProjectState) -> list[TimelineRow]:
    """Read-only per-iteration summary for UIs and the CLI."""
    rows = []
    for it in state.iterations:
        chosen = it.chosen_solution
        rows.append(
            TimelineRow(
                index=it.index,
                candidates=it.candidates,
                planned=bool(it.solutions),
                chosen=chosen.selected if chosen else None,
                cycle_hours=chosen.total_hours if chosen else None,
                ff_applied=it.ff_applied,
                outcome_ff=it.outcome_ff,
            )
        )
    return rows


def is_complete(state: ProjectState) -> bool:
    """True once every iteration is closed and nothing is left to plan."""
    return bool(state.iterations) and state.open_iteration() is None
