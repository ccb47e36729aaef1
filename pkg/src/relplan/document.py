"""Project document persistence: one strict JSON file per project.

Matrix rows follow stakeholder list order, columns follow requirement list
order. Unknown keys are rejected so that typos fail loudly instead of being
silently dropped on the next save.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np

from relplan import estimation as est
from relplan import weights
from relplan.model import (
    ConstraintSet,
    IterationRecord,
    ProjectState,
    RatingMatrices,
    ReleaseOutcome,
    Requirement,
    Stakeholder,
    ValidationFailed,
)
from relplan.optimizer import FitnessConfig, GaConfig, solution_from_json, solution_to_json

SCHEMA_VERSION = 1

_TOP_KEYS = {
    "schema_version",
    "requirements",
    "stakeholders",
    "comparison",
    "matrices",
    "constraints",
    "estimation",
    "optimizer",
    "iterations",
    "rng_seed",
}


def _fail(path: str, message: str) -> None:
    raise ValidationFailed(f"{path}: {message}", details={"path": path})


def _expect_object(value: Any, path: str, allowed: set[str]) -> dict:
    if not isinstance(value, dict):
        _fail(path, f"expected object, got {type(value).__name__}")
    unknown = set(value) - allowed
    if unknown:
        _fail(path, f"unknown keys: {sorted(unknown)}")
    return value


def _expect_list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        _fail(path, f"expected array, got {type(value).__name__}")
    return value


def _expect_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        _fail(path, f"expected string, got {type(value).__name__}")
    return value


def _expect_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected number, got {type(value).__name__}")
    return float(value)


def _expect_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected integer, got {type(value).__name__}")
    return value


def _expect_bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        _fail(path, f"expected boolean, got {type(value).__name__}")
    return value


def _matrix(value: Any, path: str) -> np.ndarray:
    rows = _expect_list(value, path)
    data = []
    width = None
    for i, row in enumerate(rows):
        row = _expect_list(row, f"{path}[{i}]")
        if width is None:
            width = len(row)
        elif len(row) != width:
            _fail(f"{path}[{i}]", f"ragged matrix row: expected {width} entries, got {len(row)}")
        data.append([_expect_number(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    if not data:
        return np.zeros((0, 0))
    return np.array(data, dtype=float)


def _pairs(value: Any, path: str) -> tuple[tuple[str, str], ...]:
    items = _expect_list(value, path)
    out = []
    for i, pair in enumerate(items):
        pair = _expect_list(pair, f"{path}[{i}]")
        if len(pair) != 2:
            _fail(f"{path}[{i}]", f"expected a pair, got {len(pair)} entries")
        out.append((_expect_str(pair[0], f"{path}[{i}][0]"), _expect_str(pair[1], f"{path}[{i}][1]")))
    return tuple(out)


def _parse_estimation(value: Any) -> Optional[est.EstimationInputs]:
    if value is None:
        return None
    obj = _expect_object(value, "estimation", {"technical", "environmental", "use_cases", "actors", "pf", "clusters"})
    for key in ("technical", "environmental", "use_cases", "actors", "pf", "clusters"):
        if key not in obj:
            _fail("estimation", f"missing key {key!r}")
    technical = [_expect_number(x, f"estimation.technical[{i}]") for i, x in enumerate(_expect_list(obj["technical"], "estimation.technical"))]
    environmental = [_expect_number(x, f"estimation.environmental[{i}]") for i, x in enumerate(_expect_list(obj["environmental"], "estimation.environmental"))]
    uc = _expect_object(obj["use_cases"], "estimation.use_cases", {"simple", "average", "complex"})
    ac = _expect_object(obj["actors"], "estimation.actors", {"simple", "average", "complex"})
    clusters = []
    for i, c in enumerate(_expect_list(obj["clusters"], "estimation.clusters")):
        c = _expect_object(c, f"estimation.clusters[{i}]", {"label", "weight", "members"})
        members = tuple(
            _expect_str(m, f"estimation.clusters[{i}].members[{j}]")
            for j, m in enumerate(_expect_list(c.get("members", []), f"estimation.clusters[{i}].members"))
        )
        clusters.append(
            est.Cluster(
                label=_expect_str(c.get("label", ""), f"estimation.clusters[{i}].label"),
                weight=_expect_number(c.get("weight", 1), f"estimation.clusters[{i}].weight"),
                members=members,
            )
        )
    try:
        return est.EstimationInputs(
            technical=est.TechnicalFactors(tuple(technical)),
            environmental=est.EnvironmentalFactors(tuple(environmental)),
            inventory=est.UseCaseInventory(
                simple=_expect_int(uc.get("simple", 0), "estimation.use_cases.simple"),
                average=_expect_int(uc.get("average", 0), "estimation.use_cases.average"),
                complex=_expect_int(uc.get("complex", 0), "estimation.use_cases.complex"),
                simple_actors=_expect_int(ac.get("simple", 0), "estimation.actors.simple"),
                average_actors=_expect_int(ac.get("average", 0), "estimation.actors.average"),
                complex_actors=_expect_int(ac.get("complex", 0), "estimation.actors.complex"),
            ),
            pf=_expect_number(obj["pf"], "estimation.pf"),
            clusters=tuple(clusters),
        )
    except ValueError as exc:
        raise ValidationFailed(f"estimation: {exc}") from exc


def _parse_optimizer(value: Any) -> tuple[Optional[FitnessConfig], Optional[GaConfig]]:
    if value is None:
        return None, None
    obj = _expect_object(value, "optimizer", {"fitness", "ga"})
    fitness = None
    ga = None
    if obj.get("fitness") is not None:
        f = _expect_object(obj["fitness"], "optimizer.fitness", {"alphas", "k_best", "benefit_form", "delta"})
        try:
            fitness = FitnessConfig(
                alphas=tuple(_expect_number(a, f"optimizer.fitness.alphas[{i}]") for i, a in enumerate(_expect_list(f.get("alphas", [0.3, 0.5, 0.7]), "optimizer.fitness.alphas"))),
                k_best=_expect_int(f.get("k_best", 3), "optimizer.fitness.k_best"),
                benefit_form=_expect_str(f.get("benefit_form", "literal"), "optimizer.fitness.benefit_form"),
                delta=None if f.get("delta") is None else _expect_number(f["delta"], "optimizer.fitness.delta"),
            )
        except ValueError as exc:
            raise ValidationFailed(f"optimizer.fitness: {exc}") from exc
    if obj.get("ga") is not None:
        g = _expect_object(
            obj["ga"],
            "optimizer.ga",
            {"population_size", "crossover_rate", "mutation_rate", "max_generations", "stagnation_window", "rng_seed"},
        )
        try:
            ga = GaConfig(
                population_size=_expect_int(g.get("population_size", 64), "optimizer.ga.population_size"),
                crossover_rate=_expect_number(g.get("crossover_rate", 0.5), "optimizer.ga.crossover_rate"),
                mutation_rate=_expect_number(g.get("mutation_rate", 0.5), "optimizer.ga.mutation_rate"),
                max_generations=_expect_int(g.get("max_generations", 200), "optimizer.ga.max_generations"),
                stagnation_window=_expect_int(g.get("stagnation_window", 25), "optimizer.ga.stagnation_window"),
                rng_seed=_expect_int(g.get("rng_seed", 0), "optimizer.ga.rng_seed"),
            )
        except ValueError as exc:
            raise ValidationFailed(f"optimizer.ga: {exc}") from exc
    return fitness, ga


def _parse_outcome(value: Any, path: str) -> tuple[Optional[ReleaseOutcome], Optional[float]]:
    if value is None:
        return None, None
    obj = _expect_object(
        value, path, {"actual_hours", "estimated_hours", "failed_count", "implemented_count", "user_perception", "ff"}
    )
    for key in ("actual_hours", "estimated_hours", "failed_count", "implemented_count", "user_perception", "ff"):
        if key not in obj:
            _fail(path, f"missing key {key!r}")
    outcome = ReleaseOutcome(
        actual_hours=_expect_number(obj["actual_hours"], f"{path}.actual_hours"),
        estimated_hours=_expect_number(obj["estimated_hours"], f"{path}.estimated_hours"),
        failed_count=_expect_int(obj["failed_count"], f"{path}.failed_count"),
        implemented_count=_expect_int(obj["implemented_count"], f"{path}.implemented_count"),
        user_perception=_expect_number(obj["user_perception"], f"{path}.user_perception"),
    )
    return outcome, _expect_number(obj["ff"], f"{path}.ff")


def from_document(doc: Mapping[str, Any]) -> ProjectState:
    """Parse and structurally validate a project document."""
    obj = _expect_object(dict(doc), "$", _TOP_KEYS)
    version = _expect_int(obj.get("schema_version", SCHEMA_VERSION), "schema_version")
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported schema version {version}; this build reads version {SCHEMA_VERSION}")

    requirements = []
    for i, r in enumerate(_expect_list(obj.get("requirements", []), "requirements")):
        r = _expect_object(r, f"requirements[{i}]", {"id", "title", "cluster", "estimated_hours", "origin", "reimplemented"})
        if "id" not in r:
            _fail(f"requirements[{i}]", "missing key 'id'")
        requirements.append(
            Requirement(
                id=_expect_str(r["id"], f"requirements[{i}].id"),
                title=_expect_str(r.get("title", ""), f"requirements[{i}].title"),
                cluster=_expect_str(r.get("cluster", ""), f"requirements[{i}].cluster"),
                estimated_hours=None
                if r.get("estimated_hours") is None
                else _expect_number(r["estimated_hours"], f"requirements[{i}].estimated_hours"),
                origin=_expect_str(r.get("origin", "new"), f"requirements[{i}].origin"),
                reimplemented=_expect_bool(r.get("reimplemented", False), f"requirements[{i}].reimplemented"),
            )
        )

    stakeholders = []
    for i, s in enumerate(_expect_list(obj.get("stakeholders", []), "stakeholders")):
        s = _expect_object(s, f"stakeholders[{i}]", {"id", "name"})
        if "id" not in s:
            _fail(f"stakeholders[{i}]", "missing key 'id'")
        stakeholders.append(
            Stakeholder(id=_expect_str(s["id"], f"stakeholders[{i}].id"), name=_expect_str(s.get("name", ""), f"stakeholders[{i}].name"))
        )

    comparison = _matrix(obj.get("comparison", []), "comparison")

    mat_obj = _expect_object(obj.get("matrices", {}), "matrices", {"prio", "value", "value_scale_max"})
    prio = _matrix(mat_obj.get("prio", []), "matrices.prio")
    value = _matrix(mat_obj.get("value", []), "matrices.value")
    value_scale_max = _expect_number(mat_obj.get("value_scale_max", 5), "matrices.value_scale_max")
    lam = weights.compute_lambda(comparison) if comparison.size else np.zeros(0)
    matrices = RatingMatrices(prio=prio, value=value, value_scale_max=value_scale_max, lam=lam)

    cons_obj = _expect_object(obj.get("constraints", {}), "constraints", {"precedence", "coupling"})
    constraints = ConstraintSet(
        precedence=_pairs(cons_obj.get("precedence", []), "constraints.precedence"),
        coupling=_pairs(cons_obj.get("coupling", []), "constraints.coupling"),
    )

    est_inputs = _parse_estimation(obj.get("estimation"))
    fitness, ga = _parse_optimizer(obj.get("optimizer"))

    iterations = []
    for i, it in enumerate(_expect_list(obj.get("iterations", []), "iterations")):
        it = _expect_object(
            it,
            f"iterations[{i}]",
            {"index", "candidates", "ff_applied", "t_max", "solutions", "chosen", "outcome", "failed_ids"},
        )
        candidates = tuple(
            _expect_str(c, f"iterations[{i}].candidates[{j}]")
            for j, c in enumerate(_expect_list(it.get("candidates", []), f"iterations[{i}].candidates"))
        )
        solutions = tuple(
            solution_from_json(
                _expect_object(
                    s, f"iterations[{i}].solutions[{j}]", {"selected", "total_hours", "A", "B", "objective_by_alpha"}
                ),
                candidates,
            )
            for j, s in enumerate(_expect_list(it.get("solutions", []), f"iterations[{i}].solutions"))
        )
        outcome, outcome_ff = _parse_outcome(it.get("outcome"), f"iterations[{i}].outcome")
        iterations.append(
            IterationRecord(
                index=_expect_int(it.get("index", i + 1), f"iterations[{i}].index"),
                candidates=candidates,
                ff_applied=_expect_number(it.get("ff_applied", 1.0), f"iterations[{i}].ff_applied"),
                t_max=None if it.get("t_max") is None else _expect_number(it["t_max"], f"iterations[{i}].t_max"),
                solutions=solutions,
                chosen=None if it.get("chosen") is None else _expect_int(it["chosen"], f"iterations[{i}].chosen"),
                outcome=outcome,
                outcome_ff=outcome_ff,
                failed_ids=tuple(
                    _expect_str(f, f"iterations[{i}].failed_ids[{j}]")
                    for j, f in enumerate(_expect_list(it.get("failed_ids", []), f"iterations[{i}].failed_ids"))
                ),
            )
        )

    return ProjectState(
        requirements=tuple(requirements),
        stakeholders=tuple(stakeholders),
        comparison=comparison,
        matrices=matrices,
        constraints=constraints,
        estimation=est_inputs,
        fitness=fitness,
        ga=ga,
        iterations=tuple(iterations),
        rng_seed=_expect_int(obj.get("rng_seed", 0), "rng_seed"),
    )


def to_document(state: ProjectState) -> dict:
    """Serialize a project to its JSON document form."""
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "rng_seed": state.rng_seed,
        "requirements": [
            {
                "id": r.id,
                "title": r.title,
                "cluster": r.cluster,
                "estimated_hours": None if r.estimated_hours is None else float(r.estimated_hours),
                "origin": r.origin,
                "reimplemented": r.reimplemented,
            }
            for r in state.requirements
        ],
        "stakeholders": [{"id": s.id, "name": s.name} for s in state.stakeholders],
        "comparison": [[float(x) for x in row] for row in np.asarray(state.comparison, dtype=float)],
        "matrices": {
            "prio": [[float(x) for x in row] for row in np.asarray(state.matrices.prio, dtype=float)],
            "value": [[float(x) for x in row] for row in np.asarray(state.matrices.value, dtype=float)],
            "value_scale_max": float(state.matrices.value_scale_max),
        },
        "constraints": {
            "precedence": [list(p) for p in state.constraints.precedence],
            "coupling": [list(p) for p in state.constraints.coupling],
        },
        "estimation": None,
        "optimizer": None,
        "iterations": [],
    }
    if state.estimation is not None:
        e = state.estimation
        doc["estimation"] = {
            "technical": list(e.technical.perceived),
            "environmental": list(e.environmental.perceived),
            "use_cases": {"simple": e.inventory.simple, "average": e.inventory.average, "complex": e.inventory.complex},
            "actors": {
                "simple": e.inventory.simple_actors,
                "average": e.inventory.average_actors,
                "complex": e.inventory.complex_actors,
            },
            "pf": float(e.pf),
            "clusters": [{"label": c.label, "weight": float(c.weight), "members": list(c.members)} for c in e.clusters],
        }
    if state.fitness is not None or state.ga is not None:
        opt: dict[str, Any] = {}
        if state.fitness is not None:
            f = state.fitness
            opt["fitness"] = {
                "alphas": [float(a) for a in f.alphas],
                "k_best": f.k_best,
                "benefit_form": f.benefit_form,
                "delta": None if f.delta is None else float(f.delta),
            }
        if state.ga is not None:
            g = state.ga
            opt["ga"] = {
                "population_size": g.population_size,
                "crossover_rate": float(g.crossover_rate),
                "mutation_rate": float(g.mutation_rate),
                "max_generations": g.max_generations,
                "stagnation_window": g.stagnation_window,
                "rng_seed": g.rng_seed,
            }
        doc["optimizer"] = opt
    for it in state.iterations:
        entry: dict[str, Any] = {
            "index": it.index,
            "candidates": list(it.candidates),
            "ff_applied": float(it.ff_applied),
            "t_max": None if it.t_max is None else float(it.t_max),
            "solutions": [solution_to_json(s) for s in it.solutions],
            "chosen": it.chosen,
            "outcome": None,
            "failed_ids": list(it.failed_ids),
        }
        if it.outcome is not None:
            o = it.outcome
            entry["outcome"] = {
                "actual_hours": float(o.actual_hours),
                "estimated_hours": float(o.estimated_hours),
                "failed_count": o.failed_count,
                "implemented_count": o.implemented_count,
                "user_perception": float(o.user_perception),
                "ff": None if it.outcome_ff is None else float(it.outcome_ff),
            }
        doc["iterations"].append(entry)
    return doc


def loads(text: str) -> ProjectState:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailed(f"malformed JSON: {exc}", details={"line": exc.lineno, "column": exc.colno}) from exc
    return from_document(data)


def dumps(state: ProjectState) -> str:
    return json.dumps(to_document(state), indent=2) + "\n"


def load_project(path: str | Path) -> ProjectState:
    return loads(Path(path).read_text(encoding="utf-8"))


def save_project(state: ProjectState, path: str | Path) -> None:
    """Write atomically: full temp file first, then rename over the target."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(dumps(state))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
