"""Shared fixtures: the two case-study projects used throughout the suite.

The file-storage project (7 requirements, 5 stakeholders) carries recorded
per-requirement estimates; the banking project (11 requirements,
8 stakeholders) is left unestimated so planning exercises the full
estimation path.
"""

from __future__ import annotations

import copy

import numpy as np
import pytest

from relplan.model import ConstraintSet, RatingMatrices
from relplan.optimizer import FitnessConfig, PlanProblem

# Frozen output of the one-off column-normalization oracle for the two
# stakeholder comparison matrices below.
LAMBDA_FILE_STORAGE = (
    0.330170154763,
    0.216294754801,
    0.200899619315,
    0.094840925788,
    0.157794545333,
)
LAMBDA_BANKING = (
    0.263153972820,
    0.214962580879,
    0.129526190344,
    0.079488590455,
    0.091368819218,
    0.072138049987,
    0.074680898148,
    0.074680898148,
)

FILE_STORAGE_COMPARISON = [
    [1, 2, 3, 4, 1],
    [0.5, 1, 3, 2, 1],
    [0.33, 0.33, 1, 2, 4],
    [0.25, 0.5, 0.5, 1, 1],
    [1, 1, 0.25, 1, 1],
]

FILE_STORAGE_VALUE = [
    [4, 4, 5, 5, 5, 1, 2],
    [5, 5, 5, 5, 5, 5, 5],
    [2, 2, 5, 5, 2, 3, 1],
    [1, 1, 1, 5, 5, 4, 4],
    [2, 1, 3, 5, 4, 1, 3],
]

FILE_STORAGE_PRIO = [
    [1, 2, 3, 4, 5, 6, 7],
    [1, 3, 2, 5, 4, 6, 7],
    [1, 3, 4, 5, 6, 2, 7],
    [1, 4, 5, 6, 2, 3, 7],
    [1, 4, 5, 6, 2, 3, 7],
]

FILE_STORAGE_TIMES = {"R1": 95.0, "R2": 189.0, "R3": 283.0, "R4": 283.0, "R5": 283.0, "R6": 95.0, "R7": 95.0}

BANKING_COMPARISON = [
    [1, 1, 3, 3, 4, 4, 3, 3],
    [1, 1, 3, 2, 3, 3, 2, 2],
    [0.33, 0.33, 1, 2, 2, 2, 2, 2],
    [0.33, 0.5, 0.5, 1, 1, 1, 1, 1],
    [0.25, 0.33, 0.5, 1, 1, 1, 2, 2],
    [0.25, 0.33, 0.5, 1, 1, 1, 1, 1],
    [0.33, 0.5, 0.5, 1, 0.5, 1, 1, 1],
    [0.33, 0.5, 0.5, 1, 0.5, 1, 1, 1],
]

BANKING_VALUE = [
    [4, 3, 5, 4, 4, 2, 2, 3, 2, 2, 4],
    [3, 3, 4, 4, 4, 3, 3, 3, 2, 2, 3],
    [3, 2, 5, 5, 2, 3, 3, 3, 3, 3, 2],
    [3, 3, 3, 5, 5, 3, 3, 4, 3, 2, 2],
    [3, 2, 5, 5, 2, 3, 3, 3, 3, 3, 2],
    [4, 3, 5, 4, 4, 2, 2, 3, 2, 2, 4],
    [3, 3, 4, 4, 4, 3, 3, 3, 2, 2, 3],
    [4, 3, 5, 4, 4, 2, 2, 3, 2, 2, 4],
]

BANKING_PRIO = [
    [1, 11, 2, 4, 9, 8, 7, 6, 10, 5, 3],
    [1, 11, 2, 5, 4, 6, 7, 9, 10, 8, 3],
    [1, 11, 2, 3, 9, 8, 7, 6, 10, 5, 4],
    [1, 11, 2, 4, 9, 8, 7, 6, 10, 5, 3],
    [1, 11, 2, 5, 4, 6, 7, 9, 10, 8, 3],
    [1, 11, 2, 4, 9, 8, 7, 6, 10, 5, 3],
    [1, 11, 2, 5, 4, 6, 7, 9, 10, 8, 3],
    [1, 11, 2, 4, 9, 8, 7, 6, 10, 5, 3],
]


def make_file_storage_doc() -> dict:
    """Online file storage service: 7 requirements, 5 stakeholders.

    Estimates are already recorded on the requirements (95/189/283 hours by
    size cluster); estimation inputs are present for the breakdown command.
    """
    titles = {
        "R1": "Login Management",
        "R2": "Session Management",
        "R3": "Upload Module",
        "R4": "Download Module",
        "R5": "File Search Module",
        "R6": "Sharing Management",
        "R7": "Account Renewal",
    }
    clusters = [
        {"label": "simple", "weight": 1, "members": ["R1", "R6", "R7"]},
        {"label": "moderate", "weight": 2, "members": ["R2"]},
        {"label": "complex", "weight": 3, "members": ["R3", "R4", "R5"]},
    ]
    cluster_of = {m: c["label"] for c in clusters for m in c["members"]}
    return {
        "schema_version": 1,
        "rng_seed": 20240601,
        "requirements": [
            {
                "id": rid,
                "title": titles[rid],
                "cluster": cluster_of[rid],
                "estimated_hours": FILE_STORAGE_TIMES[rid],
                "origin": "new",
                "reimplemented": False,
            }
            for rid in sorted(titles, key=lambda r: int(r[1:]))
        ],
        "stakeholders": [{"id": f"S{i}", "name": f"Stakeholder {i}"} for i in range(1, 6)],
        "comparison": [list(map(float, row)) for row in FILE_STORAGE_COMPARISON],
        "matrices": {
            "prio": [list(map(float, row)) for row in FILE_STORAGE_PRIO],
            "value": [list(map(float, row)) for row in FILE_STORAGE_VALUE],
            "value_scale_max": 5.0,
        },
        "constraints": {
            "precedence": [["R1", "R2"], ["R1", "R3"], ["R1", "R6"], ["R1", "R7"]],
            "coupling": [["R3", "R4"]],
        },
        "estimation": {
            "technical": [1, 2, 3, 2, 2, 2, 3, 1, 3, 3, 4, 3, 1],
            "environmental": [1, 1, 1, 3, 3, 3, 0, 1],
            "use_cases": {"simple": 3, "average": 1, "complex": 3},
            "actors": {"simple": 2, "average": 2, "complex": 1},
            "pf": 20,
            "clusters": clusters,
        },
        "optimizer": None,
        "iterations": [],
    }


def make_banking_doc() -> dict:
    """Legacy banking replacement: 11 requirements, 8 stakeholders, no
    recorded estimates (planning derives them from the use-case points)."""
    titles = {
        "R1": "Login Management",
        "R2": "Scope Management",
        "R3": "Banking interface interaction",
        "R4": "Entity administration",
        "R5": "Inter-branch fund transfer",
        "R6": "Interest calculation",
        "R7": "Cheque-book processing",
        "R8": "Account transfer and bill payment",
        "R9": "Foreign currency exchange",
        "R10": "Account and transaction limits",
        "R11": "Validations",
    }
    clusters = [
        {"label": "simple", "weight": 1, "members": ["R1", "R7", "R9", "R10"]},
        {"label": "moderate", "weight": 2, "members": ["R4", "R5", "R6", "R8"]},
        {"label": "complex", "weight": 3, "members": ["R2", "R3", "R11"]},
    ]
    cluster_of = {m: c["label"] for c in clusters for m in c["members"]}
    return {
        "schema_version": 1,
        "rng_seed": 77,
        "requirements": [
            {
                "id": rid,
                "title": titles[rid],
                "cluster": cluster_of[rid],
                "estimated_hours": None,
                "origin": "new",
                "reimplemented": False,
            }
            for rid in sorted(titles, key=lambda r: int(r[1:]))
        ],
        "stakeholders": [{"id": f"S{i}", "name": f"Stakeholder {i}"} for i in range(1, 9)],
        "comparison": [list(map(float, row)) for row in BANKING_COMPARISON],
        "matrices": {
            "prio": [list(map(float, row)) for row in BANKING_PRIO],
            "value": [list(map(float, row)) for row in BANKING_VALUE],
            "value_scale_max": 5.0,
        },
        "constraints": {
            "precedence": [["R1", "R3"], ["R1", "R11"]],
            "coupling": [["R3", "R11"]],
        },
        "estimation": {
            "technical": [0, 4, 4, 2, 2, 1, 4, 1, 3, 3, 5, 5, 0],
            "environmental": [2, 2, 4, 4, 4, 4, 0, 0],
            "use_cases": {"simple": 4, "average": 4, "complex": 3},
            "actors": {"simple": 3, "average": 4, "complex": 1},
            "pf": 24,
            "clusters": clusters,
        },
        "optimizer": None,
        "iterations": [],
    }


def file_storage_problem(benefit_form: str = "literal", k_best: int = 10) -> PlanProblem:
    """Optimizer-level problem built straight from the file-storage tables."""
    cand = tuple(f"R{i}" for i in range(1, 8))
    return PlanProblem(
        candidates=cand,
        times=dict(FILE_STORAGE_TIMES),
        t_max=400.0,
        constraints=ConstraintSet(
            precedence=(("R1", "R2"), ("R1", "R3"), ("R1", "R6"), ("R1", "R7")),
            coupling=(("R3", "R4"),),
        ),
        matrices=RatingMatrices(
            prio=np.array(FILE_STORAGE_PRIO, dtype=float),
            value=np.array(FILE_STORAGE_VALUE, dtype=float),
            value_scale_max=5.0,
            lam=np.array(LAMBDA_FILE_STORAGE),
        ),
        fitness=FitnessConfig(benefit_form=benefit_form, k_best=k_best),
    )


FILE_STORAGE_UNIVERSE = [
    {"R1"},
    {"R5"},
    {"R1", "R2"},
    {"R1", "R5"},
    {"R1", "R6"},
    {"R1", "R7"},
    {"R1", "R2", "R6"},
    {"R1", "R2", "R7"},
    {"R1", "R6", "R7"},
]


@pytest.fixture
def file_storage_doc() -> dict:
    return copy.deepcopy(make_file_storage_doc())


@pytest.fixture
def banking_doc() -> dict:
    return copy.deepcopy(make_banking_doc())


_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def record_acceptance(name: str, passed: bool, note: str = "") -> None:
    _ACCEPTANCE_RESULTS.append((name, ("PASS" if passed else "FAIL") + (f" ({note})" if note else "")))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{status:<40} {name}")
