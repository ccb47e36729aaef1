"""Requirement-subset selection for the next release.

A candidate subset (chromosome) assigns each requirement to the current
increment (1) or the next one (2). Subsets must respect a time budget,
precedence pairs and coupling pairs. Valid subsets are scored by a penalty A
(stakeholder-weighted priority/assignment disagreements over requirement
pairs), a benefit B (stakeholder-weighted value-and-earliness products) and
the scalarized objective C(alpha) = (alpha - 1) * A + alpha * B, maximized.

Two search paths are provided: exhaustive enumeration (exact, capped at 25
candidates) and a seeded genetic search for larger problems. Both return the
same ranking on small instances, which the test suite checks.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, Sequence

import numpy as np

from relplan.model import ConstraintSet, Infeasible, RatingMatrices

MAX_EXHAUSTIVE_N = 25
GA_BRUTE_FALLBACK_N = 12

_CHUNK = 1 << 20

BENEFIT_FORMS = ("literal", "classic")


@dataclass(frozen=True)
class FitnessConfig:
    """Alpha grid, list size and benefit form for solution ranking.

    `literal` scores a requirement by (delta - value + 1); `classic` scores
    it by the value itself. `delta` defaults to the value scale maximum.
    """

    alphas: tuple[float, ...] = (0.3, 0.5, 0.7)
    k_best: int = 3
    benefit_form: str = "literal"
    delta: Optional[float] = None

    def __post_init__(self):
        if not self.alphas:
            raise ValueError("at least one alpha is required")
        if any(not (0 <= a <= 1) for a in self.alphas):
            raise ValueError(f"alphas must be in [0,1], got {self.alphas}")
        if tuple(sorted(self.alphas)) != tuple(self.alphas):
            raise ValueError("alphas must be sorted ascending")
        if not (1 <= self.k_best <= 10):
            raise ValueError(f"k_best must be in [1,10], got {self.k_best}")
        if self.benefit_form not in BENEFIT_FORMS:
            raise ValueError(f"benefit_form must be one of {BENEFIT_FORMS}, got {self.benefit_form!r}")


@dataclass(frozen=True)
class GaConfig:
    """Genetic search knobs; the 0.5 crossover/mutation rates are the
    conventional defaults for this problem family."""

    population_size: int = 64
    crossover_rate: float = 0.5
    mutation_rate: float = 0.5
    max_generations: int = 200
    stagnation_window: int = 25
    rng_seed: int = 0

    def __post_init__(self):
        if self.population_size < 4:
            raise ValueError(f"population_size must be >= 4, got {self.population_size}")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not (0 <= v <= 1):
                raise ValueError(f"{name} must be in [0,1], got {v}")
        if self.max_generations < 1:
            raise ValueError("max_generations must be >= 1")
        if self.stagnation_window < 1:
            raise ValueError("stagnation_window must be >= 1")


@dataclass(frozen=True)
class PlanProblem:
    """One iteration's selection problem, with feedback scaling already applied."""

    candidates: tuple[str, ...]
    times: dict[str, float]
    t_max: float
    constraints: ConstraintSet = ConstraintSet()
    matrices: RatingMatrices = field(
        default_factory=lambda: RatingMatrices(np.zeros((0, 0)), np.zeros((0, 0)))
    )
    fitness: FitnessConfig = FitnessConfig()

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("candidate set must not be empty")
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError("duplicate candidate ids")
        missing = [c for c in self.candidates if c not in self.times]
        if missing:
            raise ValueError(f"times missing for candidates: {missing}")
        if self.t_max <= 0:
            raise ValueError(f"t_max must be > 0, got {self.t_max}")
        q = self.matrices.prio.shape[0] if self.matrices.prio.ndim == 2 else 0
        n = len(self.candidates)
        for name, arr in (("prio", self.matrices.prio), ("value", self.matrices.value)):
            if arr.size and arr.shape != (q, n):
                raise ValueError(f"matrices.{name} must be {q}x{n}, got {arr.shape}")

    @property
    def n(self) -> int:
        return len(self.candidates)

    @cached_property
    def _scorer(self) -> "_Scorer":
        return _Scorer(self)


@dataclass(frozen=True)
class PlanSolution:
    """A constraint-valid subset with its fitness components."""

    selected: tuple[str, ...]
    omega: dict[str, int]
    total_hours: float
    penalty_a: float
    benefit_b: float
    objective: dict[float, float]
    bits: tuple[bool, ...]

    @property
    def best_objective(self) -> float:
        return max(self.objective.values())


class _Scorer:
    """Precomputed pair costs and per-candidate benefit factors.

    For an unordered pair (i, j) with per-stakeholder priority difference
    dp = prio_i - prio_j and increment difference dw = w_i - w_j, the pair
    penalty is 0 when the orderings agree (dp * dw > 0, or both zero),
    |dp| when dw = 0, |dw| when dp = 0, and |dp| * |dw| otherwise. With
    increments restricted to {1, 2}, the lambda-weighted pair cost collapses
    to three precomputable tables keyed by the pair's selection pattern.
    """

    def __init__(self, problem: PlanProblem):
        self.problem = problem
        n = problem.n
        self.n = n
        self.times = np.array([problem.times[c] for c in problem.candidates], dtype=float)
        idx = {c: i for i, c in enumerate(problem.candidates)}
        self.prec = tuple(
            (idx[a], idx[b]) for a, b in problem.constraints.precedence if a in idx and b in idx
        )
        self.coup = tuple(
            (idx[a], idx[b]) for a, b in problem.constraints.coupling if a in idx and b in idx
        )

        mat = problem.matrices
        lam = np.asarray(mat.lam, dtype=float)
        prio = np.asarray(mat.prio, dtype=float)
        value = np.asarray(mat.value, dtype=float)
        q = prio.shape[0] if prio.ndim == 2 and prio.size else 0
        if q == 0:
            prio = np.zeros((0, n))
            value = np.zeros((0, n))
            lam = np.zeros(0)

        dp = prio[:, :, None] - prio[:, None, :] if q else np.zeros((0, n, n))
        zero = dp == 0
        self.cost_same = np.tensordot(lam, np.abs(dp), axes=1) if q else np.zeros((n, n))
        self.cost_first_sel = (
            np.tensordot(lam, np.where(dp > 0, dp, 0.0) + zero, axes=1) if q else np.zeros((n, n))
        )
        self.cost_second_sel = (
            np.tensordot(lam, np.where(dp < 0, -dp, 0.0) + zero, axes=1) if q else np.zeros((n, n))
        )
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

        delta = problem.fitness.delta
        if delta is None:
            delta = mat.value_scale_max
        lam_sum = float(lam.sum()) if q else 0.0
        mean_value = lam @ value if q else np.zeros(n)
        if problem.fitness.benefit_form == "literal":
            self.factor = (delta + 1.0) * lam_sum - mean_value
        else:
            self.factor = mean_value.copy()
        self.factor_sum = float(self.factor.sum())
        self.alphas = problem.fitness.alphas

    # -- single-chromosome scoring ------------------------------------

    def total_time(self, bits: Sequence[bool]) -> float:
        total = 0.0
        for i, b in enumerate(bits):
            if b:
                total += float(self.times[i])
        return total

    def violations(self, bits: Sequence[bool]) -> list[str]:
        out = []
        if not any(bits):
            out.append("empty selection: at least one requirement must be chosen")
        total = self.total_time(bits)
        if total > self.problem.t_max:
            out.append(f"time budget exceeded: {total:g} > {self.problem.t_max:g}")
        cand = self.problem.candidates
        for i, j in self.prec:
            if bits[j] and not bits[i]:
                out.append(f"precedence violated: {cand[j]} selected without {cand[i]}")
        for i, j in self.coup:
            if bits[i] != bits[j]:
                out.append(f"coupling violated: {cand[i]} and {cand[j]} must ship together")
        return out

    def penalty(self, bits: Sequence[bool]) -> float:
        a = 0.0
        for i, j in self.pairs:
            bi, bj = bits[i], bits[j]
            if bi == bj:
                a += float(self.cost_same[i, j])
            elif bi:
                a += float(self.cost_first_sel[i, j])
            else:
                a += float(self.cost_second_sel[i, j])
        return a

    def benefit(self, bits: Sequence[bool]) -> float:
        tau = 1 if all(bits) else 2
        b = 0.0
        for i, bit in enumerate(bits):
            w = 1 if bit else 2
            b += float(self.factor[i]) * (tau - w + 1)
        return b

    def solution(self, bits: tuple[bool, ...]) -> PlanSolution:
        a = self.penalty(bits)
        b = self.benefit(bits)
        cand = self.problem.candidates
        return PlanSolution(
            selected=tuple(c for c, bit in zip(cand, bits) if bit),
            omega={c: (1 if bit else 2) for c, bit in zip(cand, bits)},
            total_hours=self.total_time(bits),
            penalty_a=a,
            benefit_b=b,
            objective={al: compute_objective(a, b, al) for al in self.alphas},
            bits=bits,
        )

    # -- mask helpers (bit i of the mask is candidate i) ----------------

    def mask_to_bits(self, mask: int) -> tuple[bool, ...]:
        return tuple(bool(mask >> i & 1) for i in range(self.n))

    def mask_feasible(self, mask: int) -> bool:
        if mask == 0:
            return False
        total = 0.0
        for i in range(self.n):
            if mask >> i & 1:
                total += float(self.times[i])
        if total > self.problem.t_max:
            return False
        for i, j in self.prec:
            if mask >> j & 1 and not mask >> i & 1:
                return False
        for i, j in self.coup:
            if (mask >> i & 1) != (mask >> j & 1):
                return False
        return True

    def iter_feasible_mask_chunks(self) -> Iterator[np.ndarray]:
        """Vectorized enumeration of all feasible non-empty subset masks."""
        n = self.n
        for lo in range(1, 1 << n, _CHUNK):
            hi = min(lo + _CHUNK, 1 << n)
            masks = np.arange(lo, hi, dtype=np.int64)
            total = np.zeros(len(masks), dtype=float)
            for i in range(n):
                total += self.times[i] * ((masks >> i) & 1)
            ok = total <= self.problem.t_max
            for i, j in self.prec:
                ok &= ~(((masks >> j) & 1).astype(bool) & ~((masks >> i) & 1).astype(bool))
            for i, j in self.coup:
                ok &= ((masks >> i) & 1) == ((masks >> j) & 1)
            yield masks[ok]

    def score_mask_array(self, masks: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Penalty, benefit and max-over-alpha objective for an array of masks.

        Performs the same float additions in the same order as the scalar
        path, so values agree bit for bit.
        """
        n = self.n
        bits = ((masks[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(bool)
        a = np.zeros(len(masks), dtype=float)
        for i, j in self.pairs:
            bi = bits[:, i]
            bj = bits[:, j]
            a += np.where(
                bi == bj,
                self.cost_same[i, j],
                np.where(bi, self.cost_first_sel[i, j], self.cost_second_sel[i, j]),
            )
        all_sel = bits.all(axis=1)
        b = np.zeros(len(masks), dtype=float)
        tau_sel = np.where(all_sel, 1.0, 2.0)
        for i in range(n):
            b += self.factor[i] * np.where(bits[:, i], tau_sel, 1.0)
        best = np.full(len(masks), -np.inf)
        for al in self.alphas:
            np.maximum(best, (al - 1.0) * a + al * b, out=best)
        return a, b, best

    def lex_keys(self, masks: np.ndarray) -> np.ndarray:
        """Integer keys whose ascending order equals bit-tuple lexicographic order."""
        n = self.n
        keys = np.zeros(len(masks), dtype=np.int64)
        for i in range(n):
            keys |= ((masks >> i) & 1) << (n - 1 - i)
        return keys

    def mask_lex_key(self, mask: int) -> int:
        return int(sum(((mask >> i) & 1) << (self.n - 1 - i) for i in range(self.n)))


def enumerate_subsets(n: int) -> Iterator[tuple[bool, ...]]:
    """All 2**n - 1 non-empty bit vectors, in ascending binary value.

    Bit i of the binary value corresponds to position i of the vector.
    """
    if not (1 <= n <= MAX_EXHAUSTIVE_N):
        raise ValueError(f"n must be in [1,{MAX_EXHAUSTIVE_N}] for exhaustive enumeration, got {n}")
    for mask in range(1, 1 << n):
        yield tuple(bool(mask >> i & 1) for i in range(n))


def check_constraints(bits: Sequence[bool], problem: PlanProblem) -> list[str]:
    """Violation messages for a chromosome; empty means valid.

    Checks the time budget, precedence pairs (a selected requirement's
    predecessor must be selected too), coupling pairs (both or neither),
    and that the selection is non-empty.
    """
    if len(bits) != problem.n:
        raise ValueError(f"chromosome length {len(bits)} does not match candidate count {problem.n}")
    return problem._scorer.violations(bits)


def compute_penalty(bits: Sequence[bool], problem: PlanProblem) -> float:
    """Aggregated penalty A >= 0 over unordered candidate pairs."""
    if len(bits) != problem.n:
        raise ValueError(f"chromosome length {len(bits)} does not match candidate count {problem.n}")
    return problem._scorer.penalty(bits)


def compute_benefit(bits: Sequence[bool], problem: PlanProblem) -> float:
    """Aggregated benefit B under the configured form."""
    if len(bits) != problem.n:
        raise ValueError(f"chromosome length {len(bits)} does not match candidate count {problem.n}")
    return problem._scorer.benefit(bits)


def compute_objective(a: float, b: float, alpha: float) -> float:
    """C(alpha) = (alpha - 1) * A + alpha * B."""
    if not (0 <= alpha <= 1):
        raise ValueError(f"alpha must be in [0,1], got {alpha}")
    return (alpha - 1.0) * a + alpha * b


def _ranked_masks(scorer: _Scorer, limit: Optional[int]) -> list[int]:
    """Masks of the best feasible subsets, ranked by max-over-alpha objective
    (ties: lexicographically smaller bit vector first)."""
    top: list[tuple[float, int, int]] = []
    for masks in scorer.iter_feasible_mask_chunks():
        if not len(masks):
            continue
        _, _, best = scorer.score_mask_array(masks)
        lex = scorer.lex_keys(masks)
        entries = zip((-best).tolist(), lex.tolist(), masks.tolist())
        if limit is None:
            top.extend(entries)
        else:
            top = heapq.nsmallest(limit, heapq.merge(sorted(top), sorted(entries)))
    top.sort()
    return [mask for _, _, mask in top]


def feasible_solutions(problem: PlanProblem) -> list[PlanSolution]:
    """Every constraint-valid subset, scored and ranked. Exhaustive; intended
    for small candidate sets (tests, case studies)."""
    if problem.n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive enumeration capped at n={MAX_EXHAUSTIVE_N}; use run_ga")
    scorer = problem._scorer
    return [scorer.solution(scorer.mask_to_bits(m)) for m in _ranked_masks(scorer, None)]


def brute_force_plan(problem: PlanProblem) -> list[PlanSolution]:
    """Exact top-k plan by exhaustive enumeration and constraint filtering."""
    if problem.n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive enumeration capped at n={MAX_EXHAUSTIVE_N}; use run_ga")
    scorer = problem._scorer
    masks = _ranked_masks(scorer, problem.fitness.k_best)
    return [scorer.solution(scorer.mask_to_bits(m)) for m in masks]


def count_feasible(problem: PlanProblem) -> tuple[int, int]:
    """(number of non-empty subsets, number of constraint-valid ones).

    Runs the same enumeration-and-filter pass brute_force_plan uses, without
    scoring; this is the workload the bench command measures.
    """
    if problem.n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive enumeration capped at n={MAX_EXHAUSTIVE_N}")
    scorer = problem._scorer
    feasible = sum(len(masks) for masks in scorer.iter_feasible_mask_chunks())
    return (1 << problem.n) - 1, int(feasible)


def min_feasible_hours(problem: PlanProblem) -> Optional[float]:
    """Smallest total hours over subsets valid under precedence/coupling only.

    This is the tightest budget that would make the problem feasible; None
    when even the structural constraints admit no subset. For candidate sets
    beyond the enumeration cap, falls back to the cheapest single time.
    """
    scorer = problem._scorer
    if problem.n > MAX_EXHAUSTIVE_N:
        return float(scorer.times.min())
    relaxed = PlanProblem(
        candidates=problem.candidates,
        times=problem.times,
        t_max=float(scorer.times.sum()) + 1.0,
        constraints=problem.constraints,
        matrices=problem.matrices,
        fitness=problem.fitness,
    )
    best: Optional[float] = None
    rs = relaxed._scorer
    for masks in rs.iter_feasible_mask_chunks():
        if not len(masks):
            continue
        total = np.zeros(len(masks), dtype=float)
        for i in range(rs.n):
            total += rs.times[i] * ((masks >> i) & 1)
        m = float(total.min())
        if best is None or m < best:
            best = m
    return best


def run_ga(problem: PlanProblem, ga: GaConfig) -> list[PlanSolution]:
    """Seeded genetic search over constraint-valid subsets.

    The population is initialized with distinct valid chromosomes (sampled
    from the full feasible set on small problems, rejection-sampled
    otherwise). Each generation breeds up to population_size // 2 offspring:
    with probability crossover_rate a single-point crossover of two parents
    drawn from the better half (otherwise a clone of one), then with
    probability mutation_rate a single uniform bit flip. Invalid offspring
    are discarded, survivors are merged and the population truncated by
    fitness. Stops at max_generations or after stagnation_window generations
    without improvement. Identical seeds give identical output.
    """
    scorer = problem._scorer
    n = problem.n
    rng = random.Random(ga.rng_seed)

    population: list[int]
    if n <= GA_BRUTE_FALLBACK_N:
        pool = [int(m) for masks in scorer.iter_feasible_mask_chunks() for m in masks.tolist()]
        if not pool:
            raise Infeasible("no valid chromosome exists for this problem")
        population = sorted(rng.sample(pool, min(ga.population_size, len(pool))))
    else:
        seen: set[int] = set()
        space = 1 << n
        attempts = max(20000, ga.population_size * 200)
        for _ in range(attempts):
            mask = rng.randrange(1, space)
            if mask in seen:
                continue
            if scorer.mask_feasible(mask):
                seen.add(mask)
                if len(seen) >= ga.population_size:
                    break
        if not seen:
            raise Infeasible(f"no valid chromosome found after {attempts} samples")
        population = sorted(seen)

    fitness_cache: dict[int, float] = {}

    def fit(mask: int) -> float:
        f = fitness_cache.get(mask)
        if f is None:
            bits = scorer.mask_to_bits(mask)
            a = scorer.penalty(bits)
            b = scorer.benefit(bits)
            f = max(compute_objective(a, b, al) for al in scorer.alphas)
            fitness_cache[mask] = f
        return f

    def sort_key(mask: int) -> tuple[float, int]:
        return (-fit(mask), scorer.mask_lex_key(mask))

    population.sort(key=sort_key)
    members = set(population)
    best_fit = fit(population[0])
    stagnation = 0
    brood = max(1, ga.population_size // 2)

    for _ in range(ga.max_generations):
        better = population[: max(2, len(population) // 2)] if len(population) > 1 else population
        inserts: list[int] = []
        for _ in range(brood):
            if len(better) >= 2 and rng.random() < ga.crossover_rate:
                p1, p2 = rng.sample(better, 2)
                point = rng.randrange(1, n) if n > 1 else 0
                low_mask = (1 << point) - 1
                child = (p1 & low_mask) | (p2 & ~low_mask)
            else:
                child = rng.choice(better)
            if rng.random() < ga.mutation_rate:
                child ^= 1 << rng.randrange(n)
            if child == 0 or child in members:
                continue
            if not scorer.mask_feasible(child):
                continue
            members.add(child)
            inserts.append(child)
        if inserts:
            population.extend(inserts)
            population.sort(key=sort_key)
            del population[ga.population_size:]
            members = set(population)
        top_fit = fit(population[0])
        if top_fit > best_fit:
            best_fit = top_fit
            stagnation = 0
        else:
            stagnation += 1
            if stagnation >= ga.stagnation_window:
                break

    winners = population[: problem.fitness.k_best]
    return [scorer.solution(scorer.mask_to_bits(m)) for m in winners]


def rank_for_alpha(solutions: Sequence[PlanSolution], alpha: float) -> list[PlanSolution]:
    """Solutions re-ranked by the objective at one specific alpha."""
    return sorted(solutions, key=lambda s: (-s.objective[alpha], s.bits))


def solution_to_json(sol: PlanSolution) -> dict:
    """Wire/file form of a ranked solution."""
    return {
        "selected": list(sol.selected),
        "total_hours": float(sol.total_hours),
        "A": float(sol.penalty_a),
        "B": float(sol.benefit_b),
        "objective_by_alpha": {str(a): float(v) for a, v in sol.objective.items()},
    }


def solution_from_json(data: dict, candidates: tuple[str, ...]) -> PlanSolution:
    selected = set(data["selected"])
    bits = tuple(c in selected for c in candidates)
    return PlanSolution(
        selected=tuple(c for c in candidates if c in selected),
        omega={c: (1 if c in selected else 2) for c in candidates},
        total_hours=float(data["total_hours"]),
        penalty_a=float(data["A"]),
        benefit_b=float(data["B"]),
        objective={float(a): float(v) for a, v in data["objective_by_alpha"].items()},
        bits=bits,
    )
