"""Command-line front door.

Subcommands: estimate (use-case-point breakdown and per-requirement times),
plan (rank subsets for the open iteration), feedback (score a release),
bench (enumeration cost vs. candidate count, CSV), serve (HTTP API).

Exit codes: 0 success, 1 validation problem, 2 infeasible plan, 3 I/O error.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import time
from dataclasses import replace
from pathlib import Path

from relplan import document
from relplan import estimation as est
from relplan.feedback import FeedbackConfig, ReleaseOutcome, compute_dt, compute_ff, compute_fr
from relplan.model import ConstraintSet, Infeasible, PlanningError
from relplan.optimizer import FitnessConfig, PlanProblem, count_feasible, solution_to_json
from relplan.planner import PlanRequest, plan_iteration

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3

BENCH_REPEAT_FLOOR_MS = 25.0


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SystemExit2(f"cannot read {path}: {exc}", EXIT_IO) from exc
    return document.loads(text)


class SystemExit2(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.message = message
        self.code = code


def cmd_estimate(args: argparse.Namespace) -> int:
    state = _load(args.project)
    e = state.estimation
    if e is None:
        raise SystemExit2("project has no estimation inputs", EXIT_VALIDATION)
    tcf = est.compute_tcf(e.technical)
    ecf = est.compute_ecf(e.environmental)
    uucp = est.compute_uucp(e.inventory)
    if uucp <= 0:
        raise SystemExit2("use case inventory is empty; nothing to estimate", EXIT_VALIDATION)
    total = est.compute_ucp(tcf, ecf, uucp, e.pf)
    print(f"TCF   {tcf:.4f}")
    print(f"ECF   {ecf:.4f}")
    print(f"UUCP  {uucp:g}")
    print(f"PF    {e.pf:g}")
    print(f"UCP   {total:.2f} hours (rounded: {round(total)})")
    unit = est.cluster_unit_times(total, e.clusters)
    print("cluster times:")
    for c in e.clusters:
        print(f"  {c.label:<10} weight {c.weight:g}  members {len(c.members)}  hours/requirement {unit[c.label]:.2f}")
    shares = est.distribute_time(total, e.clusters)
    print("requirement times:")
    for rid in state.requirement_ids:
        if rid in shares:
            print(f"  {rid:<10} {shares[rid]:.2f}")
    if args.write:
        reqs = tuple(
            replace(r, estimated_hours=shares.get(r.id, r.estimated_hours)) for r in state.requirements
        )
        document.save_project(replace(state, requirements=reqs), args.project)
        print(f"wrote estimates to {args.project}")
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    state = _load(args.project)
    if args.seed is not None:
        state = replace(state, rng_seed=args.seed)
    overrides = {}
    if args.k_best is not None:
        overrides["k_best"] = args.k_best
    if args.alpha:
        overrides["alphas"] = tuple(sorted(args.alpha))
    iteration = args.iteration if args.iteration is not None else state.current_index
    request = PlanRequest(iteration=iteration, t_max=args.t_max, fitness_overrides=overrides or None)
    state = plan_iteration(state, request)
    record = next(it for it in state.iterations if it.index == iteration)
    alphas = sorted(record.solutions[0].objective) if record.solutions else []
    header = f"{'#':>2}  {'selected':<28}{'hours':>9}{'A':>10}{'B':>10}" + "".join(
        f"{'C(' + format(a, 'g') + ')':>10}" for a in alphas
    )
    print(f"iteration {iteration}  t_max {args.t_max:g}  ff {record.ff_applied:g}")
    print(header)
    for i, sol in enumerate(record.solutions):
        row = f"{i:>2}  {','.join(sol.selected):<28}{sol.total_hours:>9.1f}{sol.penalty_a:>10.3f}{sol.benefit_b:>10.3f}"
        row += "".join(f"{sol.objective[a]:>10.3f}" for a in alphas)
        print(row)
    if args.json:
        import json as _json

        payload = [solution_to_json(s) for s in record.solutions]
        Path(args.json).write_text(_json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {len(payload)} solutions to {args.json}")
    if args.write:
        document.save_project(state, args.project)
        print(f"wrote plan to {args.project}")
    return EXIT_OK


def cmd_feedback(args: argparse.Namespace) -> int:
    dt = compute_dt(args.actual, args.estimated)
    fr = compute_fr(args.failed, args.implemented)
    outcome = ReleaseOutcome(
        actual_hours=args.actual,
        estimated_hours=args.estimated,
        failed_count=args.failed,
        implemented_count=args.implemented,
        user_perception=args.up,
    )
    ff = compute_ff(outcome, FeedbackConfig())
    print(f"dT {dt:.4f}")
    print(f"FR {fr:.4f}")
    print(f"FF {ff:.4f}")
    return EXIT_OK


def _bench_problem(n: int, rng: random.Random) -> PlanProblem:
    """Synthetic instance: integer-hour times, a budget near 30% of total,
    and sparse precedence/coupling pairs."""
    candidates = tuple(f"R{i + 1}" for i in range(n))
    times = {c: float(rng.randint(10, 120)) for c in candidates}
    precedence = []
    coupling = []
    for _ in range(max(1, n // 4)):
        a, b = rng.sample(range(n), 2)
        if a < b:
            precedence.append((candidates[a], candidates[b]))
    for _ in range(max(1, n // 8)):
        a, b = rng.sample(range(n), 2)
        coupling.append((candidates[min(a, b)], candidates[max(a, b)]))
    t_max = 0.3 * sum(times.values())
    return PlanProblem(
        candidates=candidates,
        times=times,
        t_max=t_max,
        constraints=ConstraintSet(precedence=tuple(precedence), coupling=tuple(coupling)),
        fitness=FitnessConfig(),
    )


def cmd_bench(args: argparse.Namespace) -> int:
    if not (1 <= args.n_min <= args.n_max <= 25):
        raise SystemExit2("bench range must satisfy 1 <= n-min <= n-max <= 25", EXIT_VALIDATION)
    lines = ["n,subsets,feasible,millis"]
    for n in range(args.n_min, args.n_max + 1):
        problem = _bench_problem(n, random.Random(args.seed + n))
        runs = 0
        elapsed = 0.0
        subsets = feasible = 0
        # repeat to a time floor (and at least 3 runs) so small-n means are stable
        while True:
            start = time.perf_counter()
            subsets, feasible = count_feasible(problem)
            elapsed += (time.perf_counter() - start) * 1000.0
            runs += 1
            if (elapsed >= BENCH_REPEAT_FLOOR_MS and runs >= 3) or runs >= 200:
                break
        millis = elapsed / runs
        lines.append(f"{n},{subsets},{feasible},{millis:.3f}")
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        try:
            Path(args.out).write_text(csv_text, encoding="utf-8")
        except OSError as exc:
            raise SystemExit2(f"cannot write {args.out}: {exc}", EXIT_IO) from exc
        print(f"wrote {args.out}")
    else:
        print(csv_text, end="")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from relplan.service import create_app

    addr = args.addr or os.environ.get("RELPLAN_ADDR", "127.0.0.1:8000")
    data_dir = args.data_dir or os.environ.get("RELPLAN_DATA_DIR", "./relplan-data")
    host, sep, port_text = addr.rpartition(":")
    if not sep or not port_text.isdigit():
        raise SystemExit2(f"bad address {addr!r}: expected HOST:PORT", EXIT_VALIDATION)
    ui_dir = args.ui_dir or os.environ.get("RELPLAN_UI_DIR")
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(data_dir, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    except (OSError, SystemExit) as exc:
        raise SystemExit2(f"server failed to start on {addr}: {exc}", EXIT_IO) from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="print the effort breakdown and per-requirement times")
    p.add_argument("project", help="project JSON file")
    p.add_argument("--write", action="store_true", help="persist the estimates into the project file")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("plan", help="rank requirement subsets for the open iteration")
    p.add_argument("project", help="project JSON file")
    p.add_argument("--t-max", type=float, required=True, help="deadline budget in hours")
    p.add_argument("--seed", type=int, default=None, help="override the project RNG seed")
    p.add_argument("--k-best", type=int, default=None, help="number of ranked solutions (1..10)")
    p.add_argument("--alpha", type=float, action="append", help="objective alpha, repeatable")
    p.add_argument("--iteration", type=int, default=None, help="iteration index (default: the open one)")
    p.add_argument("--json", default=None, help="write the ranked solutions to this JSON file")
    p.add_argument("--write", action="store_true", help="persist the plan into the project file")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("feedback", help="compute dT, FR and the feedback factor for a release")
    p.add_argument("--actual", type=float, required=True)
    p.add_argument("--estimated", type=float, required=True)
    p.add_argument("--failed", type=int, required=True)
    p.add_argument("--implemented", type=int, required=True)
    p.add_argument("--up", type=float, required=True, help="user perception in [0,1]")
    p.set_defaults(func=cmd_feedback)

    p = sub.add_parser("bench", help="CSV of exhaustive enumeration+filter cost per candidate count")
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    p.add_argument("--seed", type=int, default=1, help="instance generator seed")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP API until interrupted")
    p.add_argument("--addr", default=None, help="bind address HOST:PORT (env RELPLAN_ADDR)")
    p.add_argument("--data-dir", default=None, help="project storage directory (env RELPLAN_DATA_DIR)")
    p.add_argument("--ui-dir", default=None, help="static UI directory to serve at / (env RELPLAN_UI_DIR)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.code
    except Infeasible as exc:
        print(f"infeasible: {exc.message}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except PlanningError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
